#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace latcorr::quad {

struct Rule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre rule of the given order (cached, thread safe).
const Rule& gauss_legendre(std::size_t order);

/// log(sum(exp(v))) without overflow; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> v);
double log_add_exp(double a, double b);

/// Integral of f over the real line.
///
/// The line is mapped onto (-1, 1) with z = t / (1 - t^2) and covered with
/// composite Gauss-Legendre panels; the panel count doubles until two
/// successive estimates agree to `rel_tol`.
double integrate_real_line(const std::function<double(double)>& f, double rel_tol = 1e-10);

/// Integral of f over [lo, hi] with composite Gauss-Legendre panels refined
/// by halving until successive estimates agree to `rel_tol`.
double integrate_interval(const std::function<double(double)>& f, double lo, double hi,
                          double rel_tol = 1e-12);

struct LogIntegral {
    double log_value = 0.0;
    double mode = 0.0;
    double scale = 0.0;
    std::size_t evaluations = 0;
    std::size_t panels = 0;
};

struct PeakHint {
    double center = 0.0;
    double scale = 1.0;
};

/// log of the integral over the real line of exp(log_f(z)), where exp(log_f)
/// is unimodal and possibly sharply peaked.
///
/// The mode is located starting from `hint.center` (steps of `hint.scale`),
/// the local width is read from the curvature at the mode, and Gauss-Legendre
/// panels are laid out from the mode outwards, doubling in width, until a
/// panel adds less than `tail_rel` of the running total. Every point in
/// `breakpoints` becomes a panel edge. Accumulation is log-sum-exp.
LogIntegral log_integrate_peaked(const std::function<double(double)>& log_f, PeakHint hint,
                                 std::span<const double> breakpoints = {},
                                 double tail_rel = 1e-16);

} // namespace latcorr::quad
