#include "latcorr/quadrature.hpp"

#include "latcorr/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace latcorr::quad {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Rule compute_rule(std::size_t order) {
    Rule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const std::size_t half = (order + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(order) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= order; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    if (order == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 2.0;
    }
    return rule;
}

constexpr std::size_t kPanelOrder = 20;

// Sum over one panel of w_i f(x_i), plus the same for |f|.
template <class F>
std::pair<double, double> panel_sum(const F& f, double lo, double hi, const Rule& rule) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double s = 0.0;
    double sa = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double v = f(mid + half * rule.nodes[i]);
        s += rule.weights[i] * v;
        sa += rule.weights[i] * std::abs(v);
    }
    return {s * half, sa * half};
}

template <class F>
double refine_by_halving(const F& f, double lo, double hi, double rel_tol, const char* what) {
    const Rule& rule = gauss_legendre(kPanelOrder);
    auto estimate = [&](std::size_t panels) {
        const double width = (hi - lo) / static_cast<double>(panels);
        double s = 0.0;
        double sa = 0.0;
        for (std::size_t p = 0; p < panels; ++p) {
            const auto [v, va] = panel_sum(f, lo + p * width, lo + (p + 1) * width, rule);
            s += v;
            sa += va;
        }
        return std::pair{s, sa};
    };
    auto [prev, prev_abs] = estimate(4);
    for (std::size_t panels = 8; panels <= (std::size_t{1} << 16); panels *= 2) {
        const auto [cur, cur_abs] = estimate(panels);
        if (!std::isfinite(cur)) {
            throw NumericError(std::string(what) + ": non-finite integrand");
        }
        // Relative to the integral of |f| so that vanishing integrals (odd
        // moments of symmetric laws) still converge.
        if (std::abs(cur - prev) <= rel_tol * std::max(std::abs(cur), cur_abs)) return cur;
        prev = cur;
        prev_abs = cur_abs;
    }
    throw NumericError(std::string(what) + ": no convergence after 65536 panels");
}

} // namespace

const Rule& gauss_legendre(std::size_t order) {
    static std::mutex mutex;
    static std::map<std::size_t, Rule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_rule(order)).first;
    return it->second;
}

double log_sum_exp(std::span<const double> v) {
    double m = kNegInf;
    for (double x : v) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    if (m == std::numeric_limits<double>::infinity()) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

double log_add_exp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b == kNegInf) return a;
    return a + std::log1p(std::exp(b - a));
}

double integrate_real_line(const std::function<double(double)>& f, double rel_tol) {
    auto mapped = [&f](double t) {
        const double one_minus = 1.0 - t * t;
        const double z = t / one_minus;
        const double v = f(z);
        if (v == 0.0) return 0.0;
        return v * (1.0 + t * t) / (one_minus * one_minus);
    };
    return refine_by_halving(mapped, -1.0, 1.0, rel_tol, "integrate_real_line");
}

double integrate_interval(const std::function<double(double)>& f, double lo, double hi,
                          double rel_tol) {
    if (!(lo < hi)) throw DomainError("integrate_interval: need lo < hi");
    return refine_by_halving(f, lo, hi, rel_tol, "integrate_interval");
}

namespace {

struct PeakedIntegrator {
    const std::function<double(double)>& log_f;
    std::span<const double> breakpoints;
    std::size_t evaluations = 0;
    std::size_t panels = 0;

    double eval(double z) {
        ++evaluations;
        const double v = log_f(z);
        if (std::isnan(v)) {
            throw NumericError("log_integrate_peaked: NaN log-integrand at z = " +
                               std::to_string(z));
        }
        return v;
    }

    double find_mode(double z0, double s) {
        double f0 = eval(z0);
        if (f0 == kNegInf) {
            // Walk outwards until the integrand is visible.
            bool found = false;
            for (double step = s; step < 1e12 * s && !found; step *= 2.0) {
                for (double cand : {z0 - step, z0 + step}) {
                    const double fc = eval(cand);
                    if (fc > kNegInf) {
                        z0 = cand;
                        f0 = fc;
                        found = true;
                        break;
                    }
                }
            }
            if (!found) throw NumericError("log_integrate_peaked: integrand vanishes");
        }
        const double fr = eval(z0 + s);
        const double fl = eval(z0 - s);
        double lo = z0 - s;
        double hi = z0 + s;
        if (fr > f0 || fl > f0) {
            const double dir = fr > fl ? 1.0 : -1.0;
            double a = z0;
            double b = z0 + dir * s;
            double fb = std::max(fr, fl);
            double step = s;
            int iter = 0;
            while (true) {
                if (++iter > 200) throw NumericError("log_integrate_peaked: mode not bracketed");
                step *= 2.0;
                const double c = b + dir * step;
                const double fc = eval(c);
                if (fc <= fb) {
                    lo = std::min(a, c);
                    hi = std::max(a, c);
                    break;
                }
                a = b;
                b = c;
                fb = fc;
            }
        }
        // Golden section on [lo, hi].
        constexpr double r = 0.6180339887498949;
        double x1 = hi - r * (hi - lo);
        double x2 = lo + r * (hi - lo);
        double f1 = eval(x1);
        double f2 = eval(x2);
        const double tol = 1e-7 * s;
        while (hi - lo > tol) {
            if (f1 < f2) {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + r * (hi - lo);
                f2 = eval(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - r * (hi - lo);
                f1 = eval(x1);
            }
        }
        return f1 > f2 ? x1 : x2;
    }

    double local_scale(double mode, double s) {
        const double fm = eval(mode);
        double d = s;
        double scale = s;
        for (int i = 0; i < 6; ++i) {
            const double h2 = (eval(mode + d) - 2.0 * fm + eval(mode - d)) / (d * d);
            if (!(h2 < 0.0) || !std::isfinite(h2)) break;
            scale = 1.0 / std::sqrt(-h2);
            if (scale > 0.25 * d && scale < 4.0 * d) break;
            d = scale;
        }
        return scale;
    }

    // log of the integral over [lo, hi], split at interior breakpoints.
    double panel(double lo, double hi) {
        const Rule& rule = gauss_legendre(kPanelOrder);
        std::vector<double> edges{lo};
        for (double b : breakpoints) {
            if (b > lo && b < hi) edges.push_back(b);
        }
        edges.push_back(hi);
        std::vector<double> terms;
        terms.reserve(rule.nodes.size() * (edges.size() - 1));
        for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
            const double half = 0.5 * (edges[e + 1] - edges[e]);
            const double mid = 0.5 * (edges[e + 1] + edges[e]);
            if (!(half > 0.0)) continue;
            const double log_half = std::log(half);
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                terms.push_back(std::log(rule.weights[i]) + log_half +
                                eval(mid + half * rule.nodes[i]));
            }
            ++panels;
        }
        return log_sum_exp(terms);
    }
};

} // namespace

LogIntegral log_integrate_peaked(const std::function<double(double)>& log_f, PeakHint hint,
                                 std::span<const double> breakpoints, double tail_rel) {
    PeakedIntegrator q{log_f, breakpoints};
    double s = hint.scale;
    if (!(s > 0.0) || !std::isfinite(s)) s = 1.0;
    const double center = std::isfinite(hint.center) ? hint.center : 0.0;

    const double mode = q.find_mode(center, s);
    const double scale = q.local_scale(mode, s);

    constexpr int kCoreHalfWidth = 8;
    double total = kNegInf;
    for (int p = -kCoreHalfWidth; p < kCoreHalfWidth; ++p) {
        total = log_add_exp(total, q.panel(mode + p * scale, mode + (p + 1) * scale));
    }
    const double log_tail = std::log(tail_rel);
    for (double dir : {-1.0, 1.0}) {
        double edge = mode + dir * kCoreHalfWidth * scale;
        double f_edge = q.eval(edge);
        double width = scale;
        bool done = false;
        for (int p = 0; p < 1100 && !done; ++p) {
            const double next = edge + dir * width;
            const double lp = dir > 0 ? q.panel(edge, next) : q.panel(next, edge);
            total = log_add_exp(total, lp);
            const double f_next = q.eval(next);
            if ((lp == kNegInf || lp < total + log_tail) && f_next <= f_edge) done = true;
            edge = next;
            f_edge = f_next;
            if (!std::isfinite(edge)) break;
            width *= 2.0;
        }
        if (!done) {
            throw NumericError("log_integrate_peaked: tail did not decay (mode " +
                               std::to_string(mode) + ", scale " + std::to_string(scale) + ")");
        }
    }
    return {total, mode, scale, q.evaluations, q.panels};
}

} // namespace latcorr::quad
