#pragma once

#include "latcorr/dist.hpp"
#include "latcorr/model.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace latcorr {

// Notation used throughout this header, for a correlation value a:
//   c_a    = sqrt(a / (1 - a))
//   F_n(z) = abar log(1 - G(-c_a z)) + (1 - abar) log G(-c_a z)
// so that L_n(a) = integral of exp(n F_n(z)) gamma(z + tau / sqrt(a)) dz.

/// Quantities of the Laplace expansion of L_n(a) around the maximizer of F_n.
struct LikelihoodContext {
    double a = 0.0;
    double abar = 0.0;
    double c_a = 0.0;
    double z_star = 0.0;         // argmax of F_n
    double fn_at_zstar = 0.0;    // abar log abar + (1 - abar) log(1 - abar)
    double fn2_at_zstar = 0.0;   // -c_a^2 p(G^-1(1 - abar))^2 / (abar (1 - abar))

    /// Requires a and abar in (0, 1); abar in {0, 1} raises DomainError.
    static LikelihoodContext make(double a, double abar, const StandardizedDistribution& noise);
};

double fn_value(double a, double abar, const StandardizedDistribution& noise, double z);
double fn_d1(double a, double abar, const StandardizedDistribution& noise, double z);
double fn_d2(double a, double abar, const StandardizedDistribution& noise, double z);
/// Third derivative by a central difference of the analytic second derivative.
double fn_d3(double a, double abar, const StandardizedDistribution& noise, double z);

struct LogLikelihood {
    double value = 0.0;
    /// All observations equal: F_n has no interior maximum, value is still
    /// the exact integral (dominated by one tail of the factor).
    bool degenerate = false;
};

/// log L_n(a) for any binary sequence of length n with k ones.
///
/// a = 0 gives the independent-Bernoulli value; a must be below 1.
LogLikelihood log_marginal(double a, std::size_t n, std::size_t k, const ModelConfig& cfg);

LogLikelihood log_likelihood(double a, const BinarySample& sample, const ModelConfig& cfg);

/// log-likelihood of a trinary sample under breakpoints cfg.tau1 < cfg.tau2.
double trinary_log_likelihood(double a, const TrinarySample& sample, const ModelConfig& cfg);

/// L_n(a) exp(-n [abar log abar + (1 - abar) log(1 - abar)]), kept in the log
/// domain until the final exponentiation. Requires 0 < abar < 1.
double scaled_likelihood(double a, const BinarySample& sample, const ModelConfig& cfg);

/// First-order limit of n^-1 log L_n(a) given Y = y (constant in a):
/// q log q + (1 - q) log(1 - q) with q = 1 - G((tau - sqrt(a*) y) / sqrt(1 - a*)).
double prop1_limit(double a_star, double y, double tau, const StandardizedDistribution& noise);

/// Second-order limit of scaled_likelihood given Y = y.
double prop2_limit(double a, double a_star, double y, double tau, std::size_t n,
                   const StandardizedDistribution& noise, const StandardizedDistribution& factor);

/// log q_k, k = 0..n, where q_k is the probability of any one binary
/// sequence with k ones. Throws NumericError if sum_k C(n,k) q_k misses 1
/// by more than 1e-8.
std::vector<double> exchangeable_outcome_logprobs(double a, std::size_t n, const ModelConfig& cfg);

/// KL(pr_a1 || pr_a2) between the laws of (A_1..A_n), computed exactly
/// through the k-reduction.
double kl_divergence(double a1, double a2, std::size_t n, const ModelConfig& cfg);

double log_binomial(std::size_t n, std::size_t k);

struct Curve {
    std::vector<double> grid;
    std::vector<double> values;
    std::string kind;   // loglik | scaled-lik | limit-loglik | limit-scaled | trinary-loglik ...
    std::size_t n = 0;
    std::uint64_t seed = 0;

    /// Throws DomainError unless sizes match and the grid strictly increases.
    void validate() const;
};

/// values[j] = n^-1 log L_n(grid[j]); grid must lie in [0, 1).
Curve normalized_loglik_curve(const BinarySample& sample, const ModelConfig& cfg,
                              const std::vector<double>& grid, std::uint64_t seed = 0);
/// values[j] = scaled_likelihood(grid[j]); grid must lie in (0, 1).
Curve scaled_likelihood_curve(const BinarySample& sample, const ModelConfig& cfg,
                              const std::vector<double>& grid, std::uint64_t seed = 0);
/// values[j] = n^-1 trinary_log_likelihood(grid[j]).
Curve trinary_loglik_curve(const TrinarySample& sample, const ModelConfig& cfg,
                           const std::vector<double>& grid, std::uint64_t seed = 0);

/// Columns a,value,kind,n,seed.
void write_curves_csv(std::ostream& os, const std::vector<Curve>& curves);

/// Evenly spaced grid lo, lo + step, ... up to hi (inclusive within 1e-9).
std::vector<double> make_grid(double lo, double hi, double step);

} // namespace latcorr
