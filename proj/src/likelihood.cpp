#include "latcorr/likelihood.hpp"

#include "latcorr/error.hpp"
#include "latcorr/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace latcorr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_open_unit(double v, const char* what) {
    if (!(v > 0.0 && v < 1.0)) throw DomainError(std::string(what) + " must lie in (0, 1)");
}

double c_of(double a) { return std::sqrt(a / (1.0 - a)); }

// k * log(v) that treats 0 * (-inf) as 0.
double weighted(double count, double log_v) { return count == 0.0 ? 0.0 : count * log_v; }

} // namespace

LikelihoodContext LikelihoodContext::make(double a, double abar,
                                          const StandardizedDistribution& noise) {
    require_open_unit(a, "a");
    if (!(abar > 0.0 && abar < 1.0)) {
        throw DomainError("degenerate frequency: abar must lie strictly inside (0, 1)");
    }
    LikelihoodContext ctx;
    ctx.a = a;
    ctx.abar = abar;
    ctx.c_a = c_of(a);
    const double q = noise.quantile(1.0 - abar);
    ctx.z_star = -q / ctx.c_a;
    ctx.fn_at_zstar = abar * std::log(abar) + (1.0 - abar) * std::log1p(-abar);
    const double p = noise.pdf(q);
    ctx.fn2_at_zstar = -ctx.c_a * ctx.c_a * p * p / (abar * (1.0 - abar));
    return ctx;
}

double fn_value(double a, double abar, const StandardizedDistribution& noise, double z) {
    const double u = -c_of(a) * z;
    return weighted(abar, noise.log_ccdf(u)) + weighted(1.0 - abar, noise.log_cdf(u));
}

double fn_d1(double a, double abar, const StandardizedDistribution& noise, double z) {
    const double c = c_of(a);
    const double u = -c * z;
    const double p = noise.pdf(u);
    return c * p * (abar / noise.ccdf(u) - (1.0 - abar) / noise.cdf(u));
}

double fn_d2(double a, double abar, const StandardizedDistribution& noise, double z) {
    // F_n(z) = g(-c z) with g(u) = abar log(1 - G(u)) + (1 - abar) log G(u).
    const double c = c_of(a);
    const double u = -c * z;
    const double p = noise.pdf(u);
    const double dp = noise.pdf_deriv(u);
    const double s = noise.ccdf(u);
    const double g = noise.cdf(u);
    const double upper = -abar * (dp * s + p * p) / (s * s);
    const double lower = (1.0 - abar) * (dp * g - p * p) / (g * g);
    return c * c * (upper + lower);
}

double fn_d3(double a, double abar, const StandardizedDistribution& noise, double z) {
    const double h = 1e-4 * std::max(1.0, std::abs(z));
    return (fn_d2(a, abar, noise, z + h) - fn_d2(a, abar, noise, z - h)) / (2.0 * h);
}

LogLikelihood log_marginal(double a, std::size_t n, std::size_t k, const ModelConfig& cfg) {
    if (n == 0) throw DomainError("log_marginal: empty sample");
    if (k > n) throw DomainError("log_marginal: more ones than observations");
    if (!(a >= 0.0 && a < 1.0)) throw DomainError("log_marginal: a must lie in [0, 1)");
    const auto& noise = cfg.noise;
    const auto& factor = cfg.factor;
    const double ones = static_cast<double>(k);
    const double zeros = static_cast<double>(n - k);
    const bool degenerate = k == 0 || k == n;

    if (a == 0.0) {
        return {weighted(ones, noise.log_ccdf(cfg.tau)) + weighted(zeros, noise.log_cdf(cfg.tau)),
                degenerate};
    }

    const double c = c_of(a);
    const double shift = cfg.tau / std::sqrt(a);
    auto log_integrand = [&](double z) {
        const double u = -c * z;
        const double w = z + shift;
        if (!std::isfinite(u) || !std::isfinite(w)) return kNegInf;
        double v = factor.log_pdf(w);
        if (k > 0) v += ones * noise.log_ccdf(u);
        if (k < n) v += zeros * noise.log_cdf(u);
        return v;
    };

    quad::PeakHint hint;
    if (!degenerate) {
        const auto ctx = LikelihoodContext::make(a, ones / static_cast<double>(n), noise);
        hint.center = ctx.z_star;
        hint.scale = 1.0 / std::sqrt(-static_cast<double>(n) * ctx.fn2_at_zstar);
    } else {
        hint.center = -shift;
        hint.scale = 1.0;
    }

    std::vector<double> breaks;
    for (double kink : noise.kinks()) breaks.push_back(-kink / c);
    for (double kink : factor.kinks()) breaks.push_back(kink - shift);

    const auto r = quad::log_integrate_peaked(log_integrand, hint, breaks);
    return {r.log_value, degenerate};
}

LogLikelihood log_likelihood(double a, const BinarySample& sample, const ModelConfig& cfg) {
    return log_marginal(a, sample.size(), sample.ones(), cfg);
}

double trinary_log_likelihood(double a, const TrinarySample& sample, const ModelConfig& cfg) {
    const std::size_t n = sample.size();
    if (n == 0) throw DomainError("trinary_log_likelihood: empty sample");
    if (!(a >= 0.0 && a < 1.0)) throw DomainError("trinary_log_likelihood: a must lie in [0, 1)");
    if (!(cfg.tau1 < cfg.tau2)) throw DomainError("trinary_log_likelihood: need tau1 < tau2");
    const auto& noise = cfg.noise;
    const double k1 = static_cast<double>(sample.count(1));
    const double k2 = static_cast<double>(sample.count(2));
    const double k3 = static_cast<double>(sample.count(3));

    // log(G(u2) - G(u1)) taking the difference on the tail with less cancellation.
    auto log_middle = [&](double u1, double u2) {
        const double diff = u1 >= 0.0 ? noise.ccdf(u1) - noise.ccdf(u2) : noise.cdf(u2) - noise.cdf(u1);
        return diff > 0.0 ? std::log(diff) : kNegInf;
    };

    if (a == 0.0) {
        return weighted(k1, noise.log_cdf(cfg.tau1)) + weighted(k2, log_middle(cfg.tau1, cfg.tau2)) +
               weighted(k3, noise.log_ccdf(cfg.tau2));
    }

    const double sa = std::sqrt(a);
    const double sb = std::sqrt(1.0 - a);
    auto log_integrand = [&](double w) {
        const double u1 = (cfg.tau1 - sa * w) / sb;
        const double u2 = (cfg.tau2 - sa * w) / sb;
        if (!std::isfinite(u1) || !std::isfinite(u2)) return kNegInf;
        double v = cfg.factor.log_pdf(w);
        if (k1 > 0) v += k1 * noise.log_cdf(u1);
        if (k2 > 0) v += k2 * log_middle(u1, u2);
        if (k3 > 0) v += k3 * noise.log_ccdf(u2);
        return v;
    };

    quad::PeakHint hint;
    const double f1 = k1 / static_cast<double>(n);
    hint.center = (f1 > 0.0 && f1 < 1.0) ? (cfg.tau1 - sb * noise.quantile(f1)) / sa : 0.0;
    hint.scale = std::min(1.0, 2.0 * sb / (sa * std::sqrt(static_cast<double>(n))));

    std::vector<double> breaks;
    for (double kink : noise.kinks()) {
        breaks.push_back((cfg.tau1 - sb * kink) / sa);
        breaks.push_back((cfg.tau2 - sb * kink) / sa);
    }
    for (double kink : cfg.factor.kinks()) breaks.push_back(kink);
    std::sort(breaks.begin(), breaks.end());
    return quad::log_integrate_peaked(log_integrand, hint, breaks).log_value;
}

double scaled_likelihood(double a, const BinarySample& sample, const ModelConfig& cfg) {
    require_open_unit(a, "a");
    if (sample.degenerate()) {
        throw DomainError("scaled_likelihood: degenerate sample (all observations equal)");
    }
    const auto ctx = LikelihoodContext::make(a, sample.abar(), cfg.noise);
    const double ll = log_likelihood(a, sample, cfg).value;
    return std::exp(ll - static_cast<double>(sample.size()) * ctx.fn_at_zstar);
}

double prop1_limit(double a_star, double y, double tau, const StandardizedDistribution& noise) {
    require_open_unit(a_star, "a_star");
    const double u = (tau - std::sqrt(a_star) * y) / std::sqrt(1.0 - a_star);
    const double q = noise.ccdf(u);
    const double r = noise.cdf(u);
    return weighted(q, noise.log_ccdf(u)) + weighted(r, noise.log_cdf(u));
}

double prop2_limit(double a, double a_star, double y, double tau, std::size_t n,
                   const StandardizedDistribution& noise, const StandardizedDistribution& factor) {
    require_open_unit(a, "a");
    require_open_unit(a_star, "a_star");
    if (n == 0) throw DomainError("prop2_limit: n must be at least 1");
    const double u = (tau - std::sqrt(a_star) * y) / std::sqrt(1.0 - a_star);
    const double arg = std::sqrt((1.0 - a) * a_star / ((1.0 - a_star) * a)) * y +
                       (std::sqrt(1.0 - a_star) - std::sqrt(1.0 - a)) * tau / std::sqrt(a * (1.0 - a_star));
    const double p = noise.pdf(u);
    const double spread = 2.0 * std::numbers::pi * noise.ccdf(u) * noise.cdf(u) /
                          (static_cast<double>(n) * p * p);
    return std::sqrt((1.0 - a) / a) * factor.pdf(arg) * std::sqrt(spread);
}

double log_binomial(std::size_t n, std::size_t k) {
    if (k > n) throw DomainError("log_binomial: k > n");
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

std::vector<double> exchangeable_outcome_logprobs(double a, std::size_t n, const ModelConfig& cfg) {
    if (n == 0) throw DomainError("exchangeable_outcome_logprobs: n must be at least 1");
    std::vector<double> logq(n + 1);
    std::vector<double> terms(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        logq[k] = log_marginal(a, n, k, cfg).value;
        terms[k] = log_binomial(n, k) + logq[k];
    }
    const double log_total = quad::log_sum_exp(terms);
    if (!(std::abs(std::expm1(log_total)) <= 1e-8)) {
        std::ostringstream os;
        os << "exchangeable_outcome_logprobs: probabilities sum to " << std::exp(log_total)
           << " (a = " << a << ", n = " << n << ")";
        throw NumericError(os.str());
    }
    return logq;
}

double kl_divergence(double a1, double a2, std::size_t n, const ModelConfig& cfg) {
    require_open_unit(a1, "a1");
    require_open_unit(a2, "a2");
    if (a1 == a2) return 0.0;
    const auto lq1 = exchangeable_outcome_logprobs(a1, n, cfg);
    const auto lq2 = exchangeable_outcome_logprobs(a2, n, cfg);
    double kl = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double w = std::exp(log_binomial(n, k) + lq1[k]);
        if (w > 0.0) kl += w * (lq1[k] - lq2[k]);
    }
    return std::max(kl, 0.0);
}

void Curve::validate() const {
    if (grid.size() != values.size()) throw DomainError("curve: grid and values differ in length");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw DomainError("curve: grid must be strictly increasing");
    }
}

namespace {

void check_grid(const std::vector<double>& grid, bool allow_zero) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double a = grid[i];
        if (!((allow_zero ? a >= 0.0 : a > 0.0) && a < 1.0)) {
            throw DomainError("curve grid point outside the admissible range");
        }
        if (i > 0 && !(a > grid[i - 1])) throw DomainError("curve grid must be strictly increasing");
    }
}

} // namespace

Curve normalized_loglik_curve(const BinarySample& sample, const ModelConfig& cfg,
                              const std::vector<double>& grid, std::uint64_t seed) {
    check_grid(grid, true);
    Curve c{grid, {}, "loglik", sample.size(), seed};
    c.values.reserve(grid.size());
    const double n = static_cast<double>(sample.size());
    for (double a : grid) c.values.push_back(log_likelihood(a, sample, cfg).value / n);
    return c;
}

Curve scaled_likelihood_curve(const BinarySample& sample, const ModelConfig& cfg,
                              const std::vector<double>& grid, std::uint64_t seed) {
    check_grid(grid, false);
    Curve c{grid, {}, "scaled-lik", sample.size(), seed};
    c.values.reserve(grid.size());
    for (double a : grid) c.values.push_back(scaled_likelihood(a, sample, cfg));
    return c;
}

Curve trinary_loglik_curve(const TrinarySample& sample, const ModelConfig& cfg,
                           const std::vector<double>& grid, std::uint64_t seed) {
    check_grid(grid, true);
    Curve c{grid, {}, "trinary-loglik", sample.size(), seed};
    c.values.reserve(grid.size());
    const double n = static_cast<double>(sample.size());
    for (double a : grid) c.values.push_back(trinary_log_likelihood(a, sample, cfg) / n);
    return c;
}

void write_curves_csv(std::ostream& os, const std::vector<Curve>& curves) {
    os << "a,value,kind,n,seed\n";
    char buf[160];
    for (const auto& c : curves) {
        c.validate();
        for (std::size_t j = 0; j < c.grid.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%zu,%llu\n", c.grid[j], c.values[j],
                          c.kind.c_str(), c.n, static_cast<unsigned long long>(c.seed));
            os << buf;
        }
    }
}

std::vector<double> make_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw DomainError("make_grid: need step > 0 and hi >= lo");
    std::vector<double> g;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    g.reserve(count);
    for (std::size_t i = 0; i < count; ++i) g.push_back(lo + step * static_cast<double>(i));
    return g;
}

} // namespace latcorr
