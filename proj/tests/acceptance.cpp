// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 100). Seeds are fixed: criterion c
// draws from substream(kRootSeed, c).

#include "latcorr/dist.hpp"
#include "latcorr/estimators.hpp"
#include "latcorr/experiments.hpp"
#include "latcorr/likelihood.hpp"
#include "latcorr/model.hpp"
#include "latcorr/rng.hpp"
#include "latcorr/stocks.hpp"

#include "likelihood_oracle.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace latcorr;

namespace {

constexpr std::uint64_t kRootSeed = 1;

std::uint64_t criterion_seed(int c) { return substream(kRootSeed, static_cast<std::uint64_t>(c)); }

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail_if(bool bad, const std::string& what) {
        if (bad) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void info(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> grid_05_95() { return make_grid(0.05, 0.95, 0.05); }
std::vector<double> grid_1_9() { return make_grid(0.1, 0.9, 0.1); }

double rmse(const std::vector<double>& est, double truth) {
    double s = 0.0;
    for (double e : est) s += (e - truth) * (e - truth);
    return std::sqrt(s / static_cast<double>(est.size()));
}

Outcome flat_likelihood() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = CaseSpec::preset(1).model;
    const auto grid = grid_05_95();
    Outcome o;
    double worst_flat = 0.0;
    double worst_dev = 0.0;
    int bad_seeds = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto ls = simulate_latent(cfg, 1000, substream(criterion_seed(1), s));
        const auto curve = normalized_loglik_curve(discretize_binary(ls, cfg.tau), cfg, grid);
        const auto [lo, hi] = std::minmax_element(curve.values.begin(), curve.values.end());
        const double flat = *hi - *lo;
        const double limit = prop1_limit(cfg.a_star, ls.y, cfg.tau, cfg.noise);
        double dev = 0.0;
        for (double v : curve.values) dev = std::max(dev, std::abs(v - limit));
        worst_flat = std::max(worst_flat, flat);
        worst_dev = std::max(worst_dev, dev);
        if (flat > 0.02 || dev > 0.01) ++bad_seeds;
    }
    const double secs = seconds_since(t0);
    o.fail_if(worst_flat > 0.02, "max flatness " + fmt("%.4f", worst_flat) + " > 0.02");
    o.fail_if(worst_dev > 0.01, "max deviation from limit " + fmt("%.4f", worst_dev) + " > 0.01");
    o.fail_if(secs > 120.0, "runtime " + fmt("%.1f", secs) + " s > 120 s");
    o.info(std::to_string(bad_seeds) + "/10 seeds out of tolerance, flatness " + fmt("%.4f", worst_flat) +
           ", deviation " + fmt("%.4f", worst_dev) + ", " + fmt("%.1f", secs) + " s");
    return o;
}

Outcome exact_endpoint() {
    Outcome o;
    double worst = 0.0;
    for (int id : {1, 2, 3}) {
        const auto cfg = CaseSpec::preset(id).model;
        for (std::size_t n : {1u, 50u, 1000u}) {
            const auto bs = discretize_binary(simulate_latent(cfg, n, substream(criterion_seed(2), n + id)), cfg.tau);
            const double v = log_likelihood(0.0, bs, cfg).value / static_cast<double>(n);
            worst = std::max(worst, std::abs(v + std::numbers::ln2));
        }
    }
    o.fail_if(worst > 1e-9, "max |n^-1 log L(0) + log 2| = " + fmt("%.3g", worst));
    o.info("max error " + fmt("%.3g", worst));
    return o;
}

Outcome second_order() {
    Outcome o;
    const auto cfg = CaseSpec::preset(1).model;
    const std::size_t n = 10000;
    int idx = 0;
    for (double y : {-1.0, 0.0, 1.0}) {
        const auto bs = discretize_binary(simulate_latent(cfg, n, substream(criterion_seed(3), idx++), y), cfg.tau);
        double worst = 0.0;
        double worst_a = 0.0;
        for (double a : grid_1_9()) {
            const double s = scaled_likelihood(a, bs, cfg);
            const double p = prop2_limit(a, cfg.a_star, y, cfg.tau, n, cfg.noise, cfg.factor);
            const double rel = std::abs(s - p) / p;
            if (rel > worst) {
                worst = rel;
                worst_a = a;
            }
        }
        o.fail_if(worst > 0.05, "Y=" + fmt("%g", y) + ": rel error " + fmt("%.3f", worst) + " at a=" +
                                    fmt("%.1f", worst_a));
        o.info("Y=" + fmt("%g", y) + " max rel " + fmt("%.4f", worst));
        if (y == 0.0) {
            const double target = std::sqrt(std::numbers::pi / (2.0 * n));
            const double s = scaled_likelihood(0.5, bs, cfg);
            const double p = prop2_limit(0.5, cfg.a_star, 0.0, cfg.tau, n, cfg.noise, cfg.factor);
            o.fail_if(std::abs(s - target) > 0.05 * target, "Y=0 a=0.5 scaled likelihood " + fmt("%.6f", s));
            o.fail_if(std::abs(p - target) > 0.05 * target, "Y=0 a=0.5 limit " + fmt("%.6f", p));
            o.info("Y=0 a=0.5 value " + fmt("%.6f", s) + " vs " + fmt("%.6f", target));
        }
    }
    return o;
}

Outcome gaussian_maximizer() {
    Outcome o;
    const auto cfg = CaseSpec::preset(1).model;
    for (double y : {0.5, 1.0, 2.0}) {
        double best = -1.0;
        double best_a = 0.0;
        for (int j = 1; j < 1000; ++j) {
            const double a = j / 1000.0;
            const double v = prop2_limit(a, cfg.a_star, y, cfg.tau, 10000, cfg.noise, cfg.factor);
            if (v > best) {
                best = v;
                best_a = a;
            }
        }
        const double closed = cfg.a_star * y * y / (cfg.a_star * y * y + 1.0 - cfg.a_star);
        o.fail_if(std::abs(best_a - closed) > 2e-3,
                  "Y=" + fmt("%g", y) + ": argmax " + fmt("%.3f", best_a) + " vs " + fmt("%.4f", closed));
        o.info("Y=" + fmt("%g", y) + " argmax " + fmt("%.3f", best_a) + " (closed form " + fmt("%.4f", closed) + ")");
    }
    return o;
}

Outcome root_n_consistency() {
    Outcome o;
    const std::vector<std::size_t> ns{1000, 1500, 2000, 2500, 3000};
    for (int id : {1, 2, 3}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto res = mc_error_sweep(CaseSpec::preset(id), ns, 2000, substream(criterion_seed(5), static_cast<std::uint64_t>(id)),
                                        Method::TrinaryMoment, workers());
        const double slope = loglog_slope(res);
        const double secs = seconds_since(t0);
        o.fail_if(slope < -0.65 || slope > -0.40, "case " + std::to_string(id) + " slope " + fmt("%.3f", slope));
        o.fail_if(secs > 600.0, "case " + std::to_string(id) + " runtime " + fmt("%.0f", secs) + " s");
        o.info("case " + std::to_string(id) + " slope " + fmt("%.3f", slope) + " (" + fmt("%.1f", secs) + " s)");
    }
    return o;
}

Outcome nonestimability() {
    Outcome o;
    const auto cs = CaseSpec::preset(1);
    const auto rows = kl_curve(cs, 0.3, 0.7, {1000, 2000, 4000, 7000, 10000});
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].kl >= rows[i - 1].kl - 1e-6;
    const double growth = rows.back().kl - rows.front().kl;
    o.fail_if(!monotone, "KL not nondecreasing in n");
    o.fail_if(growth > 0.05, "KL(1e4) - KL(1e3) = " + fmt("%.4f", growth));
    o.info("KL(1e3) " + fmt("%.4f", rows.front().kl) + ", KL(1e4) " + fmt("%.4f", rows.back().kl));

    const std::size_t reps = 200;
    auto errors = [&](std::size_t n, std::uint64_t tag) {
        std::vector<double> mle(reps);
        std::vector<double> tri(reps);
        parallel_for(reps, workers(), [&](std::size_t r) {
            const auto ls = simulate_latent(cs.model, n, substream(substream(criterion_seed(6), tag), r));
            mle[r] = binary_mle(discretize_binary(ls, cs.model.tau), cs.model).a_hat;
            tri[r] = trinary_moment(discretize_trinary(ls, cs.model.tau1, cs.model.tau2), cs.model.tau1,
                                    cs.model.tau2, cs.model.noise)
                         .a_hat;
        });
        return std::pair{rmse(mle, cs.model.a_star), rmse(tri, cs.model.a_star)};
    };
    const auto [mle500, tri500] = errors(500, 500);
    const auto [mle4000, tri4000] = errors(4000, 4000);
    o.fail_if(mle4000 < 0.5 * mle500, "binary MLE RMSE ratio " + fmt("%.3f", mle4000 / mle500) + " < 0.5");
    o.fail_if(tri4000 > 0.55 * tri500, "trinary RMSE ratio " + fmt("%.3f", tri4000 / tri500) + " > 0.55");
    o.info("MLE RMSE " + fmt("%.3f", mle500) + " -> " + fmt("%.3f", mle4000) + ", trinary RMSE " +
           fmt("%.4f", tri500) + " -> " + fmt("%.4f", tri4000));
    return o;
}

Outcome laplace_identities() {
    Outcome o;
    std::size_t violations = 0;
    double worst_d1 = 0.0;
    double worst_entropy = 0.0;
    double worst_curv = 0.0;
    for (int id : {1, 2, 3}) {
        const auto noise = CaseSpec::preset(id).model.noise;
        const UniformStream u(substream(criterion_seed(7), static_cast<std::uint64_t>(id)));
        std::uint64_t idx = 0;
        for (int pair = 0; pair < 100; ++pair) {
            const double a = 0.01 + 0.98 * u.uniform(idx++);
            const double abar = 0.01 + 0.98 * u.uniform(idx++);
            const auto ctx = LikelihoodContext::make(a, abar, noise);
            const double entropy = abar * std::log(abar) + (1.0 - abar) * std::log1p(-abar);
            worst_d1 = std::max(worst_d1, std::abs(fn_d1(a, abar, noise, ctx.z_star)));
            worst_entropy = std::max(worst_entropy, std::abs(fn_value(a, abar, noise, ctx.z_star) - entropy));
            worst_curv = std::max(worst_curv, std::abs(fn_d2(a, abar, noise, ctx.z_star) - ctx.fn2_at_zstar) /
                                                  std::max(1.0, std::abs(ctx.fn2_at_zstar)));
            std::vector<double> zs(10000);
            for (double& z : zs) z = ctx.z_star + 40.0 * (u.uniform(idx++) - 0.5);
            zs.push_back(ctx.z_star);
            std::sort(zs.begin(), zs.end());
            std::vector<double> f(zs.size());
            for (std::size_t i = 0; i < zs.size(); ++i) f[i] = fn_value(a, abar, noise, zs[i]);
            for (std::size_t i = 1; i < zs.size(); ++i) {
                const double tol = 1e-13 * std::max(1.0, std::abs(f[i]));
                const bool rising = zs[i] <= ctx.z_star;
                if (rising ? f[i] < f[i - 1] - tol : f[i] > f[i - 1] + tol) ++violations;
                if (f[i] > ctx.fn_at_zstar + 1e-12) ++violations;
            }
        }
    }
    o.fail_if(worst_d1 > 1e-8, "|F'(z*)| " + fmt("%.3g", worst_d1));
    o.fail_if(worst_entropy > 1e-12, "entropy identity " + fmt("%.3g", worst_entropy));
    o.fail_if(worst_curv > 1e-10, "curvature " + fmt("%.3g", worst_curv));
    o.fail_if(violations > 0, std::to_string(violations) + " quasi-concavity violations");
    o.info("|F'(z*)| " + fmt("%.2g", worst_d1) + ", entropy " + fmt("%.2g", worst_entropy) + ", curvature " +
           fmt("%.2g", worst_curv) + ", " + std::to_string(violations) + " violations over 3x100x10^4 points");
    return o;
}

Outcome oracle_equivalence() {
    Outcome o;
    double worst = 0.0;
    for (int id : {1, 2, 3}) {
        const auto cfg = CaseSpec::preset(id).model;
        for (std::size_t n : {50u, 200u}) {
            const auto bs = discretize_binary(simulate_latent(cfg, n, substream(criterion_seed(8), n + id)), cfg.tau);
            for (double a : {0.1, 0.5, 0.9}) {
                const double lib = log_likelihood(a, bs, cfg).value;
                const double ref = oracle::log_marginal(a, n, bs.ones(), cfg);
                worst = std::max(worst, std::abs(lib - ref) / std::abs(ref));
            }
        }
    }
    o.fail_if(worst > 1e-6, "max relative error " + fmt("%.3g", worst));
    o.info("max relative error " + fmt("%.3g", worst));
    return o;
}

Outcome distribution_toolkit() {
    Outcome o;
    const std::vector<StandardizedDistribution> laws{
        StandardizedDistribution::std_normal(), StandardizedDistribution::logistic(),
        StandardizedDistribution::laplace(), StandardizedDistribution::gumbel(),
        StandardizedDistribution::scaled_t(5.0)};
    double worst_mean = 0.0;
    double worst_var = 0.0;
    double worst_rt = 0.0;
    double worst_sum = 0.0;
    for (const auto& d : laws) {
        const auto m = quadrature_moments(d);
        worst_mean = std::max(worst_mean, std::abs(m.mean));
        worst_var = std::max(worst_var, std::abs(m.variance - 1.0));
        for (int i = 1; i < 10000; ++i) {
            const double u = i / 10000.0;
            worst_rt = std::max(worst_rt, std::abs(d.cdf(d.quantile(u)) - u));
        }
        ModelConfig cfg;
        cfg.noise = d;
        cfg.factor = d;
        for (double a : {0.2, 0.5, 0.8}) {
            const auto lq = exchangeable_outcome_logprobs(a, 12, cfg);
            double total = 0.0;
            for (std::size_t k = 0; k <= 12; ++k) total += std::exp(log_binomial(12, k) + lq[k]);
            worst_sum = std::max(worst_sum, std::abs(total - 1.0));
        }
    }
    o.fail_if(worst_mean > 1e-8, "|mean| " + fmt("%.3g", worst_mean));
    o.fail_if(worst_var > 1e-6, "|var - 1| " + fmt("%.3g", worst_var));
    o.fail_if(worst_rt > 1e-9, "roundtrip " + fmt("%.3g", worst_rt));
    o.fail_if(worst_sum > 1e-8, "probability sum " + fmt("%.3g", worst_sum));
    o.info("|mean| " + fmt("%.2g", worst_mean) + ", |var-1| " + fmt("%.2g", worst_var) + ", roundtrip " +
           fmt("%.2g", worst_rt) + ", sum " + fmt("%.2g", worst_sum));
    return o;
}

Outcome hidden_pairs_estimator() {
    Outcome o;
    const auto cfg = CaseSpec::preset(1).model;
    const std::size_t reps = 10000;
    auto run = [&](std::size_t n) {
        std::vector<double> est(reps);
        parallel_for(reps, workers(), [&](std::size_t r) {
            est[r] = hidden_pairs(simulate_latent(cfg, n, substream(substream(criterion_seed(10), n), r))).a_hat;
        });
        return est;
    };
    const auto small = run(200);
    const auto large = run(800);
    const double mean = oracle::mean(small);
    const double se = oracle::sample_sd(small) / std::sqrt(static_cast<double>(reps));
    const double ratio = rmse(small, cfg.a_star) / rmse(large, cfg.a_star);
    o.fail_if(std::abs(mean - cfg.a_star) > 3.0 * se, "mean " + fmt("%.5f", mean) + " off by more than 3 se");
    o.fail_if(ratio < 1.5 || ratio > 2.7, "RMSE(200)/RMSE(800) " + fmt("%.3f", ratio));
    o.info("mean " + fmt("%.5f", mean) + " (se " + fmt("%.5f", se) + "), RMSE ratio " + fmt("%.3f", ratio));
    return o;
}

Outcome stocks_pipeline() {
    Outcome o;
    const std::size_t window = 100;
    const auto prices = synthetic_price_panel(63, 100 + window, 0.5, criterion_seed(11));
    std::stringstream csv;
    write_long_prices_csv(csv, prices);
    const auto sp = rolling_standardize(log_returns(ingest_prices(csv)), window);
    const auto rows = daily_estimates(sp, 0.0, -0.5, 0.5, workers());
    double err_u = 0.0;
    double err_t = 0.0;
    std::size_t bad_mle = 0;
    for (const auto& r : rows) {
        err_u += std::abs(r.ustat - 0.5);
        err_t += std::abs(r.trinary - 0.5);
        if (!std::isfinite(r.binary_mle)) ++bad_mle;
    }
    err_u /= static_cast<double>(rows.size());
    err_t /= static_cast<double>(rows.size());
    o.fail_if(rows.size() != 100, std::to_string(rows.size()) + " estimate days");
    o.fail_if(!(err_u <= 0.1), "mean |ustat - 0.5| " + fmt("%.4f", err_u));
    o.fail_if(!(err_t <= 0.12), "mean |trinary - 0.5| " + fmt("%.4f", err_t));
    o.fail_if(bad_mle > 0, std::to_string(bad_mle) + " days without a binary MLE");
    o.info("mean |ustat-0.5| " + fmt("%.4f", err_u) + ", mean |trinary-0.5| " + fmt("%.4f", err_t) +
           ", binary MLE on " + std::to_string(rows.size() - bad_mle) + " days");
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"flat likelihood", flat_likelihood},
        {"exact endpoint", exact_endpoint},
        {"second-order formula", second_order},
        {"gaussian maximizer", gaussian_maximizer},
        {"root-n consistency", root_n_consistency},
        {"nonestimability evidence", nonestimability},
        {"laplace identities", laplace_identities},
        {"likelihood oracle equivalence", oracle_equivalence},
        {"distribution toolkit", distribution_toolkit},
        {"hidden-pairs estimator", hidden_pairs_estimator},
        {"stocks pipeline", stocks_pipeline},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return std::min(failed, 100);
}
