#pragma once

#include "latcorr/estimators.hpp"
#include "latcorr/likelihood.hpp"
#include "latcorr/model.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace latcorr {

/// One of the three simulation settings: 1 normal/normal, 2 logistic/normal,
/// 3 laplace/scaled-t(5); all with a* = 0.5, tau = 0, tau1 = -1, tau2 = 1.
struct CaseSpec {
    int case_id = 1;
    ModelConfig model;

    /// Throws DomainError for ids other than 1, 2, 3.
    static CaseSpec preset(int id);
    /// "case1", "case2", "case3"; "custom" for id 0.
    std::string label() const;
};

/// Runs body(i) for i in [0, count) on up to `workers` threads. Exceptions
/// are rethrown on the caller, lowest index first.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

enum class CurveKind { LogLik, ScaledLik, TrinaryLogLik };

struct CurveSet {
    std::vector<Curve> samples;
    Curve averaged;
    /// Expectation of the limit over the factor law; empty for trinary curves.
    Curve limit;
    /// The limit averaged over the realized Y of the retained samples.
    Curve paired_limit;
    /// Degenerate samples left out of scaled-likelihood sets.
    std::size_t skipped = 0;

    /// samples, then averaged, then limit and paired_limit (if present).
    std::vector<Curve> all() const;
};

/// Sample r uses seed substream(seed, r).
CurveSet curve_experiment(const CaseSpec& cs, CurveKind kind, std::size_t n, std::size_t n_curves,
                          const std::vector<double>& grid, std::uint64_t seed, unsigned workers = 1);

/// Exact E[n^-1 log L_n(a)] under the model, summed over the count of ones:
/// sum_k C(n,k) q_k(a*) log q_k(a) / n. Cost grows linearly in n.
Curve expected_loglik_curve(const ModelConfig& cfg, std::size_t n, const std::vector<double>& grid);

/// E over Y of prop1_limit, from a 10^4-point quantile grid of the factor law.
double expected_prop1_limit(const ModelConfig& cfg, std::size_t points = 10000);
/// E over Y of prop2_limit at a, from the same quantile grid.
double expected_prop2_limit(const ModelConfig& cfg, double a, std::size_t n, std::size_t points = 10000);

struct MCRow {
    int case_id = 1;
    std::size_t n = 0;
    std::size_t reps = 0;
    double mean_abs_err = 0.0;
    double stderr_ = 0.0;   // sample sd of |a_hat - a*| / sqrt(reps)
    std::uint64_t seed = 0;
    Method method = Method::TrinaryMoment;
    double rmse = 0.0;
};

struct MCResult {
    std::vector<MCRow> rows;
};

/// For each n, `reps` replications of the estimator against a*. Replication
/// r at size n draws from substream(substream(seed, n), r), so results do
/// not depend on the worker count.
MCResult mc_error_sweep(const CaseSpec& cs, const std::vector<std::size_t>& ns, std::size_t reps,
                        std::uint64_t seed, Method method = Method::TrinaryMoment, unsigned workers = 1);

/// OLS slope of log(mean_abs_err) on log(n).
double loglog_slope(const MCResult& result);
double loglog_slope(const std::vector<double>& ns, const std::vector<double>& errs);

struct KLRow {
    std::size_t n = 0;
    double kl = 0.0;
};
std::vector<KLRow> kl_curve(const CaseSpec& cs, double a1, double a2, const std::vector<std::size_t>& ns);

/// case_id,n,reps,mean_abs_err,stderr,seed,method,rmse
void write_mc_csv(std::ostream& os, const MCResult& result);
/// Reads rows written by write_mc_csv; lines starting with '#' are skipped.
MCResult read_mc_csv(std::istream& is);
/// n,kl
void write_kl_csv(std::ostream& os, const std::vector<KLRow>& rows);

/// JSON experiment config. Keys: case, n_list, reps, seed, grid, output_path.
/// grid is either an array of values or {"lo": ..., "hi": ..., "step": ...}.
struct ExperimentConfig {
    std::optional<int> case_id;
    std::vector<std::size_t> n_list;
    std::optional<std::size_t> reps;
    std::optional<std::uint64_t> seed;
    std::vector<double> grid;
    std::string output_path;
};

/// Throws FormatError on malformed JSON or wrongly typed keys.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// <experiment>_<case>_<seed>.csv
std::string output_file_name(const std::string& experiment, const CaseSpec& cs, std::uint64_t seed);

} // namespace latcorr
