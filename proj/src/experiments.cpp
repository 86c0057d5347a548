#include "latcorr/experiments.hpp"

#include "latcorr/error.hpp"
#include "latcorr/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

namespace latcorr {

CaseSpec CaseSpec::preset(int id) {
    CaseSpec cs;
    cs.case_id = id;
    cs.model.a_star = 0.5;
    cs.model.tau = 0.0;
    cs.model.tau1 = -1.0;
    cs.model.tau2 = 1.0;
    switch (id) {
    case 1: break;
    case 2: cs.model.noise = StandardizedDistribution::logistic(); break;
    case 3:
        cs.model.noise = StandardizedDistribution::laplace();
        cs.model.factor = StandardizedDistribution::scaled_t(5.0);
        break;
    default: throw DomainError("unknown case id " + std::to_string(id) + " (expected 1, 2 or 3)");
    }
    return cs;
}

std::string CaseSpec::label() const { return case_id == 0 ? "custom" : "case" + std::to_string(case_id); }

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    std::vector<std::exception_ptr> errors(count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
                break;
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count && !failed; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                        failed = true;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::vector<Curve> CurveSet::all() const {
    std::vector<Curve> out = samples;
    out.push_back(averaged);
    if (!limit.values.empty()) out.push_back(limit);
    if (!paired_limit.values.empty()) out.push_back(paired_limit);
    return out;
}

namespace {

std::vector<double> factor_quantile_grid(const StandardizedDistribution& factor, std::size_t points) {
    std::vector<double> ys(points);
    for (std::size_t j = 0; j < points; ++j) {
        ys[j] = factor.quantile((static_cast<double>(j) + 0.5) / static_cast<double>(points));
    }
    return ys;
}

} // namespace

double expected_prop1_limit(const ModelConfig& cfg, std::size_t points) {
    double s = 0.0;
    for (double y : factor_quantile_grid(cfg.factor, points)) s += prop1_limit(cfg.a_star, y, cfg.tau, cfg.noise);
    return s / static_cast<double>(points);
}

double expected_prop2_limit(const ModelConfig& cfg, double a, std::size_t n, std::size_t points) {
    double s = 0.0;
    for (double y : factor_quantile_grid(cfg.factor, points)) {
        s += prop2_limit(a, cfg.a_star, y, cfg.tau, n, cfg.noise, cfg.factor);
    }
    return s / static_cast<double>(points);
}

Curve expected_loglik_curve(const ModelConfig& cfg, std::size_t n, const std::vector<double>& grid) {
    cfg.validate();
    const auto truth = exchangeable_outcome_logprobs(cfg.a_star, n, cfg);
    std::vector<double> weight(n + 1);
    for (std::size_t k = 0; k <= n; ++k) weight[k] = std::exp(log_binomial(n, k) + truth[k]);
    Curve c{grid, {}, "expected-loglik", n, 0};
    for (double a : grid) {
        if (!(a >= 0.0 && a < 1.0)) throw DomainError("expected_loglik_curve: grid must lie in [0, 1)");
        double e = 0.0;
        for (std::size_t k = 0; k <= n; ++k) {
            if (weight[k] > 0.0) e += weight[k] * log_marginal(a, n, k, cfg).value;
        }
        c.values.push_back(e / static_cast<double>(n));
    }
    return c;
}

CurveSet curve_experiment(const CaseSpec& cs, CurveKind kind, std::size_t n, std::size_t n_curves,
                          const std::vector<double>& grid, std::uint64_t seed, unsigned workers) {
    if (n_curves == 0) throw DomainError("curve_experiment: need at least one curve");
    for (double a : grid) {
        if (!(a > 0.0 && a < 1.0)) throw DomainError("curve_experiment: grid must lie in (0, 1)");
    }
    const auto& cfg = cs.model;
    std::vector<std::optional<Curve>> slots(n_curves);
    std::vector<double> ys(n_curves);
    parallel_for(n_curves, workers, [&](std::size_t r) {
        const std::uint64_t s = substream(seed, r);
        const auto ls = simulate_latent(cfg, n, s);
        ys[r] = ls.y;
        switch (kind) {
        case CurveKind::LogLik:
            slots[r] = normalized_loglik_curve(discretize_binary(ls, cfg.tau), cfg, grid, s);
            break;
        case CurveKind::ScaledLik: {
            const auto b = discretize_binary(ls, cfg.tau);
            if (!b.degenerate()) slots[r] = scaled_likelihood_curve(b, cfg, grid, s);
            break;
        }
        case CurveKind::TrinaryLogLik:
            slots[r] = trinary_loglik_curve(discretize_trinary(ls, cfg.tau1, cfg.tau2), cfg, grid, s);
            break;
        }
    });

    CurveSet set;
    std::vector<double> kept_y;
    for (std::size_t r = 0; r < n_curves; ++r) {
        if (auto& c = slots[r]) {
            set.samples.push_back(std::move(*c));
            kept_y.push_back(ys[r]);
        } else {
            ++set.skipped;
        }
    }
    if (set.samples.empty()) throw NumericError("curve_experiment: every sample was degenerate");

    const std::string base = set.samples.front().kind;
    set.averaged = Curve{grid, std::vector<double>(grid.size(), 0.0), "averaged-" + base, n, seed};
    for (const auto& c : set.samples) {
        for (std::size_t j = 0; j < grid.size(); ++j) set.averaged.values[j] += c.values[j];
    }
    for (double& v : set.averaged.values) v /= static_cast<double>(set.samples.size());

    const double kept = static_cast<double>(kept_y.size());
    if (kind == CurveKind::LogLik) {
        set.limit = Curve{grid, std::vector<double>(grid.size(), expected_prop1_limit(cfg)), "limit-loglik", n, seed};
        double paired = 0.0;
        for (double y : kept_y) paired += prop1_limit(cfg.a_star, y, cfg.tau, cfg.noise) / kept;
        set.paired_limit = Curve{grid, std::vector<double>(grid.size(), paired), "paired-limit-loglik", n, seed};
    } else if (kind == CurveKind::ScaledLik) {
        set.limit = Curve{grid, {}, "limit-scaled-lik", n, seed};
        set.paired_limit = Curve{grid, {}, "paired-limit-scaled-lik", n, seed};
        for (double a : grid) {
            set.limit.values.push_back(expected_prop2_limit(cfg, a, n));
            double paired = 0.0;
            for (double y : kept_y) paired += prop2_limit(a, cfg.a_star, y, cfg.tau, n, cfg.noise, cfg.factor) / kept;
            set.paired_limit.values.push_back(paired);
        }
    }
    return set;
}

MCResult mc_error_sweep(const CaseSpec& cs, const std::vector<std::size_t>& ns, std::size_t reps,
                        std::uint64_t seed, Method method, unsigned workers) {
    if (reps < 2) throw DomainError("mc_error_sweep: need at least two replications");
    const auto& cfg = cs.model;
    MCResult result;
    for (std::size_t n : ns) {
        if (n < 4) throw DomainError("mc_error_sweep: every n must be at least 4");
        const std::uint64_t n_seed = substream(seed, n);
        std::vector<double> err(reps);
        parallel_for(reps, workers, [&](std::size_t r) {
            const auto ls = simulate_latent(cfg, n, substream(n_seed, r));
            double a_hat = 0.0;
            switch (method) {
            case Method::TrinaryMoment:
                a_hat = trinary_moment(discretize_trinary(ls, cfg.tau1, cfg.tau2), cfg.tau1, cfg.tau2, cfg.noise).a_hat;
                break;
            case Method::BinaryMLE: a_hat = binary_mle(discretize_binary(ls, cfg.tau), cfg).a_hat; break;
            case Method::HiddenPairs: a_hat = hidden_pairs(ls).a_hat; break;
            case Method::UStatistic: a_hat = ustat_common_corr(ls.x).a_hat; break;
            }
            err[r] = a_hat - cfg.a_star;
        });
        double sum_abs = 0.0;
        double sum_sq = 0.0;
        for (double e : err) {
            sum_abs += std::abs(e);
            sum_sq += e * e;
        }
        const double m = static_cast<double>(reps);
        const double mean_abs = sum_abs / m;
        double var = 0.0;
        for (double e : err) var += (std::abs(e) - mean_abs) * (std::abs(e) - mean_abs);
        var /= m - 1.0;
        MCRow row;
        row.case_id = cs.case_id;
        row.n = n;
        row.reps = reps;
        row.mean_abs_err = mean_abs;
        row.stderr_ = std::sqrt(var / m);
        row.seed = seed;
        row.method = method;
        row.rmse = std::sqrt(sum_sq / m);
        result.rows.push_back(row);
    }
    return result;
}

double loglog_slope(const std::vector<double>& ns, const std::vector<double>& errs) {
    if (ns.size() != errs.size()) throw DomainError("loglog_slope: length mismatch");
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (!(ns[i] > 0.0) || !(errs[i] > 0.0)) throw DomainError("loglog_slope: n and errors must be positive");
        lx.push_back(std::log(ns[i]));
        ly.push_back(std::log(errs[i]));
    }
    std::vector<double> sorted = ns;
    std::sort(sorted.begin(), sorted.end());
    if (std::unique(sorted.begin(), sorted.end()) - sorted.begin() < 2) {
        throw DomainError("loglog_slope: need at least two distinct n values");
    }
    const double k = static_cast<double>(lx.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i] / k;
        my += ly[i] / k;
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

double loglog_slope(const MCResult& result) {
    std::vector<double> ns;
    std::vector<double> errs;
    for (const auto& r : result.rows) {
        ns.push_back(static_cast<double>(r.n));
        errs.push_back(r.mean_abs_err);
    }
    return loglog_slope(ns, errs);
}

std::vector<KLRow> kl_curve(const CaseSpec& cs, double a1, double a2, const std::vector<std::size_t>& ns) {
    std::vector<KLRow> rows;
    for (std::size_t n : ns) rows.push_back({n, kl_divergence(a1, a2, n, cs.model)});
    return rows;
}

void write_mc_csv(std::ostream& os, const MCResult& result) {
    os << "case_id,n,reps,mean_abs_err,stderr,seed,method,rmse\n";
    char buf[256];
    for (const auto& r : result.rows) {
        std::snprintf(buf, sizeof buf, "%d,%zu,%zu,%.17g,%.17g,%llu,%s,%.17g\n", r.case_id, r.n, r.reps,
                      r.mean_abs_err, r.stderr_, static_cast<unsigned long long>(r.seed),
                      std::string(method_name(r.method)).c_str(), r.rmse);
        os << buf;
    }
}

MCResult read_mc_csv(std::istream& is) {
    MCResult result;
    std::string line;
    std::vector<std::string> header;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto cells = split(line);
        if (header.empty()) {
            header = cells;
            for (const char* need : {"n", "mean_abs_err"}) {
                if (std::find(header.begin(), header.end(), need) == header.end()) {
                    throw FormatError(std::string("mc csv: missing column ") + need);
                }
            }
            continue;
        }
        if (cells.size() != header.size()) throw FormatError("mc csv: row has " + std::to_string(cells.size()) + " cells");
        MCRow row;
        try {
            for (std::size_t i = 0; i < header.size(); ++i) {
                const auto& h = header[i];
                const auto& c = cells[i];
                if (h == "case_id") row.case_id = std::stoi(c);
                else if (h == "n") row.n = std::stoull(c);
                else if (h == "reps") row.reps = std::stoull(c);
                else if (h == "mean_abs_err") row.mean_abs_err = std::stod(c);
                else if (h == "stderr") row.stderr_ = std::stod(c);
                else if (h == "seed") row.seed = std::stoull(c);
                else if (h == "method") row.method = parse_method(c);
                else if (h == "rmse") row.rmse = std::stod(c);
            }
        } catch (const std::logic_error&) {
            throw FormatError("mc csv: malformed number in line: " + line);
        }
        result.rows.push_back(row);
    }
    if (header.empty()) throw FormatError("mc csv: no header");
    return result;
}

void write_kl_csv(std::ostream& os, const std::vector<KLRow>& rows) {
    os << "n,kl\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", r.n, r.kl);
        os << buf;
    }
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw FormatError("config: top level must be an object");
    ExperimentConfig cfg;
    try {
        for (const auto& [key, val] : j.items()) {
            if (key == "case") {
                cfg.case_id = val.get<int>();
            } else if (key == "n_list") {
                cfg.n_list = val.get<std::vector<std::size_t>>();
            } else if (key == "reps") {
                cfg.reps = val.get<std::size_t>();
            } else if (key == "seed") {
                cfg.seed = val.get<std::uint64_t>();
            } else if (key == "grid") {
                if (val.is_array()) {
                    cfg.grid = val.get<std::vector<double>>();
                } else if (val.is_object()) {
                    cfg.grid = make_grid(val.at("lo").get<double>(), val.at("hi").get<double>(),
                                         val.at("step").get<double>());
                } else {
                    throw FormatError("config: grid must be an array or {lo, hi, step}");
                }
            } else if (key == "output_path") {
                cfg.output_path = val.get<std::string>();
            } else {
                throw FormatError("config: unknown key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str());
}

std::string output_file_name(const std::string& experiment, const CaseSpec& cs, std::uint64_t seed) {
    return experiment + "_" + cs.label() + "_" + std::to_string(seed) + ".csv";
}

} // namespace latcorr
