#include "latcorr/estimators.hpp"

#include "latcorr/error.hpp"
#include "latcorr/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace latcorr {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string_view method_name(Method m) {
    switch (m) {
    case Method::TrinaryMoment: return "trinary_moment";
    case Method::BinaryMLE: return "binary_mle";
    case Method::HiddenPairs: return "hidden_pairs";
    case Method::UStatistic: return "ustat";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    for (Method m : {Method::TrinaryMoment, Method::BinaryMLE, Method::HiddenPairs, Method::UStatistic}) {
        if (method_name(m) == name) return m;
    }
    throw DomainError("unknown estimator method: " + std::string(name));
}

void EstimateRecord::note(std::string key, std::string value) {
    diagnostics.emplace_back(std::move(key), std::move(value));
}

std::string EstimateRecord::note_text() const {
    std::string s;
    for (const auto& [k, v] : diagnostics) {
        if (!s.empty()) s += ';';
        s += k + '=' + v;
    }
    return s;
}

void write_csv_header(std::ostream& os) { os << "method,a_hat,n,degenerate,note\n"; }

void write_csv_row(std::ostream& os, const EstimateRecord& r) {
    os << method_name(r.method) << ',' << fmt(r.a_hat) << ',' << r.n << ',' << (r.degenerate ? 1 : 0) << ','
       << r.note_text() << '\n';
}

double trinary_h(double u, double v, double tau1, double tau2, const StandardizedDistribution& g) {
    const bool inside = u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0 && u + v != 1.0;
    if (!inside) return 1.0;
    const double ratio = (tau1 - tau2) / (g.quantile(u) - g.upper_quantile(v));
    return 1.0 - ratio * ratio;
}

EstimateRecord trinary_moment(const TrinarySample& sample, double tau1, double tau2,
                              const StandardizedDistribution& g) {
    if (!(tau1 < tau2)) throw DomainError("trinary_moment: need tau1 < tau2");
    EstimateRecord r;
    r.method = Method::TrinaryMoment;
    r.n = sample.size();
    const double u = sample.abar(1);
    const double v = sample.abar(3);
    r.degenerate = sample.count(1) == 0 || sample.count(2) == 0 || sample.count(3) == 0;
    if (r.degenerate) {
        r.a_hat = 1.0;
        r.note("empty_interval", std::to_string(sample.count(1) == 0 ? 1 : (sample.count(2) == 0 ? 2 : 3)));
        return r;
    }
    r.a_hat = trinary_h(u, v, tau1, tau2, g);
    return r;
}

EstimateRecord binary_mle(const BinarySample& sample, const ModelConfig& cfg, const MLESearch& search) {
    if (!(search.lo > 0.0 && search.lo < search.hi && search.hi < 1.0 - 1e-3)) {
        throw DomainError("binary_mle: search interval must lie inside (0, 1 - 1e-3)");
    }
    if (!(search.tol > 0.0)) throw DomainError("binary_mle: tolerance must be positive");
    if (search.grid_points < 2) throw DomainError("binary_mle: need at least two grid points");
    if (sample.size() == 0) throw DomainError("binary_mle: empty sample");

    EstimateRecord r;
    r.method = Method::BinaryMLE;
    r.n = sample.size();
    r.degenerate = sample.degenerate();
    if (r.degenerate) r.note("degenerate", "all observations equal");

    auto ll = [&](double a) { return log_likelihood(a, sample, cfg).value; };
    const std::size_t m = search.grid_points;
    const double step = (search.hi - search.lo) / static_cast<double>(m - 1);
    std::vector<double> vals(m);
    std::size_t best = 0;
    for (std::size_t j = 0; j < m; ++j) {
        vals[j] = ll(search.lo + step * static_cast<double>(j));
        if (vals[j] > vals[best]) best = j;
    }
    const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());

    // golden section on the bracket around the coarse argmax
    double lo = search.lo + step * static_cast<double>(best == 0 ? 0 : best - 1);
    double hi = search.lo + step * static_cast<double>(std::min(best + 1, m - 1));
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = ll(x1);
    double f2 = ll(x2);
    while (hi - lo > search.tol) {
        if (f1 >= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = ll(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = ll(x2);
        }
    }
    double a_hat = f1 >= f2 ? x1 : x2;
    double f_hat = std::max(f1, f2);
    const double grid_a = search.lo + step * static_cast<double>(best);
    if (vals[best] > f_hat) {
        a_hat = grid_a;
        f_hat = vals[best];
    }
    r.a_hat = std::clamp(a_hat, search.lo, search.hi);
    const double n = static_cast<double>(sample.size());
    r.note("flatness", fmt((*mx - *mn) / n));
    r.note("loglik", fmt(f_hat));
    return r;
}

EstimateRecord hidden_pairs(std::span<const double> x) {
    if (x.size() < 2) throw DomainError("hidden_pairs: need at least two observations");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); i += 2) {
        const double z = x[i] - x[i + 1];
        s += z * z;
    }
    EstimateRecord r;
    r.method = Method::HiddenPairs;
    r.n = x.size();
    r.a_hat = 1.0 - s / static_cast<double>(x.size());
    return r;
}

EstimateRecord hidden_pairs(const LatentSample& latent) { return hidden_pairs(std::span<const double>(latent.x)); }

EstimateRecord ustat_common_corr(std::span<const double> x) {
    if (x.size() < 2) throw DomainError("ustat_common_corr: need at least two observations");
    // sum_{i<j} (x_i - x_j)^2 = m sum (x_i - mean)^2
    const double m = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= m;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    EstimateRecord r;
    r.method = Method::UStatistic;
    r.n = x.size();
    r.a_hat = 1.0 - ss / (m - 1.0);
    return r;
}

} // namespace latcorr
