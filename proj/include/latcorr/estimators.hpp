#pragma once

#include "latcorr/dist.hpp"
#include "latcorr/model.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace latcorr {

enum class Method { TrinaryMoment, BinaryMLE, HiddenPairs, UStatistic };

/// trinary_moment, binary_mle, hidden_pairs, ustat.
std::string_view method_name(Method m);
/// Inverse of method_name; throws DomainError for unknown names.
Method parse_method(std::string_view name);

struct EstimateRecord {
    Method method = Method::TrinaryMoment;
    double a_hat = 0.0;
    std::size_t n = 0;
    bool degenerate = false;
    std::vector<std::pair<std::string, std::string>> diagnostics;

    void note(std::string key, std::string value);
    /// diagnostics joined as key=value;key=value.
    std::string note_text() const;
};

/// Column header matching write_csv_row.
void write_csv_header(std::ostream& os);
/// method,a_hat,n,degenerate,note
void write_csv_row(std::ostream& os, const EstimateRecord& r);

/// H(u, v) = 1 - [(tau1 - tau2) / (G^-1(u) - G^-1(1 - v))]^2 on the set
/// 0 < u < 1, 0 < v < 1, u + v != 1, and 1 elsewhere.
double trinary_h(double u, double v, double tau1, double tau2, const StandardizedDistribution& g);

/// Moment estimator from interval frequencies: trinary_h(abar(1), abar(3)).
/// An empty interval gives a_hat = 1 with the degenerate flag.
EstimateRecord trinary_moment(const TrinarySample& sample, double tau1, double tau2,
                              const StandardizedDistribution& g);

struct MLESearch {
    double lo = 0.005;
    double hi = 0.955;
    std::size_t grid_points = 191;
    double tol = 1e-6;
};

/// Coarse-grid argmax of the binary log-likelihood refined by golden
/// section. Diagnostics carry the grid flatness (max - min of n^-1 log L).
/// A degenerate sample still returns a value in the search interval, with
/// the degenerate flag set.
EstimateRecord binary_mle(const BinarySample& sample, const ModelConfig& cfg, const MLESearch& search = {});

/// 1 - n^-1 sum_{i <= n/2} (x_{2i-1} - x_{2i})^2, unclipped. Needs n >= 2.
EstimateRecord hidden_pairs(const LatentSample& latent);
EstimateRecord hidden_pairs(std::span<const double> x);

/// 1 - sum_{i<j} (x_i - x_j)^2 / (2 C(m, 2)), evaluated in O(m). Needs m >= 2.
EstimateRecord ustat_common_corr(std::span<const double> x);

} // namespace latcorr
