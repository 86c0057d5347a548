#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace latcorr {

enum class Family { StdNormal, Logistic, Laplace, Gumbel, ScaledT };

/// A zero-mean, unit-variance law on the real line.
///
/// Plays both roles in the threshold model: the idiosyncratic noise law
/// (density p, cdf G) and the shared factor law (density gamma).
class StandardizedDistribution {
public:
    /// Standard normal.
    StandardizedDistribution() = default;

    /// Throws ParameterError for ScaledT with df <= 2 (or non-finite df).
    explicit StandardizedDistribution(Family family, double df = 5.0);

    static StandardizedDistribution std_normal() { return StandardizedDistribution{}; }
    static StandardizedDistribution logistic() { return StandardizedDistribution{Family::Logistic}; }
    static StandardizedDistribution laplace() { return StandardizedDistribution{Family::Laplace}; }
    static StandardizedDistribution gumbel() { return StandardizedDistribution{Family::Gumbel}; }
    static StandardizedDistribution scaled_t(double df) {
        return StandardizedDistribution{Family::ScaledT, df};
    }

    Family family() const noexcept { return family_; }
    /// Degrees of freedom; meaningful only for ScaledT.
    double df() const noexcept { return df_; }
    bool symmetric() const noexcept { return family_ != Family::Gumbel; }

    double pdf(double z) const;
    double log_pdf(double z) const;
    /// Derivative of the density.
    double pdf_deriv(double z) const;
    double cdf(double z) const;
    /// Upper tail 1 - cdf(z), computed without cancellation.
    double ccdf(double z) const;
    double log_cdf(double z) const;
    double log_ccdf(double z) const;
    /// Inverse cdf; u must lie in (0, 1).
    double quantile(double u) const;
    /// z with ccdf(z) = v, i.e. quantile(1 - v) without forming 1 - v.
    double upper_quantile(double v) const;

    /// Points where the density is not differentiable (Laplace: 0).
    std::vector<double> kinks() const;

    /// Lowercase serialized name: std_normal, logistic, laplace, gumbel, scaled_t.
    std::string name() const;
    /// name() plus "(df=...)" for ScaledT.
    std::string label() const;

    friend bool operator==(const StandardizedDistribution&, const StandardizedDistribution&) = default;

private:
    Family family_ = Family::StdNormal;
    double df_ = 0.0;
};

/// Parse a serialized family name; df is used only for "scaled_t".
StandardizedDistribution parse_distribution(std::string_view name, std::optional<double> df = {});

/// Moments from quadrature over the compactified real line.
struct Moments {
    double total = 0.0;    // integral of the density
    double mean = 0.0;
    double variance = 0.0;
};
Moments quadrature_moments(const StandardizedDistribution& d);

/// Parameters of the limsup ratio gamma(b1 z + c1) / gamma(b2 z + c2).
struct RatioProbe {
    double b1 = 2.0;
    double b2 = 1.0;
    double c1 = 0.0;
    double c2 = 0.0;
};

struct RegularityReport {
    double max_abs_factor_slope = 0.0;      // max |gamma'(z)| over the grid
    double factor_slope_argmax = 0.0;
    double max_abs_d3_log_cdf = 0.0;        // max |d^3 log G / dz^3|
    double max_abs_d3_log_ccdf = 0.0;       // max |d^3 log (1 - G) / dz^3|
    double tail_ratio = 0.0;                // max of the ratio over large |z|
    std::vector<double> excluded;           // grid points skipped near kinks
    bool divergent = false;
    std::vector<std::string> notes;
};

/// Numeric spot-check of the smoothness conditions on the noise law
/// (third log-derivatives of G and 1 - G) and the factor law (bounded
/// slope, bounded tail ratio). `grid` must be nonempty, finite and sorted.
/// `threshold` flags divergence of any of the proxies.
RegularityReport check_regularity(const StandardizedDistribution& noise,
                                  const StandardizedDistribution& factor,
                                  const std::vector<double>& grid, RatioProbe probe = {},
                                  double threshold = 1e6);

} // namespace latcorr
