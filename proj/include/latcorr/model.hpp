#pragma once

#include "latcorr/dist.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace latcorr {

/// One-factor latent threshold model
///     X_i = sqrt(1 - a*) Y_i + sqrt(a*) Y,
/// with Y_i ~ noise (density p, cdf G) i.i.d. and Y ~ factor (density gamma).
/// The binary view thresholds at `tau`; the trinary view uses the
/// intervals (-inf, tau1], (tau1, tau2], (tau2, inf).
struct ModelConfig {
    double a_star = 0.5;
    double tau = 0.0;
    double tau1 = -1.0;
    double tau2 = 1.0;
    StandardizedDistribution noise;
    StandardizedDistribution factor;

    /// Throws DomainError unless 0 < a_star < 1, tau1 < tau2 and all finite.
    void validate() const;
};

struct LatentSample {
    double y = 0.0;
    std::vector<double> yi;
    std::vector<double> x;
    std::size_t size() const noexcept { return x.size(); }
};

class BinarySample {
public:
    BinarySample() = default;
    explicit BinarySample(std::vector<std::uint8_t> bits);

    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
    std::size_t size() const noexcept { return bits_.size(); }
    std::size_t ones() const noexcept { return ones_; }
    /// Fraction of ones.
    double abar() const noexcept;
    /// True when every bit is equal (abar in {0, 1}).
    bool degenerate() const noexcept { return ones_ == 0 || ones_ == bits_.size(); }

private:
    std::vector<std::uint8_t> bits_;
    std::size_t ones_ = 0;
};

/// Categories are 1, 2, 3.
class TrinarySample {
public:
    TrinarySample() = default;
    explicit TrinarySample(std::vector<std::uint8_t> cats);

    const std::vector<std::uint8_t>& cats() const noexcept { return cats_; }
    std::size_t size() const noexcept { return cats_.size(); }
    /// Number of observations in interval j (1-based).
    std::size_t count(int j) const { return counts_.at(static_cast<std::size_t>(j - 1)); }
    /// Frequency of interval j (1-based).
    double abar(int j) const;

private:
    std::vector<std::uint8_t> cats_;
    std::array<std::size_t, 3> counts_{};
};

/// Draw a latent sample from the seeded counter-based stream.
///
/// Uniform index 0 drives Y (skipped when `fixed_y` is given) and index
/// i + 1 drives Y_i; both go through the quantile of their law.
LatentSample simulate_latent(const ModelConfig& cfg, std::size_t n, std::uint64_t seed,
                             std::optional<double> fixed_y = {});

BinarySample discretize_binary(const LatentSample& ls, double tau);
TrinarySample discretize_trinary(const LatentSample& ls, double tau1, double tau2);

/// P(A_i = 1 | Y = y) = 1 - G((tau - sqrt(a*) y) / sqrt(1 - a*)).
double conditional_success(const ModelConfig& cfg, double y);

/// CSV with mandatory header: i,y_i,x_i,bit (1-based i).
void write_csv(std::ostream& os, const LatentSample& ls, const BinarySample& bs);
/// CSV with mandatory header: i,y_i,x_i,cat.
void write_csv(std::ostream& os, const LatentSample& ls, const TrinarySample& ts);

} // namespace latcorr
