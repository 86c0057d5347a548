#include "latcorr/model.hpp"

#include "latcorr/error.hpp"
#include "latcorr/rng.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace latcorr {

void ModelConfig::validate() const {
    if (!(a_star > 0.0 && a_star < 1.0)) throw DomainError("a_star must lie in (0, 1)");
    if (!std::isfinite(tau) || !std::isfinite(tau1) || !std::isfinite(tau2)) {
        throw DomainError("thresholds must be finite");
    }
    if (!(tau1 < tau2)) throw DomainError("trinary breakpoints need tau1 < tau2");
}

BinarySample::BinarySample(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto b : bits_) {
        if (b > 1) throw DomainError("binary sample entries must be 0 or 1");
        ones_ += b;
    }
}

double BinarySample::abar() const noexcept {
    if (bits_.empty()) return 0.0;
    return static_cast<double>(ones_) / static_cast<double>(bits_.size());
}

TrinarySample::TrinarySample(std::vector<std::uint8_t> cats) : cats_(std::move(cats)) {
    for (auto c : cats_) {
        if (c < 1 || c > 3) throw DomainError("trinary sample entries must be 1, 2 or 3");
        ++counts_[c - 1];
    }
}

double TrinarySample::abar(int j) const {
    if (cats_.empty()) return 0.0;
    return static_cast<double>(count(j)) / static_cast<double>(cats_.size());
}

LatentSample simulate_latent(const ModelConfig& cfg, std::size_t n, std::uint64_t seed,
                             std::optional<double> fixed_y) {
    if (n == 0) throw DomainError("simulate_latent: n must be at least 1");
    cfg.validate();
    const UniformStream stream(seed);
    LatentSample ls;
    ls.y = fixed_y ? *fixed_y : cfg.factor.quantile(stream.uniform(0));
    const double w_noise = std::sqrt(1.0 - cfg.a_star);
    const double shared = std::sqrt(cfg.a_star) * ls.y;
    ls.yi.resize(n);
    ls.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ls.yi[i] = cfg.noise.quantile(stream.uniform(i + 1));
        ls.x[i] = w_noise * ls.yi[i] + shared;
    }
    return ls;
}

BinarySample discretize_binary(const LatentSample& ls, double tau) {
    std::vector<std::uint8_t> bits(ls.size());
    for (std::size_t i = 0; i < ls.size(); ++i) bits[i] = ls.x[i] > tau ? 1 : 0;
    return BinarySample(std::move(bits));
}

TrinarySample discretize_trinary(const LatentSample& ls, double tau1, double tau2) {
    if (!(tau1 < tau2)) throw DomainError("discretize_trinary: need tau1 < tau2");
    std::vector<std::uint8_t> cats(ls.size());
    for (std::size_t i = 0; i < ls.size(); ++i) {
        const double x = ls.x[i];
        cats[i] = x <= tau1 ? 1 : (x <= tau2 ? 2 : 3);
    }
    return TrinarySample(std::move(cats));
}

double conditional_success(const ModelConfig& cfg, double y) {
    return cfg.noise.ccdf((cfg.tau - std::sqrt(cfg.a_star) * y) / std::sqrt(1.0 - cfg.a_star));
}

namespace {

template <class Label>
void write_rows(std::ostream& os, const LatentSample& ls, const char* column, Label label) {
    os << "i,y_i,x_i," << column << '\n';
    char buf[96];
    for (std::size_t i = 0; i < ls.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%d\n", i + 1, ls.yi[i], ls.x[i], label(i));
        os << buf;
    }
}

} // namespace

void write_csv(std::ostream& os, const LatentSample& ls, const BinarySample& bs) {
    if (bs.size() != ls.size()) throw DomainError("write_csv: sample sizes differ");
    write_rows(os, ls, "bit", [&](std::size_t i) { return static_cast<int>(bs.bits()[i]); });
}

void write_csv(std::ostream& os, const LatentSample& ls, const TrinarySample& ts) {
    if (ts.size() != ls.size()) throw DomainError("write_csv: sample sizes differ");
    write_rows(os, ls, "cat", [&](std::size_t i) { return static_cast<int>(ts.cats()[i]); });
}

} // namespace latcorr
