#include "latcorr/dist.hpp"

#include "latcorr/error.hpp"
#include "latcorr/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace latcorr {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Logistic rate pi / sqrt(3) and Gumbel scale sqrt(6) / pi.
const double kLogisticRate = std::numbers::pi / std::numbers::sqrt3;
const double kGumbelScale = std::sqrt(6.0) / std::numbers::pi;
constexpr double kLaplaceRate = std::numbers::sqrt2;

void require_finite(double z, const char* what) {
    if (!std::isfinite(z)) throw DomainError(std::string(what) + ": non-finite argument");
}

double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// ---- standard normal -------------------------------------------------------

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double normal_log_cdf(double z) {
    if (z >= 0.0) return std::log1p(-0.5 * std::erfc(z * kInvSqrt2));
    if (z > -35.0) return std::log(0.5 * std::erfc(-z * kInvSqrt2));
    // Mills-ratio asymptotic series; relative error below 1e-12 past -35.
    const double w = 1.0 / (z * z);
    const double series = 1.0 - w * (1.0 - w * (3.0 - w * (15.0 - w * 105.0)));
    return -0.5 * z * z - std::log(-z) - kLogSqrt2Pi + std::log(series);
}

// Wichura's AS 241 (PPND16), relative accuracy about 1e-16.
double normal_quantile_as241(double p) {
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            ((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e0;
        const double den =
            ((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0;
        return q * num / den;
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
               3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
             4.63033784615654529590e0) * r + 1.42343711074968357734e0;
        const double den =
            ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
               6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
             2.05319162663775882187e0) * r + 1.0;
        value = num / den;
    } else {
        r -= 5.0;
        const double num =
            ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
               2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
             5.46378491116411436990e0) * r + 6.65790464350110377720e0;
        const double den =
            ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
               1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
             5.99832206555887937690e-1) * r + 1.0;
        value = num / den;
    }
    return q < 0.0 ? -value : value;
}

// ---- regularized incomplete beta -----------------------------------------

// Continued fraction for I_x(a, b) (modified Lentz), valid for
// x < (a + 1) / (a + b + 2).
double beta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-15;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw NumericError("incomplete beta: continued fraction did not converge");
}

// I_x(a, b) given both x and y = 1 - x (so neither is formed by subtraction).
double incomplete_beta(double a, double b, double x, double y) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log(y);
    if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * beta_cf(a, b, x) / a;
    return 1.0 - std::exp(log_front) * beta_cf(b, a, y) / b;
}

// P(T <= t) for t <= 0, T standard Student t with nu degrees of freedom.
double student_lower_tail(double t, double nu) {
    const double t2 = t * t;
    if (!std::isfinite(t2)) return 0.0;
    const double x = nu / (nu + t2);
    const double y = t2 / (nu + t2);
    return 0.5 * incomplete_beta(0.5 * nu, 0.5, x, y);
}

} // namespace

StandardizedDistribution::StandardizedDistribution(Family family, double df)
    : family_(family), df_(family == Family::ScaledT ? df : 0.0) {
    if (family == Family::ScaledT && !(std::isfinite(df) && df > 2.0)) {
        throw ParameterError("scaled_t requires finite df > 2");
    }
}

double StandardizedDistribution::log_pdf(double z) const {
    require_finite(z, "log_pdf");
    switch (family_) {
    case Family::StdNormal:
        return -0.5 * z * z - kLogSqrt2Pi;
    case Family::Logistic: {
        const double e = std::exp(-kLogisticRate * std::abs(z));
        return std::log(kLogisticRate) - kLogisticRate * std::abs(z) - 2.0 * std::log1p(e);
    }
    case Family::Laplace:
        return -kLaplaceRate * std::abs(z) - 0.5 * std::numbers::ln2;
    case Family::Gumbel: {
        const double t = z / kGumbelScale + std::numbers::egamma;
        return -t - std::exp(-t) - std::log(kGumbelScale);
    }
    case Family::ScaledT: {
        const double nu = df_;
        return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
               0.5 * std::log((nu - 2.0) * std::numbers::pi) -
               0.5 * (nu + 1.0) * std::log1p(z * z / (nu - 2.0));
    }
    }
    return kNegInf;
}

double StandardizedDistribution::pdf(double z) const {
    require_finite(z, "pdf");
    switch (family_) {
    case Family::StdNormal:
        return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    case Family::Logistic: {
        const double e = std::exp(-kLogisticRate * std::abs(z));
        return kLogisticRate * e / ((1.0 + e) * (1.0 + e));
    }
    case Family::Laplace:
        return kInvSqrt2 * std::exp(-kLaplaceRate * std::abs(z));
    default:
        return std::exp(log_pdf(z));
    }
}

double StandardizedDistribution::pdf_deriv(double z) const {
    const double p = pdf(z);
    switch (family_) {
    case Family::StdNormal:
        return -z * p;
    case Family::Logistic:
        return kLogisticRate * p * (ccdf(z) - cdf(z));
    case Family::Laplace:
        return z == 0.0 ? 0.0 : -kLaplaceRate * std::copysign(1.0, z) * p;
    case Family::Gumbel: {
        const double t = z / kGumbelScale + std::numbers::egamma;
        return p * std::expm1(-t) / kGumbelScale;
    }
    case Family::ScaledT: {
        const double nu = df_;
        return -p * (nu + 1.0) * z / ((nu - 2.0) + z * z);
    }
    }
    return 0.0;
}

double StandardizedDistribution::cdf(double z) const {
    require_finite(z, "cdf");
    switch (family_) {
    case Family::StdNormal:
        return normal_cdf(z);
    case Family::Logistic:
        return 1.0 / (1.0 + std::exp(-kLogisticRate * z));
    case Family::Laplace:
        return z < 0.0 ? 0.5 * std::exp(kLaplaceRate * z) : 1.0 - 0.5 * std::exp(-kLaplaceRate * z);
    case Family::Gumbel:
        return std::exp(-std::exp(-(z / kGumbelScale + std::numbers::egamma)));
    case Family::ScaledT: {
        const double t = z / std::sqrt((df_ - 2.0) / df_);
        return t <= 0.0 ? student_lower_tail(t, df_) : 1.0 - student_lower_tail(-t, df_);
    }
    }
    return 0.0;
}

double StandardizedDistribution::ccdf(double z) const {
    require_finite(z, "ccdf");
    if (family_ == Family::Gumbel) {
        return -std::expm1(-std::exp(-(z / kGumbelScale + std::numbers::egamma)));
    }
    return cdf(-z);
}

double StandardizedDistribution::log_cdf(double z) const {
    require_finite(z, "log_cdf");
    switch (family_) {
    case Family::StdNormal:
        return normal_log_cdf(z);
    case Family::Logistic:
        return -softplus(-kLogisticRate * z);
    case Family::Laplace:
        return z < 0.0 ? kLaplaceRate * z - std::numbers::ln2
                       : std::log1p(-0.5 * std::exp(-kLaplaceRate * z));
    case Family::Gumbel:
        return -std::exp(-(z / kGumbelScale + std::numbers::egamma));
    case Family::ScaledT: {
        const double t = z / std::sqrt((df_ - 2.0) / df_);
        return t <= 0.0 ? std::log(student_lower_tail(t, df_))
                        : std::log1p(-student_lower_tail(-t, df_));
    }
    }
    return kNegInf;
}

double StandardizedDistribution::log_ccdf(double z) const {
    require_finite(z, "log_ccdf");
    if (family_ == Family::Gumbel) {
        return std::log(-std::expm1(-std::exp(-(z / kGumbelScale + std::numbers::egamma))));
    }
    return log_cdf(-z);
}

double StandardizedDistribution::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: argument must lie in (0, 1)");
    switch (family_) {
    case Family::Logistic:
        return (std::log(u) - std::log1p(-u)) / kLogisticRate;
    case Family::Laplace:
        return u < 0.5 ? std::log(2.0 * u) / kLaplaceRate : -std::log(2.0 * (1.0 - u)) / kLaplaceRate;
    case Family::Gumbel:
        return (-std::log(-std::log(u)) - std::numbers::egamma) * kGumbelScale;
    default:
        break;
    }
    // Symmetric families: solve in the lower half, where 1 - u is exact.
    if (u > 0.5) return -quantile(1.0 - u);
    if (u == 0.5) return 0.0;

    double z = normal_quantile_as241(u);
    if (family_ == Family::ScaledT) z *= 1.0 + 1.0 / df_;  // rough heavier-tail start
    // Safeguarded Newton inside a bracket on the negative half-line.
    double lo = z;
    double hi = 0.0;
    for (int i = 0; cdf(lo) > u; ++i) {
        if (i > 200) throw NumericError("quantile: bracket search failed");
        hi = lo;
        lo = 2.0 * lo - 1.0;
    }
    if (z < lo || z > hi) z = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double err = cdf(z) - u;
        if (std::abs(err) <= 1e-15 * u) return z;
        if (err > 0.0) {
            hi = z;
        } else {
            lo = z;
        }
        const double p = pdf(z);
        double next = p > 0.0 ? z - err / p : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - z) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(z)) {
            return next;
        }
        z = next;
    }
    return z;
}

double StandardizedDistribution::upper_quantile(double v) const {
    if (!(v > 0.0 && v < 1.0)) throw DomainError("upper_quantile: argument must lie in (0, 1)");
    if (family_ == Family::Gumbel) {
        return (-std::log(-std::log1p(-v)) - std::numbers::egamma) * kGumbelScale;
    }
    return -quantile(v);
}

std::vector<double> StandardizedDistribution::kinks() const {
    if (family_ == Family::Laplace) return {0.0};
    return {};
}

std::string StandardizedDistribution::name() const {
    switch (family_) {
    case Family::StdNormal: return "std_normal";
    case Family::Logistic: return "logistic";
    case Family::Laplace: return "laplace";
    case Family::Gumbel: return "gumbel";
    case Family::ScaledT: return "scaled_t";
    }
    return "unknown";
}

std::string StandardizedDistribution::label() const {
    if (family_ != Family::ScaledT) return name();
    std::ostringstream os;
    os << name() << "(df=" << df_ << ")";
    return os.str();
}

StandardizedDistribution parse_distribution(std::string_view name, std::optional<double> df) {
    if (name == "std_normal" || name == "normal") return StandardizedDistribution::std_normal();
    if (name == "logistic") return StandardizedDistribution::logistic();
    if (name == "laplace") return StandardizedDistribution::laplace();
    if (name == "gumbel") return StandardizedDistribution::gumbel();
    if (name == "scaled_t") return StandardizedDistribution::scaled_t(df.value_or(5.0));
    throw ParameterError("unknown distribution family '" + std::string(name) + "'");
}

Moments quadrature_moments(const StandardizedDistribution& d) {
    Moments m;
    m.total = quad::integrate_real_line([&](double z) { return d.pdf(z); });
    m.mean = quad::integrate_real_line([&](double z) { return z * d.pdf(z); });
    const double second = quad::integrate_real_line([&](double z) { return z * z * d.pdf(z); });
    m.variance = second - m.mean * m.mean;
    return m;
}

RegularityReport check_regularity(const StandardizedDistribution& noise,
                                  const StandardizedDistribution& factor,
                                  const std::vector<double>& grid, RatioProbe probe,
                                  double threshold) {
    if (grid.empty()) throw DomainError("check_regularity: empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i])) throw DomainError("check_regularity: non-finite grid point");
        if (i > 0 && grid[i] < grid[i - 1]) throw DomainError("check_regularity: grid not sorted");
    }
    if (!(probe.b2 > 0.0 && probe.b1 > probe.b2)) {
        throw DomainError("check_regularity: ratio probe needs 0 < b2 < b1");
    }

    constexpr double h = 1e-4;
    // Central first and third differences with one Richardson step.
    auto d1 = [&](auto&& f, double z) {
        auto central = [&](double s) { return (f(z + s) - f(z - s)) / (2.0 * s); };
        return (4.0 * central(h) - central(2.0 * h)) / 3.0;
    };
    auto d3 = [&](auto&& f, double z) {
        auto central = [&](double s) {
            return (f(z + 2.0 * s) - 2.0 * f(z + s) + 2.0 * f(z - s) - f(z - 2.0 * s)) /
                   (2.0 * s * s * s);
        };
        return (4.0 * central(h) - central(2.0 * h)) / 3.0;
    };
    auto near_kink = [](const std::vector<double>& kinks, double z, double reach) {
        return std::any_of(kinks.begin(), kinks.end(),
                           [&](double k) { return std::abs(z - k) <= reach; });
    };

    RegularityReport rep;
    const auto noise_kinks = noise.kinks();
    const auto factor_kinks = factor.kinks();
    auto gamma = [&](double z) { return factor.pdf(z); };
    auto log_g = [&](double z) { return noise.log_cdf(z); };
    auto log_1mg = [&](double z) { return noise.log_ccdf(z); };

    for (double z : grid) {
        if (!near_kink(factor_kinks, z, 2.0 * h)) {
            const double s = std::abs(d1(gamma, z));
            if (s > rep.max_abs_factor_slope) {
                rep.max_abs_factor_slope = s;
                rep.factor_slope_argmax = z;
            }
        }
        if (near_kink(noise_kinks, z, 4.0 * h)) {
            rep.excluded.push_back(z);
            continue;
        }
        rep.max_abs_d3_log_cdf = std::max(rep.max_abs_d3_log_cdf, std::abs(d3(log_g, z)));
        rep.max_abs_d3_log_ccdf = std::max(rep.max_abs_d3_log_ccdf, std::abs(d3(log_1mg, z)));
    }
    if (!rep.excluded.empty()) {
        std::ostringstream os;
        os << rep.excluded.size() << " grid point(s) within the difference stencil of a kink of "
           << noise.name() << " excluded from the third-derivative scan";
        rep.notes.push_back(os.str());
    }

    double reach = 0.0;
    for (double z : grid) reach = std::max(reach, std::abs(z));
    for (double z : grid) {
        if (std::abs(z) < 0.5 * reach) continue;
        const double lr = factor.log_pdf(probe.b1 * z + probe.c1) - factor.log_pdf(probe.b2 * z + probe.c2);
        rep.tail_ratio = std::max(rep.tail_ratio, std::exp(lr));
    }

    auto bad = [&](double v) { return !std::isfinite(v) || v > threshold; };
    if (bad(rep.max_abs_factor_slope)) rep.notes.push_back("factor slope proxy diverges");
    if (bad(rep.max_abs_d3_log_cdf) || bad(rep.max_abs_d3_log_ccdf)) {
        rep.notes.push_back("third log-derivative proxy diverges");
    }
    if (bad(rep.tail_ratio)) rep.notes.push_back("tail ratio proxy diverges");
    rep.divergent = bad(rep.max_abs_factor_slope) || bad(rep.max_abs_d3_log_cdf) ||
                    bad(rep.max_abs_d3_log_ccdf) || bad(rep.tail_ratio);
    return rep;
}

} // namespace latcorr
