#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace latcorr {

/// Dates x tickers matrix; NaN marks a missing cell.
struct Panel {
    std::vector<std::string> dates;     // YYYY-MM-DD, strictly increasing
    std::vector<std::string> tickers;
    std::vector<double> values;         // row-major, dates.size() x tickers.size()
    std::vector<std::string> notes;

    Panel() = default;
    Panel(std::vector<std::string> d, std::vector<std::string> t);

    std::size_t rows() const noexcept { return dates.size(); }
    std::size_t cols() const noexcept { return tickers.size(); }
    double& at(std::size_t t, std::size_t i) { return values[t * cols() + i]; }
    double at(std::size_t t, std::size_t i) const { return values[t * cols() + i]; }
    bool missing(std::size_t t, std::size_t i) const { return std::isnan(at(t, i)); }
    /// Copy of row t.
    std::vector<double> row(std::size_t t) const;
    bool row_complete(std::size_t t) const;
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

enum class PriceFormat {
    Long,   // date,open,high,low,close,volume,Name (any column order, case-insensitive)
    Wide,   // date,<ticker>,<ticker>,...
};

struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t rejected_nonpositive = 0;
    std::size_t duplicates = 0;
    std::vector<std::string> warnings;
};

/// Pivot a price CSV into a close-price panel. Tickers are sorted by name.
/// Throws FormatError for an empty file, a missing column or a bad date.
Panel ingest_prices(std::istream& in, PriceFormat format = PriceFormat::Long, IngestReport* report = nullptr);
Panel ingest_prices(const std::string& path, PriceFormat format = PriceFormat::Long, IngestReport* report = nullptr);

/// Accepts YYYY-MM-DD optionally followed by a time part; returns YYYY-MM-DD.
/// Throws FormatError otherwise.
std::string normalize_date(const std::string& text);

/// R(t) = log(V(t) / V(t-1)); one row fewer than the input.
Panel log_returns(const Panel& prices);

/// X(t) = (R(t) - mean) / sd over the `window` days strictly before t, sd with
/// divisor window - 1. Output starts at the first date with a full window.
/// Cells whose window has a gap, or whose window sd is zero, are masked.
Panel rolling_standardize(const Panel& returns, std::size_t window = 100);

/// (standard normal quantile at (i - 0.5)/m, i-th order statistic).
std::vector<std::pair<double, double>> qq_data(const std::vector<double>& x);

struct DailyEstimate {
    std::string date;
    double ustat = kMissing;
    double trinary = kMissing;
    double binary_mle = kMissing;
    std::string note;
};

/// Per-date U-statistic, trinary moment estimator (standard normal G) and
/// binary MLE. Incomplete rows keep their date with empty estimates and a note.
std::vector<DailyEstimate> daily_estimates(const Panel& standardized, double tau = 0.0, double tau1 = -0.5,
                                           double tau2 = 0.5, unsigned workers = 1);

/// Standardized Gaussian-sequence panel: X_i = sqrt(1 - a*) Y_i + sqrt(a*) Y
/// each day with standard normal Y_i and Y. Day t draws from substream(seed, t).
Panel synthetic_standardized_panel(std::size_t m, std::size_t days, double a_star, std::uint64_t seed);

/// Close prices whose log returns are mu_i + sigma_i X_i with X from the
/// Gaussian-sequence model; `days` + 1 dates starting 2000-01-03 on weekdays.
Panel synthetic_price_panel(std::size_t m, std::size_t days, double a_star, std::uint64_t seed);

/// Wide CSV: date,<tickers>; missing cells empty.
void write_panel_csv(std::ostream& os, const Panel& p);
/// Long CSV with the ingest header; open = high = low = close, volume 0.
void write_long_prices_csv(std::ostream& os, const Panel& prices);
/// date,ustat,trinary,binary_mle,note
void write_daily_csv(std::ostream& os, const std::vector<DailyEstimate>& rows);
/// theoretical,empirical
void write_qq_csv(std::ostream& os, const std::vector<std::pair<double, double>>& qq);

} // namespace latcorr
