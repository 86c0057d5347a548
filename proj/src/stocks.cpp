#include "latcorr/stocks.hpp"

#include "latcorr/dist.hpp"
#include "latcorr/error.hpp"
#include "latcorr/estimators.hpp"
#include "latcorr/experiments.hpp"
#include "latcorr/model.hpp"
#include "latcorr/rng.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace latcorr {

Panel::Panel(std::vector<std::string> d, std::vector<std::string> t)
    : dates(std::move(d)), tickers(std::move(t)), values(dates.size() * tickers.size(), kMissing) {}

std::vector<double> Panel::row(std::size_t t) const {
    return {values.begin() + static_cast<std::ptrdiff_t>(t * cols()),
            values.begin() + static_cast<std::ptrdiff_t>((t + 1) * cols())};
}

bool Panel::row_complete(std::size_t t) const {
    for (std::size_t i = 0; i < cols(); ++i) {
        if (missing(t, i)) return false;
    }
    return true;
}

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_number(const std::string& s, double& v) {
    if (s.empty()) return false;
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(v);
}

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string normalize_date(const std::string& text) {
    const std::string s = trim(text);
    int y = 0;
    int m = 0;
    int d = 0;
    int used = 0;
    if (s.size() < 10 || std::sscanf(s.c_str(), "%4d-%2d-%2d%n", &y, &m, &d, &used) != 3 || used != 10) {
        throw FormatError("unparseable date '" + text + "'");
    }
    if (s.size() > 10 && s[10] != 'T' && s[10] != ' ') throw FormatError("unparseable date '" + text + "'");
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw FormatError("invalid calendar date '" + text + "'");
    return s.substr(0, 10);
}

Panel ingest_prices(std::istream& in, PriceFormat format, IngestReport* report) {
    IngestReport local;
    IngestReport& rep = report ? *report : local;
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!trim(line).empty() && line[0] != '#') {
            header = split_csv(line);
            break;
        }
    }
    if (header.empty()) throw FormatError("price file is empty");
    const std::vector<std::string> raw_header = header;
    for (auto& h : header) h = lower(h);

    // (date, ticker) -> close; last row wins
    std::map<std::pair<std::string, std::string>, double> cells;
    std::set<std::string> tickers;
    std::set<std::string> dates;
    auto put = [&](const std::string& date, const std::string& ticker, double close, std::size_t line_no) {
        dates.insert(date);
        tickers.insert(ticker);
        const auto key = std::make_pair(date, ticker);
        if (cells.count(key)) {
            ++rep.duplicates;
            rep.warnings.push_back("line " + std::to_string(line_no) + ": duplicate " + date + " " + ticker +
                                   ", keeping the last value");
        }
        cells[key] = close;
    };

    auto col = [&](const char* name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw FormatError(std::string("price file: missing column '") + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };

    std::size_t line_no = 1;
    if (format == PriceFormat::Long) {
        for (const char* need : {"date", "open", "high", "low", "close", "volume", "name"}) col(need);
        const std::size_t c_date = col("date");
        const std::size_t c_close = col("close");
        const std::size_t c_name = col("name");
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty() || line[0] == '#') continue;
            const auto cells_in = split_csv(line);
            if (cells_in.size() != header.size()) {
                throw FormatError("price file line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " fields");
            }
            ++rep.rows_read;
            const std::string date = normalize_date(cells_in[c_date]);
            const std::string& ticker = cells_in[c_name];
            if (ticker.empty()) throw FormatError("price file line " + std::to_string(line_no) + ": empty Name");
            double close = 0.0;
            if (!parse_number(cells_in[c_close], close)) {
                rep.warnings.push_back("line " + std::to_string(line_no) + ": missing close, cell masked");
                dates.insert(date);
                tickers.insert(ticker);
                continue;
            }
            if (close <= 0.0) {
                ++rep.rejected_nonpositive;
                rep.warnings.push_back("line " + std::to_string(line_no) + ": nonpositive close rejected");
                dates.insert(date);
                tickers.insert(ticker);
                continue;
            }
            put(date, ticker, close, line_no);
        }
    } else {
        if (header.size() < 2 || header[0] != "date") throw FormatError("wide price file: first column must be date");
        const std::vector<std::string> names(raw_header.begin() + 1, raw_header.end());
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty() || line[0] == '#') continue;
            const auto cells_in = split_csv(line);
            if (cells_in.size() != header.size()) {
                throw FormatError("price file line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " fields");
            }
            ++rep.rows_read;
            const std::string date = normalize_date(cells_in[0]);
            dates.insert(date);
            for (std::size_t i = 1; i < cells_in.size(); ++i) {
                tickers.insert(names[i - 1]);
                double close = 0.0;
                if (!parse_number(cells_in[i], close)) continue;
                if (close <= 0.0) {
                    ++rep.rejected_nonpositive;
                    rep.warnings.push_back("line " + std::to_string(line_no) + ": nonpositive close for " +
                                           names[i - 1] + " rejected");
                    continue;
                }
                put(date, names[i - 1], close, line_no);
            }
        }
    }
    if (dates.empty()) throw FormatError("price file has a header but no rows");

    Panel p(std::vector<std::string>(dates.begin(), dates.end()), std::vector<std::string>(tickers.begin(), tickers.end()));
    std::map<std::string, std::size_t> di;
    std::map<std::string, std::size_t> ti;
    for (std::size_t t = 0; t < p.rows(); ++t) di[p.dates[t]] = t;
    for (std::size_t i = 0; i < p.cols(); ++i) ti[p.tickers[i]] = i;
    for (const auto& [key, v] : cells) p.at(di[key.first], ti[key.second]) = v;
    if (rep.rejected_nonpositive > 0) {
        p.notes.push_back(std::to_string(rep.rejected_nonpositive) + " nonpositive close rows rejected");
    }
    return p;
}

Panel ingest_prices(const std::string& path, PriceFormat format, IngestReport* report) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open price file " + path);
    return ingest_prices(in, format, report);
}

Panel log_returns(const Panel& prices) {
    if (prices.rows() < 2) throw DomainError("log_returns: need at least two dates");
    Panel r(std::vector<std::string>(prices.dates.begin() + 1, prices.dates.end()), prices.tickers);
    for (std::size_t t = 1; t < prices.rows(); ++t) {
        for (std::size_t i = 0; i < prices.cols(); ++i) {
            if (prices.missing(t, i) || prices.missing(t - 1, i)) continue;
            r.at(t - 1, i) = std::log(prices.at(t, i) / prices.at(t - 1, i));
        }
    }
    return r;
}

Panel rolling_standardize(const Panel& returns, std::size_t window) {
    if (window < 2) throw DomainError("rolling_standardize: window must be at least 2");
    if (returns.rows() <= window) {
        throw DomainError("rolling_standardize: need more than " + std::to_string(window) + " dates");
    }
    Panel x(std::vector<std::string>(returns.dates.begin() + static_cast<std::ptrdiff_t>(window), returns.dates.end()),
            returns.tickers);
    std::size_t zero_sd = 0;
    const double w = static_cast<double>(window);
    for (std::size_t i = 0; i < returns.cols(); ++i) {
        for (std::size_t t = window; t < returns.rows(); ++t) {
            if (returns.missing(t, i)) continue;
            double mean = 0.0;
            bool gap = false;
            for (std::size_t k = t - window; k < t; ++k) {
                if (returns.missing(k, i)) {
                    gap = true;
                    break;
                }
                mean += returns.at(k, i);
            }
            if (gap) continue;
            mean /= w;
            double ss = 0.0;
            for (std::size_t k = t - window; k < t; ++k) ss += (returns.at(k, i) - mean) * (returns.at(k, i) - mean);
            const double sd = std::sqrt(ss / (w - 1.0));
            if (!(sd > 0.0)) {
                ++zero_sd;
                continue;
            }
            x.at(t - window, i) = (returns.at(t, i) - mean) / sd;
        }
    }
    if (zero_sd > 0) x.notes.push_back(std::to_string(zero_sd) + " cells masked: zero window standard deviation");
    return x;
}

std::vector<std::pair<double, double>> qq_data(const std::vector<double>& x) {
    if (x.size() < 2) throw DomainError("qq_data: need at least two values");
    for (double v : x) {
        if (!std::isfinite(v)) throw DomainError("qq_data: masked or non-finite value");
    }
    std::vector<double> s = x;
    std::sort(s.begin(), s.end());
    const auto g = StandardizedDistribution::std_normal();
    const double m = static_cast<double>(s.size());
    std::vector<std::pair<double, double>> out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        out.emplace_back(g.quantile((static_cast<double>(i) + 0.5) / m), s[i]);
    }
    return out;
}

std::vector<DailyEstimate> daily_estimates(const Panel& sp, double tau, double tau1, double tau2, unsigned workers) {
    if (sp.cols() < 2) throw DomainError("daily_estimates: need at least two tickers");
    if (!(tau1 < tau2)) throw DomainError("daily_estimates: need tau1 < tau2");
    ModelConfig cfg;
    cfg.tau = tau;
    cfg.tau1 = tau1;
    cfg.tau2 = tau2;
    std::vector<DailyEstimate> rows(sp.rows());
    parallel_for(sp.rows(), workers, [&](std::size_t t) {
        DailyEstimate& d = rows[t];
        d.date = sp.dates[t];
        if (!sp.row_complete(t)) {
            d.note = "skipped: masked cells";
            return;
        }
        LatentSample ls;
        ls.x = sp.row(t);
        d.ustat = ustat_common_corr(ls.x).a_hat;
        const auto tri = trinary_moment(discretize_trinary(ls, tau1, tau2), tau1, tau2, cfg.noise);
        d.trinary = tri.a_hat;
        const auto mle = binary_mle(discretize_binary(ls, tau), cfg);
        d.binary_mle = mle.a_hat;
        std::string note;
        if (tri.degenerate) note = "trinary degenerate";
        if (mle.degenerate) note += std::string(note.empty() ? "" : ";") + "binary degenerate";
        d.note = note;
    });
    return rows;
}

Panel synthetic_standardized_panel(std::size_t m, std::size_t days, double a_star, std::uint64_t seed) {
    ModelConfig cfg;
    cfg.a_star = a_star;
    std::vector<std::string> dates;
    std::vector<std::string> tickers;
    char buf[32];
    for (std::size_t t = 0; t < days; ++t) {
        std::snprintf(buf, sizeof buf, "day%05zu", t + 1);
        dates.emplace_back(buf);
    }
    for (std::size_t i = 0; i < m; ++i) {
        std::snprintf(buf, sizeof buf, "S%03zu", i + 1);
        tickers.emplace_back(buf);
    }
    Panel p(std::move(dates), std::move(tickers));
    for (std::size_t t = 0; t < days; ++t) {
        const auto ls = simulate_latent(cfg, m, substream(seed, t));
        for (std::size_t i = 0; i < m; ++i) p.at(t, i) = ls.x[i];
    }
    return p;
}

Panel synthetic_price_panel(std::size_t m, std::size_t days, double a_star, std::uint64_t seed) {
    const Panel x = synthetic_standardized_panel(m, days, a_star, seed);
    std::vector<std::string> dates;
    std::chrono::sys_days day = std::chrono::year{2000} / std::chrono::January / 3;
    char buf[16];
    while (dates.size() < days + 1) {
        const std::chrono::weekday wd{day};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) {
            const std::chrono::year_month_day ymd{day};
            std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                          static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
            dates.emplace_back(buf);
        }
        day += std::chrono::days{1};
    }
    Panel p(std::move(dates), x.tickers);
    const UniformStream scales(substream(seed, ~std::uint64_t{0}));
    for (std::size_t i = 0; i < m; ++i) {
        const double mu = 0.0004 * (scales.uniform(2 * i) - 0.5);
        const double sigma = 0.01 + 0.02 * scales.uniform(2 * i + 1);
        double price = 50.0 + 100.0 * scales.uniform(2 * m + i);
        p.at(0, i) = price;
        for (std::size_t t = 0; t < days; ++t) {
            price *= std::exp(mu + sigma * x.at(t, i));
            p.at(t + 1, i) = price;
        }
    }
    return p;
}

void write_panel_csv(std::ostream& os, const Panel& p) {
    os << "date";
    for (const auto& t : p.tickers) os << ',' << t;
    os << '\n';
    for (std::size_t t = 0; t < p.rows(); ++t) {
        os << p.dates[t];
        for (std::size_t i = 0; i < p.cols(); ++i) os << ',' << fmt(p.at(t, i));
        os << '\n';
    }
}

void write_long_prices_csv(std::ostream& os, const Panel& prices) {
    os << "date,open,high,low,close,volume,Name\n";
    for (std::size_t t = 0; t < prices.rows(); ++t) {
        for (std::size_t i = 0; i < prices.cols(); ++i) {
            if (prices.missing(t, i)) continue;
            const std::string v = fmt(prices.at(t, i));
            os << prices.dates[t] << ',' << v << ',' << v << ',' << v << ',' << v << ",0," << prices.tickers[i] << '\n';
        }
    }
}

void write_daily_csv(std::ostream& os, const std::vector<DailyEstimate>& rows) {
    os << "date,ustat,trinary,binary_mle,note\n";
    for (const auto& r : rows) {
        os << r.date << ',' << fmt(r.ustat) << ',' << fmt(r.trinary) << ',' << fmt(r.binary_mle) << ',' << r.note
           << '\n';
    }
}

void write_qq_csv(std::ostream& os, const std::vector<std::pair<double, double>>& qq) {
    os << "theoretical,empirical\n";
    for (const auto& [a, b] : qq) os << fmt(a) << ',' << fmt(b) << '\n';
}

} // namespace latcorr
