#include "latcorr/cli.hpp"

#include "latcorr/dist.hpp"
#include "latcorr/error.hpp"
#include "latcorr/estimators.hpp"
#include "latcorr/experiments.hpp"
#include "latcorr/likelihood.hpp"
#include "latcorr/model.hpp"
#include "latcorr/stocks.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

namespace latcorr {

namespace {

using nlohmann::json;

struct UsageError : Error {
    using Error::Error;
};

// Flags shared by every command that builds a model.
struct ModelFlags {
    int case_id = 0;
    std::string noise = "std_normal";
    double noise_df = 5.0;
    std::string factor = "std_normal";
    double factor_df = 5.0;
    double a_star = 0.5;
    double tau = 0.0;
    double tau1 = -1.0;
    double tau2 = 1.0;
};

const char* const kExplicitModelFlags[] = {"--noise", "--noise-df", "--factor", "--factor-df",
                                           "--a-star", "--tau",     "--tau1",   "--tau2"};

// Flags shared by every command.
struct CommonFlags {
    std::string config_path;
    std::string output;
    std::string output_dir;
    std::string format = "csv";
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

void add_model_flags(CLI::App* app, ModelFlags& f) {
    app->add_option("--case", f.case_id, "Preset case 1, 2 or 3 (wins over explicit model flags)")
                     ->check(CLI::Range(1, 3));
    app->add_option("--noise", f.noise, "Noise law: std_normal, logistic, laplace, gumbel, scaled_t");
    app->add_option("--noise-df", f.noise_df, "Degrees of freedom when --noise scaled_t");
    app->add_option("--factor", f.factor, "Factor law (same names as --noise)");
    app->add_option("--factor-df", f.factor_df, "Degrees of freedom when --factor scaled_t");
    app->add_option("--a-star", f.a_star, "True common correlation");
    app->add_option("--tau", f.tau, "Binary threshold");
    app->add_option("--tau1", f.tau1, "Lower trinary breakpoint");
    app->add_option("--tau2", f.tau2, "Upper trinary breakpoint");
}

void add_common_flags(CLI::App* app, CommonFlags& c, bool with_workers) {
    app->add_option("--config", c.config_path, "JSON config (case, n_list, reps, seed, grid, output_path)");
    app->add_option("-o,--output", c.output, "Write data to this file instead of standard output");
    app->add_option("--output-dir", c.output_dir, "Write <experiment>_<case>_<seed>.csv into this directory");
    app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--seed", c.seed, "Root seed");
    if (with_workers) app->add_option("--workers", c.workers, "Worker threads (default: LATENT_CORR_WORKERS or 1)");
}

CaseSpec resolve_model(const CLI::App* cmd, const ModelFlags& f, const ExperimentConfig& cfg, std::ostream& err) {
    int id = f.case_id;
    if (!cmd->get_option("--case")->count() && cfg.case_id) id = *cfg.case_id;
    if (id != 0) {
        for (const char* name : kExplicitModelFlags) {
            if (cmd->get_option(name)->count()) err << "warning: preset case " << id << " overrides " << name << '\n';
        }
        return CaseSpec::preset(id);
    }
    CaseSpec cs;
    cs.case_id = 0;
    cs.model.noise = parse_distribution(f.noise, f.noise_df);
    cs.model.factor = parse_distribution(f.factor, f.factor_df);
    cs.model.a_star = f.a_star;
    cs.model.tau = f.tau;
    cs.model.tau1 = f.tau1;
    cs.model.tau2 = f.tau2;
    cs.model.validate();
    return cs;
}

json model_json(const CaseSpec& cs) {
    return {{"case", cs.case_id == 0 ? json("custom") : json(cs.case_id)},
            {"noise", cs.model.noise.label()},
            {"factor", cs.model.factor.label()},
            {"a_star", cs.model.a_star},
            {"tau", cs.model.tau},
            {"tau1", cs.model.tau1},
            {"tau2", cs.model.tau2}};
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> g;
    try {
        if (text.find(':') != std::string::npos) {
            std::stringstream ss(text);
            std::string lo;
            std::string hi;
            std::string step;
            std::getline(ss, lo, ':');
            std::getline(ss, hi, ':');
            std::getline(ss, step, ':');
            return make_grid(std::stod(lo), std::stod(hi), std::stod(step));
        }
        std::stringstream ss(text);
        std::string cell;
        while (std::getline(ss, cell, ',')) g.push_back(std::stod(cell));
    } catch (const std::logic_error&) {
        throw UsageError("bad --grid '" + text + "' (use lo:hi:step or a comma list)");
    }
    return g;
}

unsigned default_workers() {
    const char* env = std::getenv("LATENT_CORR_WORKERS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 1024) throw UsageError("LATENT_CORR_WORKERS must be a positive integer");
    return static_cast<unsigned>(v);
}

// Parses a CSV body (after comment lines) into a JSON array of row objects.
json csv_to_json(const std::string& body) {
    std::istringstream is(body);
    std::string line;
    std::vector<std::string> header;
    json rows = json::array();
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cell;
        std::stringstream ss(s);
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto cells = split(line);
        if (header.empty()) {
            header = cells;
            continue;
        }
        json row = json::object();
        for (std::size_t i = 0; i < header.size(); ++i) {
            const std::string c = i < cells.size() ? cells[i] : "";
            char* end = nullptr;
            errno = 0;
            if (!c.empty() && c[0] != '-') {
                const unsigned long long uv = std::strtoull(c.c_str(), &end, 10);
                if (errno == 0 && end == c.c_str() + c.size()) {
                    row[header[i]] = uv;
                    continue;
                }
            } else if (!c.empty()) {
                const long long iv = std::strtoll(c.c_str(), &end, 10);
                if (errno == 0 && end == c.c_str() + c.size()) {
                    row[header[i]] = iv;
                    continue;
                }
            }
            const double v = std::strtod(c.c_str(), &end);
            if (c.empty()) {
                row[header[i]] = nullptr;
            } else if (end == c.c_str() + c.size() && std::isfinite(v)) {
                row[header[i]] = v;
            } else {
                row[header[i]] = c;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

class Emitter {
public:
    Emitter(std::string command, const CommonFlags& common, std::ostream& out, std::ostream& err)
        : command_(std::move(command)), common_(common), out_(out), err_(err) {}

    void emit(const json& resolved, const std::string& csv_body, const std::string& case_label) {
        std::ostringstream doc;
        if (common_.format == "json") {
            json j = {{"tool", std::string("latcorr ") + kVersion},
                      {"command", command_},
                      {"config", resolved},
                      {"seed", common_.seed},
                      {"rows", csv_to_json(csv_body)}};
            doc << j.dump(2) << '\n';
        } else {
            doc << "# latcorr " << kVersion << '\n';
            doc << "# command: " << command_ << '\n';
            doc << "# config: " << resolved.dump() << '\n';
            doc << "# seed: " << common_.seed << '\n';
            doc << csv_body;
        }
        std::string path = common_.output;
        if (path.empty() && !common_.output_dir.empty()) {
            std::filesystem::create_directories(common_.output_dir);
            const std::string ext = common_.format == "json" ? ".json" : ".csv";
            path = (std::filesystem::path(common_.output_dir) /
                    (command_ + "_" + case_label + "_" + std::to_string(common_.seed) + ext))
                       .string();
        }
        if (path.empty()) {
            out_ << doc.str();
            return;
        }
        std::ofstream f(path, std::ios::binary);
        if (!f) throw UsageError("cannot write " + path);
        f << doc.str();
        err_ << "wrote " << path << '\n';
    }

private:
    std::string command_;
    const CommonFlags& common_;
    std::ostream& out_;
    std::ostream& err_;
};

ExperimentConfig load_config(const CLI::App* cmd, CommonFlags& c) {
    if (c.config_path.empty()) return {};
    auto cfg = load_experiment_config(c.config_path);
    if (!cmd->get_option("--seed")->count() && cfg.seed) c.seed = *cfg.seed;
    if (c.output.empty() && c.output_dir.empty() && !cfg.output_path.empty()) c.output_dir = cfg.output_path;
    return cfg;
}

std::string read_stream(std::istream& in) {
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Columns x_i/x, bit, cat of a sample CSV such as `simulate` writes.
struct SampleColumns {
    std::vector<double> x;
    std::vector<std::uint8_t> bit;
    std::vector<std::uint8_t> cat;
};

SampleColumns read_sample_csv(std::istream& in) {
    SampleColumns s;
    std::string line;
    std::vector<std::string> header;
    int cx = -1;
    int cb = -1;
    int cc = -1;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (header.empty()) {
            header = cells;
            for (std::size_t i = 0; i < header.size(); ++i) {
                if (header[i] == "x_i" || header[i] == "x") cx = static_cast<int>(i);
                if (header[i] == "bit") cb = static_cast<int>(i);
                if (header[i] == "cat") cc = static_cast<int>(i);
            }
            if (cx < 0 && cb < 0 && cc < 0) throw FormatError("sample csv needs an x_i, bit or cat column");
            continue;
        }
        if (cells.size() != header.size()) throw FormatError("sample csv: ragged row: " + line);
        try {
            if (cx >= 0) s.x.push_back(std::stod(cells[static_cast<std::size_t>(cx)]));
            if (cb >= 0) s.bit.push_back(static_cast<std::uint8_t>(std::stoi(cells[static_cast<std::size_t>(cb)])));
            if (cc >= 0) s.cat.push_back(static_cast<std::uint8_t>(std::stoi(cells[static_cast<std::size_t>(cc)])));
        } catch (const std::logic_error&) {
            throw FormatError("sample csv: malformed number in: " + line);
        }
    }
    if (header.empty()) throw FormatError("sample csv is empty");
    return s;
}

PriceFormat parse_price_format(const std::string& s) {
    if (s == "long") return PriceFormat::Long;
    if (s == "wide") return PriceFormat::Wide;
    throw UsageError("--input-format must be long or wide");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Latent threshold correlation toolkit", "latcorr"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("latcorr ") + kVersion);

    CommonFlags common;
    ModelFlags model;
    std::function<void()> action;

    // simulate
    std::size_t n = 100;
    bool binary = false;
    bool trinary = false;
    double fixed_y = 0.0;
    CLI::Option* fixed_y_opt = nullptr;
    auto* sim = app.add_subcommand("simulate", "Draw one sample from the model");
    add_model_flags(sim, model);
    add_common_flags(sim, common, false);
    sim->add_option("--n", n, "Sample size")->check(CLI::PositiveNumber);
    sim->add_flag("--binary", binary, "Emit the binary view (default)");
    sim->add_flag("--trinary", trinary, "Emit the trinary view");
    fixed_y_opt = sim->add_option("--fixed-y", fixed_y, "Condition on this value of the factor");

    // loglik-curve / scaled-lik-curve
    std::size_t curves = 10;
    std::string grid_text;
    bool curve_trinary = false;
    bool curve_expected = false;
    auto add_curve_cmd = [&](const char* name, const char* help) {
        auto* c = app.add_subcommand(name, help);
        add_model_flags(c, model);
        add_common_flags(c, common, true);
        c->add_option("--n", n, "Sample size")->check(CLI::PositiveNumber);
        c->add_option("--curves", curves, "Number of sample curves")->check(CLI::PositiveNumber);
        c->add_option("--grid", grid_text, "Grid of a values: lo:hi:step or a comma list");
        return c;
    };
    auto* ll_cmd = add_curve_cmd("loglik-curve", "Normalized log-likelihood curves with averaged and limit curves");
    ll_cmd->add_flag("--trinary", curve_trinary, "Use the trinary view instead of the binary one");
    ll_cmd->add_flag("--expected", curve_expected, "Add the exact expected curve (cost grows with n)");
    auto* sl_cmd = add_curve_cmd("scaled-lik-curve", "Scaled likelihood curves with averaged and limit curves");

    // estimate
    std::string method_text = "trinary_moment";
    std::string input;
    auto* est = app.add_subcommand("estimate", "Estimate the common correlation from one sample");
    add_model_flags(est, model);
    add_common_flags(est, common, false);
    est->add_option("--method", method_text, "trinary_moment, binary_mle, hidden_pairs or ustat");
    est->add_option("--input", input, "Sample CSV with x_i, bit or cat columns ('-' for standard input)");
    est->add_option("--n", n, "Sample size when simulating")->check(CLI::PositiveNumber);

    // mc-sweep
    std::vector<std::size_t> ns;
    std::size_t reps = 2000;
    CLI::Option* reps_opt = nullptr;
    auto* mc = app.add_subcommand("mc-sweep", "Monte Carlo mean absolute error across sample sizes");
    add_model_flags(mc, model);
    add_common_flags(mc, common, true);
    mc->add_option("--ns", ns, "Comma-separated sample sizes")->delimiter(',');
    reps_opt = mc->add_option("--reps", reps, "Replications per sample size");
    mc->add_option("--method", method_text, "Estimator (default trinary_moment)");

    // slope
    auto* slope = app.add_subcommand("slope", "Log-log OLS slope of an mc-sweep table read from standard input");
    add_common_flags(slope, common, false);
    slope->add_option("--input", input, "Read the table from this file instead");

    // kl-curve
    double a1 = 0.3;
    double a2 = 0.7;
    auto* kl = app.add_subcommand("kl-curve", "KL divergence between two correlation values across n");
    add_model_flags(kl, model);
    add_common_flags(kl, common, false);
    kl->add_option("--a1", a1, "First correlation");
    kl->add_option("--a2", a2, "Second correlation");
    auto* kl_n = kl->add_option("--n", n, "Single sample size");
    kl->add_option("--ns", ns, "Comma-separated sample sizes")->delimiter(',')->excludes(kl_n);

    // stocks
    std::string input_format = "long";
    std::size_t window = 100;
    double s_tau = 0.0;
    double s_tau1 = -0.5;
    double s_tau2 = 0.5;
    std::string ticker;
    std::string qq_source = "standardized";
    std::size_t m = 63;
    std::size_t days = 100;
    double s_a_star = 0.5;
    auto* stocks = app.add_subcommand("stocks", "Price panel pipeline");
    stocks->require_subcommand(1);
    auto* s_ing = stocks->add_subcommand("ingest", "Pivot a price CSV to a wide close-price panel");
    auto* s_est = stocks->add_subcommand("estimate", "Daily U-statistic, trinary and binary-MLE estimates");
    auto* s_qq = stocks->add_subcommand("qq", "Normal Q-Q data for one ticker");
    auto* s_syn = stocks->add_subcommand("synth", "Synthetic long-format prices from the Gaussian-sequence model");
    for (auto* c : {s_ing, s_est, s_qq}) {
        add_common_flags(c, common, c == s_est);
        c->add_option("--input", input, "Price CSV")->required();
        c->add_option("--input-format", input_format, "long (date,open,high,low,close,volume,Name) or wide");
    }
    for (auto* c : {s_est, s_qq}) c->add_option("--window", window, "Trailing standardization window");
    s_est->add_option("--tau", s_tau, "Binary threshold");
    s_est->add_option("--tau1", s_tau1, "Lower trinary breakpoint");
    s_est->add_option("--tau2", s_tau2, "Upper trinary breakpoint");
    s_qq->add_option("--ticker", ticker, "Ticker (default: first)");
    s_qq->add_option("--source", qq_source, "returns or standardized")->check(CLI::IsMember({"returns", "standardized"}));
    add_common_flags(s_syn, common, false);
    s_syn->add_option("--m", m, "Number of tickers")->check(CLI::Range(2, 100000));
    s_syn->add_option("--days", days, "Days with a full standardization window")->check(CLI::PositiveNumber);
    s_syn->add_option("--window", window, "Warm-up window");
    s_syn->add_option("--a-star", s_a_star, "Common correlation");

    // check-dist
    std::string dist_name = "std_normal";
    double dist_df = 5.0;
    std::string reg_factor;
    auto* cd = app.add_subcommand("check-dist", "Moments, quantile round trip and regularity proxies of a law");
    add_common_flags(cd, common, false);
    cd->add_option("--dist", dist_name, "Law under test");
    cd->add_option("--df", dist_df, "Degrees of freedom for scaled_t");
    cd->add_option("--factor", reg_factor, "Factor law for the regularity check (default: same as --dist)");
    cd->add_option("--grid", grid_text, "Regularity grid lo:hi:step (default -8:8:0.05)");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        common.workers = default_workers();
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion& v) {
        out << v.what() << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run 'latcorr --help' for usage\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    if (common.workers == 0) {
        err << "error: --workers must be at least 1\n";
        return kExitUsage;
    }

    const CLI::App* leaf = &app;
    while (!leaf->get_subcommands().empty()) leaf = leaf->get_subcommands().front();

    try {
        if (sim->parsed()) {
            const auto cfg = load_config(leaf, common);
            const auto cs = resolve_model(sim, model, cfg, err);
            if (binary && trinary) throw UsageError("choose one of --binary and --trinary");
            const auto ls = fixed_y_opt->count() ? simulate_latent(cs.model, n, common.seed, fixed_y)
                                                 : simulate_latent(cs.model, n, common.seed);
            std::ostringstream body;
            if (trinary) {
                write_csv(body, ls, discretize_trinary(ls, cs.model.tau1, cs.model.tau2));
            } else {
                write_csv(body, ls, discretize_binary(ls, cs.model.tau));
            }
            json resolved = model_json(cs);
            resolved["n"] = n;
            resolved["view"] = trinary ? "trinary" : "binary";
            resolved["y"] = ls.y;
            if (fixed_y_opt->count()) resolved["fixed_y"] = fixed_y;
            Emitter("simulate", common, out, err).emit(resolved, body.str(), cs.label());
        } else if (ll_cmd->parsed() || sl_cmd->parsed()) {
            const bool scaled = sl_cmd->parsed();
            const auto cfg = load_config(leaf, common);
            const auto cs = resolve_model(scaled ? sl_cmd : ll_cmd, model, cfg, err);
            std::vector<double> grid = grid_text.empty() ? cfg.grid : parse_grid(grid_text);
            if (grid.empty()) grid = make_grid(0.05, 0.95, 0.05);
            if (!cfg.n_list.empty() && !(scaled ? sl_cmd : ll_cmd)->get_option("--n")->count()) n = cfg.n_list.front();
            const CurveKind kind = scaled ? CurveKind::ScaledLik : (curve_trinary ? CurveKind::TrinaryLogLik : CurveKind::LogLik);
            auto set = curve_experiment(cs, kind, n, curves, grid, common.seed, common.workers);
            auto all = set.all();
            if (curve_expected) {
                if (kind != CurveKind::LogLik) throw UsageError("--expected applies to binary log-likelihood curves");
                all.push_back(expected_loglik_curve(cs.model, n, grid));
            }
            if (set.skipped > 0) err << "note: " << set.skipped << " degenerate samples left out\n";
            std::ostringstream body;
            write_curves_csv(body, all);
            json resolved = model_json(cs);
            resolved["n"] = n;
            resolved["curves"] = curves;
            resolved["grid"] = grid;
            resolved["kind"] = scaled ? "scaled-lik" : (curve_trinary ? "trinary-loglik" : "loglik");
            resolved["expected"] = curve_expected;
            Emitter(scaled ? "scaled-lik-curve" : "loglik-curve", common, out, err).emit(resolved, body.str(), cs.label());
        } else if (est->parsed()) {
            const auto cfg = load_config(leaf, common);
            const auto cs = resolve_model(est, model, cfg, err);
            const Method method = parse_method(method_text);
            SampleColumns cols;
            if (input.empty()) {
                const auto ls = simulate_latent(cs.model, n, common.seed);
                cols.x = ls.x;
            } else if (input == "-") {
                cols = read_sample_csv(in);
            } else {
                std::ifstream f(input);
                if (!f) throw FormatError("cannot open " + input);
                cols = read_sample_csv(f);
            }
            LatentSample ls;
            ls.x = cols.x;
            EstimateRecord r;
            switch (method) {
            case Method::TrinaryMoment: {
                if (cols.cat.empty() && cols.x.empty()) throw FormatError("trinary_moment needs a cat or x_i column");
                const TrinarySample ts = cols.cat.empty() ? discretize_trinary(ls, cs.model.tau1, cs.model.tau2)
                                                          : TrinarySample(cols.cat);
                r = trinary_moment(ts, cs.model.tau1, cs.model.tau2, cs.model.noise);
                break;
            }
            case Method::BinaryMLE: {
                if (cols.bit.empty() && cols.x.empty()) throw FormatError("binary_mle needs a bit or x_i column");
                const BinarySample bs = cols.bit.empty() ? discretize_binary(ls, cs.model.tau) : BinarySample(cols.bit);
                r = binary_mle(bs, cs.model);
                break;
            }
            case Method::HiddenPairs:
                if (cols.x.empty()) throw FormatError("hidden_pairs needs an x_i column");
                r = hidden_pairs(ls);
                break;
            case Method::UStatistic:
                if (cols.x.empty()) throw FormatError("ustat needs an x_i column");
                r = ustat_common_corr(cols.x);
                break;
            }
            if (r.degenerate) err << "warning: degenerate sample\n";
            std::ostringstream body;
            write_csv_header(body);
            write_csv_row(body, r);
            json resolved = model_json(cs);
            resolved["method"] = std::string(method_name(method));
            resolved["input"] = input.empty() ? json("simulated") : json(input);
            if (input.empty()) resolved["n"] = n;
            Emitter("estimate", common, out, err).emit(resolved, body.str(), cs.label());
        } else if (mc->parsed()) {
            const auto cfg = load_config(leaf, common);
            const auto cs = resolve_model(mc, model, cfg, err);
            if (ns.empty()) ns = cfg.n_list;
            if (ns.empty()) ns = {1000, 1500, 2000, 2500, 3000};
            if (!reps_opt->count() && cfg.reps) reps = *cfg.reps;
            const Method method = parse_method(method_text);
            const auto result = mc_error_sweep(cs, ns, reps, common.seed, method, common.workers);
            std::ostringstream body;
            write_mc_csv(body, result);
            json resolved = model_json(cs);
            resolved["ns"] = ns;
            resolved["reps"] = reps;
            resolved["method"] = std::string(method_name(method));
            Emitter("mc-sweep", common, out, err).emit(resolved, body.str(), cs.label());
        } else if (slope->parsed()) {
            load_config(leaf, common);
            MCResult result;
            if (input.empty() || input == "-") {
                std::istringstream is(read_stream(in));
                result = read_mc_csv(is);
            } else {
                std::ifstream f(input);
                if (!f) throw FormatError("cannot open " + input);
                result = read_mc_csv(f);
            }
            const double s = loglog_slope(result);
            std::ostringstream body;
            body << "slope,points\n" << fmt(s) << ',' << result.rows.size() << '\n';
            json resolved = {{"input", input.empty() ? "-" : input}};
            Emitter("slope", common, out, err).emit(resolved, body.str(), "mc");
        } else if (kl->parsed()) {
            const auto cfg = load_config(leaf, common);
            const auto cs = resolve_model(kl, model, cfg, err);
            if (ns.empty()) ns = kl_n->count() ? std::vector<std::size_t>{n} : cfg.n_list;
            if (ns.empty()) ns = {10, 100, 1000, 10000};
            const auto rows = kl_curve(cs, a1, a2, ns);
            std::ostringstream body;
            write_kl_csv(body, rows);
            json resolved = model_json(cs);
            resolved["a1"] = a1;
            resolved["a2"] = a2;
            resolved["ns"] = ns;
            Emitter("kl-curve", common, out, err).emit(resolved, body.str(), cs.label());
        } else if (s_ing->parsed() || s_est->parsed() || s_qq->parsed()) {
            load_config(leaf, common);
            IngestReport rep;
            const auto prices = ingest_prices(input, parse_price_format(input_format), &rep);
            for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
            if (rep.rejected_nonpositive > 0) err << "rejected " << rep.rejected_nonpositive << " nonpositive close rows\n";
            json resolved = {{"input", input}, {"input_format", input_format}};
            std::ostringstream body;
            std::string cmd;
            if (s_ing->parsed()) {
                cmd = "stocks-ingest";
                write_panel_csv(body, prices);
            } else if (s_est->parsed()) {
                cmd = "stocks-estimate";
                const auto sp = rolling_standardize(log_returns(prices), window);
                for (const auto& note : sp.notes) err << "note: " << note << '\n';
                write_daily_csv(body, daily_estimates(sp, s_tau, s_tau1, s_tau2, common.workers));
                resolved["window"] = window;
                resolved["tau"] = s_tau;
                resolved["tau1"] = s_tau1;
                resolved["tau2"] = s_tau2;
            } else {
                cmd = "stocks-qq";
                if (prices.cols() == 0) throw FormatError("price file has no tickers");
                std::size_t col = 0;
                if (!ticker.empty()) {
                    const auto it = std::find(prices.tickers.begin(), prices.tickers.end(), ticker);
                    if (it == prices.tickers.end()) throw UsageError("unknown ticker " + ticker);
                    col = static_cast<std::size_t>(it - prices.tickers.begin());
                }
                const auto r = log_returns(prices);
                const Panel src = qq_source == "returns" ? r : rolling_standardize(r, window);
                std::vector<double> xs;
                for (std::size_t t = 0; t < src.rows(); ++t) {
                    if (!src.missing(t, col)) xs.push_back(src.at(t, col));
                }
                write_qq_csv(body, qq_data(xs));
                resolved["ticker"] = prices.tickers[col];
                resolved["source"] = qq_source;
                if (qq_source == "standardized") resolved["window"] = window;
            }
            Emitter(cmd, common, out, err).emit(resolved, body.str(), "stocks");
        } else if (s_syn->parsed()) {
            load_config(leaf, common);
            const auto prices = synthetic_price_panel(m, days + window, s_a_star, common.seed);
            std::ostringstream body;
            write_long_prices_csv(body, prices);
            json resolved = {{"m", m}, {"days", days}, {"window", window}, {"a_star", s_a_star}};
            Emitter("stocks-synth", common, out, err).emit(resolved, body.str(), "stocks");
        } else if (cd->parsed()) {
            load_config(leaf, common);
            const auto d = parse_distribution(dist_name, dist_df);
            const auto factor = reg_factor.empty() ? d : parse_distribution(reg_factor, dist_df);
            const auto mom = quadrature_moments(d);
            double roundtrip = 0.0;
            for (int i = 1; i < 1000; ++i) {
                const double u = i / 1000.0;
                roundtrip = std::max(roundtrip, std::abs(d.cdf(d.quantile(u)) - u));
            }
            const auto grid = grid_text.empty() ? make_grid(-8.0, 8.0, 0.05) : parse_grid(grid_text);
            const auto reg = check_regularity(d, factor, grid);
            for (const auto& note : reg.notes) err << "note: " << note << '\n';
            std::ostringstream body;
            body << "quantity,value\n";
            body << "total," << fmt(mom.total) << '\n';
            body << "mean," << fmt(mom.mean) << '\n';
            body << "variance," << fmt(mom.variance) << '\n';
            body << "max_roundtrip_error," << fmt(roundtrip) << '\n';
            body << "max_abs_factor_slope," << fmt(reg.max_abs_factor_slope) << '\n';
            body << "factor_slope_argmax," << fmt(reg.factor_slope_argmax) << '\n';
            body << "max_abs_d3_log_cdf," << fmt(reg.max_abs_d3_log_cdf) << '\n';
            body << "max_abs_d3_log_ccdf," << fmt(reg.max_abs_d3_log_ccdf) << '\n';
            body << "tail_ratio," << fmt(reg.tail_ratio) << '\n';
            body << "excluded_points," << reg.excluded.size() << '\n';
            body << "divergent," << (reg.divergent ? 1 : 0) << '\n';
            json resolved = {{"dist", d.label()}, {"factor", factor.label()}, {"grid_points", grid.size()}};
            Emitter("check-dist", common, out, err).emit(resolved, body.str(), d.name());
        }
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitOk;
}

} // namespace latcorr
