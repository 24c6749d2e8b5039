// ssqw_cli: generate targets, train split-step walks, price calls and
// reproduce the reference experiments.
//
// Exit codes
//   0  success
//   1  training finished but best_mse exceeded --mse-gate
//   2  usage error (bad flags, bad config file)
//   3  unrepresentable target (no mass inside the domain)
//   4  missing or unreadable input file
//   5  optimizer failure
//   6  grid mismatch between target and trained files
//   7  quote CSV parse failure or empty date window
//
// Structured output goes to files (JSON, CSV); stdout carries summaries.
// Relative output paths are resolved against $SSQW_OUT_DIR when it is set.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssqw/ssqw.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ssqw;

namespace {

enum ExitCode : int {
    ok = 0,
    gate_failed = 1,
    usage = 2,
    unrepresentable = 3,
    missing_file = 4,
    optimizer_failure = 5,
    grid_mismatch = 6,
    ingest_failure = 7,
};

struct CliError : std::runtime_error {
    CliError(int code_, const std::string& what) : std::runtime_error(what), code(code_) {}
    int code;
};

// Reads nested JSON objects as CLI11 config items: {"train": {"steps": 7}}
// sets `--steps` on the `train` subcommand.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        flatten(j, {}, items);
        return items;
    }

private:
    static void flatten(const json& j, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& out) {
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                auto p = parents;
                p.push_back(key);
                flatten(value, p, out);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            out.push_back(std::move(item));
        }
    }

    static std::string scalar(const json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }
};

std::string resolve_out(const std::string& path) {
    const fs::path p(path);
    if (p.is_absolute()) return path;
    if (const char* dir = std::getenv("SSQW_OUT_DIR"); dir && *dir) return (fs::path(dir) / p).string();
    return path;
}

void ensure_parent(const std::string& path) {
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

void write_json(const std::string& path, const json& j) {
    ensure_parent(path);
    io::write_json_file(path, j);
}

void write_text(const std::string& path, const std::string& text) {
    ensure_parent(path);
    io::write_text_file(path, text);
}

json read_input_json(const std::string& path) {
    if (!fs::exists(path)) throw CliError(missing_file, "input file not found: " + path);
    try {
        return io::read_json_file(path);
    } catch (const std::ios_base::failure& e) {
        throw CliError(missing_file, e.what());
    } catch (const format_error& e) {
        throw CliError(usage, e.what());
    }
}

TargetDistribution read_target(const std::string& path) {
    const json j = read_input_json(path);
    try {
        return io::target_from_json(j);
    } catch (const format_error& e) {
        throw CliError(usage, path + ": " + e.what());
    }
}

std::vector<double> parse_angles(const std::string& text, std::size_t expected) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw CliError(usage, "cannot parse angle list: " + text);
        }
    }
    if (v.size() != expected) {
        throw CliError(usage, "expected " + std::to_string(expected) + " comma-separated angles, got: " + text);
    }
    return v;
}

InitialCondition make_initial(const std::string& coin, std::size_t x0) {
    InitialCondition c;
    c.x0 = x0;
    const double h = 1.0 / std::numbers::sqrt2;
    if (coin == "up") {
        c.alpha = 1.0;
        c.beta = 0.0;
    } else if (coin == "down") {
        c.alpha = 0.0;
        c.beta = 1.0;
    } else {
        c.alpha = h;
        c.beta = complex(0.0, h);
    }
    return c;
}

std::string format_row(const std::vector<std::string>& cells, const std::vector<int>& widths) {
    std::ostringstream os;
    for (std::size_t i = 0; i < cells.size(); ++i) os << std::left << std::setw(widths[i]) << cells[i];
    return os.str();
}

std::string num(double v, int precision = 6) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void print_target_summary(const TargetDistribution& t, const std::string& path) {
    const auto s = summarize(t);
    std::cout << "wrote " << path << "\n"
              << "  bins=" << t.n_bins() << " domain=(" << t.domain.lo << ", " << t.domain.hi << ")"
              << " mean=" << num(s.mean) << " std=" << num(s.stddev) << " argmax_bin=" << s.argmax << "\n";
}

// ---------------------------------------------------------------------------

struct GenTargetArgs {
    std::string kind;
    double mu = 7.5;
    double sigma = 1.5;
    std::optional<double> vol;
    double s0 = 2.0, strike = 2.0, rate = 0.05, maturity = 40.0;
    std::optional<double> drift;
    std::size_t bins = 16;
    double lo = 0.0, hi = 15.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::string params = "1.5707963267948966,0,0,1.5707963267948966,0,0";
    int steps = 7;
    std::optional<std::size_t> x0;
    std::string coin = "up";
    std::string out = "target.json";
};

int cmd_gen_target(const GenTargetArgs& a, const CLI::App& sub) {
    const Domain domain(a.lo, a.hi);
    TargetDistribution t;
    json config{{"kind", a.kind}, {"bins", a.bins}, {"lo", a.lo}, {"hi", a.hi}};

    if (a.kind == "normal" || a.kind == "lognormal" || a.kind == "uniform") {
        const Distribution d = a.kind == "normal"      ? Distribution::normal(a.mu, a.sigma)
                               : a.kind == "lognormal" ? Distribution::lognormal(a.mu, a.sigma)
                                                       : Distribution::uniform();
        t = a.samples == 0 ? analytic_histogram(d, domain, a.bins)
                           : sample_histogram(d, a.samples, domain, a.bins, a.seed);
        config.update(d.to_json());
        config["samples"] = a.samples;
        config["seed"] = a.seed;
    } else if (a.kind == "bs") {
        if (sub.count("--sigma") > 0 && a.vol) throw CliError(usage, "give either --sigma or --vol, not both");
        OptionSpec opt;
        opt.s0 = a.s0;
        opt.strike = a.strike;
        opt.rate = a.rate;
        opt.maturity = a.maturity;
        opt.mu = a.drift;
        opt.vol = a.vol.value_or(sub.count("--sigma") > 0 ? a.sigma : 0.4);
        opt.reading = a.vol ? SigmaReading::from_vol : SigmaReading::as_given;
        t = bs_lognormal_target(opt, domain, a.bins);
        config["option"] = t.provenance.at("option");
        config["sigma_reading"] = to_string(opt.reading);
    } else if (a.kind == "ssqw") {
        check_bin_count(a.bins);
        const int n = std::countr_zero(a.bins);
        const auto p = SsqwParams::from_array(parse_angles(a.params, 6));
        const auto init = make_initial(a.coin, a.x0.value_or(a.bins / 2));
        t = TargetDistribution(trained_distribution(init.make(n), p, WalkSchedule(a.steps)), domain,
                               {{"kind", "ssqw"}, {"params", io::params_to_json(p)}, {"steps", a.steps}});
        config["params"] = io::params_to_json(p);
        config["steps"] = a.steps;
        config["x0"] = init.x0;
        config["coin"] = a.coin;
    } else {
        throw CliError(usage, "unknown --kind " + a.kind);
    }

    t.provenance["config"] = config;
    const std::string path = resolve_out(a.out);
    write_json(path, io::to_json(t));
    print_target_summary(t, path);
    return ok;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string target;
    std::string out = "result.json";
    std::string csv;
    int steps = 7;
    int max_iters = 800;
    int restarts = 1;
    std::uint64_t seed = 0;
    bool symmetric = false;
    std::string optimizer = "cobyla";
    std::optional<std::size_t> x0;
    std::string coin;
    std::string init_params;
    double rho_begin = 0.5;
    double rho_end = 1e-6;
    int threads = 1;
    std::optional<double> mse_gate;
};

int cmd_train(const TrainArgs& a) {
    const TargetDistribution target = read_target(a.target);

    OptimizerConfig cfg;
    cfg.max_iters = a.max_iters;
    cfg.steps = WalkSchedule(a.steps);
    cfg.restarts = a.restarts;
    cfg.seed = a.seed;
    cfg.symmetric_mode = a.symmetric;
    cfg.optimizer = a.optimizer == "nelder-mead" ? OptimizerKind::nelder_mead : OptimizerKind::cobyla;
    cfg.initial_trust_radius = a.rho_begin;
    cfg.final_trust_radius = a.rho_end;
    cfg.threads = a.threads;
    // A symmetric search only yields mirror-symmetric output from the balanced coin state.
    const std::string coin = a.coin.empty() ? (a.symmetric ? "balanced" : "up") : a.coin;
    cfg.init = make_initial(coin, a.x0.value_or(mean_start_position(target)));
    if (!a.init_params.empty()) cfg.initial_params = SsqwParams::from_array(parse_angles(a.init_params, 6));

    const auto t0 = std::chrono::steady_clock::now();
    TrainingResult r;
    try {
        r = train(target, cfg);
    } catch (const std::invalid_argument& e) {
        throw CliError(usage, e.what());
    } catch (const std::exception& e) {
        throw CliError(optimizer_failure, std::string("optimizer failure: ") + e.what());
    }
    const double elapsed = seconds_since(t0);

    json j = io::to_json(r, cfg);
    j["target"] = {{"file", a.target}, {"lo", target.domain.lo}, {"hi", target.domain.hi}, {"n_bins", target.n_bins()}};
    j["config"]["coin"] = coin;
    const std::string path = resolve_out(a.out);
    write_json(path, j);
    const std::string csv = resolve_out(a.csv.empty() ? fs::path(a.out).replace_extension(".csv").string() : a.csv);
    write_text(csv, io::training_csv(target.probs, r.trained_dist));

    std::cout << "wrote " << path << " and " << csv << "\n"
              << "  best_mse=" << num(r.best_mse, 8) << " evaluations=" << r.iterations_used
              << " best_restart=" << r.best_restart << " optimizer=" << r.optimizer << " time=" << num(elapsed, 3)
              << "s\n";
    if (a.mse_gate && !(r.best_mse <= *a.mse_gate)) {
        std::cout << "  best_mse above gate " << *a.mse_gate << "\n";
        return gate_failed;
    }
    return ok;
}

// ---------------------------------------------------------------------------

struct PriceArgs {
    std::string target;
    std::string trained;
    std::optional<double> s0, strike, rate, vol, maturity, drift;
    std::optional<std::string> reading;
    bool discount = false;
    std::optional<double> reference;
    std::string out = "price.json";
    std::string csv;
};

// trained_dist from a training result, or probs from a target file.
std::vector<double> read_trained(const std::string& path, const TargetDistribution& target) {
    const json j = read_input_json(path);
    try {
        if (j.contains("trained_dist")) {
            if (j.contains("target")) {
                const auto& g = j.at("target");
                if (g.at("lo").get<double>() != target.domain.lo || g.at("hi").get<double>() != target.domain.hi ||
                    g.at("n_bins").get<std::size_t>() != target.n_bins()) {
                    throw CliError(grid_mismatch, "trained result was fit on a different grid than " + path);
                }
            }
            auto d = j.at("trained_dist").get<std::vector<double>>();
            if (d.size() != target.n_bins()) throw CliError(grid_mismatch, "trained distribution length differs from target");
            return d;
        }
        const auto other = io::target_from_json(j);
        if (!(other.domain == target.domain) || other.n_bins() != target.n_bins()) {
            throw CliError(grid_mismatch, "trained file grid differs from the target grid");
        }
        return other.probs;
    } catch (const json::exception& e) {
        throw CliError(usage, path + ": " + e.what());
    } catch (const format_error& e) {
        throw CliError(usage, path + ": " + e.what());
    }
}

int cmd_price(const PriceArgs& a) {
    const TargetDistribution target = read_target(a.target);
    const auto trained = read_trained(a.trained, target);

    OptionSpec opt;
    if (target.provenance.contains("option")) {
        const auto& o = target.provenance.at("option");
        opt.s0 = o.at("s0");
        opt.strike = o.at("strike");
        opt.rate = o.at("rate");
        opt.vol = o.at("vol");
        opt.maturity = o.at("maturity");
        if (!target.provenance.value("mu_assumed_equal_rate", true)) opt.mu = o.at("mu").get<double>();
        if (target.provenance.value("sigma_reading", "as_given") == "from_vol") opt.reading = SigmaReading::from_vol;
    } else if (!a.strike) {
        throw CliError(usage, "target carries no option parameters; pass --k (and optionally --s0 --r --t --vol)");
    }
    if (a.s0) opt.s0 = *a.s0;
    if (a.strike) opt.strike = *a.strike;
    if (a.rate) opt.rate = *a.rate;
    if (a.vol) opt.vol = *a.vol;
    if (a.maturity) opt.maturity = *a.maturity;
    if (a.drift) opt.mu = *a.drift;
    if (a.reading) opt.reading = *a.reading == "from_vol" ? SigmaReading::from_vol : SigmaReading::as_given;

    PayoffReport rep = price_report(opt, target, trained, a.discount);
    json j = io::to_json(rep, a.reference);
    j["inputs"] = {{"target", a.target}, {"trained", a.trained}, {"discount", a.discount}};

    const std::string path = resolve_out(a.out);
    write_json(path, j);
    const std::string csv = resolve_out(a.csv.empty() ? fs::path(a.out).replace_extension(".csv").string() : a.csv);
    write_text(csv, io::pricing_csv(rep, target.probs, trained));

    std::cout << "wrote " << path << " and " << csv << "\n"
              << "  E[max(S-K,0)] target=" << num(rep.expected_payoff_target, 8)
              << " trained=" << num(rep.expected_payoff_trained, 8) << " gap=" << num(rep.gap(), 8) << "\n";
    if (a.reference) std::cout << "  reference target payoff " << *a.reference << "\n";
    return ok;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
    std::string csv;
    std::string from, to;
    std::size_t bins = 16;
    double lo = 0.0, hi = 15.0;
    std::optional<double> offset;
    double scale = 1.0;
    std::string column;
    std::string out = "returns.json";
};

int cmd_ingest(const IngestArgs& a) {
    if (!fs::exists(a.csv)) throw CliError(ingest_failure, "quote CSV not found: " + a.csv);
    TargetDistribution t;
    try {
        t = ingest_returns(a.csv, DateWindow{a.from, a.to}, Domain(a.lo, a.hi), a.bins, ReturnMapping{a.scale, a.offset},
                           a.column);
    } catch (const format_error& e) {
        throw CliError(ingest_failure, e.what());
    } catch (const unrepresentable_target&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw CliError(ingest_failure, e.what());
    }
    t.provenance["config"] = {{"bins", a.bins}, {"lo", a.lo}, {"hi", a.hi}, {"column", a.column.empty() ? "Close|Adj Close" : a.column}};
    const std::string path = resolve_out(a.out);
    write_json(path, io::to_json(t));
    print_target_summary(t, path);
    std::cout << "  returns=" << t.provenance.at("n_returns") << " in_domain=" << t.provenance.at("n_in_domain")
              << " offset=" << num(t.provenance.at("mapping").at("offset").get<double>()) << "\n";
    return ok;
}

// ---------------------------------------------------------------------------

struct DtqwArgs {
    int n = 8;
    int steps = 50;
    std::string coin = "H";
    std::string initial = "balanced";
    std::string out = "dtqw.csv";
};

CoinParams named_coin(const std::string& name) {
    if (name == "H") return coins::hadamard;
    if (name == "X") return coins::pauli_x;
    if (name == "Z") return coins::pauli_z;
    if (name == "I") return coins::identity;
    const auto v = parse_angles(name, 3);
    return {v[0], v[1], v[2]};
}

int cmd_dtqw(const DtqwArgs& a) {
    const std::size_t center = std::size_t{1} << (a.n - 1);
    const auto init = make_initial(a.initial, center);
    const auto p = position_distribution(evolve_dtqw(init.make(a.n), named_coin(a.coin), WalkSchedule(a.steps)));
    std::ostringstream os;
    os << "x,offset,p\n";
    for (std::size_t x = 0; x < p.size(); ++x) {
        os << x << ',' << static_cast<long long>(x) - static_cast<long long>(center) << ',' << io::fmt_double(p[x]) << '\n';
    }
    const std::string path = resolve_out(a.out);
    write_text(path, os.str());
    std::cout << "wrote " << path << " (" << p.size() << " positions, " << a.steps << " steps, coin " << a.coin << ")\n";
    return ok;
}

struct OperatorArgs {
    int n = 2;
    std::string op = "ssqw";
    std::string params = "1.5707963267948966,0,0,1.5707963267948966,0,0";
    std::string out = "operator.json";
};

int cmd_operator(const OperatorArgs& a) {
    const auto v = parse_angles(a.params, 6);
    const auto p = SsqwParams::from_array(v);
    std::vector<std::vector<complex>> m;
    if (a.op == "coin") {
        const auto c = coin_matrix(p.coin1);
        m = operator_matrix(a.n, [&](WalkerState s) { return apply_coin(std::move(s), c); });
    } else if (a.op == "shift") {
        m = operator_matrix(a.n, [](WalkerState s) { return apply_shift_dtqw(std::move(s)); });
    } else if (a.op == "shift-plus") {
        m = operator_matrix(a.n, [](WalkerState s) { return apply_shift_plus(std::move(s)); });
    } else if (a.op == "shift-minus") {
        m = operator_matrix(a.n, [](WalkerState s) { return apply_shift_minus(std::move(s)); });
    } else if (a.op == "dtqw") {
        m = operator_matrix(a.n, [&](WalkerState s) { return apply_dtqw_step(std::move(s), p.coin1); });
    } else {
        m = operator_matrix(a.n, [&](WalkerState s) { return apply_ssqw_step(std::move(s), p); });
    }
    json j = io::operator_to_json(m, a.n);
    j["op"] = a.op;
    j["params"] = io::params_to_json(p);
    const std::string path = resolve_out(a.out);
    write_json(path, j);
    std::cout << "wrote " << path << " (" << m.size() << "x" << m.size() << ")\n";
    return ok;
}

// ---------------------------------------------------------------------------

struct ReproArgs {
    std::string out_dir = "repro";
    int restarts = recipes::restarts;
    std::uint64_t seed = recipes::seed;
    std::size_t samples = 0;
    int threads = 1;
};

int cmd_repro(const ReproArgs& a) {
    const std::string dir = resolve_out(a.out_dir);
    fs::create_directories(dir);
    auto file = [&](const std::string& name) { return (fs::path(dir) / name).string(); };

    auto config_for = [&](const TargetDistribution& target) {
        OptimizerConfig c = recipes::training_config(target, a.restarts, a.seed);
        c.threads = a.threads;
        return c;
    };

    struct Row {
        std::string name;
        double mse;
        double seconds;
        std::string note;
    };
    std::vector<Row> rows;
    json summary{{"format_version", io::format_version}, {"samples", a.samples}};

    auto fit = [&](const std::string& name, const TargetDistribution& target) {
        const OptimizerConfig cfg = config_for(target);
        const auto t0 = std::chrono::steady_clock::now();
        const TrainingResult r = train(target, cfg);
        const double s = seconds_since(t0);
        write_json(file(name + "_target.json"), io::to_json(target));
        json j = io::to_json(r, cfg);
        j["target"] = {{"file", name + "_target.json"}, {"lo", target.domain.lo}, {"hi", target.domain.hi}, {"n_bins", target.n_bins()}};
        write_json(file(name + "_result.json"), j);
        write_text(file(name + "_fit.csv"), io::training_csv(target.probs, r.trained_dist));
        summary["fits"][name] = {{"best_mse", r.best_mse}, {"evaluations", r.iterations_used}, {"config", io::config_to_json(cfg)}};
        return std::pair{r, s};
    };

    const auto normal = recipes::make_target(recipes::normal_law(), a.samples, a.seed);
    const auto [rn, sn] = fit("normal", normal);
    rows.push_back({"normal fit", rn.best_mse, sn, "gate 1e-3"});

    const auto lognormal = recipes::make_target(recipes::lognormal_law(), a.samples, a.seed);
    const auto [rl, sl] = fit("lognormal", lognormal);
    rows.push_back({"lognormal fit", rl.best_mse, sl, "gate 5e-3"});

    for (auto reading : {SigmaReading::as_given, SigmaReading::from_vol}) {
        const std::string tag = "bs_" + to_string(reading);
        const OptionSpec opt = recipes::reference_option(reading);
        const auto target = bs_lognormal_target(opt, recipes::domain(), recipes::bins);
        const auto [rb, sb] = fit(tag, target);
        const PayoffReport rep = price_report(opt, target, rb.trained_dist);
        json j = io::to_json(rep, recipes::reference_target_payoff);
        j["reference_trained_payoff"] = recipes::reference_trained_payoff;
        write_json(file(tag + "_price.json"), j);
        write_text(file(tag + "_price.csv"), io::pricing_csv(rep, target.probs, rb.trained_dist));
        summary["pricing"][tag] = {{"payoff_target", rep.expected_payoff_target},
                                   {"payoff_trained", rep.expected_payoff_trained},
                                   {"reference_target", recipes::reference_target_payoff},
                                   {"reference_trained", recipes::reference_trained_payoff}};
        rows.push_back({tag + " fit", rb.best_mse, sb,
                        "payoff target=" + num(rep.expected_payoff_target, 5) +
                            " trained=" + num(rep.expected_payoff_trained, 5) + " (reported 5.5342 / 6.9951)"});
    }
    write_json(file("summary.json"), summary);

    std::ostringstream csv;
    csv << "experiment,best_mse,note\n";
    for (const auto& r : rows) csv << r.name << ',' << io::fmt_double(r.mse) << ",\"" << r.note << "\"\n";
    write_text(file("summary.csv"), csv.str());

    const std::vector<int> widths{20, 14, 10, 0};
    std::cout << format_row({"experiment", "best_mse", "time[s]", "note"}, widths) << "\n";
    for (const auto& r : rows) std::cout << format_row({r.name, num(r.mse, 5), num(r.seconds, 3), r.note}, widths) << "\n";
    std::cout << "files in " << dir << "\n";
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Split-step quantum walk distribution loader"};
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file with option values, nested by subcommand");
    app.allow_config_extras(false);
    app.require_subcommand(1);

    GenTargetArgs gen;
    auto* g = app.add_subcommand("gen-target", "Build a target histogram and write it as JSON");
    g->add_option("--kind", gen.kind, "normal | lognormal | uniform | bs | ssqw")
        ->required()
        ->check(CLI::IsMember({"normal", "lognormal", "uniform", "bs", "ssqw"}));
    g->add_option("--mu", gen.mu, "mean (normal) or log-mean (lognormal)");
    g->add_option("--sigma", gen.sigma, "std-dev (normal), log std-dev (lognormal), maturity sigma (bs)")
        ->check(CLI::NonNegativeNumber);
    g->add_option("--vol", gen.vol, "bs: volatility per unit time (sigma_T = vol*sqrt(T))")->check(CLI::NonNegativeNumber);
    g->add_option("--s0", gen.s0, "bs: spot price");
    g->add_option("--k", gen.strike, "bs: strike");
    g->add_option("--r", gen.rate, "bs: rate per unit time");
    g->add_option("--t", gen.maturity, "bs: maturity");
    g->add_option("--drift", gen.drift, "bs: expected return mu (default: r)");
    g->add_option("--bins", gen.bins, "number of bins (power of two)");
    g->add_option("--lo", gen.lo, "domain lower bound");
    g->add_option("--hi", gen.hi, "domain upper bound");
    g->add_option("--samples", gen.samples, "Monte Carlo samples (0 = analytic histogram)");
    g->add_option("--seed", gen.seed, "sampling seed");
    g->add_option("--params", gen.params, "ssqw: theta1,phi1,lambda1,theta2,phi2,lambda2");
    g->add_option("--steps", gen.steps, "ssqw: walk steps")->check(CLI::PositiveNumber);
    g->add_option("--x0", gen.x0, "ssqw: start position (default: center)");
    g->add_option("--coin", gen.coin, "ssqw: initial coin state")->check(CLI::IsMember({"up", "down", "balanced"}));
    g->add_option("--out", gen.out, "output JSON");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Fit SSQW coin angles to a target");
    t->add_option("--target", tr.target, "target JSON")->required();
    t->add_option("--out", tr.out, "result JSON");
    t->add_option("--csv", tr.csv, "plot CSV (default: <out>.csv)");
    t->add_option("--steps", tr.steps, "walk steps")->check(CLI::PositiveNumber);
    t->add_option("--max-iters", tr.max_iters, "objective evaluations per restart");
    t->add_option("--restarts", tr.restarts, "restarts (first starts at --init-params)");
    t->add_option("--seed", tr.seed, "seed for restart start points");
    t->add_flag("--symmetric", tr.symmetric, "optimize theta1, theta2 only with zero phases");
    t->add_option("--optimizer", tr.optimizer)->check(CLI::IsMember({"cobyla", "nelder-mead"}));
    t->add_option("--x0", tr.x0, "start position (default: bin of the target mean)");
    t->add_option("--coin", tr.coin, "initial coin state (default: up, or balanced with --symmetric)")
        ->check(CLI::IsMember({"up", "down", "balanced"}));
    t->add_option("--init-params", tr.init_params, "theta1,phi1,lambda1,theta2,phi2,lambda2");
    t->add_option("--rho-begin", tr.rho_begin, "initial trust radius");
    t->add_option("--rho-end", tr.rho_end, "final trust radius");
    t->add_option("--threads", tr.threads, "worker threads for restarts");
    t->add_option("--mse-gate", tr.mse_gate, "exit 1 unless best_mse <= gate");

    PriceArgs pr;
    auto* p = app.add_subcommand("price", "Expected call payoff on target and trained histograms");
    p->add_option("--target", pr.target, "target JSON")->required();
    p->add_option("--trained", pr.trained, "training result JSON or target-format JSON")->required();
    p->add_option("--s0", pr.s0);
    p->add_option("--k", pr.strike, "strike (overrides the target's option)");
    p->add_option("--r", pr.rate);
    p->add_option("--vol", pr.vol);
    p->add_option("--t", pr.maturity);
    p->add_option("--drift", pr.drift);
    p->add_option("--sigma-reading", pr.reading)->check(CLI::IsMember({"as_given", "from_vol"}));
    p->add_flag("--discount", pr.discount, "multiply payoffs by exp(-rT)");
    p->add_option("--reference", pr.reference, "reference target payoff to annotate");
    p->add_option("--out", pr.out, "report JSON");
    p->add_option("--csv", pr.csv, "plot CSV (default: <out>.csv)");

    IngestArgs in;
    auto* i = app.add_subcommand("ingest", "Daily-return histogram from a quote CSV");
    i->add_option("--csv", in.csv, "quote CSV (Date, ..., Close, Adj Close, ...)")->required();
    i->add_option("--from", in.from, "first date, inclusive (yyyy-mm-dd)");
    i->add_option("--to", in.to, "last date, inclusive (yyyy-mm-dd)");
    i->add_option("--bins", in.bins);
    i->add_option("--lo", in.lo);
    i->add_option("--hi", in.hi);
    i->add_option("--offset", in.offset, "mapped = scale*return% + offset (default: min return -> lo + 1 bin)");
    i->add_option("--scale", in.scale);
    i->add_option("--column", in.column, "close column name (default: Close, else Adj Close)");
    i->add_option("--out", in.out, "output JSON");

    DtqwArgs dq;
    auto* d = app.add_subcommand("dtqw", "Position distribution of a plain coined walk (CSV)");
    d->add_option("--n", dq.n, "position qubits")->check(CLI::Range(1, max_position_qubits));
    d->add_option("--steps", dq.steps)->check(CLI::PositiveNumber);
    d->add_option("--coin", dq.coin, "H | X | Z | I | theta,phi,lambda");
    d->add_option("--initial", dq.initial)->check(CLI::IsMember({"up", "down", "balanced"}));
    d->add_option("--out", dq.out);

    OperatorArgs op;
    auto* o = app.add_subcommand("operator", "Dump a dense walk operator as JSON (N <= 4)");
    o->add_option("--n", op.n)->check(CLI::Range(1, 4));
    o->add_option("--op", op.op)->check(CLI::IsMember({"coin", "shift", "shift-plus", "shift-minus", "dtqw", "ssqw"}));
    o->add_option("--params", op.params, "theta1,phi1,lambda1,theta2,phi2,lambda2");
    o->add_option("--out", op.out);

    ReproArgs rp;
    auto* r = app.add_subcommand("repro", "Run the normal, log-normal and call-pricing experiments");
    r->add_option("--out-dir", rp.out_dir);
    r->add_option("--restarts", rp.restarts);
    r->add_option("--seed", rp.seed);
    r->add_option("--samples", rp.samples, "use sampled targets with this many samples (0 = analytic)");
    r->add_option("--threads", rp.threads);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    try {
        if (g->parsed()) return cmd_gen_target(gen, *g);
        if (t->parsed()) return cmd_train(tr);
        if (p->parsed()) return cmd_price(pr);
        if (i->parsed()) return cmd_ingest(in);
        if (d->parsed()) return cmd_dtqw(dq);
        if (o->parsed()) return cmd_operator(op);
        if (r->parsed()) return cmd_repro(rp);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code;
    } catch (const unrepresentable_target& e) {
        std::cerr << "error: " << e.what() << "\n";
        return unrepresentable;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return optimizer_failure;
    }
    return usage;
}
