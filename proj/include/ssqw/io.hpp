// io.hpp
// JSON and CSV encodings of states, operators, targets, training results and
// payoff reports. Every JSON document carries a `format_version`.

#pragma once

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssqw/errors.hpp"
#include "ssqw/optimize.hpp"
#include "ssqw/pricing.hpp"
#include "ssqw/statevector.hpp"
#include "ssqw/target.hpp"
#include "ssqw/walk.hpp"

namespace ssqw::io {

using nlohmann::json;

inline constexpr int format_version = 1;

inline json complex_pair(const complex& z) { return json::array({z.real(), z.imag()}); }

// {"format_version", "N", "amps": [[re, im], ...]} in flat coin-major order.
inline json to_json(const WalkerState& s) {
    json amps = json::array();
    for (const auto& a : s.amplitudes()) amps.push_back(complex_pair(a));
    return {{"format_version", format_version}, {"N", s.num_position_qubits()}, {"amps", std::move(amps)}};
}

inline WalkerState state_from_json(const json& j) {
    try {
        std::vector<complex> amps;
        for (const auto& p : j.at("amps")) amps.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        return WalkerState(j.at("N").get<int>(), std::move(amps));
    } catch (const json::exception& e) {
        throw format_error(std::string("state JSON: ") + e.what());
    }
}

// Row-major dense matrix of complex pairs.
inline json operator_to_json(const std::vector<std::vector<complex>>& m, int num_position_qubits) {
    json rows = json::array();
    for (const auto& r : m) {
        json row = json::array();
        for (const auto& z : r) row.push_back(complex_pair(z));
        rows.push_back(std::move(row));
    }
    return {{"format_version", format_version},
            {"N", num_position_qubits},
            {"dim", m.size()},
            {"layout", "coin-major, row-major"},
            {"matrix", std::move(rows)}};
}

inline json params_to_json(const SsqwParams& p) {
    return {{"coin1", {{"theta", p.coin1.theta}, {"phi", p.coin1.phi}, {"lambda", p.coin1.lambda}}},
            {"coin2", {{"theta", p.coin2.theta}, {"phi", p.coin2.phi}, {"lambda", p.coin2.lambda}}}};
}

inline SsqwParams params_from_json(const json& j) {
    auto coin = [](const json& c) {
        return CoinParams{c.at("theta").get<double>(), c.at("phi").get<double>(), c.at("lambda").get<double>()};
    };
    return {coin(j.at("coin1")), coin(j.at("coin2"))};
}

inline json to_json(const TargetDistribution& t) {
    return {{"format_version", format_version},
            {"probs", t.probs},
            {"lo", t.domain.lo},
            {"hi", t.domain.hi},
            {"n_bins", t.n_bins()},
            {"provenance", t.provenance}};
}

inline TargetDistribution target_from_json(const json& j) {
    try {
        if (j.at("format_version").get<int>() != format_version) {
            throw format_error("target JSON: unsupported format_version");
        }
        auto probs = j.at("probs").get<std::vector<double>>();
        if (probs.size() != j.at("n_bins").get<std::size_t>()) {
            throw format_error("target JSON: n_bins does not match probs");
        }
        return TargetDistribution(std::move(probs), Domain(j.at("lo").get<double>(), j.at("hi").get<double>()),
                                  j.value("provenance", json::object()));
    } catch (const json::exception& e) {
        throw format_error(std::string("target JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw format_error(std::string("target JSON: ") + e.what());
    }
}

inline json config_to_json(const OptimizerConfig& c) {
    return {{"max_iters", c.max_iters},
            {"initial_params", params_to_json(c.initial_params)},
            {"steps", c.steps.steps},
            {"initial_trust_radius", c.initial_trust_radius},
            {"final_trust_radius", c.final_trust_radius},
            {"symmetric_mode", c.symmetric_mode},
            {"restarts", c.restarts},
            {"seed", c.seed},
            {"threads", c.threads},
            {"optimizer", to_string(c.optimizer)},
            {"init", {{"alpha", complex_pair(c.init.alpha)}, {"beta", complex_pair(c.init.beta)}, {"x0", c.init.x0}}}};
}

// Parameters are reported wrapped into [0, 2pi); the raw optimizer
// coordinates are kept under "params_raw" so results can be re-evaluated.
inline json to_json(const TrainingResult& r, const OptimizerConfig& c) {
    json restarts = json::array();
    for (const auto& s : r.restarts) {
        restarts.push_back({{"start", params_to_json(s.start)},
                            {"best_mse", s.best_mse},
                            {"evaluations", s.evaluations},
                            {"stop_reason", s.stop_reason}});
    }
    return {{"format_version", format_version},
            {"params", params_to_json(wrapped(r.best_params))},
            {"params_raw", params_to_json(r.best_params)},
            {"best_mse", r.best_mse},
            {"history", r.mse_history},
            {"trained_dist", r.trained_dist},
            {"iterations_used", r.iterations_used},
            {"best_restart", r.best_restart},
            {"restarts", std::move(restarts)},
            {"config", config_to_json(c)},
            {"metadata",
             {{"seed", c.seed},
              {"mode", c.symmetric_mode ? "symmetric(theta1,theta2; phases=0)" : "full(6)"},
              {"optimizer", r.optimizer},
              {"budget_unit", "objective evaluations"},
              {"boundary", "periodic"},
              {"step_order", "coin1, S+, coin2, S-"}}}};
}

inline json to_json(const PayoffReport& r, std::optional<double> reference = std::nullopt) {
    json j{{"format_version", format_version},
           {"expected_payoff_target", r.expected_payoff_target},
           {"expected_payoff_trained", r.expected_payoff_trained},
           {"gap_trained_minus_target", r.gap()},
           {"per_bin_payoff", r.per_bin_payoff},
           {"prices", r.grid.prices},
           {"grid", {{"lo", r.grid.domain.lo}, {"hi", r.grid.domain.hi}, {"n_bins", r.grid.n_bins()}, {"mapping", "bin_center"}}},
           {"option",
            {{"s0", r.spec.s0},
             {"strike", r.spec.strike},
             {"rate", r.spec.rate},
             {"vol", r.spec.vol},
             {"mu", r.spec.drift()},
             {"mu_assumed_equal_rate", !r.spec.mu.has_value()},
             {"maturity", r.spec.maturity},
             {"sigma_reading", to_string(r.spec.reading)}}},
           {"discount_factor", r.discount},
           {"untruncated_tail_mass", r.untruncated_tail_mass}};
    if (reference) {
        j["reference_target_payoff"] = *reference;
        j["reference_relative_gap"] = (r.expected_payoff_target - *reference) / *reference;
    }
    return j;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw format_error(path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot write " + path);
    out << text;
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

inline std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// bin,p_target,p_trained
inline std::string training_csv(std::span<const double> target, std::span<const double> trained) {
    std::ostringstream os;
    os << "bin,p_target,p_trained\n";
    for (std::size_t i = 0; i < target.size(); ++i) {
        os << i << ',' << fmt_double(target[i]) << ',' << fmt_double(trained[i]) << '\n';
    }
    return os.str();
}

// bin,price,p_target,p_trained,payoff
inline std::string pricing_csv(const PayoffReport& r, std::span<const double> target,
                               std::span<const double> trained) {
    std::ostringstream os;
    os << "bin,price,p_target,p_trained,payoff\n";
    for (std::size_t i = 0; i < r.grid.n_bins(); ++i) {
        os << i << ',' << fmt_double(r.grid.prices[i]) << ',' << fmt_double(target[i]) << ','
           << fmt_double(trained[i]) << ',' << fmt_double(r.per_bin_payoff[i]) << '\n';
    }
    return os.str();
}

}  // namespace ssqw::io
