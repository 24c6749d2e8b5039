// recipes.hpp
// The three reference experiments: a normal fit, a log-normal fit and the
// Black-Scholes call example. Shared by `ssqw_cli repro` and the acceptance
// suite so both run exactly the same configuration.

#pragma once

#include <cmath>
#include <optional>

#include "ssqw/optimize.hpp"
#include "ssqw/pricing.hpp"
#include "ssqw/target.hpp"

namespace ssqw::recipes {

inline constexpr int position_qubits = 4;
inline constexpr std::size_t bins = std::size_t{1} << position_qubits;
inline constexpr int steps = 7;
inline constexpr int evaluations = 800;
inline constexpr int restarts = 8;
inline constexpr std::uint64_t seed = 1;

// Reported values for the call example (target histogram, trained histogram).
inline constexpr double reference_target_payoff = 5.5342;
inline constexpr double reference_trained_payoff = 6.9951;

inline Domain domain() { return {0.0, 15.0}; }

// Normal centered on the grid with a standard deviation of two bins.
inline Distribution normal_law() { return Distribution::normal(7.5, 2.0 * domain().width() / bins); }

// Log-normal with its median at the domain midpoint.
inline Distribution lognormal_law() { return Distribution::lognormal(std::log(7.5), 0.3); }

// samples == 0 selects the noise-free analytic histogram.
inline TargetDistribution make_target(const Distribution& d, std::size_t samples = 0, std::uint64_t sample_seed = seed) {
    return samples == 0 ? analytic_histogram(d, domain(), bins) : sample_histogram(d, samples, domain(), bins, sample_seed);
}

inline OptionSpec reference_option(SigmaReading reading = SigmaReading::as_given) {
    OptionSpec opt;
    opt.s0 = 2.0;
    opt.strike = 2.0;
    opt.vol = 0.4;
    opt.rate = 0.05;
    opt.maturity = 40.0;
    opt.reading = reading;
    return opt;
}

// Walker starts as |up> on the target's mean bin. Seven steps reach seven
// bins either side, so a start at bin 0 could not cover a centered target.
inline OptimizerConfig training_config(const TargetDistribution& target, int n_restarts = restarts,
                                       std::uint64_t s = seed) {
    OptimizerConfig c;
    c.max_iters = evaluations;
    c.steps = WalkSchedule(steps);
    c.restarts = n_restarts;
    c.seed = s;
    c.init.x0 = mean_start_position(target);
    return c;
}

}  // namespace ssqw::recipes
