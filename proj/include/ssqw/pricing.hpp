// pricing.hpp
// European call expected payoff on a histogram whose bins are read as
// maturity prices at the bin centers.

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "ssqw/target.hpp"

namespace ssqw {

struct PriceGrid {
    Domain domain;
    std::vector<double> prices;  // bin centers, strictly increasing

    PriceGrid(const Domain& d, std::size_t n_bins) : domain(d), prices(n_bins) {
        check_bin_count(n_bins);
        const double w = d.width() / static_cast<double>(n_bins);
        for (std::size_t i = 0; i < n_bins; ++i) prices[i] = d.lo + (static_cast<double>(i) + 0.5) * w;
    }

    explicit PriceGrid(const TargetDistribution& t) : PriceGrid(t.domain, t.n_bins()) {}

    std::size_t n_bins() const { return prices.size(); }
};

inline double call_payoff(double price, double strike) { return std::max(price - strike, 0.0); }

// sum_i dist[i] * max(price_i - K, 0)
inline double expected_payoff(std::span<const double> dist, const PriceGrid& grid, double strike) {
    if (dist.size() != grid.n_bins()) {
        throw std::invalid_argument("expected_payoff: distribution length does not match the grid");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) s += dist[i] * call_payoff(grid.prices[i], strike);
    return s;
}

struct PayoffReport {
    double expected_payoff_target = 0.0;
    double expected_payoff_trained = 0.0;
    std::vector<double> per_bin_payoff;
    OptionSpec spec;
    PriceGrid grid;
    double discount = 1.0;               // multiplier applied to both payoffs
    double untruncated_tail_mass = 0.0;  // law mass outside the domain, 0 for non-BS targets

    double gap() const { return expected_payoff_trained - expected_payoff_target; }
};

// Probability mass of the option's maturity law that falls outside the domain.
inline double truncated_mass(const OptionSpec& opt, const Domain& domain) {
    const LognormalLaw law = lognormal_law(opt);
    if (law.sigma_t == 0.0) {
        const double p = std::exp(law.alpha);
        return (p >= domain.lo && p <= domain.hi) ? 0.0 : 1.0;
    }
    const auto d = Distribution::lognormal(law.alpha, law.sigma_t);
    return std::max(0.0, 1.0 - d.mass(domain.lo, domain.hi));
}

inline PayoffReport price_report(const OptionSpec& opt, const TargetDistribution& target,
                                 std::span<const double> trained, bool discount = false) {
    opt.validate();
    if (trained.size() != target.n_bins()) {
        throw std::invalid_argument("price_report: trained distribution does not match the target grid");
    }
    PayoffReport rep{.per_bin_payoff = {}, .spec = opt, .grid = PriceGrid(target)};
    rep.discount = discount ? std::exp(-opt.rate * opt.maturity) : 1.0;
    rep.expected_payoff_target = rep.discount * expected_payoff(target.probs, rep.grid, opt.strike);
    rep.expected_payoff_trained = rep.discount * expected_payoff(trained, rep.grid, opt.strike);
    rep.per_bin_payoff.reserve(rep.grid.n_bins());
    for (double p : rep.grid.prices) rep.per_bin_payoff.push_back(call_payoff(p, opt.strike));
    rep.untruncated_tail_mass = truncated_mass(opt, target.domain);
    return rep;
}

}  // namespace ssqw
