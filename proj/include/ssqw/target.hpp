// target.hpp
// Target histograms for loading: analytic and sampled normal / log-normal
// distributions, Black-Scholes maturity-price laws, and daily-return
// histograms ingested from quote CSV files.
//
// Bins are uniform over the domain, left-closed right-open, with the last
// bin closed on the right. The number of bins is always a power of two so
// that each bin maps to one position basis state.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssqw/errors.hpp"

namespace ssqw {

struct Domain {
    double lo = 0.0;
    double hi = 15.0;

    Domain() = default;
    Domain(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
            throw std::invalid_argument("Domain: need finite lo < hi");
        }
    }

    double width() const { return hi - lo; }
    friend bool operator==(const Domain&, const Domain&) = default;
};

inline void check_bin_count(std::size_t n_bins) {
    if (n_bins < 2 || !std::has_single_bit(n_bins)) {
        throw std::invalid_argument("bin count must be a power of two >= 2");
    }
}

inline std::vector<double> uniform_edges(const Domain& d, std::size_t n_bins) {
    std::vector<double> e(n_bins + 1);
    const double w = d.width() / static_cast<double>(n_bins);
    for (std::size_t i = 0; i <= n_bins; ++i) e[i] = d.lo + w * static_cast<double>(i);
    e.back() = d.hi;
    return e;
}

// Bin of v under [e_i, e_{i+1}) with the final bin closed; nullopt outside [lo, hi].
inline std::optional<std::size_t> bin_index(double v, const std::vector<double>& edges) {
    const std::size_t n = edges.size() - 1;
    if (!(v >= edges.front() && v <= edges.back())) return std::nullopt;
    if (v == edges.back()) return n - 1;
    const double w = (edges.back() - edges.front()) / static_cast<double>(n);
    auto i = static_cast<std::size_t>(std::min<double>(std::floor((v - edges.front()) / w),
                                                      static_cast<double>(n - 1)));
    while (i > 0 && v < edges[i]) --i;
    while (i + 1 < n && v >= edges[i + 1]) ++i;
    return i;
}

struct TargetDistribution {
    std::vector<double> probs;
    Domain domain;
    std::vector<double> bin_edges;
    nlohmann::json provenance = nlohmann::json::object();

    TargetDistribution() = default;
    TargetDistribution(std::vector<double> p, Domain d, nlohmann::json prov = nlohmann::json::object())
        : probs(std::move(p)), domain(d), provenance(std::move(prov)) {
        check_bin_count(probs.size());
        bin_edges = uniform_edges(domain, probs.size());
        double total = 0.0;
        for (double v : probs) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw std::invalid_argument("TargetDistribution: probabilities must be finite and >= 0");
            }
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw std::invalid_argument("TargetDistribution: probabilities must sum to 1");
        }
    }

    std::size_t n_bins() const { return probs.size(); }
    int num_position_qubits() const { return std::countr_zero(probs.size()); }
    double bin_width() const { return domain.width() / static_cast<double>(n_bins()); }
    double bin_center(std::size_t i) const { return domain.lo + (static_cast<double>(i) + 0.5) * bin_width(); }
};

// ---------------------------------------------------------------------------
// Random numbers. mt19937_64 has a fully specified output sequence; the
// uniform and normal transforms below are written out so that sampled
// histograms are reproducible across standard libraries.

using Rng = std::mt19937_64;
inline constexpr const char* rng_name = "mt19937_64/53-bit-uniform/box-muller";

inline double uniform01(Rng& rng) {
    // (0, 1): 53 random mantissa bits, offset by half an ulp so 0 is never returned.
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

class NormalSampler {
public:
    double operator()(Rng& rng) {
        if (cached_) {
            cached_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform01(rng)));
        const double a = 2.0 * std::numbers::pi * uniform01(rng);
        spare_ = r * std::sin(a);
        cached_ = true;
        return r * std::cos(a);
    }

private:
    double spare_ = 0.0;
    bool cached_ = false;
};

// ---------------------------------------------------------------------------

struct Distribution {
    enum class Family { normal, lognormal, uniform };

    Family family = Family::normal;
    double mu = 0.0;     // mean (normal) or log-mean (lognormal)
    double sigma = 1.0;  // std-dev (normal) or log std-dev (lognormal)

    static Distribution normal(double mu, double sigma) { return {Family::normal, mu, sigma}; }
    static Distribution lognormal(double mu, double sigma) { return {Family::lognormal, mu, sigma}; }
    // Uniform over whatever domain it is binned on.
    static Distribution uniform() { return {Family::uniform, 0.0, 0.0}; }

    std::string name() const {
        switch (family) {
            case Family::normal: return "normal";
            case Family::lognormal: return "lognormal";
            case Family::uniform: return "uniform";
        }
        return "?";
    }

    nlohmann::json to_json() const {
        nlohmann::json j{{"kind", name()}};
        if (family != Family::uniform) {
            j["mu"] = mu;
            j["sigma"] = sigma;
        }
        return j;
    }

    // Standardized coordinate of x; -inf below the support.
    double z(double x) const {
        if (family == Family::lognormal) {
            if (x <= 0.0) return -std::numeric_limits<double>::infinity();
            return (std::log(x) - mu) / sigma;
        }
        return (x - mu) / sigma;
    }

    // Location of the point mass when sigma == 0.
    double point() const { return family == Family::lognormal ? std::exp(mu) : mu; }

    // Untruncated probability of [a, b]. Uses upper-tail differences on the
    // right half so that far-tail masses keep their relative precision.
    double mass(double a, double b) const {
        const double za = z(a);
        const double zb = z(b);
        const double k = 1.0 / std::numbers::sqrt2;
        if (za >= 0.0) return 0.5 * (std::erfc(za * k) - std::erfc(zb * k));
        return 0.5 * (std::erfc(-zb * k) - std::erfc(-za * k));
    }

    void validate() const {
        if (family == Family::uniform) return;
        if (!std::isfinite(mu) || !std::isfinite(sigma) || sigma < 0.0) {
            throw std::invalid_argument("Distribution: need finite mu and sigma >= 0");
        }
    }
};

// probs[i] proportional to CDF(edge[i+1]) - CDF(edge[i]), renormalized over the domain.
inline TargetDistribution analytic_histogram(const Distribution& dist, const Domain& domain,
                                             std::size_t n_bins) {
    check_bin_count(n_bins);
    dist.validate();
    const auto edges = uniform_edges(domain, n_bins);
    std::vector<double> p(n_bins, 0.0);

    if (dist.family == Distribution::Family::uniform) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(n_bins));
    } else if (dist.sigma == 0.0) {
        const auto bin = bin_index(dist.point(), edges);
        if (!bin) throw unrepresentable_target("analytic_histogram: point mass lies outside the domain");
        p[*bin] = 1.0;
    } else {
        double total = 0.0;
        for (std::size_t i = 0; i < n_bins; ++i) {
            p[i] = std::max(0.0, dist.mass(edges[i], edges[i + 1]));
            total += p[i];
        }
        if (!(total >= 1e-12)) {
            throw unrepresentable_target("analytic_histogram: in-domain mass below 1e-12");
        }
        for (double& v : p) v /= total;
    }

    nlohmann::json prov = dist.to_json();
    prov["method"] = "analytic";
    return TargetDistribution(std::move(p), domain, std::move(prov));
}

// Draws n_samples values from dist restricted to the open domain (lo, hi) by
// rejection, then bins and normalizes the counts.
inline TargetDistribution sample_histogram(const Distribution& dist, std::size_t n_samples,
                                           const Domain& domain, std::size_t n_bins,
                                           std::uint64_t seed) {
    check_bin_count(n_bins);
    dist.validate();
    if (n_samples < 1) throw std::invalid_argument("sample_histogram: need at least one sample");
    if (dist.family != Distribution::Family::uniform && !(dist.sigma > 0.0)) {
        throw std::invalid_argument("sample_histogram: sigma must be > 0");
    }

    constexpr double min_acceptance = 1e-6;
    constexpr std::uint64_t min_draws_before_check = 1'000'000;

    Rng rng(seed);
    NormalSampler normal;
    const auto edges = uniform_edges(domain, n_bins);
    std::vector<std::uint64_t> counts(n_bins, 0);
    std::uint64_t accepted = 0;
    std::uint64_t draws = 0;

    while (accepted < n_samples) {
        double v = 0.0;
        switch (dist.family) {
            case Distribution::Family::normal: v = dist.mu + dist.sigma * normal(rng); break;
            case Distribution::Family::lognormal: v = std::exp(dist.mu + dist.sigma * normal(rng)); break;
            case Distribution::Family::uniform: v = domain.lo + domain.width() * uniform01(rng); break;
        }
        ++draws;
        if (v > domain.lo && v < domain.hi) {
            ++counts[*bin_index(v, edges)];
            ++accepted;
        } else if (draws >= min_draws_before_check &&
                   static_cast<double>(accepted) < min_acceptance * static_cast<double>(draws)) {
            throw unrepresentable_target("sample_histogram: acceptance rate below 1e-6");
        }
    }

    std::vector<double> p(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        p[i] = static_cast<double>(counts[i]) / static_cast<double>(accepted);
    }
    nlohmann::json prov = dist.to_json();
    prov["method"] = "sampled";
    prov["n_samples"] = n_samples;
    prov["draws"] = draws;
    prov["seed"] = seed;
    prov["rng"] = rng_name;
    return TargetDistribution(std::move(p), domain, std::move(prov));
}

// ---------------------------------------------------------------------------
// Black-Scholes maturity law.

enum class SigmaReading {
    as_given,  // `vol` is the log-price standard deviation at maturity
    from_vol,  // `vol` is per unit time; the maturity std-dev is vol * sqrt(T)
};

inline std::string to_string(SigmaReading r) {
    return r == SigmaReading::as_given ? "as_given" : "from_vol";
}

struct OptionSpec {
    double s0 = 2.0;
    double strike = 2.0;
    double rate = 0.05;
    double vol = 0.4;
    std::optional<double> mu{};  // expected return; defaults to the rate (risk-neutral drift)
    double maturity = 40.0;
    SigmaReading reading = SigmaReading::as_given;

    double drift() const { return mu.value_or(rate); }

    void validate() const {
        if (!(s0 > 0.0) || !(strike >= 0.0) || !(maturity > 0.0) || !(vol >= 0.0) ||
            !std::isfinite(s0) || !std::isfinite(strike) || !std::isfinite(rate) ||
            !std::isfinite(vol) || !std::isfinite(maturity) || !std::isfinite(drift())) {
            throw std::invalid_argument("OptionSpec: need s0 > 0, strike >= 0, maturity > 0, vol >= 0");
        }
    }
};

struct LognormalLaw {
    double alpha;    // mean of ln S_T
    double sigma_t;  // std-dev of ln S_T
};

// sigma_T = vol * sqrt(T) (or vol itself when as_given),
// alpha   = ln S0 + (mu - r - vol^2 / 2) * T.
inline LognormalLaw lognormal_law(const OptionSpec& opt) {
    opt.validate();
    const double sigma_t =
        opt.reading == SigmaReading::as_given ? opt.vol : opt.vol * std::sqrt(opt.maturity);
    const double alpha =
        std::log(opt.s0) + (opt.drift() - opt.rate - opt.vol * opt.vol / 2.0) * opt.maturity;
    return {alpha, sigma_t};
}

inline TargetDistribution bs_lognormal_target(const OptionSpec& opt, const Domain& domain,
                                              std::size_t n_bins) {
    const LognormalLaw law = lognormal_law(opt);
    TargetDistribution t = analytic_histogram(Distribution::lognormal(law.alpha, law.sigma_t), domain, n_bins);
    t.provenance["kind"] = "bs_lognormal";
    t.provenance["alpha"] = law.alpha;
    t.provenance["sigma_t"] = law.sigma_t;
    t.provenance["sigma_reading"] = to_string(opt.reading);
    t.provenance["mu_assumed_equal_rate"] = !opt.mu.has_value();
    t.provenance["option"] = {{"s0", opt.s0},     {"strike", opt.strike}, {"rate", opt.rate},
                              {"vol", opt.vol},   {"mu", opt.drift()},    {"maturity", opt.maturity}};
    return t;
}

// ---------------------------------------------------------------------------
// Daily returns from a quote CSV (Date, Open, High, Low, Close, Adj Close, Volume).

struct DateWindow {
    std::string first;  // inclusive, ISO yyyy-mm-dd; empty = unbounded
    std::string last;   // inclusive; empty = unbounded

    bool contains(const std::string& date) const {
        return (first.empty() || date >= first) && (last.empty() || date <= last);
    }
};

// mapped = scale * return_percent + offset. With no offset given, the offset
// puts the smallest return one bin width above domain.lo.
struct ReturnMapping {
    double scale = 1.0;
    std::optional<double> offset;
};

struct Quote {
    std::string date;
    double close;
};

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            out.push_back(field);
            field.clear();
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    out.push_back(field);
    for (auto& f : out) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
    }
    return out;
}
}  // namespace detail

// Reads (Date, close) pairs. Uses "Close" when present, else "Adj Close",
// unless close_column names a column explicitly.
inline std::vector<Quote> read_quotes(std::istream& in, const std::string& close_column = {}) {
    std::string line;
    if (!std::getline(in, line)) throw format_error("quote CSV: missing header row");
    const auto header = detail::split_csv_line(line);
    auto find = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        return std::nullopt;
    };
    const auto date_col = find("Date");
    auto close_col = close_column.empty() ? find("Close") : find(close_column);
    if (!close_col && close_column.empty()) close_col = find("Adj Close");
    if (!date_col || !close_col) throw format_error("quote CSV: need Date and Close (or Adj Close) columns");

    std::vector<Quote> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() <= std::max(*date_col, *close_col)) {
            throw format_error("quote CSV: short row at line " + std::to_string(line_no));
        }
        double close = 0.0;
        std::size_t used = 0;
        try {
            close = std::stod(f[*close_col], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != f[*close_col].size() || !std::isfinite(close) || close <= 0.0) {
            throw format_error("quote CSV: bad close value at line " + std::to_string(line_no));
        }
        rows.push_back({f[*date_col], close});
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Quote& a, const Quote& b) { return a.date < b.date; });
    return rows;
}

// Percent daily returns of consecutive in-window quotes.
inline std::vector<double> daily_returns(const std::vector<Quote>& quotes, const DateWindow& window) {
    std::vector<double> closes;
    for (const auto& q : quotes) {
        if (window.contains(q.date)) closes.push_back(q.close);
    }
    if (closes.size() < 2) throw std::invalid_argument("daily_returns: fewer than 2 quotes in window");
    std::vector<double> r(closes.size() - 1);
    for (std::size_t i = 1; i < closes.size(); ++i) {
        r[i - 1] = (closes[i] - closes[i - 1]) / closes[i - 1] * 100.0;
    }
    return r;
}

inline TargetDistribution returns_histogram(const std::vector<double>& returns, const Domain& domain,
                                            std::size_t n_bins, const ReturnMapping& mapping = {}) {
    check_bin_count(n_bins);
    if (returns.empty()) throw std::invalid_argument("returns_histogram: no returns");
    if (!std::isfinite(mapping.scale) || mapping.scale == 0.0) {
        throw std::invalid_argument("returns_histogram: mapping scale must be finite and nonzero");
    }
    const double width = domain.width() / static_cast<double>(n_bins);
    const double lowest = mapping.scale > 0.0 ? *std::min_element(returns.begin(), returns.end())
                                              : *std::max_element(returns.begin(), returns.end());
    const double offset = mapping.offset.value_or(domain.lo + width - mapping.scale * lowest);

    const auto edges = uniform_edges(domain, n_bins);
    std::vector<double> counts(n_bins, 0.0);
    std::size_t kept = 0;
    for (double r : returns) {
        const double v = mapping.scale * r + offset;
        if (v > domain.lo && v < domain.hi) {
            counts[*bin_index(v, edges)] += 1.0;
            ++kept;
        }
    }
    if (kept == 0) throw unrepresentable_target("returns_histogram: every return falls outside the domain");
    for (double& c : counts) c /= static_cast<double>(kept);

    nlohmann::json prov{{"kind", "daily_returns"},
                        {"n_returns", returns.size()},
                        {"n_in_domain", kept},
                        {"mapping", {{"scale", mapping.scale}, {"offset", offset}}}};
    return TargetDistribution(std::move(counts), domain, std::move(prov));
}

inline TargetDistribution ingest_returns(const std::string& csv_path, const DateWindow& window,
                                         const Domain& domain, std::size_t n_bins,
                                         const ReturnMapping& mapping = {},
                                         const std::string& close_column = {}) {
    std::ifstream in(csv_path);
    if (!in) throw format_error("cannot open quote CSV: " + csv_path);
    const auto quotes = read_quotes(in, close_column);
    TargetDistribution t = returns_histogram(daily_returns(quotes, window), domain, n_bins, mapping);
    t.provenance["file"] = csv_path;
    t.provenance["window"] = {{"first", window.first}, {"last", window.last}};
    return t;
}

// ---------------------------------------------------------------------------
// Summary statistics over bin centers.

struct HistogramSummary {
    double mean;
    double stddev;
    std::size_t argmax;
};

inline HistogramSummary summarize(const TargetDistribution& t) {
    double m = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < t.n_bins(); ++i) {
        m += t.probs[i] * t.bin_center(i);
        m2 += t.probs[i] * t.bin_center(i) * t.bin_center(i);
    }
    const auto arg = static_cast<std::size_t>(
        std::max_element(t.probs.begin(), t.probs.end()) - t.probs.begin());
    return {m, std::sqrt(std::max(0.0, m2 - m * m)), arg};
}

}  // namespace ssqw
