// optimize.hpp
// Variational loading loop: evolve the walker under candidate coin angles,
// read out the position marginal, score it against the target with the
// per-bin mean squared error and let a derivative-free optimizer update the
// angles.
//
// Evaluation budgets count objective evaluations, not optimizer iterations.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ssqw/statevector.hpp"
#include "ssqw/target.hpp"
#include "ssqw/walk.hpp"

namespace ssqw {

// (1 / 2^N) * sum_i (a_i - b_i)^2
inline double mse(std::span<const double> target, std::span<const double> trained) {
    if (target.size() != trained.size() || target.empty()) {
        throw std::invalid_argument("mse: distributions must have equal, nonzero length");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double d = target[i] - trained[i];
        s += d * d;
    }
    return s / static_cast<double>(target.size());
}

inline std::vector<double> trained_distribution(const WalkerState& init, const SsqwParams& params,
                                                WalkSchedule schedule) {
    return position_distribution(evolve(init, params, schedule));
}

inline double objective(const SsqwParams& params, const TargetDistribution& target,
                        WalkSchedule schedule, const WalkerState& init) {
    if (target.n_bins() != init.num_positions()) {
        throw std::invalid_argument("objective: target bins must equal 2^N of the walker register");
    }
    return mse(target.probs, trained_distribution(init, params, schedule));
}

// ---------------------------------------------------------------------------
// Derivative-free minimizers.

using ScalarFunction = std::function<double(std::span<const double>)>;

struct MinimizeOptions {
    int max_evals = 800;
    double rho_begin = 0.5;
    double rho_end = 1e-6;
};

struct MinimizeResult {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    int evals = 0;
    std::string stop_reason;
};

class Minimizer {
public:
    virtual ~Minimizer() = default;
    virtual std::string name() const = 0;
    virtual MinimizeResult minimize(const ScalarFunction& f, std::vector<double> x0,
                                    const MinimizeOptions& opts) const = 0;
};

namespace detail {

// Counts evaluations against the budget and remembers the best point seen.
class BudgetedFunction {
public:
    BudgetedFunction(const ScalarFunction& f, int budget) : f_(f), budget_(budget) {}

    bool exhausted() const { return evals_ >= budget_; }
    int evals() const { return evals_; }

    double operator()(const Eigen::VectorXd& x) {
        ++evals_;
        const double v = f_(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
        if (!std::isfinite(v)) throw std::runtime_error("objective returned a non-finite value");
        if (v < best_f_) {
            best_f_ = v;
            best_x_ = x;
        }
        return v;
    }

    MinimizeResult result(std::string reason) const {
        return {std::vector<double>(best_x_.data(), best_x_.data() + best_x_.size()), best_f_, evals_,
                std::move(reason)};
    }

private:
    const ScalarFunction& f_;
    int budget_;
    int evals_ = 0;
    double best_f_ = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x_;
};

inline void check_options(const MinimizeOptions& o, std::size_t n) {
    if (n == 0) throw std::invalid_argument("minimize: empty parameter vector");
    if (o.max_evals < 1) throw std::invalid_argument("minimize: evaluation budget must be >= 1");
    if (!(o.rho_end > 0.0) || !(o.rho_end < o.rho_begin)) {
        throw std::invalid_argument("minimize: need 0 < rho_end < rho_begin");
    }
}

}  // namespace detail

// Linear-model trust-region method in the style of Powell's COBYLA, without
// constraints. The model is the linear interpolant on an (n+1)-point simplex;
// each iteration either steps to the model minimizer on the sphere of radius
// rho around the best vertex or repairs the simplex geometry. rho halves when
// steps stop paying off and the run ends once rho would drop below rho_end.
class Cobyla final : public Minimizer {
public:
    std::string name() const override { return "cobyla"; }

    MinimizeResult minimize(const ScalarFunction& fn, std::vector<double> x0,
                            const MinimizeOptions& opts) const override {
        detail::check_options(opts, x0.size());
        const auto n = static_cast<Eigen::Index>(x0.size());
        detail::BudgetedFunction f(fn, opts.max_evals);

        // Simplex acceptance thresholds relative to rho.
        constexpr double min_face_distance = 0.25;
        constexpr double max_edge_length = 2.1;
        constexpr double geometry_step = 0.5;
        constexpr double poor_ratio = 0.1;

        double rho = opts.rho_begin;
        std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(n) + 1);
        std::vector<double> fv(v.size(), std::numeric_limits<double>::infinity());

        v[0] = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
        fv[0] = f(v[0]);
        auto reset_simplex = [&](std::size_t keep) -> bool {
            std::size_t axis = 0;
            for (std::size_t j = 0; j < v.size(); ++j) {
                if (j == keep) continue;
                if (f.exhausted()) return false;
                v[j] = v[keep];
                v[j](static_cast<Eigen::Index>(axis++)) += rho;
                fv[j] = f(v[j]);
            }
            return true;
        };
        if (!reset_simplex(0)) return f.result("evaluation budget exhausted");

        Eigen::MatrixXd edges(n, n);
        Eigen::VectorXd df(n);
        std::vector<std::size_t> others(static_cast<std::size_t>(n));

        while (!f.exhausted()) {
            const auto best = static_cast<std::size_t>(
                std::min_element(fv.begin(), fv.end()) - fv.begin());
            for (std::size_t j = 0, k = 0; j < v.size(); ++j) {
                if (j == best) continue;
                others[k] = j;
                edges.row(static_cast<Eigen::Index>(k)) = (v[j] - v[best]).transpose();
                df(static_cast<Eigen::Index>(k)) = fv[j] - fv[best];
                ++k;
            }

            const Eigen::FullPivLU<Eigen::MatrixXd> lu(edges);
            if (!lu.isInvertible()) {
                if (!reset_simplex(best)) break;
                continue;
            }
            const Eigen::MatrixXd dual = lu.inverse();  // column k is normal to the face opposite vertex k
            const Eigen::VectorXd grad = lu.solve(df);

            // Geometry: a vertex too far from the best one, or too close to
            // the hyperplane through the others, is replaced.
            std::ptrdiff_t repair = -1;
            double worst = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) {
                const double len = edges.row(k).norm();
                if (len > max_edge_length * rho && len > worst) {
                    worst = len;
                    repair = k;
                }
            }
            if (repair < 0) {
                double thinnest = min_face_distance * rho;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double dist = 1.0 / dual.col(k).norm();
                    if (dist < thinnest) {
                        thinnest = dist;
                        repair = k;
                    }
                }
            }
            if (repair >= 0) {
                Eigen::VectorXd dir = dual.col(repair).normalized();
                if (dir.dot(grad) > 0.0) dir = -dir;
                const std::size_t j = others[static_cast<std::size_t>(repair)];
                v[j] = v[best] + geometry_step * rho * dir;
                fv[j] = f(v[j]);
                continue;
            }

            const double gnorm = grad.norm();
            if (!(gnorm > 0.0)) {
                if (rho <= opts.rho_end) return f.result("trust radius reached rho_end");
                rho = shrink(rho, opts.rho_end);
                continue;
            }

            const Eigen::VectorXd step = -rho / gnorm * grad;
            const Eigen::VectorXd trial = v[best] + step;
            const double ft = f(trial);
            const double ratio = (fv[best] - ft) / (rho * gnorm);

            // Replace the vertex whose removal keeps the simplex volume largest,
            // biased toward vertices far from the best point.
            const Eigen::VectorXd weights = dual.transpose() * step;
            std::ptrdiff_t pick = -1;
            double score = -1.0;
            for (Eigen::Index k = 0; k < n; ++k) {
                const double far = std::max(1.0, edges.row(k).norm() / rho);
                const double s = std::abs(weights(k)) * far;
                if (s > score) {
                    score = s;
                    pick = k;
                }
            }
            const std::size_t j = others[static_cast<std::size_t>(pick)];
            if (ft < fv[best] || ft < fv[j]) {
                v[j] = trial;
                fv[j] = ft;
            }

            if (ratio < poor_ratio) {
                if (rho <= opts.rho_end) return f.result("trust radius reached rho_end");
                rho = shrink(rho, opts.rho_end);
            }
        }
        return f.result("evaluation budget exhausted");
    }

private:
    static double shrink(double rho, double rho_end) {
        const double next = 0.5 * rho;
        return next <= 1.5 * rho_end ? rho_end : next;
    }
};

// Classic Nelder-Mead with the standard coefficients (1, 2, 0.5, 0.5).
class NelderMead final : public Minimizer {
public:
    std::string name() const override { return "nelder_mead"; }

    MinimizeResult minimize(const ScalarFunction& fn, std::vector<double> x0,
                            const MinimizeOptions& opts) const override {
        detail::check_options(opts, x0.size());
        const auto n = static_cast<Eigen::Index>(x0.size());
        detail::BudgetedFunction f(fn, opts.max_evals);

        std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(n) + 1);
        std::vector<double> fv(v.size());
        v[0] = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
        fv[0] = f(v[0]);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (f.exhausted()) return f.result("evaluation budget exhausted");
            auto& vi = v[static_cast<std::size_t>(i) + 1];
            vi = v[0];
            vi(i) += opts.rho_begin;
            fv[static_cast<std::size_t>(i) + 1] = f(vi);
        }

        std::vector<std::size_t> order(v.size());
        while (!f.exhausted()) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
            const std::size_t lo = order.front();
            const std::size_t hi = order.back();
            const std::size_t second = order[order.size() - 2];

            double size = 0.0;
            for (const auto& p : v) size = std::max(size, (p - v[lo]).cwiseAbs().maxCoeff());
            if (size < opts.rho_end) return f.result("simplex size reached rho_end");

            Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
            for (std::size_t j = 0; j < v.size(); ++j) {
                if (j != hi) centroid += v[j];
            }
            centroid /= static_cast<double>(n);

            const Eigen::VectorXd xr = centroid + (centroid - v[hi]);
            const double fr = f(xr);
            if (fr < fv[lo]) {
                if (f.exhausted()) break;
                const Eigen::VectorXd xe = centroid + 2.0 * (centroid - v[hi]);
                const double fe = f(xe);
                if (fe < fr) {
                    v[hi] = xe;
                    fv[hi] = fe;
                } else {
                    v[hi] = xr;
                    fv[hi] = fr;
                }
                continue;
            }
            if (fr < fv[second]) {
                v[hi] = xr;
                fv[hi] = fr;
                continue;
            }
            if (f.exhausted()) break;
            const bool outside = fr < fv[hi];
            const Eigen::VectorXd xc =
                outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                        : Eigen::VectorXd(centroid + 0.5 * (v[hi] - centroid));
            const double fc = f(xc);
            if (fc < (outside ? fr : fv[hi])) {
                v[hi] = xc;
                fv[hi] = fc;
                continue;
            }
            for (std::size_t j = 0; j < v.size(); ++j) {
                if (j == lo) continue;
                if (f.exhausted()) break;
                v[j] = v[lo] + 0.5 * (v[j] - v[lo]);
                fv[j] = f(v[j]);
            }
        }
        return f.result("evaluation budget exhausted");
    }
};

// ---------------------------------------------------------------------------
// Training.

enum class OptimizerKind { cobyla, nelder_mead };

inline std::string to_string(OptimizerKind k) { return k == OptimizerKind::cobyla ? "cobyla" : "nelder_mead"; }

inline std::unique_ptr<Minimizer> make_minimizer(OptimizerKind k) {
    if (k == OptimizerKind::nelder_mead) return std::make_unique<NelderMead>();
    return std::make_unique<Cobyla>();
}

// Initial walker: (alpha |up> + beta |down>) (x) |x0>.
struct InitialCondition {
    complex alpha{1.0, 0.0};
    complex beta{0.0, 0.0};
    std::size_t x0 = 0;

    WalkerState make(int num_position_qubits) const {
        return initial_state(num_position_qubits, alpha, beta, x0);
    }
};

// Bin nearest the target's mean bin index; halves round up.
inline std::size_t mean_start_position(const TargetDistribution& t) {
    double m = 0.0;
    for (std::size_t i = 0; i < t.n_bins(); ++i) m += t.probs[i] * static_cast<double>(i);
    const auto x = static_cast<std::size_t>(std::floor(m + 0.5));
    return std::min(x, t.n_bins() - 1);
}

inline SsqwParams balanced_params() {
    return {{std::numbers::pi / 2.0, 0.0, 0.0}, {std::numbers::pi / 2.0, 0.0, 0.0}};
}

struct OptimizerConfig {
    int max_iters = 800;  // objective evaluations per restart
    SsqwParams initial_params = balanced_params();
    WalkSchedule steps{7};
    double initial_trust_radius = 0.5;
    double final_trust_radius = 1e-6;
    // Two free angles (theta1, theta2); all four phases pinned to zero.
    bool symmetric_mode = false;
    int restarts = 1;
    std::uint64_t seed = 0;
    InitialCondition init;
    OptimizerKind optimizer = OptimizerKind::cobyla;
    int threads = 1;

    void validate() const {
        if (max_iters < 1) throw std::invalid_argument("OptimizerConfig: max_iters must be >= 1");
        if (restarts < 1) throw std::invalid_argument("OptimizerConfig: restarts must be >= 1");
        if (threads < 1) throw std::invalid_argument("OptimizerConfig: threads must be >= 1");
        if (!(final_trust_radius > 0.0) || !(final_trust_radius < initial_trust_radius)) {
            throw std::invalid_argument("OptimizerConfig: need 0 < final_trust_radius < initial_trust_radius");
        }
        if (!initial_params.coin1.is_finite() || !initial_params.coin2.is_finite()) {
            throw std::invalid_argument("OptimizerConfig: initial params must be finite");
        }
    }
};

// Free coordinates <-> full six-angle parameter set.
inline std::vector<double> to_free(const SsqwParams& p, bool symmetric) {
    if (symmetric) return {p.coin1.theta, p.coin2.theta};
    const auto a = p.to_array();
    return {a.begin(), a.end()};
}

inline SsqwParams from_free(std::span<const double> x, bool symmetric) {
    if (symmetric) {
        if (x.size() != 2) throw std::invalid_argument("symmetric mode expects 2 angles");
        return {{x[0], 0.0, 0.0}, {x[1], 0.0, 0.0}};
    }
    return SsqwParams::from_array(x);
}

struct RestartSummary {
    SsqwParams start;
    SsqwParams best_params;
    double best_mse = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    std::string stop_reason;
};

struct TrainingResult {
    SsqwParams best_params;
    double best_mse = std::numeric_limits<double>::infinity();
    std::vector<double> mse_history;
    std::vector<double> trained_dist;
    int iterations_used = 0;
    std::size_t best_restart = 0;
    std::vector<RestartSummary> restarts;
    std::string optimizer;
};

// Start points: restart 0 uses initial_params, later ones draw every free
// angle uniformly from [0, 2pi) with a generator seeded by config.seed.
inline std::vector<SsqwParams> restart_points(const OptimizerConfig& config) {
    std::vector<SsqwParams> starts{config.initial_params};
    if (config.symmetric_mode) starts[0] = from_free(to_free(config.initial_params, true), true);
    Rng rng(config.seed);
    const std::size_t dim = config.symmetric_mode ? 2 : SsqwParams::dimension;
    for (int r = 1; r < config.restarts; ++r) {
        std::vector<double> x(dim);
        for (double& a : x) a = 2.0 * std::numbers::pi * uniform01(rng);
        starts.push_back(from_free(x, config.symmetric_mode));
    }
    return starts;
}

inline TrainingResult train(const TargetDistribution& target, const OptimizerConfig& config) {
    config.validate();
    const int n_qubits = target.num_position_qubits();
    const WalkerState init = config.init.make(n_qubits);
    const auto starts = restart_points(config);
    const auto minimizer = make_minimizer(config.optimizer);

    std::vector<std::vector<double>> histories(starts.size());
    std::vector<RestartSummary> summaries(starts.size());

    auto run = [&](std::size_t r) {
        auto& history = histories[r];
        history.reserve(static_cast<std::size_t>(config.max_iters));
        const ScalarFunction f = [&](std::span<const double> x) {
            const double v = objective(from_free(x, config.symmetric_mode), target, config.steps, init);
            history.push_back(v);
            return v;
        };
        const MinimizeOptions opts{config.max_iters, config.initial_trust_radius, config.final_trust_radius};
        const MinimizeResult res = minimizer->minimize(f, to_free(starts[r], config.symmetric_mode), opts);
        summaries[r] = {starts[r], from_free(res.x, config.symmetric_mode), res.f, res.evals, res.stop_reason};
    };

    if (config.threads <= 1 || starts.size() == 1) {
        for (std::size_t r = 0; r < starts.size(); ++r) run(r);
    } else {
        // Restarts are independent; each worker takes a fixed stride so the
        // merged output does not depend on scheduling.
        const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), starts.size());
        std::vector<std::exception_ptr> errors(workers);
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t r = w; r < starts.size(); r += workers) run(r);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
        }
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    TrainingResult out;
    out.optimizer = minimizer->name();
    for (std::size_t r = 0; r < starts.size(); ++r) {
        out.mse_history.insert(out.mse_history.end(), histories[r].begin(), histories[r].end());
        out.iterations_used += summaries[r].evaluations;
        if (summaries[r].best_mse < out.best_mse) {
            out.best_mse = summaries[r].best_mse;
            out.best_params = summaries[r].best_params;
            out.best_restart = r;
        }
    }
    out.restarts = std::move(summaries);
    out.trained_dist = trained_distribution(init, out.best_params, config.steps);
    return out;
}

}  // namespace ssqw
