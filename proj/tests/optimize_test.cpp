#include "ssqw/io.hpp"
#include "ssqw/optimize.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace ssqw;
using std::numbers::pi;

namespace {

// Second implementation of the loss for cross-checking.
double mse_reference(const std::vector<double>& a, const std::vector<double>& b) {
    long double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (static_cast<long double>(a[i]) - b[i]) * (static_cast<long double>(a[i]) - b[i]);
    return static_cast<double>(acc / a.size());
}

std::vector<double> random_simplex_point(std::size_t n, std::mt19937_64& rng) {
    std::exponential_distribution<double> e;
    std::vector<double> p(n);
    double s = 0;
    for (double& x : p) s += (x = e(rng));
    for (double& x : p) x /= s;
    return p;
}

TargetDistribution target_from_params(const SsqwParams& p, const InitialCondition& init, int steps) {
    return TargetDistribution(trained_distribution(init.make(4), p, WalkSchedule(steps)), Domain(0, 15));
}

InitialCondition centered() {
    InitialCondition c;
    c.x0 = 8;
    return c;
}

double mirror_asymmetry(const std::vector<double>& p, std::size_t c) {
    const std::size_t n = p.size();
    double m = 0;
    for (std::size_t d = 0; d < n; ++d) m = std::max(m, std::abs(p[(c + d) % n] - p[(c + n - d) % n]));
    return m;
}

}  // namespace

TEST(mse, examples) {
    const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
    EXPECT_EQ(mse(p, p), 0.0);
    EXPECT_EQ(mse(std::vector<double>{1, 0, 0, 0}, std::vector<double>{0, 1, 0, 0}), 0.5);
}

TEST(mse, matches_reference_on_random_pairs) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = std::size_t{1} << (1 + i % 8);
        const auto a = random_simplex_point(n, rng);
        const auto b = random_simplex_point(n, rng);
        EXPECT_NEAR(mse(a, b), mse_reference(a, b), 1e-15);
        EXPECT_GE(mse(a, b), 0.0);
    }
}

TEST(mse, rejects_length_mismatch) {
    EXPECT_THROW(mse(std::vector<double>{1, 0}, std::vector<double>{1, 0, 0, 0}), std::invalid_argument);
}

TEST(objective, zero_on_own_distribution) {
    const SsqwParams p{{1.1, 0.3, -0.4}, {2.0, 0.9, 0.1}};
    const auto t = target_from_params(p, centered(), 7);
    EXPECT_EQ(objective(p, t, WalkSchedule(7), centered().make(4)), 0.0);
}

TEST(objective, identity_coins_against_uniform_closed_form) {
    const auto uniform = analytic_histogram(Distribution::uniform(), Domain(0, 15), 16);
    const double v = objective({coins::identity, coins::identity}, uniform, WalkSchedule(7), initial_state(4, 1.0, 0.0, 3));
    const double expected = (1.0 / 16) * ((15.0 / 16) * (15.0 / 16) + 15 * (1.0 / 16) * (1.0 / 16));
    EXPECT_NEAR(v, expected, 1e-15);
    EXPECT_NEAR(v, 0.05859375, 1e-15);
}

TEST(objective, continuous_in_every_angle) {
    const auto t = analytic_histogram(Distribution::normal(7.5, 1.5), Domain(0, 15), 16);
    const SsqwParams p{{0.7, 1.3, 2.2}, {1.9, -0.5, 0.4}};
    const auto init = centered().make(4);
    const double base = objective(p, t, WalkSchedule(7), init);
    for (std::size_t k = 0; k < 6; ++k) {
        auto a = p.to_array();
        a[k] += 1e-9;
        EXPECT_LT(std::abs(objective(SsqwParams::from_array(a), t, WalkSchedule(7), init) - base), 1e-7);
    }
}

TEST(objective, rejects_grid_mismatch) {
    const auto t = analytic_histogram(Distribution::uniform(), Domain(0, 15), 8);
    EXPECT_THROW(objective({}, t, WalkSchedule(7), initial_state(4, 1.0, 0.0, 0)), std::invalid_argument);
}

TEST(minimizers, solve_smooth_test_problems) {
    const ScalarFunction quad = [](std::span<const double> x) {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (i + 1.0) * (x[i] - 0.3 * i) * (x[i] - 0.3 * i);
        return s;
    };
    const ScalarFunction rosen = [](std::span<const double> x) {
        return 100 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1 - x[0]) * (1 - x[0]);
    };
    const Cobyla cobyla;
    const NelderMead nm;
    for (const Minimizer* m : {static_cast<const Minimizer*>(&cobyla), static_cast<const Minimizer*>(&nm)}) {
        const auto q = m->minimize(quad, std::vector<double>(6, 1.0), {4000, 0.5, 1e-8});
        EXPECT_LT(q.f, 1e-10) << m->name();
        EXPECT_LE(q.evals, 4000);
        // Linear models crawl along the curved valley; scipy's COBYLA sits near 1e-7 on the same budget.
        const bool linear_model = m->name() == "cobyla";
        const auto r = m->minimize(rosen, {-1.2, 1.0}, {20000, 0.5, 1e-10});
        EXPECT_LT(r.f, linear_model ? 1e-5 : 1e-8) << m->name();
        EXPECT_NEAR(r.x[0], 1.0, linear_model ? 5e-3 : 1e-3) << m->name();
    }
}

TEST(minimizers, respect_budget_and_validate_options) {
    int calls = 0;
    const ScalarFunction f = [&](std::span<const double> x) {
        ++calls;
        return std::sin(x[0]) + std::cos(x[1]);
    };
    const auto r = Cobyla().minimize(f, {0.0, 0.0}, {7, 0.5, 1e-6});
    EXPECT_EQ(calls, 7);
    EXPECT_EQ(r.evals, 7);
    EXPECT_THROW(Cobyla().minimize(f, {0.0}, {0, 0.5, 1e-6}), std::invalid_argument);
    EXPECT_THROW(Cobyla().minimize(f, {0.0}, {10, 0.5, 0.5}), std::invalid_argument);
    EXPECT_THROW(NelderMead().minimize(f, {}, {10, 0.5, 1e-6}), std::invalid_argument);
}

TEST(train, fixed_point_returns_zero_loss) {
    const SsqwParams p{{1.1, 0.3, -0.4}, {2.0, 0.9, 0.1}};
    const auto t = target_from_params(p, centered(), 7);
    OptimizerConfig cfg;
    cfg.initial_params = p;
    cfg.init = centered();
    const auto r = train(t, cfg);
    EXPECT_EQ(r.mse_history.front(), 0.0);
    EXPECT_EQ(r.best_mse, 0.0);
    EXPECT_EQ(r.best_params, p);
}

TEST(train, normal_target_reaches_fit_gate) {
    const auto t = analytic_histogram(Distribution::normal(7.5, 2 * 15.0 / 16), Domain(0, 15), 16);
    OptimizerConfig cfg;
    cfg.init = centered();
    cfg.restarts = 8;
    cfg.seed = 1;
    const auto r = train(t, cfg);
    EXPECT_LE(r.best_mse, 1e-3);
}

TEST(train, invariants_hold) {
    const auto t = analytic_histogram(Distribution::lognormal(2.0, 0.3), Domain(0, 15), 16);
    OptimizerConfig cfg;
    cfg.init = centered();
    cfg.restarts = 3;
    cfg.max_iters = 300;
    cfg.seed = 9;
    const auto r = train(t, cfg);

    EXPECT_LE(r.mse_history.size(), static_cast<std::size_t>(cfg.restarts * cfg.max_iters));
    EXPECT_EQ(static_cast<std::size_t>(r.iterations_used), r.mse_history.size());
    EXPECT_EQ(r.best_mse, *std::min_element(r.mse_history.begin(), r.mse_history.end()));
    EXPECT_LE(r.best_mse, objective(cfg.initial_params, t, cfg.steps, cfg.init.make(4)));
    EXPECT_NEAR(objective(r.best_params, t, cfg.steps, cfg.init.make(4)), r.best_mse, 1e-14);
    EXPECT_EQ(r.trained_dist, trained_distribution(cfg.init.make(4), r.best_params, cfg.steps));
    for (const auto& s : r.restarts) EXPECT_LE(s.evaluations, cfg.max_iters);
}

TEST(train, deterministic_for_fixed_seed_and_thread_count_independent) {
    const auto t = analytic_histogram(Distribution::normal(6.0, 2.0), Domain(0, 15), 16);
    OptimizerConfig cfg;
    cfg.init = centered();
    cfg.restarts = 4;
    cfg.max_iters = 200;
    cfg.seed = 21;
    const auto a = train(t, cfg);
    const auto b = train(t, cfg);
    cfg.threads = 3;
    const auto c = train(t, cfg);
    EXPECT_EQ(a.mse_history, b.mse_history);
    EXPECT_EQ(a.mse_history, c.mse_history);
    EXPECT_EQ(a.best_params, c.best_params);
    cfg.threads = 1;
    EXPECT_EQ(io::to_json(a, cfg).dump(), io::to_json(b, cfg).dump());
}

TEST(train, symmetric_mode_uses_two_angles_and_stays_symmetric) {
    const double w = 15.0 / 16;
    const auto t = analytic_histogram(Distribution::normal(8.5 * w, 2 * w), Domain(0, 15), 16);
    OptimizerConfig cfg;
    cfg.init.alpha = 1.0 / std::numbers::sqrt2;
    cfg.init.beta = complex(0, 1.0 / std::numbers::sqrt2);
    cfg.init.x0 = 8;
    cfg.restarts = 4;
    cfg.seed = 2;

    cfg.symmetric_mode = true;
    const auto sym = train(t, cfg);
    for (const auto& params : {sym.best_params, sym.restarts.back().start}) {
        EXPECT_EQ(params.coin1.phi, 0.0);
        EXPECT_EQ(params.coin1.lambda, 0.0);
        EXPECT_EQ(params.coin2.phi, 0.0);
        EXPECT_EQ(params.coin2.lambda, 0.0);
    }
    EXPECT_EQ(to_free(sym.best_params, true).size(), 2u);

    cfg.symmetric_mode = false;
    const auto full = train(t, cfg);
    EXPECT_LE(mirror_asymmetry(sym.trained_dist, 8), mirror_asymmetry(full.trained_dist, 8) + 1e-6);
}

TEST(train, nelder_mead_fallback) {
    const auto t = analytic_histogram(Distribution::normal(7.5, 1.5), Domain(0, 15), 16);
    OptimizerConfig cfg;
    cfg.init = centered();
    cfg.optimizer = OptimizerKind::nelder_mead;
    const auto r = train(t, cfg);
    EXPECT_EQ(r.optimizer, "nelder_mead");
    EXPECT_LT(r.best_mse, objective(cfg.initial_params, t, cfg.steps, cfg.init.make(4)));
}

TEST(train, rejects_invalid_config) {
    const auto t = analytic_histogram(Distribution::uniform(), Domain(0, 15), 16);
    OptimizerConfig cfg;
    cfg.max_iters = 0;
    EXPECT_THROW(train(t, cfg), std::invalid_argument);
    cfg = {};
    cfg.final_trust_radius = 1.0;
    EXPECT_THROW(train(t, cfg), std::invalid_argument);
    cfg = {};
    cfg.restarts = 0;
    EXPECT_THROW(train(t, cfg), std::invalid_argument);
}

TEST(train, result_json_reports_wrapped_params) {
    const auto t = analytic_histogram(Distribution::uniform(), Domain(0, 15), 16);
    OptimizerConfig cfg;
    cfg.max_iters = 20;
    cfg.initial_params = {{-1.0, 7.0, 0.0}, {0.5, 0.5, 0.5}};
    const auto r = train(t, cfg);
    const auto j = io::to_json(r, cfg);
    for (const char* coin : {"coin1", "coin2"})
        for (const char* a : {"theta", "phi", "lambda"}) {
            const double v = j.at("params").at(coin).at(a).get<double>();
            EXPECT_GE(v, 0.0);
            EXPECT_LT(v, 2 * pi);
        }
    EXPECT_EQ(io::params_from_json(j.at("params_raw")), r.best_params);
    EXPECT_EQ(j.at("metadata").at("optimizer"), "cobyla");
    EXPECT_EQ(j.at("history").size(), r.mse_history.size());
}
