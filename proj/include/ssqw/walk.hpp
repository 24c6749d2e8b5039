// walk.hpp
// Coin and shift operators and their composition into discrete-time (DTQW)
// and split-step (SSQW) quantum walk evolution.
//
// Boundaries are periodic: the position register is a ring of 2^N sites.
// One SSQW step applies, in order, coin1 -> S+ -> coin2 -> S-.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ssqw/statevector.hpp"

namespace ssqw {

struct CoinParams {
    double theta = 0.0;
    double phi = 0.0;
    double lambda = 0.0;

    bool is_finite() const {
        return std::isfinite(theta) && std::isfinite(phi) && std::isfinite(lambda);
    }

    friend bool operator==(const CoinParams&, const CoinParams&) = default;
};

// coin1 acts before the right half-shift (buyer), coin2 before the left one (seller).
struct SsqwParams {
    static constexpr std::size_t dimension = 6;

    CoinParams coin1;
    CoinParams coin2;

    std::array<double, dimension> to_array() const {
        return {coin1.theta, coin1.phi, coin1.lambda, coin2.theta, coin2.phi, coin2.lambda};
    }

    static SsqwParams from_array(std::span<const double> v) {
        if (v.size() != dimension) throw std::invalid_argument("SsqwParams: expected 6 angles");
        return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
    }

    friend bool operator==(const SsqwParams&, const SsqwParams&) = default;
};

struct WalkSchedule {
    int steps = 7;

    explicit WalkSchedule(int t = 7) : steps(t) {
        if (t < 1) throw std::invalid_argument("WalkSchedule: steps must be >= 1");
    }
};

// Maps an angle to [0, 2pi). Only used when reporting.
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(a, two_pi);
    if (w < 0.0) w += two_pi;
    if (w >= two_pi) w = 0.0;
    return w;
}

inline CoinParams wrapped(const CoinParams& p) {
    return {wrap_angle(p.theta), wrap_angle(p.phi), wrap_angle(p.lambda)};
}

inline SsqwParams wrapped(const SsqwParams& p) { return {wrapped(p.coin1), wrapped(p.coin2)}; }

// [[cos(t/2), -e^{il} sin(t/2)], [e^{ip} sin(t/2), e^{i(l+p)} cos(t/2)]]
inline CoinMatrix coin_matrix(const CoinParams& p) {
    if (!p.is_finite()) throw std::invalid_argument("coin_matrix: non-finite angle");
    const double c = std::cos(p.theta / 2.0);
    const double s = std::sin(p.theta / 2.0);
    CoinMatrix m;
    m(0, 0) = complex{c, 0.0};
    m(0, 1) = -std::polar(s, p.lambda);
    m(1, 0) = std::polar(s, p.phi);
    m(1, 1) = std::polar(c, p.lambda + p.phi);
    return m;
}

// Named coins expressed in the (theta, phi, lambda) convention above.
namespace coins {
inline constexpr CoinParams identity{0.0, 0.0, 0.0};
inline constexpr CoinParams hadamard{std::numbers::pi / 2.0, 0.0, std::numbers::pi};
inline constexpr CoinParams pauli_x{std::numbers::pi, 0.0, std::numbers::pi};
inline constexpr CoinParams pauli_z{0.0, 0.0, std::numbers::pi};
}  // namespace coins

namespace detail {
// new[x+1] = old[x]
inline void rotate_right(std::span<complex> v) { std::rotate(v.begin(), v.end() - 1, v.end()); }
// new[x-1] = old[x]
inline void rotate_left(std::span<complex> v) { std::rotate(v.begin(), v.begin() + 1, v.end()); }
}  // namespace detail

inline void shift_plus_inplace(WalkerState& s) { detail::rotate_right(s.up()); }
inline void shift_minus_inplace(WalkerState& s) { detail::rotate_left(s.down()); }
inline void shift_dtqw_inplace(WalkerState& s) {
    detail::rotate_right(s.up());
    detail::rotate_left(s.down());
}

inline WalkerState apply_shift_dtqw(WalkerState s) {
    shift_dtqw_inplace(s);
    return s;
}

inline WalkerState apply_shift_plus(WalkerState s) {
    shift_plus_inplace(s);
    return s;
}

inline WalkerState apply_shift_minus(WalkerState s) {
    shift_minus_inplace(s);
    return s;
}

inline WalkerState apply_dtqw_step(WalkerState s, const CoinMatrix& coin) {
    s = apply_coin(std::move(s), coin);
    shift_dtqw_inplace(s);
    return s;
}

inline WalkerState apply_dtqw_step(WalkerState s, const CoinParams& coin) {
    return apply_dtqw_step(std::move(s), coin_matrix(coin));
}

inline WalkerState evolve_dtqw(WalkerState s, const CoinMatrix& coin, WalkSchedule schedule) {
    if (!is_unitary(coin)) throw std::invalid_argument("evolve_dtqw: coin is not unitary");
    for (int t = 0; t < schedule.steps; ++t) {
        apply_coin_inplace(s, coin);
        shift_dtqw_inplace(s);
    }
    return s;
}

inline WalkerState evolve_dtqw(WalkerState s, const CoinParams& coin, WalkSchedule schedule) {
    return evolve_dtqw(std::move(s), coin_matrix(coin), schedule);
}

namespace detail {
inline void ssqw_step_inplace(WalkerState& s, const CoinMatrix& c1, const CoinMatrix& c2) {
    apply_coin_inplace(s, c1);
    shift_plus_inplace(s);
    apply_coin_inplace(s, c2);
    shift_minus_inplace(s);
}
}  // namespace detail

inline WalkerState apply_ssqw_step(WalkerState s, const SsqwParams& params) {
    detail::ssqw_step_inplace(s, coin_matrix(params.coin1), coin_matrix(params.coin2));
    return s;
}

inline WalkerState evolve(WalkerState s, const SsqwParams& params, WalkSchedule schedule) {
    const CoinMatrix c1 = coin_matrix(params.coin1);
    const CoinMatrix c2 = coin_matrix(params.coin2);
    for (int t = 0; t < schedule.steps; ++t) detail::ssqw_step_inplace(s, c1, c2);
    assert(std::abs(s.norm_squared() - 1.0) <= norm_tolerance * schedule.steps);
    return s;
}

// Dense matrix of a linear operator on the walker space, built column by
// column from its action on basis states. Row-major, dimension 2^(N+1).
// Intended for debugging and operator dumps at small N.
template <typename Op>
std::vector<std::vector<complex>> operator_matrix(int num_position_qubits, Op&& op) {
    if (num_position_qubits > 4) {
        throw std::invalid_argument("operator_matrix: limited to N <= 4");
    }
    const std::size_t dim = std::size_t{2} << num_position_qubits;
    std::vector<std::vector<complex>> m(dim, std::vector<complex>(dim));
    for (std::size_t col = 0; col < dim; ++col) {
        std::vector<complex> basis(dim);
        basis[col] = 1.0;
        const WalkerState out = op(WalkerState(num_position_qubits, std::move(basis)));
        const auto amps = out.amplitudes();
        for (std::size_t row = 0; row < dim; ++row) m[row][col] = amps[row];
    }
    return m;
}

}  // namespace ssqw
