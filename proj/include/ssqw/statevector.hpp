// statevector.hpp
// Walker state over the coin (x) position Hilbert space and the primitive
// operations on it: construction, coin application, position marginal.

#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssqw {

using complex = std::complex<double>;

inline constexpr int max_position_qubits = 24;
inline constexpr double norm_tolerance = 1e-10;

enum class Coin : std::size_t { up = 0, down = 1 };

// 2x2 complex matrix, row-major.
struct CoinMatrix {
    std::array<complex, 4> m{complex{1.0, 0.0}, complex{}, complex{}, complex{1.0, 0.0}};

    complex& operator()(std::size_t r, std::size_t c) { return m[2 * r + c]; }
    const complex& operator()(std::size_t r, std::size_t c) const { return m[2 * r + c]; }

    static CoinMatrix identity() { return {}; }
    static CoinMatrix hadamard() {
        const double s = 1.0 / std::sqrt(2.0);
        return {{complex{s, 0}, complex{s, 0}, complex{s, 0}, complex{-s, 0}}};
    }
    static CoinMatrix pauli_x() { return {{complex{}, complex{1, 0}, complex{1, 0}, complex{}}}; }
    static CoinMatrix pauli_z() { return {{complex{1, 0}, complex{}, complex{}, complex{-1, 0}}}; }
};

// max_ij |(C^dagger C - I)_ij|
inline double unitarity_defect(const CoinMatrix& c) {
    double worst = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            complex acc = std::conj(c(0, i)) * c(0, j) + std::conj(c(1, i)) * c(1, j);
            if (i == j) acc -= 1.0;
            worst = std::max(worst, std::abs(acc));
        }
    }
    return worst;
}

inline bool is_unitary(const CoinMatrix& c, double tol = norm_tolerance) {
    return unitarity_defect(c) <= tol;
}

// Amplitudes are stored coin-major: flat index = c * 2^N + x, with
// c = 0 for |up> and c = 1 for |down>.
class WalkerState {
public:
    explicit WalkerState(int num_position_qubits)
        : n_(checked_qubits(num_position_qubits)),
          amps_(std::size_t{2} << n_) {}

    WalkerState(int num_position_qubits, std::vector<complex> amps)
        : n_(checked_qubits(num_position_qubits)), amps_(std::move(amps)) {
        if (amps_.size() != (std::size_t{2} << n_)) {
            throw std::invalid_argument("WalkerState: amplitude vector must have length 2 * 2^N");
        }
        for (const auto& a : amps_) {
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
                throw std::invalid_argument("WalkerState: non-finite amplitude");
            }
        }
    }

    int num_position_qubits() const { return n_; }
    std::size_t num_positions() const { return std::size_t{1} << n_; }
    std::size_t size() const { return amps_.size(); }

    complex& at(Coin c, std::size_t x) { return amps_[index(c, x)]; }
    const complex& at(Coin c, std::size_t x) const { return amps_[index(c, x)]; }

    std::span<complex> up() { return {amps_.data(), num_positions()}; }
    std::span<const complex> up() const { return {amps_.data(), num_positions()}; }
    std::span<complex> down() { return {amps_.data() + num_positions(), num_positions()}; }
    std::span<const complex> down() const { return {amps_.data() + num_positions(), num_positions()}; }

    std::span<complex> amplitudes() { return amps_; }
    std::span<const complex> amplitudes() const { return amps_; }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return s;
    }

    bool is_normalized(double tol = norm_tolerance) const {
        return std::abs(norm_squared() - 1.0) <= tol;
    }

    friend bool operator==(const WalkerState&, const WalkerState&) = default;

private:
    static int checked_qubits(int n) {
        if (n < 1 || n > max_position_qubits) {
            throw std::invalid_argument("WalkerState: position qubits must be in [1, " +
                                        std::to_string(max_position_qubits) + "]");
        }
        return n;
    }

    std::size_t index(Coin c, std::size_t x) const {
        assert(x < num_positions());
        return static_cast<std::size_t>(c) * num_positions() + x;
    }

    int n_;
    std::vector<complex> amps_;
};

// (alpha |up> + beta |down>) (x) |x0>
inline WalkerState initial_state(int num_position_qubits, complex alpha, complex beta,
                                 std::size_t x0) {
    WalkerState s(num_position_qubits);
    if (x0 >= s.num_positions()) {
        throw std::invalid_argument("initial_state: x0 outside the position register");
    }
    if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > norm_tolerance) {
        throw std::invalid_argument("initial_state: |alpha|^2 + |beta|^2 must equal 1");
    }
    s.at(Coin::up, x0) = alpha;
    s.at(Coin::down, x0) = beta;
    return s;
}

// Born-rule probabilities over position with the coin traced out.
inline std::vector<double> position_distribution(const WalkerState& state) {
    assert(state.is_normalized());
    const auto up = state.up();
    const auto down = state.down();
    std::vector<double> p(state.num_positions());
    for (std::size_t x = 0; x < p.size(); ++x) p[x] = std::norm(up[x]) + std::norm(down[x]);
    return p;
}

// In-place (I (x) C).
inline void apply_coin_inplace(WalkerState& state, const CoinMatrix& coin) {
    auto up = state.up();
    auto down = state.down();
    const complex c00 = coin(0, 0), c01 = coin(0, 1), c10 = coin(1, 0), c11 = coin(1, 1);
    for (std::size_t x = 0; x < up.size(); ++x) {
        const complex u = up[x];
        const complex d = down[x];
        up[x] = c00 * u + c01 * d;
        down[x] = c10 * u + c11 * d;
    }
}

inline WalkerState apply_coin(WalkerState state, const CoinMatrix& coin) {
    if (!is_unitary(coin)) throw std::invalid_argument("apply_coin: coin is not unitary");
    apply_coin_inplace(state, coin);
    return state;
}

}  // namespace ssqw
