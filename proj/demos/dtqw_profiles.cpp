// Position profiles of a Hadamard walk on 256 sites after 50 steps, for the
// three usual initial coin states. Prints x - x0 and the probability.
#include <cstdio>

#include "ssqw/ssqw.hpp"

int main() {
    using namespace ssqw;
    constexpr int n = 8;
    constexpr std::size_t x0 = std::size_t{1} << (n - 1);
    const double h = 1.0 / std::numbers::sqrt2;
    const struct {
        const char* name;
        complex alpha, beta;
    } starts[] = {{"up", 1.0, 0.0}, {"down", 0.0, 1.0}, {"balanced", h, complex(0.0, h)}};

    std::printf("offset");
    for (const auto& s : starts) std::printf(",%s", s.name);
    std::printf("\n");

    std::vector<std::vector<double>> profiles;
    for (const auto& s : starts) {
        profiles.push_back(position_distribution(evolve_dtqw(initial_state(n, s.alpha, s.beta, x0), coins::hadamard, WalkSchedule(50))));
    }
    for (std::size_t x = x0 - 50; x <= x0 + 50; x += 2) {
        std::printf("%lld", static_cast<long long>(x) - static_cast<long long>(x0));
        for (const auto& p : profiles) std::printf(",%.6f", p[x]);
        std::printf("\n");
    }
}
