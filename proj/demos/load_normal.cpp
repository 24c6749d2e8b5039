// Fits a split-step walk to a 16-bin normal histogram and prints both
// distributions side by side.
#include <cstdio>

#include "ssqw/ssqw.hpp"

int main() {
    using namespace ssqw;
    const auto target = recipes::make_target(recipes::normal_law());
    const auto result = train(target, recipes::training_config(target));

    std::printf("best mse %.3e after %d evaluations\n", result.best_mse, result.iterations_used);
    const auto& p = result.best_params;
    std::printf("coin1 (%.4f, %.4f, %.4f)  coin2 (%.4f, %.4f, %.4f)\n", wrap_angle(p.coin1.theta),
                wrap_angle(p.coin1.phi), wrap_angle(p.coin1.lambda), wrap_angle(p.coin2.theta),
                wrap_angle(p.coin2.phi), wrap_angle(p.coin2.lambda));
    std::printf("bin  target   trained\n");
    for (std::size_t i = 0; i < target.n_bins(); ++i) {
        std::printf("%3zu  %.5f  %.5f\n", i, target.probs[i], result.trained_dist[i]);
    }
}
