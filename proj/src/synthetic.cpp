#include "derivdepth/synthetic.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace derivdepth {

namespace {
double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}
}  // namespace

ScalarField synth_scene(int width, int height, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int bumps = 5 + static_cast<int>(rng() % 11);
    ScalarField y(width, height, 0.25);
    for (int b = 0; b < bumps; ++b) {
        const double amp = uniform(rng, 0.05, 0.3);
        const double s = uniform(rng, 5.0, 20.0);
        const double cx = uniform(rng, 0.0, width);
        const double cy = uniform(rng, 0.0, height);
        for (int py = 0; py < height; ++py) {
            for (int px = 0; px < width; ++px) {
                const double dx = px - cx, dy = py - cy;
                y.at(px, py) += amp * std::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
            }
        }
    }
    return y;
}

std::vector<ScalarField> synth_corpus(int count, int width, int height, std::uint64_t seed) {
    std::vector<ScalarField> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) out.push_back(synth_scene(width, height, seed * 1000 + static_cast<std::uint64_t>(k)));
    return out;
}

std::vector<std::vector<double>> collect_coefficient_samples(const std::vector<ScalarField>& scenes,
                                                             const FilterBank& bank, int stride) {
    if (stride < 1) throw std::invalid_argument("stride must be positive");
    std::vector<std::vector<double>> samples(static_cast<std::size_t>(bank.size()));
    for (const ScalarField& scene : scenes) {
        for (int f = 0; f < bank.size(); ++f) {
            const Filter& k = bank[f];
            auto& out = samples[static_cast<std::size_t>(f)];
            for (int py = 0; py < scene.height(); py += stride) {
                for (int px = 0; px < scene.width(); px += stride) {
                    double acc = 0.0;
                    for (int dy = -k.radius; dy <= k.radius; ++dy) {
                        for (int dx = -k.radius; dx <= k.radius; ++dx) {
                            acc += k.tap(dx, dy) * scene.clamped(px + dx, py + dy);
                        }
                    }
                    out.push_back(acc);
                }
            }
        }
    }
    return samples;
}

}  // namespace derivdepth
