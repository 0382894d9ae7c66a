#pragma once

#include "derivdepth/field.hpp"
#include "derivdepth/filter_bank.hpp"

#include <cstdint>
#include <vector>

namespace derivdepth {

/// Smooth synthetic scene map: y = 0.25 + Σ a_k exp(−|p − μ_k|² / (2 s_k²)) with
/// 5–15 bumps, a_k ∈ [0.05, 0.3], s_k ∈ [5, 20] px and centers uniform over
/// the grid. Fully determined by `seed`.
ScalarField synth_scene(int width, int height, std::uint64_t seed);

/// `count` scenes with seeds seed·1000 + k.
std::vector<ScalarField> synth_corpus(int count, int width, int height, std::uint64_t seed);

/// Coefficient values of every bank filter sampled on a `stride`-spaced grid
/// over each scene (edge-replicate boundaries), grouped per filter.
std::vector<std::vector<double>> collect_coefficient_samples(const std::vector<ScalarField>& scenes,
                                                             const FilterBank& bank, int stride = 4);

}  // namespace derivdepth
