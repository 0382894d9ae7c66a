#pragma once

#include "derivdepth/coeff_model.hpp"
#include "derivdepth/field.hpp"
#include "derivdepth/filter_bank.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace derivdepth {

/// Degrades oracle weights to mimic a predictor with low-confidence regions.
struct CorruptionConfig {
    double ambiguity_fraction = 0.0;  ///< probability a (pixel, filter) row becomes uniform 1/M
    double blur_temperature = 1.0;    ///< rows are raised to 1/T and renormalized
    std::uint64_t seed = 0;

    void validate() const;
};

/// Synthetic stand-in for a learned predictor: per pixel and filter in `subset`,
/// the soft targets of the true coefficient, tempered, then replaced by the
/// uniform row with probability ambiguity_fraction. One uniform draw is taken
/// per row in pixel-major, filter-minor order, so output depends only on the
/// inputs and the seed.
WeightMap synth_predict(const ScalarField& y_true, const FilterBank& bank, const MixtureModel& model,
                        const std::vector<int>& subset, const CorruptionConfig& corruption);

/// OWM1: "OWM1", u32 W, u32 H, u32 F, u32 M, F u32 filter indices, then
/// W·H·F·M float32 weights (pixel-major, filter, component). Little-endian.
void write_weight_map(const std::filesystem::path& path, const WeightMap& map);

/// Throws BadMagicError, TruncatedPayloadError or SimplexViolationError
/// (row sums off by more than 1e-4, or negative entries).
WeightMap read_weight_map(const std::filesystem::path& path);

}  // namespace derivdepth
