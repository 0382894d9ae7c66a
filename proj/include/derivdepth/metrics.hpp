#pragma once

#include "derivdepth/field.hpp"

#include <string>
#include <vector>

namespace derivdepth {

/// Standard monocular depth accuracy measures, pooled over all masked pixels.
struct DepthMetrics {
    double rmse_lin = 0.0;  ///< sqrt(mean (z − ẑ)²), meters
    double rmse_log = 0.0;  ///< sqrt(mean (ln z − ln ẑ)²)
    double abs_rel = 0.0;   ///< mean |z − ẑ| / z
    double sqr_rel = 0.0;   ///< mean |z − ẑ|² / z
    double delta1 = 0.0;    ///< fraction with max(z/ẑ, ẑ/z) < 1.25
    double delta2 = 0.0;    ///< ... < 1.25²
    double delta3 = 0.0;    ///< ... < 1.25³

    /// One-line JSON record, 6 significant digits.
    std::string to_json() const;
};

/// y = 1 / max(z, z_min).
ScalarField depth_to_scene(const ScalarField& z, double z_min = 0.1);

/// z = clamp(1 / y, z_min, z_max); y ≤ 0 maps to z_max.
ScalarField scene_to_depth(const ScalarField& y, double z_min = 0.1, double z_max = 10.0);

/// `mask` may be empty (every pixel valid); otherwise nonzero entries are valid.
DepthMetrics evaluate(const ScalarField& z_hat, const ScalarField& z_true, const ScalarField& mask = {});

/// Pools pixels across several (prediction, truth, mask) triples before averaging.
DepthMetrics evaluate_pooled(const std::vector<ScalarField>& z_hat, const std::vector<ScalarField>& z_true,
                             const std::vector<ScalarField>& masks = {});

}  // namespace derivdepth
