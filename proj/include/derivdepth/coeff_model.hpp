#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace derivdepth {

/// Per-filter Gaussian mixture with a shared variance:
///   p_i(w) = Σ_j p̂_i^j N(w; c_i^j, σ_i²).
/// Only the means and variances live here; the weights p̂ come from a WeightMap.
class MixtureModel {
public:
    static constexpr double kVarianceFloor = 1e-8;

    MixtureModel() = default;
    /// `means` is filter-major (K×M). Validates sorting and positivity.
    MixtureModel(int num_filters, int num_components, std::vector<double> means,
                 std::vector<double> variances);

    int num_filters() const { return num_filters_; }
    int num_components() const { return num_components_; }

    std::span<const double> means(int filter) const {
        return {means_.data() + static_cast<std::size_t>(filter) * num_components_,
                static_cast<std::size_t>(num_components_)};
    }
    double mean(int filter, int component) const {
        return means_[static_cast<std::size_t>(filter) * num_components_ + component];
    }
    double variance(int filter) const { return variances_[static_cast<std::size_t>(filter)]; }

    const std::vector<double>& all_means() const { return means_; }
    const std::vector<double>& all_variances() const { return variances_; }

    friend bool operator==(const MixtureModel&, const MixtureModel&) = default;

private:
    int num_filters_ = 0;
    int num_components_ = 0;
    std::vector<double> means_;
    std::vector<double> variances_;
};

/// Per-pixel, per-filter mixture weights, stored in single precision.
/// Layout is pixel-major (row-major pixels), then filter slot, then component,
/// matching the OWM1 payload.
class WeightMap {
public:
    static constexpr double kSimplexTolerance = 1e-5;

    WeightMap() = default;
    WeightMap(int width, int height, std::vector<int> filter_indices, int num_components);

    int width() const { return width_; }
    int height() const { return height_; }
    int num_components() const { return num_components_; }
    int num_slots() const { return static_cast<int>(filter_indices_.size()); }
    const std::vector<int>& filter_indices() const { return filter_indices_; }

    /// Slot position of `filter` in filter_indices(), or -1.
    int slot_of(int filter) const;

    std::span<float> row(int x, int y, int slot) {
        return {weights_.data() + offset(x, y, slot), static_cast<std::size_t>(num_components_)};
    }
    std::span<const float> row(int x, int y, int slot) const {
        return {weights_.data() + offset(x, y, slot), static_cast<std::size_t>(num_components_)};
    }

    std::vector<float>& raw() { return weights_; }
    const std::vector<float>& raw() const { return weights_; }

    /// Largest |Σ_j p̂ − 1| over all rows; negative entries count as infinite.
    double max_simplex_error() const;

    friend bool operator==(const WeightMap&, const WeightMap&) = default;

private:
    std::size_t offset(int x, int y, int slot) const {
        const std::size_t pixel = static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x);
        return (pixel * filter_indices_.size() + static_cast<std::size_t>(slot)) * num_components_;
    }

    int width_ = 0;
    int height_ = 0;
    int num_components_ = 0;
    std::vector<int> filter_indices_;
    std::vector<float> weights_;
};

struct KMeansResult {
    std::vector<double> centers;      ///< sorted ascending
    std::vector<double> objective;    ///< within-cluster sum of squares after each update
    std::vector<std::size_t> counts;  ///< assignments per (sorted) center
    std::vector<double> variances;    ///< in-cluster mean squared deviation per (sorted) center
    int iterations = 0;
};

/// One-dimensional Lloyd's algorithm.
///
/// Centers start at the sample quantiles (j + 0.5)/M. Each iteration assigns
/// every sample to its nearest center (ties go to the lower center index),
/// moves centers to their cluster means, and re-seeds an empty cluster at the
/// sample farthest from its current center. Stops when no assignment changes
/// or after `max_iterations`. The initialization is deterministic, so `seed`
/// only matters for callers that subsample before clustering.
KMeansResult kmeans_1d_detailed(std::span<const double> samples, int num_centers, std::uint64_t seed,
                                int max_iterations = 200);

/// Sorted centers of kmeans_1d_detailed. Throws "insufficient samples" when
/// samples.size() < num_centers.
std::vector<double> kmeans_1d(std::span<const double> samples, int num_centers, std::uint64_t seed);

/// Default minimum cluster size for the variance average: max(10, 0.1% of n).
std::size_t default_min_assign(std::size_t num_samples);

/// Fits one mixture per filter. Means are the k-means centers (nudged to be
/// strictly increasing when the data has fewer distinct values than M);
/// σ_i² averages the in-cluster variance over clusters with more than
/// `min_assign` members (all non-empty clusters if none qualify), floored at
/// kVarianceFloor. `min_assign` defaults per filter to default_min_assign.
MixtureModel fit_mixture_model(const std::vector<std::vector<double>>& coeff_samples, int num_components,
                               std::optional<std::size_t> min_assign, std::uint64_t seed);

/// q_j ∝ exp(−(w − c_i^j)² / (2σ_i²)), normalized, evaluated with max-subtraction.
std::vector<double> soft_targets(double w, const MixtureModel& model, int filter);
void soft_targets_into(double w, const MixtureModel& model, int filter, std::span<double> out);

/// Variance-weighted KL divergence averaged over pixels and active filters:
///   L = −1/(N·F) Σ σ_i² Σ_j q (log max(p̂, 1e-12) − log q).
double kl_loss(const WeightMap& predicted, const WeightMap& targets, const MixtureModel& model);

/// GMM1: "GMM1", u32 K, u32 M, K·M f64 means (filter-major), K f64 variances.
void write_mixture_model(const std::filesystem::path& path, const MixtureModel& model);
MixtureModel read_mixture_model(const std::filesystem::path& path);

}  // namespace derivdepth
