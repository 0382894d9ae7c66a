#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace derivdepth {

/// Dense W×H grid of doubles, row-major, x = column, y = row (downwards).
/// Holds scene maps, depth maps and coefficient maps alike.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(int width, int height, double fill = 0.0);
    ScalarField(int width, int height, std::vector<double> values);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double& at(int x, int y) { return values_[index(x, y)]; }
    double at(int x, int y) const { return values_[index(x, y)]; }

    /// Edge-replicated read: coordinates outside the grid clamp to the border.
    double clamped(int x, int y) const;

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    bool same_shape(const ScalarField& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }
    bool all_finite() const;
    double mean() const;

    friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

/// Copy of `field` grown by `radius` pixels on every side with edge replication.
ScalarField pad_replicate(const ScalarField& field, int radius);

/// Inverse of pad_replicate: the `width`×`height` window starting at (radius, radius).
ScalarField crop(const ScalarField& field, int radius, int width, int height);

/// Root-mean-square difference of two equally shaped fields.
double rmse(const ScalarField& a, const ScalarField& b);

}  // namespace derivdepth
