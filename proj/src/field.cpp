#include "derivdepth/field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace derivdepth {

ScalarField::ScalarField(int width, int height, double fill)
    : width_(width), height_(height) {
    if (width < 0 || height < 0) {
        throw std::invalid_argument("negative field dimensions");
    }
    values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

ScalarField::ScalarField(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (width < 0 || height < 0 ||
        values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw std::invalid_argument("field value count does not match dimensions");
    }
}

double ScalarField::clamped(int x, int y) const {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return values_[index(x, y)];
}

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::mean() const {
    if (values_.empty()) return 0.0;
    return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

ScalarField pad_replicate(const ScalarField& field, int radius) {
    ScalarField out(field.width() + 2 * radius, field.height() + 2 * radius);
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            out.at(x, y) = field.clamped(x - radius, y - radius);
        }
    }
    return out;
}

ScalarField crop(const ScalarField& field, int radius, int width, int height) {
    if (radius < 0 || 2 * radius + width > field.width() || 2 * radius + height > field.height()) {
        throw std::invalid_argument("crop window exceeds field");
    }
    ScalarField out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            out.at(x, y) = field.at(x + radius, y + radius);
        }
    }
    return out;
}

double rmse(const ScalarField& a, const ScalarField& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("rmse: shape mismatch");
    if (a.empty()) return 0.0;
    double acc = 0.0;
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) {
        const double d = av[i] - bv[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(av.size()));
}

}  // namespace derivdepth
