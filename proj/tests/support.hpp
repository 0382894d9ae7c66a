#pragma once

#include "derivdepth/coeff_model.hpp"
#include "derivdepth/field.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

inline derivdepth::ScalarField random_field(int w, int h, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    derivdepth::ScalarField f(w, h);
    for (double& v : f.values()) v = u(rng);
    return f;
}

inline double max_abs_diff(const derivdepth::ScalarField& a, const derivdepth::ScalarField& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
    return m;
}

inline double max_abs(const derivdepth::ScalarField& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

// Evenly spaced means spread over [lo, hi] for every filter, one shared variance.
inline derivdepth::MixtureModel uniform_model(int filters, int components, double lo, double hi, double variance) {
    std::vector<double> means;
    for (int i = 0; i < filters; ++i) {
        for (int j = 0; j < components; ++j) {
            means.push_back(components == 1 ? lo : lo + (hi - lo) * j / (components - 1));
        }
    }
    return derivdepth::MixtureModel(filters, components, means, std::vector<double>(filters, variance));
}

// Scratch directory that disappears with the test.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("derivdepth_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testing_support
