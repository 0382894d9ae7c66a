#pragma once
// Independent reference computations used by the unit and acceptance tests.

#include "derivdepth/coeff_model.hpp"
#include "derivdepth/field.hpp"
#include "derivdepth/filter_bank.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace oracle {

inline int wrap(int v, int n) { return ((v % n) + n) % n; }

// 3x3 second differences: horizontal, vertical and both diagonals (halved).
inline std::vector<std::array<double, 9>> regularizer_kernels() {
    return {
        std::array<double, 9>{0, 0, 0, 1, -2, 1, 0, 0, 0},
        std::array<double, 9>{0, 1, 0, 0, -2, 0, 0, 1, 0},
        std::array<double, 9>{0.5, 0, 0, 0, -1, 0, 0, 0, 0.5},
        std::array<double, 9>{0, 0, 0.5, 0, -1, 0, 0.5, 0, 0},
    };
}

// Circulant correlation matrix: (A y)(n) = sum_m k(m) y(n + m), indices wrapped.
inline Eigen::MatrixXd circulant(int w, int h, int radius, std::span<const double> taps) {
    const int n = w * h, side = 2 * radius + 1;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int py = 0; py < h; ++py)
        for (int px = 0; px < w; ++px)
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx)
                    a(py * w + px, wrap(py + dy, h) * w + wrap(px + dx, w)) += taps[(dy + radius) * side + dx + radius];
    return a;
}

// Solves (beta sum A'A + reg sum B'B) y = beta sum A'w by dense Cholesky.
inline derivdepth::ScalarField dense_y_solve(const std::vector<derivdepth::ScalarField>& w,
                                             const std::vector<int>& subset, const derivdepth::FilterBank& bank,
                                             double beta, double reg) {
    const int wd = w.front().width(), ht = w.front().height(), n = wd * ht;
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (std::size_t s = 0; s < subset.size(); ++s) {
        const auto& f = bank[subset[s]];
        const Eigen::MatrixXd a = circulant(wd, ht, f.radius, f.taps);
        lhs += beta * a.transpose() * a;
        rhs += beta * a.transpose() * Eigen::Map<const Eigen::VectorXd>(w[s].values().data(), n);
    }
    for (const auto& k : regularizer_kernels()) {
        const Eigen::MatrixXd b = circulant(wd, ht, 1, k);
        lhs += reg * b.transpose() * b;
    }
    const Eigen::VectorXd y = lhs.ldlt().solve(rhs);
    return derivdepth::ScalarField(wd, ht, std::vector<double>(y.data(), y.data() + n));
}

// -log sum_j p_j N(w; c_j, var) + beta/(2 var) (w - w_bar)^2, with the sum
// taken in log space so far-off w stays finite.
inline double eq7(double w, std::span<const float> p, std::span<const double> c, double var, double w_bar,
                  double beta) {
    std::vector<double> terms;
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (p[j] > 0) terms.push_back(std::log(double(p[j])) - (w - c[j]) * (w - c[j]) / (2 * var));
    }
    const double top = *std::max_element(terms.begin(), terms.end());
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - top);
    const double log_density = top + std::log(acc) - 0.5 * std::log(2 * std::numbers::pi * var);
    return -log_density + beta / (2 * var) * (w - w_bar) * (w - w_bar);
}

// Eq. 8 written out: posterior mean of the component with the largest posterior weight.
inline double argmax_posterior_mean(std::span<const float> p, std::span<const double> c, double var, double w_bar,
                                    double beta) {
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (!(p[j] > 0)) continue;
        const double score = std::log(double(p[j])) - beta / (beta + 1) * (c[j] - w_bar) * (c[j] - w_bar) / (2 * var);
        if (score > best_score) {
            best_score = score;
            best = j;
        }
    }
    return (c[best] + beta * w_bar) / (1 + beta);
}

// Minimum of eq7 over [min c - 3 sigma, max c + 3 sigma] at step sigma/100.
inline double eq7_grid_min(std::span<const float> p, std::span<const double> c, double var, double w_bar,
                           double beta) {
    const double sigma = std::sqrt(var);
    const double lo = *std::min_element(c.begin(), c.end()) - 3 * sigma;
    const double hi = *std::max_element(c.begin(), c.end()) + 3 * sigma;
    double best = std::numeric_limits<double>::infinity();
    for (long k = 0;; ++k) {
        const double w = lo + k * (sigma / 100);
        if (w > hi) break;
        best = std::min(best, eq7(w, p, c, var, w_bar, beta));
    }
    return best;
}

struct WStepTrial {
    int filter = 0;
    std::vector<float> p_hat;
    double w_bar = 0.0;
    double beta = 0.0;
};

// Random filter of a fitted model, weights uniform on the simplex, w_bar
// uniform over the span of that filter's means, beta log-uniform over the
// solver's schedule range.
inline WStepTrial random_wstep_trial(std::mt19937_64& rng, const derivdepth::MixtureModel& model) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, model.num_filters() - 1);
    std::exponential_distribution<double> e(1.0);
    WStepTrial t;
    t.filter = pick(rng);
    std::vector<double> raw(model.num_components());
    double total = 0.0;
    for (double& v : raw) total += (v = e(rng));
    for (double v : raw) t.p_hat.push_back(static_cast<float>(v / total));
    const auto c = model.means(t.filter);
    t.w_bar = c.front() + (c.back() - c.front()) * u(rng);
    t.beta = std::ldexp(1.0, -10) * std::exp2(17.0 * u(rng));
    return t;
}

}  // namespace oracle
