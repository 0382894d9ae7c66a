#include "derivdepth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace derivdepth {

namespace {

struct Accumulator {
    double sq = 0.0, sq_log = 0.0, abs_rel = 0.0, sqr_rel = 0.0;
    std::size_t d1 = 0, d2 = 0, d3 = 0, count = 0;

    void add(double pred, double truth) {
        if (!(pred > 0.0) || !(truth > 0.0)) throw std::invalid_argument("nonpositive depth under mask");
        const double diff = truth - pred;
        const double ldiff = std::log(truth / pred);
        sq += diff * diff;
        sq_log += ldiff * ldiff;
        abs_rel += std::abs(diff) / truth;
        sqr_rel += diff * diff / truth;
        const double delta = std::max(truth / pred, pred / truth);
        // 1.25, 1.25² and 1.25³ are exact in binary floating point.
        d1 += delta < 1.25;
        d2 += delta < 1.5625;
        d3 += delta < 1.953125;
        ++count;
    }

    DepthMetrics finish() const {
        if (count == 0) throw std::invalid_argument("empty mask");
        const double n = static_cast<double>(count);
        DepthMetrics m;
        m.rmse_lin = std::sqrt(sq / n);
        m.rmse_log = std::sqrt(sq_log / n);
        m.abs_rel = abs_rel / n;
        m.sqr_rel = sqr_rel / n;
        m.delta1 = static_cast<double>(d1) / n;
        m.delta2 = static_cast<double>(d2) / n;
        m.delta3 = static_cast<double>(d3) / n;
        return m;
    }
};

void accumulate(Accumulator& acc, const ScalarField& z_hat, const ScalarField& z_true, const ScalarField& mask) {
    if (!z_hat.same_shape(z_true)) throw std::invalid_argument("shape mismatch between prediction and truth");
    if (!mask.empty() && !mask.same_shape(z_true)) throw std::invalid_argument("shape mismatch between mask and truth");
    auto p = z_hat.values();
    auto t = z_true.values();
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (!mask.empty() && mask.values()[k] == 0.0) continue;
        acc.add(p[k], t[k]);
    }
}

}  // namespace

std::string DepthMetrics::to_json() const {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "{\"rmse_lin\": %.6g, \"rmse_log\": %.6g, \"abs_rel\": %.6g, \"sqr_rel\": %.6g, "
                  "\"delta1\": %.6g, \"delta2\": %.6g, \"delta3\": %.6g}",
                  rmse_lin, rmse_log, abs_rel, sqr_rel, delta1, delta2, delta3);
    return buf;
}

ScalarField depth_to_scene(const ScalarField& z, double z_min) {
    ScalarField y(z.width(), z.height());
    auto in = z.values();
    auto out = y.values();
    for (std::size_t k = 0; k < in.size(); ++k) out[k] = 1.0 / std::max(in[k], z_min);
    return y;
}

ScalarField scene_to_depth(const ScalarField& y, double z_min, double z_max) {
    ScalarField z(y.width(), y.height());
    auto in = y.values();
    auto out = z.values();
    for (std::size_t k = 0; k < in.size(); ++k) {
        out[k] = in[k] > 0.0 ? std::clamp(1.0 / in[k], z_min, z_max) : z_max;
    }
    return z;
}

DepthMetrics evaluate(const ScalarField& z_hat, const ScalarField& z_true, const ScalarField& mask) {
    Accumulator acc;
    accumulate(acc, z_hat, z_true, mask);
    return acc.finish();
}

DepthMetrics evaluate_pooled(const std::vector<ScalarField>& z_hat, const std::vector<ScalarField>& z_true,
                             const std::vector<ScalarField>& masks) {
    if (z_hat.size() != z_true.size() || (!masks.empty() && masks.size() != z_true.size())) {
        throw std::invalid_argument("pooled evaluation: list lengths differ");
    }
    Accumulator acc;
    for (std::size_t k = 0; k < z_hat.size(); ++k) {
        accumulate(acc, z_hat[k], z_true[k], masks.empty() ? ScalarField{} : masks[k]);
    }
    return acc.finish();
}

}  // namespace derivdepth
