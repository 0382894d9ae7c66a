#include "derivdepth/coeff_model.hpp"

#include "derivdepth/binary_io.hpp"
#include "derivdepth/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace derivdepth {

MixtureModel::MixtureModel(int num_filters, int num_components, std::vector<double> means,
                           std::vector<double> variances)
    : num_filters_(num_filters),
      num_components_(num_components),
      means_(std::move(means)),
      variances_(std::move(variances)) {
    if (num_filters <= 0 || num_components <= 0) throw std::invalid_argument("mixture model: empty shape");
    if (means_.size() != static_cast<std::size_t>(num_filters) * num_components ||
        variances_.size() != static_cast<std::size_t>(num_filters)) {
        throw std::invalid_argument("mixture model: parameter count mismatch");
    }
    for (int i = 0; i < num_filters; ++i) {
        const double v = variances_[static_cast<std::size_t>(i)];
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("mixture model: variance of filter " + std::to_string(i) +
                                        " must be positive and finite");
        }
        auto c = this->means(i);
        for (int j = 0; j < num_components; ++j) {
            if (!std::isfinite(c[j]) || (j > 0 && !(c[j] > c[j - 1]))) {
                throw std::invalid_argument("mixture model: means of filter " + std::to_string(i) +
                                            " are not strictly increasing");
            }
        }
    }
}

WeightMap::WeightMap(int width, int height, std::vector<int> filter_indices, int num_components)
    : width_(width), height_(height), num_components_(num_components), filter_indices_(std::move(filter_indices)) {
    if (width <= 0 || height <= 0 || num_components <= 0 || filter_indices_.empty()) {
        throw std::invalid_argument("weight map: empty shape");
    }
    weights_.assign(static_cast<std::size_t>(width) * height * filter_indices_.size() * num_components, 0.0f);
}

int WeightMap::slot_of(int filter) const {
    auto it = std::find(filter_indices_.begin(), filter_indices_.end(), filter);
    return it == filter_indices_.end() ? -1 : static_cast<int>(it - filter_indices_.begin());
}

double WeightMap::max_simplex_error() const {
    double worst = 0.0;
    const std::size_t m = static_cast<std::size_t>(num_components_);
    for (std::size_t r = 0; r + m <= weights_.size(); r += m) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const float v = weights_[r + j];
            if (!(v >= 0.0f) || !std::isfinite(v)) return std::numeric_limits<double>::infinity();
            s += v;
        }
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

namespace {

struct CenterRef {
    double value;
    int index;  // lowest original center index sharing this value
};

// Nearest-center assignment for ascending `sorted` samples; ties to the lower index.
void assign_sorted(std::span<const double> sorted, const std::vector<double>& centers, std::vector<int>& labels) {
    std::vector<int> order(centers.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return centers[a] < centers[b] || (centers[a] == centers[b] && a < b);
    });
    std::vector<CenterRef> uniq;
    for (int idx : order) {
        if (uniq.empty() || uniq.back().value != centers[idx]) uniq.push_back({centers[idx], idx});
    }
    std::size_t p = 0;
    for (std::size_t n = 0; n < sorted.size(); ++n) {
        const double x = sorted[n];
        while (p + 1 < uniq.size() && uniq[p + 1].value <= x) ++p;
        int best = uniq[p].index;
        if (p + 1 < uniq.size()) {
            const double d_lo = std::abs(x - uniq[p].value);
            const double d_hi = std::abs(x - uniq[p + 1].value);
            if (d_hi < d_lo || (d_hi == d_lo && uniq[p + 1].index < best)) best = uniq[p + 1].index;
        }
        labels[n] = best;
    }
}

double within_cluster_ss(std::span<const double> sorted, const std::vector<double>& centers,
                         const std::vector<int>& labels) {
    double acc = 0.0;
    for (std::size_t n = 0; n < sorted.size(); ++n) {
        const double d = sorted[n] - centers[static_cast<std::size_t>(labels[n])];
        acc += d * d;
    }
    return acc;
}

}  // namespace

KMeansResult kmeans_1d_detailed(std::span<const double> samples, int num_centers, std::uint64_t /*seed*/,
                                int max_iterations) {
    if (num_centers < 1) throw std::invalid_argument("kmeans: need at least one center");
    if (samples.size() < static_cast<std::size_t>(num_centers)) throw std::invalid_argument("insufficient samples");

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const std::size_t m = static_cast<std::size_t>(num_centers);

    std::vector<double> centers(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double q = (static_cast<double>(j) + 0.5) / static_cast<double>(m);
        const auto pos = std::min(n - 1, static_cast<std::size_t>(q * static_cast<double>(n)));
        centers[j] = sorted[pos];
    }

    KMeansResult result;
    std::vector<int> labels(n, -1);
    std::vector<int> next(n);
    std::vector<double> sums(m);
    std::vector<std::size_t> counts(m);

    for (int iter = 0; iter < max_iterations; ++iter) {
        assign_sorted(sorted, centers, next);
        if (next == labels) break;
        labels.swap(next);
        result.iterations = iter + 1;

        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t k = 0; k < n; ++k) ++counts[static_cast<std::size_t>(labels[k])];

        for (std::size_t j = 0; j < m; ++j) {
            if (counts[j] != 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double d = std::abs(sorted[k] - centers[static_cast<std::size_t>(labels[k])]);
                if (d > far_d) {
                    far_d = d;
                    far = k;
                }
            }
            if (far_d <= 0.0) continue;  // every sample sits on its center already
            --counts[static_cast<std::size_t>(labels[far])];
            labels[far] = static_cast<int>(j);
            counts[j] = 1;
            centers[j] = sorted[far];
        }

        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) sums[static_cast<std::size_t>(labels[k])] += sorted[k];
        for (std::size_t j = 0; j < m; ++j) {
            if (counts[j] > 0) centers[j] = sums[j] / static_cast<double>(counts[j]);
        }
        result.objective.push_back(within_cluster_ss(sorted, centers, labels));
    }

    // Statistics against the final centers.
    assign_sorted(sorted, centers, labels);
    std::vector<double> sq(m, 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t k = 0; k < n; ++k) {
        const auto j = static_cast<std::size_t>(labels[k]);
        const double d = sorted[k] - centers[j];
        sq[j] += d * d;
        ++counts[j];
    }

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return centers[a] < centers[b]; });
    for (std::size_t j : order) {
        result.centers.push_back(centers[j]);
        result.counts.push_back(counts[j]);
        result.variances.push_back(counts[j] > 0 ? sq[j] / static_cast<double>(counts[j]) : 0.0);
    }
    return result;
}

std::vector<double> kmeans_1d(std::span<const double> samples, int num_centers, std::uint64_t seed) {
    return kmeans_1d_detailed(samples, num_centers, seed).centers;
}

std::size_t default_min_assign(std::size_t num_samples) {
    return std::max<std::size_t>(10, num_samples / 1000);
}

MixtureModel fit_mixture_model(const std::vector<std::vector<double>>& coeff_samples, int num_components,
                               std::optional<std::size_t> min_assign, std::uint64_t seed) {
    if (coeff_samples.empty()) throw std::invalid_argument("no filters to fit");
    const std::size_t k = coeff_samples.size();
    std::vector<double> means;
    std::vector<double> variances;
    means.reserve(k * static_cast<std::size_t>(num_components));
    variances.reserve(k);

    for (const auto& samples : coeff_samples) {
        const KMeansResult km = kmeans_1d_detailed(samples, num_components, seed);
        const std::size_t threshold = min_assign.value_or(default_min_assign(samples.size()));

        double acc = 0.0;
        std::size_t used = 0;
        for (std::size_t j = 0; j < km.centers.size(); ++j) {
            if (km.counts[j] > threshold) {
                acc += km.variances[j];
                ++used;
            }
        }
        if (used == 0) {
            for (std::size_t j = 0; j < km.centers.size(); ++j) {
                if (km.counts[j] > 0) {
                    acc += km.variances[j];
                    ++used;
                }
            }
        }
        const double var = used > 0 ? acc / static_cast<double>(used) : 0.0;
        variances.push_back(std::max(var, MixtureModel::kVarianceFloor));

        double prev = -std::numeric_limits<double>::infinity();
        for (double c : km.centers) {
            if (!(c > prev)) c = std::nextafter(prev, std::numeric_limits<double>::infinity());
            means.push_back(c);
            prev = c;
        }
    }
    return MixtureModel(static_cast<int>(k), num_components, std::move(means), std::move(variances));
}

void soft_targets_into(double w, const MixtureModel& model, int filter, std::span<double> out) {
    const auto c = model.means(filter);
    const double inv = 1.0 / (2.0 * model.variance(filter));
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double d = w - c[j];
        out[j] = -d * d * inv;
        top = std::max(top, out[j]);
    }
    double total = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        out[j] = std::exp(out[j] - top);
        total += out[j];
    }
    for (std::size_t j = 0; j < c.size(); ++j) out[j] /= total;
}

std::vector<double> soft_targets(double w, const MixtureModel& model, int filter) {
    std::vector<double> q(static_cast<std::size_t>(model.num_components()));
    soft_targets_into(w, model, filter, q);
    return q;
}

double kl_loss(const WeightMap& predicted, const WeightMap& targets, const MixtureModel& model) {
    if (predicted.width() != targets.width() || predicted.height() != targets.height() ||
        predicted.filter_indices() != targets.filter_indices() ||
        predicted.num_components() != targets.num_components()) {
        throw std::invalid_argument("kl_loss: shape mismatch");
    }
    if (predicted.num_components() != model.num_components()) {
        throw std::invalid_argument("kl_loss: component count differs from model");
    }
    for (int f : predicted.filter_indices()) {
        if (f < 0 || f >= model.num_filters()) throw std::invalid_argument("kl_loss: filter not covered by model");
    }

    constexpr double kClamp = 1e-12;
    double total = 0.0;
    for (int y = 0; y < predicted.height(); ++y) {
        for (int x = 0; x < predicted.width(); ++x) {
            for (int s = 0; s < predicted.num_slots(); ++s) {
                const auto p = predicted.row(x, y, s);
                const auto q = targets.row(x, y, s);
                double kl = 0.0;
                for (std::size_t j = 0; j < p.size(); ++j) {
                    const double qj = q[j];
                    if (qj <= 0.0) continue;
                    kl += qj * (std::log(qj) - std::log(std::max<double>(p[j], kClamp)));
                }
                total += model.variance(predicted.filter_indices()[static_cast<std::size_t>(s)]) * kl;
            }
        }
    }
    const double count = static_cast<double>(predicted.width()) * predicted.height() * predicted.num_slots();
    return total / count;
}

void write_mixture_model(const std::filesystem::path& path, const MixtureModel& model) {
    binio::Writer w;
    w.bytes("GMM1");
    w.u32(static_cast<std::uint32_t>(model.num_filters()));
    w.u32(static_cast<std::uint32_t>(model.num_components()));
    for (double c : model.all_means()) w.f64(c);
    for (double v : model.all_variances()) w.f64(v);
    w.save(path);
}

MixtureModel read_mixture_model(const std::filesystem::path& path) {
    auto r = binio::Reader::load(path);
    if (r.remaining() < 4 || r.bytes(4) != "GMM1") throw BadMagicError();
    const std::uint32_t k = r.u32();
    const std::uint32_t m = r.u32();
    const std::size_t count = static_cast<std::size_t>(k) * m;
    r.require((count + k) * sizeof(double));
    std::vector<double> means(count);
    for (double& c : means) c = r.f64();
    std::vector<double> variances(k);
    for (double& v : variances) v = r.f64();
    try {
        return MixtureModel(static_cast<int>(k), static_cast<int>(m), std::move(means), std::move(variances));
    } catch (const std::invalid_argument& e) {
        throw FileFormatError(std::string("gmm: ") + e.what());
    }
}

}  // namespace derivdepth
