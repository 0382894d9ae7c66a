#include "derivdepth/globalizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace derivdepth {

namespace {

constexpr double kDenominatorEpsilon = 1e-12;

int wrap(int i, int n) {
    const int r = i % n;
    return r < 0 ? r + n : r;
}

// Index of the largest entry; the first one wins ties.
template <typename T>
int first_argmax(std::span<const T> values) {
    int best = 0;
    for (int j = 1; j < static_cast<int>(values.size()); ++j) {
        if (values[static_cast<std::size_t>(j)] > values[static_cast<std::size_t>(best)]) best = j;
    }
    return best;
}

// argmax_j log p̂_j − a (c_j − w̄)², with a = β / ((β + 1) · 2σ²).
template <typename T>
int posterior_argmax(std::span<const T> log_p, std::span<const double> means, double w_bar, double a) {
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < means.size(); ++j) {
        const double d = means[j] - w_bar;
        const double v = static_cast<double>(log_p[j]) - a * d * d;
        if (v > best_v) {
            best_v = v;
            best = static_cast<int>(j);
        }
    }
    return best;
}

// log(Σ_j exp(log p̂_j − (w − c_j)²/(2σ²))) − ½ log(2πσ²). Terms more than
// e^-40 below the largest are dropped; they cannot change the sum in double.
template <typename T>
double mixture_log_density(double w, std::span<const T> log_p, std::span<const double> means, double variance) {
    constexpr double kNegligible = -40.0;
    thread_local std::vector<double> exponents;
    exponents.resize(means.size());
    const double inv = 1.0 / (2.0 * variance);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < means.size(); ++j) {
        const double d = w - means[j];
        exponents[j] = static_cast<double>(log_p[j]) - d * d * inv;
        top = std::max(top, exponents[j]);
    }
    double acc = 0.0;
    for (double e : exponents) {
        if (e - top > kNegligible) acc += std::exp(e - top);
    }
    return top + std::log(acc) - 0.5 * std::log(2.0 * std::numbers::pi * variance);
}

// log p̂ for the filters of `subset`, laid out [subset position][source pixel][component].
// Domain coordinates are offset by `radius` from the source grid.
class LogWeights {
public:
    LogWeights(const WeightMap& weights, const std::vector<int>& subset, int radius)
        : width_(weights.width()), height_(weights.height()), comps_(weights.num_components()), radius_(radius) {
        const std::size_t per_filter = static_cast<std::size_t>(width_) * height_ * comps_;
        table_.resize(per_filter * subset.size());
        for (std::size_t s = 0; s < subset.size(); ++s) {
            const int slot = weights.slot_of(subset[s]);
            if (slot < 0) throw std::invalid_argument("filter " + std::to_string(subset[s]) + " missing from weight map");
            float* dst = table_.data() + s * per_filter;
            for (int y = 0; y < height_; ++y) {
                for (int x = 0; x < width_; ++x) {
                    for (float p : weights.row(x, y, slot)) {
                        *dst++ = p > 0.0f ? std::log(p) : -std::numeric_limits<float>::infinity();
                    }
                }
            }
        }
    }

    /// Domain pixels outside the source grid (the pad) carry no prediction.
    bool observed(int px, int py) const {
        return px >= radius_ && py >= radius_ && px < radius_ + width_ && py < radius_ + height_;
    }

    // (px, py) are domain coordinates.
    std::span<const float> row(std::size_t pos, int px, int py) const {
        const int x = std::clamp(px - radius_, 0, width_ - 1);
        const int y = std::clamp(py - radius_, 0, height_ - 1);
        const std::size_t pixel = static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x);
        const std::size_t per_filter = static_cast<std::size_t>(width_) * height_ * comps_;
        return {table_.data() + pos * per_filter + pixel * comps_, static_cast<std::size_t>(comps_)};
    }

private:
    int width_;
    int height_;
    int comps_;
    int radius_;
    std::vector<float> table_;
};

double negative_log_likelihood(const LogWeights& logs, const CoefficientStack& w, const MixtureModel& model) {
    double total = 0.0;
    for (std::size_t s = 0; s < w.filters.size(); ++s) {
        const int f = w.filters[s];
        const auto means = model.means(f);
        const double var = model.variance(f);
        const ScalarField& map = w.maps[s];
        double acc = 0.0;
        for (int y = 0; y < map.height(); ++y) {
            for (int x = 0; x < map.width(); ++x) {
                if (!logs.observed(x, y)) continue;
                acc -= mixture_log_density(map.at(x, y), logs.row(s, x, y), means, var);
            }
        }
        total += var * acc;
    }
    return total;
}

void check_model_covers(const MixtureModel& model, const std::vector<int>& filters) {
    for (int f : filters) {
        if (f < 0 || f >= model.num_filters()) {
            throw std::invalid_argument("filter " + std::to_string(f) + " not covered by model");
        }
    }
}

}  // namespace

void SolverConfig::validate() const {
    if (!(beta_init > 0.0) || !(beta_init <= beta_final) || !std::isfinite(beta_final)) {
        throw std::invalid_argument("solver: need 0 < beta_init <= beta_final");
    }
    if (!(beta_growth > 1.0) || !std::isfinite(beta_growth)) throw std::invalid_argument("solver: beta_growth must exceed 1");
    if (subset.empty()) throw std::invalid_argument("empty filter subset");
    if (!(reg_weight >= 0.0) || !std::isfinite(reg_weight)) throw std::invalid_argument("solver: reg_weight must be >= 0");
}

std::vector<double> SolverConfig::beta_schedule() const {
    validate();
    std::vector<double> betas;
    for (int k = 0;; ++k) {
        const double b = beta_init * std::pow(beta_growth, k);
        if (b > beta_final * (1.0 + 1e-9)) break;
        betas.push_back(b);
    }
    return betas;
}

Regularizer Regularizer::laplacian4(double weight) {
    Regularizer r;
    r.weight = weight;
    r.kernels[0] = {0, 0, 0, 1, -2, 1, 0, 0, 0};
    r.kernels[1] = {0, 1, 0, 0, -2, 0, 0, 1, 0};
    r.kernels[2] = {0.5, 0, 0, 0, -1, 0, 0, 0, 0.5};
    r.kernels[3] = {0, 0, 0.5, 0, -1, 0, 0.5, 0, 0};
    return r;
}

double Regularizer::energy(const ScalarField& y) const {
    const int w = y.width();
    const int h = y.height();
    double total = 0.0;
    for (const auto& k : kernels) {
        for (int py = 0; py < h; ++py) {
            for (int px = 0; px < w; ++px) {
                double acc = 0.0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const double t = k[static_cast<std::size_t>((dy + 1) * 3 + dx + 1)];
                        if (t != 0.0) acc += t * y.at(wrap(px + dx, w), wrap(py + dy, h));
                    }
                }
                total += acc * acc;
            }
        }
    }
    return total;
}

const ScalarField& CoefficientStack::map_for(int filter) const {
    for (std::size_t s = 0; s < filters.size(); ++s) {
        if (filters[s] == filter) return maps[s];
    }
    throw std::invalid_argument("filter " + std::to_string(filter) + " not in coefficient stack");
}

FourierLeastSquares::FourierLeastSquares(int width, int height, const FilterBank& bank, std::vector<int> subset,
                                         const Regularizer& reg)
    : fft_(width, height), subset_(std::move(subset)) {
    if (subset_.empty()) throw std::invalid_argument("empty filter subset");
    const std::size_t bins = fft_.spectrum_size();
    data_power_.assign(bins, 0.0);
    reg_power_.assign(bins, 0.0);
    scratch_.resize(bins);
    accum_.resize(bins);

    std::vector<double> grid(fft_.grid_size());
    auto embed = [&](int radius, auto tap) {
        std::fill(grid.begin(), grid.end(), 0.0);
        for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx) {
                grid[static_cast<std::size_t>(wrap(dy, height)) * width + static_cast<std::size_t>(wrap(dx, width))] +=
                    tap(dx, dy);
            }
        }
        std::vector<std::complex<double>> spec(bins);
        fft_.forward(grid, spec);
        return spec;
    };

    for (int f : subset_) {
        if (f < 0 || f >= bank.size()) throw std::invalid_argument("unknown filter index " + std::to_string(f));
        const Filter& filter = bank[f];
        auto spec = embed(filter.radius, [&](int dx, int dy) { return filter.tap(dx, dy); });
        for (std::size_t k = 0; k < bins; ++k) data_power_[k] += std::norm(spec[k]);
        spectra_.push_back(std::move(spec));
    }
    for (const auto& kernel : reg.kernels) {
        auto spec = embed(1, [&](int dx, int dy) { return kernel[static_cast<std::size_t>((dy + 1) * 3 + dx + 1)]; });
        for (std::size_t k = 0; k < bins; ++k) reg_power_[k] += reg.weight * std::norm(spec[k]);
    }
}

bool FourierLeastSquares::degenerate(double beta) const {
    for (std::size_t k = 0; k < data_power_.size(); ++k) {
        if (beta * data_power_[k] + reg_power_[k] < kDenominatorEpsilon) return true;
    }
    return false;
}

ScalarField FourierLeastSquares::solve(const CoefficientStack& w, double beta, std::optional<double> dc_anchor,
                                       bool* dc_regularized) {
    if (w.filters != subset_) throw std::invalid_argument("y-step: coefficient stack does not match solver subset");
    std::fill(accum_.begin(), accum_.end(), std::complex<double>{});
    for (std::size_t s = 0; s < subset_.size(); ++s) {
        const ScalarField& map = w.maps[s];
        if (map.width() != width() || map.height() != height()) throw std::invalid_argument("y-step: map shape mismatch");
        fft_.forward(map.values(), scratch_);
        const auto& spec = spectra_[s];
        for (std::size_t k = 0; k < accum_.size(); ++k) accum_[k] += spec[k] * scratch_[k];
    }
    bool dc_flag = false;
    for (std::size_t k = 0; k < accum_.size(); ++k) {
        double denom = beta * data_power_[k] + reg_power_[k];
        if (denom < kDenominatorEpsilon) {
            denom += kDenominatorEpsilon;
            if (k == 0) dc_flag = true;
        }
        accum_[k] *= beta / denom;
    }
    ScalarField y(width(), height());
    fft_.inverse(accum_, y.values());
    if (dc_flag && dc_anchor) {
        const double shift = *dc_anchor - y.mean();
        for (double& v : y.values()) v += shift;
    }
    if (dc_regularized) *dc_regularized = dc_flag;
    return y;
}

std::vector<ScalarField> FourierLeastSquares::coefficients(const ScalarField& y) {
    if (y.width() != width() || y.height() != height()) throw std::invalid_argument("coefficients: shape mismatch");
    std::vector<std::complex<double>> spectrum(fft_.spectrum_size());
    fft_.forward(y.values(), spectrum);
    std::vector<ScalarField> out;
    out.reserve(subset_.size());
    for (const auto& spec : spectra_) {
        for (std::size_t k = 0; k < spectrum.size(); ++k) scratch_[k] = std::conj(spec[k]) * spectrum[k];
        ScalarField map(width(), height());
        fft_.inverse(scratch_, map.values());
        out.push_back(std::move(map));
    }
    return out;
}

CoefficientStack init_w(const WeightMap& weights, const MixtureModel& model) {
    check_model_covers(model, weights.filter_indices());
    if (weights.num_components() != model.num_components()) {
        throw std::invalid_argument("weight map component count differs from model");
    }
    CoefficientStack stack;
    for (int s = 0; s < weights.num_slots(); ++s) {
        const int f = weights.filter_indices()[static_cast<std::size_t>(s)];
        const auto means = model.means(f);
        ScalarField map(weights.width(), weights.height());
        for (int y = 0; y < weights.height(); ++y) {
            for (int x = 0; x < weights.width(); ++x) {
                map.at(x, y) = means[static_cast<std::size_t>(first_argmax(weights.row(x, y, s)))];
            }
        }
        stack.filters.push_back(f);
        stack.maps.push_back(std::move(map));
    }
    return stack;
}

ScalarField decode_argmax(const WeightMap& weights, const MixtureModel& model, int filter) {
    if (weights.slot_of(filter) < 0) {
        throw std::invalid_argument("filter " + std::to_string(filter) + " missing from weight map");
    }
    return init_w(weights, model).map_for(filter);
}

double w_step(std::span<const float> p_hat, double w_bar, double beta, const MixtureModel& model, int filter) {
    const auto means = model.means(filter);
    if (p_hat.size() != means.size()) throw std::invalid_argument("w-step: weight vector length differs from model");
    std::vector<double> log_p(p_hat.size());
    for (std::size_t j = 0; j < p_hat.size(); ++j) {
        log_p[j] = p_hat[j] > 0.0f ? std::log(static_cast<double>(p_hat[j])) : -std::numeric_limits<double>::infinity();
    }
    const double a = beta / ((beta + 1.0) * 2.0 * model.variance(filter));
    const int j = posterior_argmax<double>(log_p, means, w_bar, a);
    return (means[static_cast<std::size_t>(j)] + beta * w_bar) / (1.0 + beta);
}

double w_step_objective(double w, std::span<const float> p_hat, double w_bar, double beta, const MixtureModel& model,
                        int filter) {
    std::vector<double> log_p(p_hat.size());
    for (std::size_t j = 0; j < p_hat.size(); ++j) {
        log_p[j] = p_hat[j] > 0.0f ? std::log(static_cast<double>(p_hat[j])) : -std::numeric_limits<double>::infinity();
    }
    const double var = model.variance(filter);
    const double d = w - w_bar;
    return -mixture_log_density<double>(w, log_p, model.means(filter), var) + beta / (2.0 * var) * d * d;
}

ScalarField y_step(const CoefficientStack& w, const FilterBank& bank, double beta, const Regularizer& reg,
                   std::optional<double> dc_anchor) {
    if (w.maps.empty()) throw std::invalid_argument("empty filter subset");
    FourierLeastSquares solver(w.width(), w.height(), bank, w.filters, reg);
    return solver.solve(w, beta, dc_anchor);
}

std::vector<ScalarField> circular_analyze(const ScalarField& y, const FilterBank& bank, const std::vector<int>& subset) {
    if (subset.empty()) throw std::invalid_argument("empty filter subset");
    std::vector<ScalarField> out;
    for (int f : subset) {
        const Filter& k = bank[f];
        ScalarField map(y.width(), y.height());
        for (int py = 0; py < y.height(); ++py) {
            for (int px = 0; px < y.width(); ++px) {
                double acc = 0.0;
                for (int dy = -k.radius; dy <= k.radius; ++dy) {
                    for (int dx = -k.radius; dx <= k.radius; ++dx) {
                        acc += k.tap(dx, dy) * y.at(wrap(px + dx, y.width()), wrap(py + dy, y.height()));
                    }
                }
                map.at(px, py) = acc;
            }
        }
        out.push_back(std::move(map));
    }
    return out;
}

double split_objective(const ScalarField& y, const CoefficientStack& w, const WeightMap& weights,
                       const MixtureModel& model, const FilterBank& bank, double beta, const Regularizer& reg) {
    if (weights.width() != y.width() || weights.height() != y.height()) {
        throw std::invalid_argument("objective: weight map shape differs from y");
    }
    check_model_covers(model, w.filters);
    const LogWeights logs(weights, w.filters, 0);
    const auto wbar = circular_analyze(y, bank, w.filters);
    double coupling = 0.0;
    for (std::size_t s = 0; s < w.maps.size(); ++s) {
        if (!w.maps[s].same_shape(y)) throw std::invalid_argument("objective: map shape differs from y");
        auto a = w.maps[s].values();
        auto b = wbar[s].values();
        for (std::size_t k = 0; k < a.size(); ++k) coupling += (a[k] - b[k]) * (a[k] - b[k]);
    }
    return negative_log_likelihood(logs, w, model) + 0.5 * beta * coupling + 0.5 * reg.weight * reg.energy(y);
}

GlobalizeResult globalize(const WeightMap& weights, const MixtureModel& model, const FilterBank& bank,
                          const SolverConfig& config) {
    const std::vector<double> betas = config.beta_schedule();
    const std::vector<int>& subset = config.subset;
    for (int f : subset) {
        if (f < 0 || f >= bank.size()) throw std::invalid_argument("unknown filter index " + std::to_string(f));
        if (weights.slot_of(f) < 0) {
            throw std::invalid_argument("filter " + std::to_string(f) + " missing from weight map");
        }
    }
    check_model_covers(model, subset);
    if (weights.num_components() != model.num_components()) {
        throw std::invalid_argument("weight map component count differs from model");
    }

    const int radius = bank.max_radius(full_subset());
    const int width = weights.width() + 2 * radius;
    const int height = weights.height() + 2 * radius;

    const CoefficientStack initial = init_w(weights, model);
    CoefficientStack w;
    w.filters = subset;
    for (int f : subset) w.maps.push_back(pad_replicate(initial.map_for(f), radius));

    // Mean of y over the observed region when no filter in the subset sees DC.
    std::optional<double> dc_anchor;
    if (weights.slot_of(0) >= 0) {
        dc_anchor = initial.map_for(0).mean();
    } else {
        for (int f : weights.filter_indices()) {
            if (bank[f].kind == FilterKind::Gaussian) {
                dc_anchor = initial.map_for(f).mean() / bank[f].sum();
                break;
            }
        }
    }

    const Regularizer reg = Regularizer::laplacian4(config.reg_weight);
    const LogWeights logs(weights, subset, radius);
    FourierLeastSquares solver(width, height, bank, subset, reg);

    GlobalizeResult result;
    ScalarField y;
    for (double beta : betas) {
        bool dc_flag = false;
        y = solver.solve(w, beta, std::nullopt, &dc_flag);
        if (dc_flag && dc_anchor) {
            const double shift = *dc_anchor - crop(y, radius, weights.width(), weights.height()).mean();
            for (double& v : y.values()) v += shift;
        }
        result.trace.dc_regularized = result.trace.dc_regularized || dc_flag;
        const std::vector<ScalarField> wbar = solver.coefficients(y);

        double coupling = 0.0;
        double abs_residual = 0.0;
        for (std::size_t s = 0; s < subset.size(); ++s) {
            const auto means = model.means(subset[s]);
            const double a = beta / ((beta + 1.0) * 2.0 * model.variance(subset[s]));
            ScalarField& map = w.maps[s];
            const ScalarField& target = wbar[s];
            for (int py = 0; py < height; ++py) {
                for (int px = 0; px < width; ++px) {
                    const double wb = target.at(px, py);
                    if (!logs.observed(px, py)) {
                        map.at(px, py) = wb;
                        continue;
                    }
                    const int j = posterior_argmax(logs.row(s, px, py), means, wb, a);
                    const double updated = (means[static_cast<std::size_t>(j)] + beta * wb) / (1.0 + beta);
                    map.at(px, py) = updated;
                    coupling += (updated - wb) * (updated - wb);
                    abs_residual += std::abs(updated - wb);
                }
            }
        }

        if (config.record_trace) {
            const double slots =
                static_cast<double>(weights.width()) * weights.height() * static_cast<double>(subset.size());
            result.trace.beta.push_back(beta);
            result.trace.objective.push_back(negative_log_likelihood(logs, w, model) + 0.5 * beta * coupling +
                                             0.5 * reg.weight * reg.energy(y));
            result.trace.residual.push_back(abs_residual / slots);
        }
    }
    result.y = crop(y, radius, weights.width(), weights.height());
    return result;
}

void write_trace_csv(const std::filesystem::path& path, const SolveTrace& trace) {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    std::fprintf(f, "iter,beta,objective,residual\n");
    for (std::size_t k = 0; k < trace.size(); ++k) {
        std::fprintf(f, "%zu,%.17g,%.17g,%.17g\n", k, trace.beta[k], trace.objective[k], trace.residual[k]);
    }
    if (std::fclose(f) != 0) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace derivdepth
