#pragma once

#include "derivdepth/coeff_model.hpp"
#include "derivdepth/field.hpp"
#include "derivdepth/filter_bank.hpp"
#include "derivdepth/fourier.hpp"

#include <array>
#include <complex>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace derivdepth {

struct SolverConfig {
    double beta_init = 0x1p-10;
    double beta_final = 0x1p7;
    double beta_growth = 1.0905077326652577;  // 2^(1/8)
    std::vector<int> subset = full_subset();
    double reg_weight = 1.0;  ///< multiplies R(y)
    bool record_trace = true;

    void validate() const;
    /// beta_init · growth^k for every k with the value ≤ beta_final (relative slack 1e-9).
    std::vector<double> beta_schedule() const;
};

/// Four 3×3 second-difference kernels: horizontal [1 −2 1], vertical, and the
/// two diagonals with (1, −2, 1)/2 along the diagonal.
struct Regularizer {
    std::array<std::array<double, 9>, 4> kernels;
    double weight = 1.0;

    static Regularizer laplacian4(double weight = 1.0);
    /// R(y) = Σ_r Σ_n (∇_r ⋆ y)(n)² on the periodic domain of `y` (unweighted).
    double energy(const ScalarField& y) const;
};

/// Auxiliary coefficient maps w_i, one per filter, all on the same domain.
struct CoefficientStack {
    std::vector<int> filters;
    std::vector<ScalarField> maps;

    int width() const { return maps.empty() ? 0 : maps.front().width(); }
    int height() const { return maps.empty() ? 0 : maps.front().height(); }
    const ScalarField& map_for(int filter) const;
};

struct SolveTrace {
    std::vector<double> beta;
    std::vector<double> objective;  ///< split objective after the w-step
    std::vector<double> residual;   ///< mean |w_i − k_i ⋆ y| over observed slots after the w-step
    bool dc_regularized = false;    ///< DC had no data support; ε added and mean re-anchored

    std::size_t size() const { return beta.size(); }
};

struct GlobalizeResult {
    ScalarField y;
    SolveTrace trace;
};

/// Fourier-domain least squares for one domain and filter subset. Holds the
/// kernel spectra so repeated y-steps only transform the w maps.
///
/// All convolutions here are circular correlations, (k ⋆ y)(n) = Σ_m k(m) y(n+m)
/// with indices wrapped to the domain, matching convolve_same in the interior.
class FourierLeastSquares {
public:
    FourierLeastSquares(int width, int height, const FilterBank& bank, std::vector<int> subset,
                        const Regularizer& reg);

    int width() const { return fft_.width(); }
    int height() const { return fft_.height(); }
    const std::vector<int>& subset() const { return subset_; }

    /// True when β·Σ|K_i|² + Σ|∇_r|² vanishes at some bin for this β.
    bool degenerate(double beta) const;

    /// argmin_y β Σ_i ‖k_i ⋆ y − w_i‖² + reg Σ_r ‖∇_r ⋆ y‖². Bins whose
    /// denominator is below 1e-12 get ε = 1e-12 added; if that happens and
    /// `dc_anchor` is set, the result is shifted to have that mean.
    ScalarField solve(const CoefficientStack& w, double beta, std::optional<double> dc_anchor,
                      bool* dc_regularized = nullptr);

    /// k_i ⋆ y for every filter in the subset.
    std::vector<ScalarField> coefficients(const ScalarField& y);

private:
    RealFft2d fft_;
    std::vector<int> subset_;
    std::vector<std::vector<std::complex<double>>> spectra_;
    std::vector<double> data_power_;  // Σ_i |K_i|²
    std::vector<double> reg_power_;   // reg.weight · Σ_r |∇_r|²
    std::vector<std::complex<double>> scratch_;
    std::vector<std::complex<double>> accum_;
};

/// Per-filter w_i = c_i^{argmax_j p̂} over every filter in the weight map
/// (ties to the lowest j).
CoefficientStack init_w(const WeightMap& weights, const MixtureModel& model);

/// Per-pixel argmax decoding of a single filter's weights (the pointwise baseline).
ScalarField decode_argmax(const WeightMap& weights, const MixtureModel& model, int filter);

/// Approximate per-slot minimizer of −log p(w) + β/(2σ²)(w − w̄)²: the posterior
/// mean (c_j + β w̄)/(1 + β) of the component with the largest posterior weight
/// p̂_j exp(−β/(β+1) · (c_j − w̄)²/(2σ²)). Ties go to the lowest j.
double w_step(std::span<const float> p_hat, double w_bar, double beta, const MixtureModel& model, int filter);

/// The single-slot objective that w_step approximately minimizes.
double w_step_objective(double w, std::span<const float> p_hat, double w_bar, double beta,
                        const MixtureModel& model, int filter);

/// One Fourier y-step on the periodic domain of `w`.
ScalarField y_step(const CoefficientStack& w, const FilterBank& bank, double beta, const Regularizer& reg,
                   std::optional<double> dc_anchor = std::nullopt);

/// k_i ⋆ y with periodic boundaries for every filter in `subset`.
std::vector<ScalarField> circular_analyze(const ScalarField& y, const FilterBank& bank,
                                          const std::vector<int>& subset);

/// The split objective
///   −Σ σ_i² log p_{i,n}(w_i(n)) + β/2 Σ (w_i − k_i ⋆ y)² + reg/2 · R(y)
/// on the periodic domain of `y`; `weights` must share that shape and cover w's filters.
double split_objective(const ScalarField& y, const CoefficientStack& w, const WeightMap& weights,
                       const MixtureModel& model, const FilterBank& bank, double beta, const Regularizer& reg);

/// Alternating minimization from init_w through the β schedule: one y-step then
/// one w-step per β. Works on a periodic domain padded on every side by the
/// largest kernel radius of the bank (24). Initial w maps are edge-replicated
/// into the pad, but pad slots carry no prediction: the w-step sets them to
/// k_i ⋆ y, and they are left out of the objective and residual. When no filter
/// in the subset sees DC, the mean of y over the unpadded region is set to the
/// mean of the impulse (or Gaussian) targets, if the weight map has one. Returns the
/// final y-step cropped back to the weight map's shape.
GlobalizeResult globalize(const WeightMap& weights, const MixtureModel& model, const FilterBank& bank,
                          const SolverConfig& config);

/// CSV with header `iter,beta,objective,residual`.
void write_trace_csv(const std::filesystem::path& path, const SolveTrace& trace);

}  // namespace derivdepth
