#include "derivdepth/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace derivdepth {

namespace {
// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

RealFft2d::RealFft2d(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("fft: empty grid");
    std::lock_guard lock(planner_mutex());
    real_ = fftw_alloc_real(grid_size());
    auto* cplx = fftw_alloc_complex(spectrum_size());
    complex_ = cplx;
    forward_plan_ = fftw_plan_dft_r2c_2d(height_, width_, real_, cplx, FFTW_ESTIMATE);
    inverse_plan_ = fftw_plan_dft_c2r_2d(height_, width_, cplx, real_, FFTW_ESTIMATE);
    if (!forward_plan_ || !inverse_plan_) throw std::runtime_error("fft: planning failed");
}

RealFft2d::~RealFft2d() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
    fftw_free(real_);
    fftw_free(complex_);
}

void RealFft2d::forward(std::span<const double> grid, std::span<std::complex<double>> spectrum) {
    std::copy(grid.begin(), grid.end(), real_);
    fftw_execute(static_cast<fftw_plan>(forward_plan_));
    std::memcpy(spectrum.data(), complex_, spectrum_size() * sizeof(fftw_complex));
}

void RealFft2d::inverse(std::span<const std::complex<double>> spectrum, std::span<double> grid) {
    std::memcpy(complex_, spectrum.data(), spectrum_size() * sizeof(fftw_complex));
    fftw_execute(static_cast<fftw_plan>(inverse_plan_));
    const double scale = 1.0 / static_cast<double>(grid_size());
    for (std::size_t k = 0; k < grid_size(); ++k) grid[k] = real_[k] * scale;
}

}  // namespace derivdepth
