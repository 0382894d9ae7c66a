#pragma once

#include <complex>
#include <span>

namespace derivdepth {

/// Real-to-complex 2-D DFT of a row-major height×width grid (FFTW backed).
/// The half spectrum has height·(width/2 + 1) bins. inverse() is normalized,
/// so inverse(forward(x)) == x up to rounding. Plans are created with
/// FFTW_ESTIMATE, which keeps results bit-reproducible run to run.
class RealFft2d {
public:
    RealFft2d(int width, int height);
    ~RealFft2d();
    RealFft2d(const RealFft2d&) = delete;
    RealFft2d& operator=(const RealFft2d&) = delete;

    int width() const { return width_; }
    int height() const { return height_; }
    int half_width() const { return width_ / 2 + 1; }
    std::size_t spectrum_size() const { return static_cast<std::size_t>(height_) * half_width(); }
    std::size_t grid_size() const { return static_cast<std::size_t>(height_) * width_; }

    void forward(std::span<const double> grid, std::span<std::complex<double>> spectrum);
    void inverse(std::span<const std::complex<double>> spectrum, std::span<double> grid);

private:
    int width_;
    int height_;
    double* real_ = nullptr;
    void* complex_ = nullptr;
    void* forward_plan_ = nullptr;
    void* inverse_plan_ = nullptr;
};

}  // namespace derivdepth
