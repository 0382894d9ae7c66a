#pragma once

#include "derivdepth/field.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace derivdepth {

enum class FilterKind { Impulse, Gaussian, FirstDeriv, SecondDeriv, CrossDeriv };

std::string_view to_string(FilterKind kind);

/// One derivative-of-Gaussian kernel sampled on the integer grid.
///
/// The kernel has odd side length 2r+1 with the tap for offset (dx, dy) at
/// `tap(dx, dy)`, dx, dy ∈ [-r, r]. Orientation θ_k = kπ/8 is measured from
/// the +x (column) axis towards +y (row, downwards); u = (cos θ, sin θ) and
/// v is u rotated by +90°.
struct Filter {
    FilterKind kind = FilterKind::Impulse;
    int scale = 0;              ///< σ = 2^scale pixels; 0 only for the impulse
    int order = 0;              ///< derivative order 0, 1 or 2
    int orientation_index = 0;  ///< 0-7 for pure derivatives, 0-3 for cross, else 0
    int radius = 0;             ///< kernel is (2·radius+1)²
    std::vector<double> taps;   ///< row-major (dy outer, dx inner)

    int side() const { return 2 * radius + 1; }
    double tap(int dx, int dy) const {
        return taps[static_cast<std::size_t>(dy + radius) * side() + static_cast<std::size_t>(dx + radius)];
    }
    double sum() const;
    double norm() const;
};

/// The fixed K = 64 bank. Index layout:
///   0                    impulse
///   1 + 21·(s−1) + 0     Gaussian at scale s (s = 1, 2, 3)
///   1 + 21·(s−1) + 1..8  first derivatives, θ_k, k = 0..7
///   1 + 21·(s−1) + 9..16 pure second derivatives ∂²/∂u², θ_k, k = 0..7
///   1 + 21·(s−1) + 17..20 cross derivatives ∂²/∂u∂v, θ_k, k = 0..3
class FilterBank {
public:
    static constexpr int kNumFilters = 64;
    static constexpr int kPerScale = 21;
    static constexpr int kNumScales = 3;

    explicit FilterBank(std::vector<Filter> filters) : filters_(std::move(filters)) {}

    int size() const { return static_cast<int>(filters_.size()); }
    const Filter& operator[](int i) const { return filters_.at(static_cast<std::size_t>(i)); }
    const std::vector<Filter>& filters() const { return filters_; }

    /// Largest kernel radius among `subset` (at least 1, for the 3×3 regularizer).
    int max_radius(const std::vector<int>& subset) const;

private:
    std::vector<Filter> filters_;
};

FilterBank build_filter_bank();

/// Same-size correlation with edge-replicate padding:
/// out(n) = Σ_m k(m) · field(clamp(n + m)).
ScalarField convolve_same(const ScalarField& field, const Filter& filter);

/// Coefficient map for every filter index in `subset`, in subset order.
/// Throws std::invalid_argument("empty filter subset") for an empty subset.
std::vector<std::pair<int, ScalarField>> analyze(const ScalarField& y, const FilterBank& bank,
                                                 const std::vector<int>& subset);

/// Sorted, deduplicated list of all K indices.
std::vector<int> full_subset();

/// Parses a comma list of filter indices and/or the named groups
/// scale0..scale3, order0..order2 and full. The result is sorted and unique.
/// Unknown names or out-of-range indices throw std::invalid_argument.
std::vector<int> parse_subset(std::string_view spec);

}  // namespace derivdepth
