#include "derivdepth/filter_bank.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace derivdepth {

namespace {

enum class Profile { Gaussian, First, Second, Cross };

Filter sample_kernel(int scale, Profile profile, int orientation) {
    const double sigma = std::ldexp(1.0, scale);
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const double theta = orientation * std::numbers::pi / 8.0;
    const double ux = std::cos(theta), uy = std::sin(theta);
    const double s2 = sigma * sigma;

    Filter f;
    f.scale = scale;
    f.radius = radius;
    f.orientation_index = profile == Profile::Gaussian ? 0 : orientation;
    f.taps.reserve(static_cast<std::size_t>(f.side()) * f.side());
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
            const double pu = dx * ux + dy * uy;
            const double pv = -dx * uy + dy * ux;
            double v = 0.0;
            switch (profile) {
                case Profile::Gaussian: v = g; break;
                case Profile::First: v = -pu / s2 * g; break;
                case Profile::Second: v = (pu * pu / (s2 * s2) - 1.0 / s2) * g; break;
                case Profile::Cross: v = pu * pv / (s2 * s2) * g; break;
            }
            f.taps.push_back(v);
        }
    }

    double target_norm = 1.0;
    switch (profile) {
        case Profile::Gaussian:
            f.kind = FilterKind::Gaussian;
            f.order = 0;
            target_norm = 0.25;
            break;
        case Profile::First: f.kind = FilterKind::FirstDeriv; f.order = 1; break;
        case Profile::Second: f.kind = FilterKind::SecondDeriv; f.order = 2; break;
        case Profile::Cross: f.kind = FilterKind::CrossDeriv; f.order = 2; break;
    }
    if (f.order >= 1) {
        const double mean = f.sum() / static_cast<double>(f.taps.size());
        for (double& t : f.taps) t -= mean;
    }
    const double scale_by = target_norm / f.norm();
    for (double& t : f.taps) t *= scale_by;
    return f;
}

void append_range(std::vector<int>& out, int first, int count) {
    for (int i = 0; i < count; ++i) out.push_back(first + i);
}

int scale_base(int s) { return 1 + FilterBank::kPerScale * (s - 1); }

}  // namespace

std::string_view to_string(FilterKind kind) {
    switch (kind) {
        case FilterKind::Impulse: return "impulse";
        case FilterKind::Gaussian: return "gaussian";
        case FilterKind::FirstDeriv: return "first";
        case FilterKind::SecondDeriv: return "second";
        case FilterKind::CrossDeriv: return "cross";
    }
    return "unknown";
}

double Filter::sum() const { return std::accumulate(taps.begin(), taps.end(), 0.0); }

double Filter::norm() const {
    return std::sqrt(std::inner_product(taps.begin(), taps.end(), taps.begin(), 0.0));
}

int FilterBank::max_radius(const std::vector<int>& subset) const {
    int r = 1;
    for (int i : subset) r = std::max(r, (*this)[i].radius);
    return r;
}

FilterBank build_filter_bank() {
    std::vector<Filter> filters;
    filters.reserve(FilterBank::kNumFilters);

    Filter impulse;
    impulse.taps = {1.0};
    filters.push_back(std::move(impulse));

    for (int s = 1; s <= FilterBank::kNumScales; ++s) {
        filters.push_back(sample_kernel(s, Profile::Gaussian, 0));
        for (int k = 0; k < 8; ++k) filters.push_back(sample_kernel(s, Profile::First, k));
        for (int k = 0; k < 8; ++k) filters.push_back(sample_kernel(s, Profile::Second, k));
        for (int k = 0; k < 4; ++k) filters.push_back(sample_kernel(s, Profile::Cross, k));
    }
    return FilterBank(std::move(filters));
}

ScalarField convolve_same(const ScalarField& field, const Filter& filter) {
    const int w = field.width();
    const int h = field.height();
    const int r = filter.radius;
    if (r == 0) {
        ScalarField out = field;
        for (double& v : out.values()) v *= filter.taps[0];
        return out;
    }
    const ScalarField padded = pad_replicate(field, r);
    const int side = filter.side();
    ScalarField out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int j = 0; j < side; ++j) {
                const double* krow = filter.taps.data() + static_cast<std::size_t>(j) * side;
                for (int i = 0; i < side; ++i) {
                    acc += krow[i] * padded.at(x + i, y + j);
                }
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

std::vector<std::pair<int, ScalarField>> analyze(const ScalarField& y, const FilterBank& bank,
                                                 const std::vector<int>& subset) {
    if (subset.empty()) throw std::invalid_argument("empty filter subset");
    std::vector<std::pair<int, ScalarField>> out;
    out.reserve(subset.size());
    for (int i : subset) {
        if (i < 0 || i >= bank.size()) throw std::invalid_argument("unknown filter index " + std::to_string(i));
        out.emplace_back(i, convolve_same(y, bank[i]));
    }
    return out;
}

std::vector<int> full_subset() {
    std::vector<int> out(FilterBank::kNumFilters);
    std::iota(out.begin(), out.end(), 0);
    return out;
}

std::vector<int> parse_subset(std::string_view spec) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= spec.size()) {
        const std::size_t comma = spec.find(',', start);
        const std::size_t end = comma == std::string_view::npos ? spec.size() : comma;
        std::string tok(spec.substr(start, end - start));
        tok.erase(0, tok.find_first_not_of(" \t"));
        tok.erase(tok.find_last_not_of(" \t") + 1);
        if (tok.empty()) throw std::invalid_argument("empty entry in filter subset");

        if (tok == "full") {
            append_range(out, 0, FilterBank::kNumFilters);
        } else if (tok == "scale0") {
            out.push_back(0);
        } else if (tok.size() == 6 && tok.starts_with("scale") && tok[5] >= '1' && tok[5] <= '3') {
            append_range(out, scale_base(tok[5] - '0'), FilterBank::kPerScale);
        } else if (tok == "order0") {
            out.push_back(0);
            for (int s = 1; s <= 3; ++s) out.push_back(scale_base(s));
        } else if (tok == "order1") {
            for (int s = 1; s <= 3; ++s) append_range(out, scale_base(s) + 1, 8);
        } else if (tok == "order2") {
            for (int s = 1; s <= 3; ++s) append_range(out, scale_base(s) + 9, 12);
        } else {
            std::size_t used = 0;
            int idx = -1;
            try {
                idx = std::stoi(tok, &used);
            } catch (const std::logic_error&) {
                throw std::invalid_argument("unknown filter group '" + tok + "'");
            }
            if (used != tok.size()) throw std::invalid_argument("unknown filter group '" + tok + "'");
            if (idx < 0 || idx >= FilterBank::kNumFilters) {
                throw std::invalid_argument("unknown filter index " + tok);
            }
            out.push_back(idx);
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace derivdepth
