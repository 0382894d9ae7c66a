#include "derivdepth/predictor.hpp"

#include "derivdepth/binary_io.hpp"
#include "derivdepth/errors.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace derivdepth {

namespace {

constexpr double kFileSimplexTolerance = 1e-4;

// std::uniform_real_distribution is implementation-defined; this is not.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

void CorruptionConfig::validate() const {
    if (!(ambiguity_fraction >= 0.0 && ambiguity_fraction <= 1.0)) {
        throw std::invalid_argument("ambiguity fraction must lie in [0, 1]");
    }
    if (!(blur_temperature >= 1.0) || !std::isfinite(blur_temperature)) {
        throw std::invalid_argument("blur temperature must be >= 1");
    }
}

WeightMap synth_predict(const ScalarField& y_true, const FilterBank& bank, const MixtureModel& model,
                        const std::vector<int>& subset, const CorruptionConfig& corruption) {
    corruption.validate();
    if (!y_true.all_finite()) throw std::invalid_argument("ground truth contains non-finite values");
    for (int f : subset) {
        if (f < 0 || f >= model.num_filters() || f >= bank.size()) {
            throw std::invalid_argument("filter " + std::to_string(f) + " not covered by model");
        }
    }
    const auto coeffs = analyze(y_true, bank, subset);

    const int m = model.num_components();
    WeightMap out(y_true.width(), y_true.height(), subset, m);
    std::mt19937_64 rng(corruption.seed);
    std::vector<double> q(static_cast<std::size_t>(m));
    const double inv_t = 1.0 / corruption.blur_temperature;
    const float uniform = static_cast<float>(1.0 / m);

    for (int y = 0; y < y_true.height(); ++y) {
        for (int x = 0; x < y_true.width(); ++x) {
            for (int s = 0; s < static_cast<int>(subset.size()); ++s) {
                auto row = out.row(x, y, s);
                const bool ambiguous = unit_draw(rng) < corruption.ambiguity_fraction;
                if (ambiguous) {
                    std::fill(row.begin(), row.end(), uniform);
                    continue;
                }
                const auto& [filter, field] = coeffs[static_cast<std::size_t>(s)];
                soft_targets_into(field.at(x, y), model, filter, q);
                if (inv_t != 1.0) {
                    double total = 0.0;
                    for (double& v : q) {
                        v = std::pow(v, inv_t);
                        total += v;
                    }
                    for (double& v : q) v /= total;
                }
                for (int j = 0; j < m; ++j) row[static_cast<std::size_t>(j)] = static_cast<float>(q[static_cast<std::size_t>(j)]);
            }
        }
    }
    return out;
}

void write_weight_map(const std::filesystem::path& path, const WeightMap& map) {
    binio::Writer w;
    w.bytes("OWM1");
    w.u32(static_cast<std::uint32_t>(map.width()));
    w.u32(static_cast<std::uint32_t>(map.height()));
    w.u32(static_cast<std::uint32_t>(map.num_slots()));
    w.u32(static_cast<std::uint32_t>(map.num_components()));
    for (int f : map.filter_indices()) w.u32(static_cast<std::uint32_t>(f));
    for (float v : map.raw()) w.f32(v);
    w.save(path);
}

WeightMap read_weight_map(const std::filesystem::path& path) {
    auto r = binio::Reader::load(path);
    if (r.remaining() < 4 || r.bytes(4) != "OWM1") throw BadMagicError();
    const std::uint32_t width = r.u32();
    const std::uint32_t height = r.u32();
    const std::uint32_t slots = r.u32();
    const std::uint32_t comps = r.u32();
    if (width == 0 || height == 0 || slots == 0 || comps == 0) throw FileFormatError("owm: empty dimensions");
    r.require(static_cast<std::size_t>(slots) * 4);
    std::vector<int> filters(slots);
    for (int& f : filters) f = static_cast<int>(r.u32());

    const std::size_t count = static_cast<std::size_t>(width) * height * slots * comps;
    r.require(count * sizeof(float));
    WeightMap map(static_cast<int>(width), static_cast<int>(height), std::move(filters), static_cast<int>(comps));
    for (float& v : map.raw()) v = r.f32();

    const double err = map.max_simplex_error();
    if (err > kFileSimplexTolerance) throw SimplexViolationError("row sum deviates by " + std::to_string(err));
    return map;
}

}  // namespace derivdepth
