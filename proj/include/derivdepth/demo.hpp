#pragma once

#include "derivdepth/globalizer.hpp"
#include "derivdepth/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace derivdepth {

struct DemoOptions {
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;  ///< empty: nothing is written
    int corpus_size = 100;
    int map_size = 64;
    int num_components = 64;
    int num_test = 2;
    std::vector<double> ambiguity_grid = {0.0, 0.3, 0.6};
    double ablation_ambiguity = 0.3;
    double temperature = 1.0;
    SolverConfig solver = [] {
        SolverConfig c;
        c.record_trace = false;
        return c;
    }();  ///< subset is overridden per row
};

struct DemoRow {
    std::string group;  ///< "corruption" or "ablation"
    std::string label;
    std::string subset;
    double ambiguity = 0.0;
    double y_rmse = 0.0;       ///< scene-map RMSE pooled over test maps
    double argmax_rmse = 0.0;  ///< pointwise impulse decoding at the same corruption
    DepthMetrics depth;        ///< metrics of z = 1/y against the true depth, pooled
    std::size_t iterations = 0;
};

struct DemoReport {
    double impulse_sigma = 0.0;
    std::vector<DemoRow> rows;

    std::string table() const;
};

/// Named filter subsets matching the rows of the derivative ablation table.
struct AblationSubset {
    const char* label;
    const char* spec;
};
const std::vector<AblationSubset>& ablation_subsets();

/// End-to-end run: synthesizes a corpus (seed), fits a model, synthesizes
/// held-out scenes (seed + 1), predicts at every ambiguity of the grid and
/// globalizes with the full bank, then globalizes the ablation-ambiguity
/// predictions with every ablation subset. Corruption draws use the same seed
/// at every ambiguity level, so ambiguous rows at a lower level stay ambiguous
/// at higher levels. When out_dir is set, writes model.gmm, truth_k.pfm,
/// scene_*.pfm, summary.txt and summary.csv.
DemoReport run_demo(const DemoOptions& options);

}  // namespace derivdepth
