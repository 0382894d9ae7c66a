// derivdepth: command-line front end for the derivative-distribution depth pipeline.

#include "derivdepth/coeff_model.hpp"
#include "derivdepth/demo.hpp"
#include "derivdepth/filter_bank.hpp"
#include "derivdepth/globalizer.hpp"
#include "derivdepth/metrics.hpp"
#include "derivdepth/pfm.hpp"
#include "derivdepth/predictor.hpp"
#include "derivdepth/synthetic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace derivdepth;

namespace {

void require_file(const fs::path& p) {
    if (!fs::is_regular_file(p)) throw std::runtime_error("no such file: " + p.string());
}

void make_out_dir(const fs::path& dir) {
    if (dir.empty()) throw std::runtime_error("output directory path is empty");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory: " + dir.string());
}

void cmd_bank(const fs::path& out_dir) {
    make_out_dir(out_dir);
    const FilterBank bank = build_filter_bank();
    std::ofstream index(out_dir / "bank.txt");
    if (!index) throw std::runtime_error("cannot write " + (out_dir / "bank.txt").string());
    char name[32];
    char line[128];
    for (int i = 0; i < bank.size(); ++i) {
        const Filter& f = bank[i];
        std::snprintf(name, sizeof(name), "filter_%02d.pfm", i);
        write_pfm(out_dir / name, ScalarField(f.side(), f.side(), f.taps));
        std::snprintf(line, sizeof(line), "%d %s %d %d %.9f\n", i, std::string(to_string(f.kind)).c_str(), f.scale,
                      f.orientation_index, f.norm());
        index << line;
    }
    if (!index) throw std::runtime_error("write failed: bank.txt");
}

void cmd_fit(const fs::path& corpus_dir, int components, std::optional<std::size_t> min_assign, std::uint64_t seed,
             int stride, const fs::path& out) {
    if (!fs::is_directory(corpus_dir)) throw std::runtime_error("no such corpus directory: " + corpus_dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(corpus_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pfm") files.push_back(entry.path());
    }
    if (files.empty()) throw std::runtime_error("empty corpus: no .pfm files in " + corpus_dir.string());
    std::sort(files.begin(), files.end());

    std::vector<ScalarField> scenes;
    for (const auto& f : files) scenes.push_back(depth_to_scene(read_pfm(f)));
    const FilterBank bank = build_filter_bank();
    const MixtureModel model =
        fit_mixture_model(collect_coefficient_samples(scenes, bank, stride), components, min_assign, seed);
    write_mixture_model(out, model);
    std::printf("fitted %d filters x %d components from %zu maps -> %s\n", model.num_filters(),
                model.num_components(), scenes.size(), out.string().c_str());
}

void cmd_predict(const fs::path& depth, const fs::path& model_path, const std::string& subset,
                 const CorruptionConfig& corruption, const fs::path& out) {
    require_file(depth);
    require_file(model_path);
    const ScalarField y = depth_to_scene(read_pfm(depth));
    const MixtureModel model = read_mixture_model(model_path);
    const FilterBank bank = build_filter_bank();
    if (model.num_filters() != bank.size()) {
        throw std::runtime_error("model/filter mismatch: model has " + std::to_string(model.num_filters()) +
                                 " filters, bank has " + std::to_string(bank.size()));
    }
    write_weight_map(out, synth_predict(y, bank, model, parse_subset(subset), corruption));
}

void cmd_globalize(const fs::path& weights_path, const fs::path& model_path, SolverConfig config,
                   const fs::path& out_scene, const fs::path& out_depth, const fs::path& trace_path) {
    require_file(weights_path);
    require_file(model_path);
    const WeightMap weights = read_weight_map(weights_path);
    const MixtureModel model = read_mixture_model(model_path);
    const FilterBank bank = build_filter_bank();
    config.record_trace = !trace_path.empty();
    const GlobalizeResult res = globalize(weights, model, bank, config);
    if (!out_scene.empty()) write_pfm(out_scene, res.y);
    if (!out_depth.empty()) write_pfm(out_depth, scene_to_depth(res.y));
    if (!trace_path.empty()) write_trace_csv(trace_path, res.trace);
    std::printf("globalized %dx%d with %zu filters over %zu beta values%s\n", res.y.width(), res.y.height(),
                config.subset.size(), config.beta_schedule().size(),
                res.trace.dc_regularized ? " (DC re-anchored)" : "");
}

void cmd_eval(const fs::path& pred, const fs::path& truth, const fs::path& mask_path) {
    require_file(pred);
    require_file(truth);
    ScalarField mask;
    if (!mask_path.empty()) {
        require_file(mask_path);
        mask = read_pfm(mask_path);
    }
    std::printf("%s\n", evaluate(read_pfm(pred), read_pfm(truth), mask).to_json().c_str());
}

void add_solver_flags(CLI::App* cmd, SolverConfig& config, std::string& subset) {
    cmd->add_option("--subset", subset, "Filter indices and/or groups (scale0..3, order0..2, full)");
    cmd->add_option("--beta-init", config.beta_init, "Initial coupling weight");
    cmd->add_option("--beta-final", config.beta_final, "Final coupling weight");
    cmd->add_option("--beta-growth", config.beta_growth, "Per-iteration growth factor");
    cmd->add_option("--reg-weight", config.reg_weight, "Weight of the Laplacian smoothness term");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Depth from distributions over depth derivatives"};
    app.require_subcommand(1);

    fs::path bank_dir;
    auto* bank_cmd = app.add_subcommand("bank", "Dump the 64 filter kernels as PFM plus bank.txt");
    bank_cmd->add_option("--out-dir", bank_dir, "Output directory")->required();

    fs::path corpus_dir, model_out;
    int components = 64;
    std::optional<std::size_t> min_assign;
    std::uint64_t fit_seed = 0;
    int stride = 4;
    auto* fit_cmd = app.add_subcommand("fit", "Fit per-filter mixture models from a corpus of depth PFMs");
    fit_cmd->add_option("--corpus", corpus_dir, "Directory of depth maps (*.pfm)")->required();
    fit_cmd->add_option("--components,-M", components, "Mixture components per filter")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--min-assign", min_assign, "Minimum cluster size for the variance average");
    fit_cmd->add_option("--seed", fit_seed, "Seed");
    fit_cmd->add_option("--stride", stride, "Sampling stride over each map")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--out,--model", model_out, "Output GMM1 file")->required();

    fs::path depth_in, predict_model, weights_out;
    std::string predict_subset = "full";
    CorruptionConfig corruption;
    auto* predict_cmd = app.add_subcommand("predict-synth", "Synthesize a weight map from a ground-truth depth PFM");
    predict_cmd->add_option("--depth", depth_in, "Ground-truth depth PFM")->required();
    predict_cmd->add_option("--model", predict_model, "GMM1 model")->required();
    predict_cmd->add_option("--subset", predict_subset, "Filters to predict");
    predict_cmd->add_option("--ambiguity", corruption.ambiguity_fraction, "Fraction of rows replaced by uniform");
    predict_cmd->add_option("--temperature", corruption.blur_temperature, "Blur temperature (>= 1)");
    predict_cmd->add_option("--seed", corruption.seed, "Corruption seed");
    predict_cmd->add_option("--out", weights_out, "Output OWM1 file")->required();

    fs::path weights_in, glob_model, out_scene, out_depth, trace_path;
    SolverConfig solver;
    std::string solver_subset = "full";
    auto* glob_cmd = app.add_subcommand("globalize", "Recover a scene map from a weight map");
    glob_cmd->add_option("--weights", weights_in, "Input OWM1 file")->required();
    glob_cmd->add_option("--model", glob_model, "GMM1 model")->required();
    add_solver_flags(glob_cmd, solver, solver_subset);
    glob_cmd->add_option("--out-scene", out_scene, "Output scene map (inverse depth) PFM");
    glob_cmd->add_option("--out-depth", out_depth, "Output depth PFM");
    glob_cmd->add_option("--trace", trace_path, "Optional per-iteration CSV trace");

    fs::path pred_path, truth_path, mask_path;
    auto* eval_cmd = app.add_subcommand("eval", "Depth accuracy metrics of a prediction against ground truth");
    eval_cmd->add_option("--pred", pred_path, "Predicted depth PFM")->required();
    eval_cmd->add_option("--truth", truth_path, "Ground-truth depth PFM")->required();
    eval_cmd->add_option("--mask", mask_path, "Optional validity mask PFM (nonzero = valid)");

    DemoOptions demo;
    std::string demo_subset;
    auto* demo_cmd = app.add_subcommand("demo", "Synthetic end-to-end run with corruption grid and ablation");
    demo_cmd->add_option("--seed", demo.seed, "Seed");
    demo_cmd->add_option("--out-dir", demo.out_dir, "Output directory")->required();
    demo_cmd->add_option("--num-test", demo.num_test, "Held-out scenes")->check(CLI::PositiveNumber);
    demo_cmd->add_option("--corpus-size", demo.corpus_size, "Training scenes")->check(CLI::PositiveNumber);
    demo_cmd->add_option("--ablation-ambiguity", demo.ablation_ambiguity, "Ambiguity used for ablation rows");
    demo_cmd->add_option("--temperature", demo.temperature, "Blur temperature (>= 1)");
    demo_cmd->add_option("--beta-init", demo.solver.beta_init, "Initial coupling weight");
    demo_cmd->add_option("--beta-final", demo.solver.beta_final, "Final coupling weight");
    demo_cmd->add_option("--beta-growth", demo.solver.beta_growth, "Per-iteration growth factor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*bank_cmd) {
            cmd_bank(bank_dir);
        } else if (*fit_cmd) {
            cmd_fit(corpus_dir, components, min_assign, fit_seed, stride, model_out);
        } else if (*predict_cmd) {
            cmd_predict(depth_in, predict_model, predict_subset, corruption, weights_out);
        } else if (*glob_cmd) {
            solver.subset = parse_subset(solver_subset);
            cmd_globalize(weights_in, glob_model, solver, out_scene, out_depth, trace_path);
        } else if (*eval_cmd) {
            cmd_eval(pred_path, truth_path, mask_path);
        } else if (*demo_cmd) {
            make_out_dir(demo.out_dir);
            const DemoReport report = run_demo(demo);
            std::fputs(report.table().c_str(), stdout);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
