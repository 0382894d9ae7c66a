#include "derivdepth/demo.hpp"

#include "derivdepth/pfm.hpp"
#include "derivdepth/predictor.hpp"
#include "derivdepth/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace derivdepth {

namespace {

std::string format_ambiguity(double a) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", a);
    return buf;
}

struct Solved {
    double y_sq = 0.0;
    double argmax_sq = 0.0;
    std::size_t pixels = 0;
    std::vector<ScalarField> depth_pred;
    std::size_t iterations = 0;
};

}  // namespace

const std::vector<AblationSubset>& ablation_subsets() {
    static const std::vector<AblationSubset> rows = {
        {"Full", "full"},
        {"Scale 0,1 (All orders)", "scale0,scale1"},
        {"Scale 0,1,2 (All orders)", "scale0,scale1,scale2"},
        {"Order 0 (All scales)", "order0"},
        {"Order 0,1 (All scales)", "order0,order1"},
        {"Scale 0 (Pointwise Depth)", "scale0"},
    };
    return rows;
}

std::string DemoReport::table() const {
    std::string out;
    char line[512];
    std::snprintf(line, sizeof(line), "impulse sigma: %.6g\n", impulse_sigma);
    out += line;
    std::snprintf(line, sizeof(line), "%-10s %-28s %6s %10s %10s %9s %9s %9s %9s %7s %7s %7s\n", "group", "filters",
                  "amb", "rmse_y", "argmax_y", "rmse_lin", "rmse_log", "abs_rel", "sqr_rel", "d1", "d2", "d3");
    out += line;
    for (const DemoRow& r : rows) {
        std::snprintf(line, sizeof(line),
                      "%-10s %-28s %6.2f %10.6f %10.6f %9.5f %9.5f %9.5f %9.5f %7.4f %7.4f %7.4f\n", r.group.c_str(),
                      r.label.c_str(), r.ambiguity, r.y_rmse, r.argmax_rmse, r.depth.rmse_lin, r.depth.rmse_log,
                      r.depth.abs_rel, r.depth.sqr_rel, r.depth.delta1, r.depth.delta2, r.depth.delta3);
        out += line;
    }
    return out;
}

DemoReport run_demo(const DemoOptions& options) {
    if (options.num_test < 1 || options.corpus_size < 1) throw std::invalid_argument("demo: empty corpus or test set");
    const bool write = !options.out_dir.empty();
    if (write) {
        std::error_code ec;
        std::filesystem::create_directories(options.out_dir, ec);
        if (ec || !std::filesystem::is_directory(options.out_dir)) {
            throw std::runtime_error("cannot create output directory: " + options.out_dir.string());
        }
    }

    const FilterBank bank = build_filter_bank();
    const auto corpus = synth_corpus(options.corpus_size, options.map_size, options.map_size, options.seed);
    const MixtureModel model = fit_mixture_model(collect_coefficient_samples(corpus, bank), options.num_components,
                                                 std::nullopt, options.seed);
    const auto tests = synth_corpus(options.num_test, options.map_size, options.map_size, options.seed + 1);

    std::vector<ScalarField> depth_true;
    for (const auto& y : tests) depth_true.push_back(scene_to_depth(y));

    if (write) {
        write_mixture_model(options.out_dir / "model.gmm", model);
        for (std::size_t k = 0; k < tests.size(); ++k) {
            write_pfm(options.out_dir / ("truth_" + std::to_string(k) + ".pfm"), depth_true[k]);
        }
    }

    DemoReport report;
    report.impulse_sigma = std::sqrt(model.variance(0));

    auto predict = [&](double ambiguity) {
        std::vector<WeightMap> maps;
        for (std::size_t k = 0; k < tests.size(); ++k) {
            const CorruptionConfig corruption{ambiguity, options.temperature, options.seed * 1000 + k};
            maps.push_back(synth_predict(tests[k], bank, model, full_subset(), corruption));
        }
        return maps;
    };

    auto solve = [&](const std::vector<WeightMap>& maps, const std::string& spec) {
        SolverConfig config = options.solver;
        config.subset = parse_subset(spec);
        Solved s;
        s.iterations = config.beta_schedule().size();
        for (std::size_t k = 0; k < maps.size(); ++k) {
            const GlobalizeResult res = globalize(maps[k], model, bank, config);
            const ScalarField baseline = decode_argmax(maps[k], model, 0);
            const double n = static_cast<double>(tests[k].size());
            s.y_sq += std::pow(rmse(res.y, tests[k]), 2) * n;
            s.argmax_sq += std::pow(rmse(baseline, tests[k]), 2) * n;
            s.pixels += tests[k].size();
            s.depth_pred.push_back(scene_to_depth(res.y));
        }
        return s;
    };

    auto add_row = [&](std::string group, std::string label, std::string spec, double ambiguity, Solved s) {
        DemoRow row;
        row.group = std::move(group);
        row.label = std::move(label);
        row.subset = std::move(spec);
        row.ambiguity = ambiguity;
        row.y_rmse = std::sqrt(s.y_sq / static_cast<double>(s.pixels));
        row.argmax_rmse = std::sqrt(s.argmax_sq / static_cast<double>(s.pixels));
        row.depth = evaluate_pooled(s.depth_pred, depth_true);
        row.iterations = s.iterations;
        if (write) {
            for (std::size_t k = 0; k < s.depth_pred.size(); ++k) {
                std::string name = "depth_" + row.group + "_" + row.subset + "_" + format_ambiguity(ambiguity) + "_" +
                                   std::to_string(k) + ".pfm";
                for (char& c : name) {
                    if (c == ',') c = '+';
                }
                write_pfm(options.out_dir / name, s.depth_pred[k]);
            }
        }
        report.rows.push_back(std::move(row));
    };

    for (double ambiguity : options.ambiguity_grid) {
        add_row("corruption", "Full", "full", ambiguity, solve(predict(ambiguity), "full"));
    }
    const auto ablation_maps = predict(options.ablation_ambiguity);
    for (const auto& [label, spec] : ablation_subsets()) {
        add_row("ablation", label, spec, options.ablation_ambiguity, solve(ablation_maps, spec));
    }

    if (write) {
        std::ofstream txt(options.out_dir / "summary.txt");
        txt << report.table();
        std::ofstream csv(options.out_dir / "summary.csv");
        csv << "group,filters,subset,ambiguity,rmse_y,argmax_y,rmse_lin,rmse_log,abs_rel,sqr_rel,delta1,delta2,delta3\n";
        char line[512];
        for (const DemoRow& r : report.rows) {
            std::snprintf(line, sizeof(line), "%s,\"%s\",\"%s\",%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n",
                          r.group.c_str(), r.label.c_str(), r.subset.c_str(), r.ambiguity, r.y_rmse, r.argmax_rmse,
                          r.depth.rmse_lin, r.depth.rmse_log, r.depth.abs_rel, r.depth.sqr_rel, r.depth.delta1,
                          r.depth.delta2, r.depth.delta3);
            csv << line;
        }
        if (!txt || !csv) throw std::runtime_error("failed writing demo summary");
    }
    return report;
}

}  // namespace derivdepth
