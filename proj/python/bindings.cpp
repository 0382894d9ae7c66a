#include "derivdepth/coeff_model.hpp"
#include "derivdepth/errors.hpp"
#include "derivdepth/filter_bank.hpp"
#include "derivdepth/globalizer.hpp"
#include "derivdepth/metrics.hpp"
#include "derivdepth/pfm.hpp"
#include "derivdepth/predictor.hpp"
#include "derivdepth/synthetic.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

namespace py = pybind11;
using namespace derivdepth;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ScalarField to_field(const Array& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
    const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
    return ScalarField(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const ScalarField& f) {
    Array out({f.height(), f.width()});
    std::memcpy(out.mutable_data(), f.values().data(), f.size() * sizeof(double));
    return out;
}

std::vector<int> subset_arg(const py::object& subset) {
    if (subset.is_none()) return full_subset();
    if (py::isinstance<py::str>(subset)) return parse_subset(subset.cast<std::string>());
    return subset.cast<std::vector<int>>();
}

const FilterBank& bank() {
    static const FilterBank b = build_filter_bank();
    return b;
}

py::dict metrics_dict(const DepthMetrics& m) {
    py::dict d;
    d["rmse_lin"] = m.rmse_lin;
    d["rmse_log"] = m.rmse_log;
    d["abs_rel"] = m.abs_rel;
    d["sqr_rel"] = m.sqr_rel;
    d["delta1"] = m.delta1;
    d["delta2"] = m.delta2;
    d["delta3"] = m.delta3;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Scene-map recovery from distributions over depth derivatives";

    m.def("filter_bank", [] {
        py::list out;
        for (int i = 0; i < bank().size(); ++i) {
            const Filter& f = bank()[i];
            py::dict d;
            d["index"] = i;
            d["kind"] = std::string(to_string(f.kind));
            d["scale"] = f.scale;
            d["order"] = f.order;
            d["orientation"] = f.orientation_index;
            d["kernel"] = to_array(ScalarField(f.side(), f.side(), f.taps));
            out.append(d);
        }
        return out;
    }, "All 64 filters as dicts with index, kind, scale, order, orientation and kernel.");
    m.def("parse_subset", [](const std::string& s) { return parse_subset(s); }, py::arg("spec"));

    m.def("analyze", [](const Array& y, const py::object& subset) {
        py::dict out;
        for (auto& [idx, map] : analyze(to_field(y), bank(), subset_arg(subset))) out[py::int_(idx)] = to_array(map);
        return out;
    }, py::arg("y"), py::arg("subset") = py::none(), "Coefficient maps keyed by filter index.");

    py::class_<MixtureModel>(m, "MixtureModel")
        .def_property_readonly("num_filters", &MixtureModel::num_filters)
        .def_property_readonly("num_components", &MixtureModel::num_components)
        .def_property_readonly("means", [](const MixtureModel& mm) {
            py::array_t<double> a({mm.num_filters(), mm.num_components()});
            std::memcpy(a.mutable_data(), mm.all_means().data(), mm.all_means().size() * sizeof(double));
            return a;
        })
        .def_property_readonly("variances", [](const MixtureModel& mm) { return py::array_t<double>(py::cast(mm.all_variances())); })
        .def("soft_targets", [](const MixtureModel& mm, double w, int filter) { return soft_targets(w, mm, filter); },
             py::arg("w"), py::arg("filter"))
        .def("save", [](const MixtureModel& mm, const std::filesystem::path& p) { write_mixture_model(p, mm); })
        .def_static("load", &read_mixture_model)
        .def("__eq__", [](const MixtureModel& a, const MixtureModel& b) { return a == b; });

    py::class_<WeightMap>(m, "WeightMap")
        .def_property_readonly("width", &WeightMap::width)
        .def_property_readonly("height", &WeightMap::height)
        .def_property_readonly("filters", &WeightMap::filter_indices)
        .def_property_readonly("num_components", &WeightMap::num_components)
        .def_property_readonly("weights", [](const WeightMap& w) {
            py::array_t<float> a({w.height(), w.width(), w.num_slots(), w.num_components()});
            std::memcpy(a.mutable_data(), w.raw().data(), w.raw().size() * sizeof(float));
            return a;
        }, "Array of shape (height, width, filters, components).")
        .def("save", [](const WeightMap& w, const std::filesystem::path& p) { write_weight_map(p, w); })
        .def_static("load", &read_weight_map)
        .def("__eq__", [](const WeightMap& a, const WeightMap& b) { return a == b; });

    m.def("fit_mixture_model", [](const std::vector<Array>& scenes, int components, std::optional<std::size_t> min_assign,
                                  std::uint64_t seed, int stride) {
        std::vector<ScalarField> fields;
        for (const auto& a : scenes) fields.push_back(to_field(a));
        py::gil_scoped_release release;
        return fit_mixture_model(collect_coefficient_samples(fields, bank(), stride), components, min_assign, seed);
    }, py::arg("scenes"), py::arg("components") = 64, py::arg("min_assign") = py::none(), py::arg("seed") = 0,
       py::arg("stride") = 4, "Fit per-filter mixtures to scene maps (inverse depth).");

    m.def("synth_predict", [](const Array& y, const MixtureModel& model, const py::object& subset, double ambiguity,
                              double temperature, std::uint64_t seed) {
        return synth_predict(to_field(y), bank(), model, subset_arg(subset), {ambiguity, temperature, seed});
    }, py::arg("y"), py::arg("model"), py::arg("subset") = py::none(), py::arg("ambiguity") = 0.0,
       py::arg("temperature") = 1.0, py::arg("seed") = 0);

    m.def("globalize", [](const WeightMap& weights, const MixtureModel& model, const py::object& subset,
                          double beta_init, double beta_final, double beta_growth, double reg_weight) {
        SolverConfig cfg;
        cfg.subset = subset_arg(subset);
        cfg.beta_init = beta_init;
        cfg.beta_final = beta_final;
        cfg.beta_growth = beta_growth;
        cfg.reg_weight = reg_weight;
        GlobalizeResult res;
        {
            py::gil_scoped_release release;
            res = globalize(weights, model, bank(), cfg);
        }
        py::dict trace;
        trace["beta"] = res.trace.beta;
        trace["objective"] = res.trace.objective;
        trace["residual"] = res.trace.residual;
        trace["dc_regularized"] = res.trace.dc_regularized;
        return py::make_tuple(to_array(res.y), trace);
    }, py::arg("weights"), py::arg("model"), py::arg("subset") = py::none(), py::arg("beta_init") = 0x1p-10,
       py::arg("beta_final") = 0x1p7, py::arg("beta_growth") = 1.0905077326652577, py::arg("reg_weight") = 1.0,
       "Recover the scene map; returns (y, trace).");

    m.def("decode_argmax", [](const WeightMap& w, const MixtureModel& model, int filter) {
        return to_array(decode_argmax(w, model, filter));
    }, py::arg("weights"), py::arg("model"), py::arg("filter") = 0);

    m.def("evaluate", [](const Array& z_hat, const Array& z_true, const std::optional<Array>& mask) {
        return metrics_dict(evaluate(to_field(z_hat), to_field(z_true), mask ? to_field(*mask) : ScalarField{}));
    }, py::arg("z_hat"), py::arg("z_true"), py::arg("mask") = py::none());
    m.def("depth_to_scene", [](const Array& z, double z_min) { return to_array(depth_to_scene(to_field(z), z_min)); },
          py::arg("z"), py::arg("z_min") = 0.1);
    m.def("scene_to_depth", [](const Array& y, double z_min, double z_max) {
        return to_array(scene_to_depth(to_field(y), z_min, z_max));
    }, py::arg("y"), py::arg("z_min") = 0.1, py::arg("z_max") = 10.0);

    m.def("synth_scene", [](int w, int h, std::uint64_t seed) { return to_array(synth_scene(w, h, seed)); },
          py::arg("width"), py::arg("height"), py::arg("seed"));
    m.def("read_pfm", [](const std::filesystem::path& p) { return to_array(read_pfm(p)); });
    m.def("write_pfm", [](const std::filesystem::path& p, const Array& a) { write_pfm(p, to_field(a)); });

    py::register_exception<FileFormatError>(m, "FileFormatError", PyExc_ValueError);
}
