#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mtswarm/analysis.hpp"
#include "mtswarm/config.hpp"
#include "mtswarm/errors.hpp"
#include "mtswarm/pipeline.hpp"

namespace py = pybind11;
using namespace mtswarm;

namespace {

// (n_sites, 2) float64 copy of one frame.
py::array_t<double> frame_array(const std::vector<Vec2>& frame) {
    py::array_t<double> out({static_cast<py::ssize_t>(frame.size()), py::ssize_t{2}});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < frame.size(); ++i) {
        v(static_cast<py::ssize_t>(i), 0) = frame[i].x;
        v(static_cast<py::ssize_t>(i), 1) = frame[i].y;
    }
    return out;
}

FrameView view_of(const Trajectory& t, std::size_t frame) {
    if (frame >= t.n_frames()) throw py::index_error("frame out of range");
    return FrameView{t.frames[frame], t.header.sites_per_filament, t.box()};
}

py::dict meta_columns(const std::vector<TileMeta>& meta) {
    std::vector<std::string> run;
    std::vector<double> temp;
    std::vector<std::uint32_t> frame, tile;
    for (const auto& m : meta) {
        run.push_back(m.run);
        temp.push_back(m.temperature);
        frame.push_back(m.frame);
        tile.push_back(m.tile);
    }
    py::dict d;
    d["run"] = run;
    d["temperature"] = py::array(py::cast(temp));
    d["frame"] = py::array(py::cast(frame));
    d["tile"] = py::array(py::cast(tile));
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "DNA-functionalised filament swarm simulator and analysis pipeline";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def("set", [](SimConfig& c, const std::string& k, const std::string& v) { c.set(k, v); })
        .def("validate", &SimConfig::validate)
        .def("to_text", &SimConfig::to_text)
        .def("hash", &SimConfig::hash)
        .def_readwrite("n_filaments", &SimConfig::n_filaments)
        .def_readwrite("sites_per_filament", &SimConfig::sites_per_filament)
        .def_readwrite("box_side", &SimConfig::box_side)
        .def_readwrite("dt", &SimConfig::dt)
        .def_readwrite("steps_per_frame", &SimConfig::steps_per_frame)
        .def_readwrite("n_frames", &SimConfig::n_frames)
        .def_readwrite("seed", &SimConfig::seed)
        .def("__repr__", [](const SimConfig& c) { return "SimConfig(\n" + c.to_text() + ")"; });
    m.def("parse_config", &parse_config, py::arg("text"));

    py::class_<Trajectory>(m, "Trajectory")
        .def_property_readonly("n_frames", &Trajectory::n_frames)
        .def_property_readonly("n_filaments", [](const Trajectory& t) { return t.header.n_filaments; })
        .def_property_readonly("sites_per_filament", [](const Trajectory& t) { return t.header.sites_per_filament; })
        .def_property_readonly("box_side", [](const Trajectory& t) { return t.header.box_side; })
        .def_readonly("temperatures", &Trajectory::temperatures)
        .def_readonly("aborted", &Trajectory::aborted)
        .def("frame",
             [](const Trajectory& t, std::size_t f) {
                 view_of(t, f);
                 return frame_array(t.frames[f]);
             },
             py::arg("index"), "Site positions of one frame as an (n_sites, 2) array.");

    m.def("run", [](const SimConfig& c) {
        py::gil_scoped_release release;
        return run(c);
    }, py::arg("config"));
    m.def("write_trajectory", &write_trajectory, py::arg("path"), py::arg("trajectory"));
    m.def("read_trajectory", &read_trajectory, py::arg("path"));

    m.def("duplex_free_energy", [](double t) { return duplex_free_energy(t, DnaPotentialParams{}); },
          py::arg("temperature"), "Duplex free energy at the default DNA parameters.");
    m.def("polar_order", [](const Trajectory& t, std::size_t f) { return polar_order(view_of(t, f)); },
          py::arg("trajectory"), py::arg("frame"));

    py::class_<ClusterStats>(m, "ClusterStats")
        .def_readonly("n_clusters", &ClusterStats::n_clusters)
        .def_readonly("largest_fraction", &ClusterStats::largest_fraction)
        .def_readonly("size_histogram", &ClusterStats::size_histogram)
        .def_readonly("labels", &ClusterStats::labels);
    m.def("cluster_stats",
          [](const Trajectory& t, std::size_t f, double link, double angle) {
              return cluster_stats(view_of(t, f), link, angle);
          },
          py::arg("trajectory"), py::arg("frame"), py::arg("link_distance") = ClusterParams{}.link_distance,
          py::arg("angle_tol") = ClusterParams{}.angle_tol);

    py::class_<FeatureMatrix>(m, "FeatureMatrix")
        .def_property_readonly("rows", &FeatureMatrix::rows)
        .def_readonly("dim", &FeatureMatrix::dim)
        .def_property_readonly("values",
                               [](const FeatureMatrix& fm) {
                                   py::array_t<float> a({static_cast<py::ssize_t>(fm.rows()), static_cast<py::ssize_t>(fm.dim)});
                                   std::copy(fm.values.begin(), fm.values.end(), a.mutable_data());
                                   return a;
                               })
        .def_property_readonly("meta", [](const FeatureMatrix& fm) { return meta_columns(fm.meta); });
    m.def("featurize", [](const Trajectory& t, const std::string& run) { return featurize(t, run); },
          py::arg("trajectory"), py::arg("run"));
    m.def("write_features", &write_features, py::arg("path"), py::arg("features"));
    m.def("read_features", &read_features, py::arg("path"));

    py::class_<Dictionary>(m, "Dictionary")
        .def_readonly("atoms", &Dictionary::atoms)
        .def_readonly("relevancy_order", &Dictionary::relevancy_order)
        .def_readonly("mu", &Dictionary::mu);
    py::class_<ActivationTable>(m, "ActivationTable")
        .def_readonly("coefficients", &ActivationTable::C)
        .def_readonly("objective", &ActivationTable::objective)
        .def_property_readonly("meta", [](const ActivationTable& t) { return meta_columns(t.meta); });
    m.def("read_dictionary", &read_dictionary, py::arg("path"));
    m.def("read_activations", &read_activations, py::arg("path"));

    m.def("learn_stage",
          [](const FeatureMatrix& fm, std::size_t n_atoms, double mu, std::size_t rounds, std::uint64_t seed) {
              SparseCodingConfig cfg;
              cfg.mu = mu;
              cfg.outer_rounds = rounds;
              LearnStage ls;
              {
                  py::gil_scoped_release release;
                  ls = learn_stage(fm, n_atoms, cfg, seed);
              }
              return py::make_tuple(ls.dictionary, ls.activations, ls.history);
          },
          py::arg("features"), py::arg("n_atoms") = 12, py::arg("mu") = 1.0, py::arg("rounds") = 50,
          py::arg("seed") = 1, "Returns (dictionary, activations, objective history).");
    m.def("decompose", [](const Dictionary& d, const FeatureMatrix& fm) { return decompose(d, fm); },
          py::arg("dictionary"), py::arg("features"));

    m.def("normalize_temperature", &normalize_temperature, py::arg("kelvin"));
    m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return spearman(x, y); },
          py::arg("x"), py::arg("y"));
}
