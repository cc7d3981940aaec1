#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "roadinfer/config.h"
#include "roadinfer/error.h"
#include "roadinfer/io.h"
#include "roadinfer/mapmatch.h"
#include "roadinfer/metrics.h"
#include "roadinfer/pipeline.h"
#include "roadinfer/synth.h"
#include "roadinfer/thinning.h"

namespace py = pybind11;
using namespace roadinfer;

namespace {

using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

// Row y of the array is grid row y.
BinaryGrid grid_from_array(const BoolArray& a) {
  if (a.ndim() != 2) throw InvalidInputError("expected a 2-D array");
  const auto r = a.unchecked<2>();
  BinaryGrid g(static_cast<int>(r.shape(1)), static_cast<int>(r.shape(0)));
  for (py::ssize_t y = 0; y < r.shape(0); ++y) {
    for (py::ssize_t x = 0; x < r.shape(1); ++x) {
      if (r(y, x)) g.set(static_cast<int>(x), static_cast<int>(y));
    }
  }
  return g;
}

BoolArray array_from_grid(const BinaryGrid& g) {
  BoolArray a({g.height(), g.width()});
  auto w = a.mutable_unchecked<2>();
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) w(y, x) = g.get(x, y);
  }
  return a;
}

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  d["matched_proposal"] = r.matched_proposal;
  d["total_proposal"] = r.total_proposal;
  d["matched_gt"] = r.matched_gt;
  d["total_gt"] = r.total_gt;
  return d;
}

PipelineConfig config_from(const std::map<std::string, std::string>& settings) {
  PipelineConfig c;
  for (const auto& [k, v] : settings) set_config_value(c, k, v);
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Road graph inference from fleet traces";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInputError>(m, "InvalidInputError", error.ptr());
  py::register_exception<NotFoundError>(m, "NotFoundError", error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<InvariantError>(m, "InvariantError", error.ptr());

  py::class_<RoadGraph>(m, "RoadGraph")
      .def(py::init<>())
      .def_static("from_geojson", &graph_from_geojson)
      .def("to_geojson", &graph_to_geojson)
      .def_property_readonly("node_count", &RoadGraph::node_count)
      .def_property_readonly("edge_count", &RoadGraph::edge_count)
      .def("total_length", &RoadGraph::total_length)
      .def("nodes",
           [](const RoadGraph& g) {
             std::map<std::int64_t, std::tuple<double, double, double>> out;
             for (const auto& [id, p] : g.nodes()) {
               out[static_cast<std::int64_t>(id)] = {p.x, p.y, p.z};
             }
             return out;
           })
      .def("edges",
           [](const RoadGraph& g) {
             std::vector<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::string>> out;
             for (const auto& [id, e] : g.edges()) {
               out.emplace_back(static_cast<std::int64_t>(id), static_cast<std::int64_t>(e.a),
                                static_cast<std::int64_t>(e.b), std::string(to_string(e.provenance)));
             }
             return out;
           })
      .def("degree",
           [](const RoadGraph& g, std::int64_t v) { return g.degree(NodeId{v}); });

  py::class_<SyntheticFleet>(m, "SyntheticFleet")
      .def_readonly("ground_truth", &SyntheticFleet::ground_truth)
      .def_property_readonly("traces", [](const SyntheticFleet& f) {
        std::vector<std::vector<std::tuple<double, double, double>>> out;
        for (const auto& t : f.dataset.traces) {
          auto& pts = out.emplace_back();
          for (const auto& p : t.points) pts.emplace_back(p.x, p.y, p.z);
        }
        return out;
      });

  m.def("ground_truth",
        [](const std::string& scenario, double extent) {
          ScenarioSpec spec;
          spec.name = scenario_from_string(scenario);
          spec.extent = extent;
          return make_ground_truth(spec);
        },
        py::arg("scenario"), py::arg("extent") = 1000.0);

  m.def("synthetic_fleet",
        [](const std::string& scenario, int traces_per_route, double white_sigma,
           double bias_sigma, const std::string& policy, std::uint64_t seed) {
          ScenarioSpec spec;
          spec.name = scenario_from_string(scenario);
          NoiseModel noise;
          noise.white_sigma = white_sigma;
          noise.bias_sigma = bias_sigma;
          return make_synthetic_fleet(spec, traces_per_route, noise,
                                      route_policy_from_string(policy), seed);
        },
        py::arg("scenario"), py::arg("traces_per_route") = 10, py::arg("white_sigma") = 1.0,
        py::arg("bias_sigma") = 2.0, py::arg("policy") = "all_shortest_paths",
        py::arg("seed") = 0);

  m.def("infer",
        [](const SyntheticFleet& fleet, const std::map<std::string, std::string>& settings) {
          PipelineConfig c = config_from(settings);
          c.workers = c.workers == 0 ? 1 : c.workers;
          py::gil_scoped_release release;
          return infer_road_graph(fleet.dataset, c).graph;
        },
        py::arg("fleet"), py::arg("settings") = std::map<std::string, std::string>{},
        "Runs every stage on the fleet's traces and points; returns the graph.");

  m.def("config_snapshot",
        [](const std::map<std::string, std::string>& settings) {
          return config_snapshot(config_from(settings));
        },
        py::arg("settings") = std::map<std::string, std::string>{});

  m.def("geo_metric",
        [](const RoadGraph& p, const RoadGraph& g) {
          return report_dict(geo_metric(p, g, GeoConfig{}));
        });
  m.def("itopo_metric",
        [](const RoadGraph& p, const RoadGraph& g) {
          return report_dict(itopo_metric(p, g, ItopoConfig{}));
        });

  m.def("edge_transition_prob",
        [](const RoadGraph& g, std::int64_t v, std::int64_t e) {
          return edge_transition_prob(NodeId{v}, EdgeId{e}, g, MatchConfig{});
        });

  m.def("skeletonize_guo_hall",
        [](const BoolArray& a) { return array_from_grid(skeletonize_guo_hall(grid_from_array(a))); });
  m.def("skeletonize_zhang_suen",
        [](const BoolArray& a) { return array_from_grid(skeletonize_zhang_suen(grid_from_array(a))); });

  m.def("sha256_hex", [](const py::bytes& b) { return sha256_hex(std::string(b)); });
}
