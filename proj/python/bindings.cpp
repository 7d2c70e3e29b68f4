#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gctree/coding_tree.hpp"
#include "gctree/error.hpp"
#include "gctree/pipeline.hpp"

namespace py = pybind11;
using namespace gct;

namespace {

// Infinity goes out as None.
py::object to_py(const SpherePoint& p) {
  if (p.is_infinite()) return py::none();
  return py::cast(p.value());
}

SpherePoint from_py(const py::object& o) {
  if (o.is_none()) return SpherePoint::infinity();
  return SpherePoint(o.cast<cplx>());
}

py::list points(const std::vector<SpherePoint>& pts) {
  py::list out;
  for (const auto& p : pts) out.append(to_py(p));
  return out;
}

py::dict manifest_dict(const RunManifest& m) {
  py::dict d;
  d["config_sha256"] = m.config_sha256;
  d["exit_code"] = m.exit_code;
  py::list stages;
  for (const auto& s : m.stages) {
    py::dict sd;
    sd["name"] = s.name;
    sd["status"] = s.status;
    sd["seconds"] = s.seconds;
    sd["message"] = s.message;
    py::dict summary;
    for (const auto& [k, v] : s.summary) summary[py::str(k)] = v;
    sd["summary"] = summary;
    stages.append(sd);
  }
  d["stages"] = stages;
  py::dict files;
  for (const auto& f : m.files) files[py::str(f.name)] = f.sha256;
  d["files"] = files;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Geometric coding trees for rational maps";
  m.attr("__version__") = std::string(kVersion);

  // Messages start with the error kind, e.g. "InvalidConfig: ...".
  py::register_exception<Error>(m, "GctreeError", PyExc_RuntimeError);

  m.def("chordal_distance", [](const py::object& a, const py::object& b) { return chordal_distance(from_py(a), from_py(b)); });

  py::class_<RationalMap>(m, "RationalMap")
      .def(py::init([](std::vector<cplx> num, std::vector<cplx> den) { return RationalMap(num, den); }),
           py::arg("numerator"), py::arg("denominator") = std::vector<cplx>{1.0})
      .def_property_readonly("degree", &RationalMap::degree)
      .def_property_readonly("numerator", &RationalMap::numerator)
      .def_property_readonly("denominator", &RationalMap::denominator)
      .def("__call__", [](const RationalMap& f, const py::object& z) { return to_py(f(from_py(z))); })
      .def("derivative", [](const RationalMap& f, cplx z) { return f.derivative(z); })
      .def("spherical_derivative", [](const RationalMap& f, const py::object& z) { return f.spherical_derivative(from_py(z)); })
      .def("iterate", &RationalMap::iterate)
      .def("fingerprint", &RationalMap::fingerprint)
      .def("__repr__", &RationalMap::to_string);

  m.def(
      "periodic_orbits",
      [](const RationalMap& f, int n) {
        py::list out;
        for (const auto& o : find_periodic_orbits(f, n)) {
          py::dict d;
          d["period"] = o.period;
          d["points"] = points(o.points);
          d["multiplier"] = o.multiplier;
          d["kind"] = std::string(to_string(o.kind));
          out.append(d);
        }
        return out;
      },
      py::arg("map"), py::arg("period"));

  py::class_<CodingTree>(m, "CodingTree")
      .def(py::init([](const RationalMap& f, cplx root, const std::vector<std::vector<cplx>>& curves, double max_step) {
             std::vector<Polyline> base;
             for (const auto& c : curves) base.emplace_back(std::vector<SpherePoint>(c.begin(), c.end()));
             TreeOptions to;
             to.max_step = max_step;
             return CodingTree(f, root, std::move(base), to);
           }),
           py::arg("map"), py::arg("root"), py::arg("base_curves"), py::arg("max_step") = 1e-2)
      .def_property_readonly("degree", &CodingTree::degree)
      .def("vertex", [](CodingTree& t, const std::string& w) { return to_py(t.node(SymbolWord::parse(w).symbols()).vertex); })
      .def("edge", [](CodingTree& t, const std::string& w) { return points(t.node(SymbolWord::parse(w).symbols()).edge.points()); })
      .def(
          "coding_point",
          [](CodingTree& t, const std::string& w, double tol) {
            const CodingPoint c = coding_point(t, SymbolWord::parse(w), tol);
            py::dict d;
            d["point"] = to_py(c.point);
            d["error_bound"] = c.error_bound;
            d["depth"] = c.depth;
            d["converged"] = c.converged;
            return d;
          },
          py::arg("word"), py::arg("tol") = 1e-10);

  m.def("config_problems", [](const std::string& text) { return config_problems(parse_config(text)); }, py::arg("text"));
  m.def("normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); }, py::arg("text"));

  m.def(
      "run",
      [](const std::string& config_path, std::optional<std::string> out, std::optional<std::uint64_t> seed,
         std::optional<std::vector<std::string>> stages) {
        RunConfig cfg = load_config(config_path);
        if (out) cfg.output = *out;
        if (seed) cfg.seed = *seed;
        PipelineOptions po;
        if (stages) {
          po.stages.clear();
          for (const auto& name : *stages) {
            bool found = false;
            for (Stage s : kAllStages) {
              if (stage_name(s) == name) {
                po.stages.push_back(s);
                found = true;
              }
            }
            if (!found) throw Error(ErrorKind::InvalidArgument, "unknown stage " + name);
          }
        }
        RunManifest man;
        {
          py::gil_scoped_release release;
          man = run_pipeline(cfg, po);
        }
        return manifest_dict(man);
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(), py::arg("stages") = py::none());

  m.def("verify_manifest", &verify_manifest, py::arg("directory"));
}
