// Python surface for the core library: grids, operators, certification,
// norms, and the experiment harness. Reports cross the boundary as JSON
// strings; array data crosses as numpy complex arrays (copied, row-major).
#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "psb/errors.hpp"
#include "psb/grid.hpp"
#include "psb/harness.hpp"
#include "psb/io.hpp"
#include "psb/maximal.hpp"
#include "psb/psido.hpp"
#include "psb/spaces.hpp"
#include "psb/symbols.hpp"

namespace py = pybind11;

namespace {

psb::FamilyKind kind_from_name(const std::string& name) {
  for (psb::FamilyKind kind :
       {psb::FamilyKind::gaussian_pack, psb::FamilyKind::smooth_bump,
        psb::FamilyKind::bandlimited_random}) {
    if (psb::family_kind_name(kind) == name) return kind;
  }
  throw psb::Error::catalog("unknown family kind \"" + name +
                            "\"; use gaussian-pack, smooth-bump, or bandlimited-random");
}

py::array_t<std::complex<double>> values_array(const psb::GridFunction& f) {
  const auto n = static_cast<py::ssize_t>(f.spec.points_per_axis);
  py::array_t<std::complex<double>> out(
      f.spec.dimension == 1 ? std::vector<py::ssize_t>{n}
                            : std::vector<py::ssize_t>{n, n});
  std::copy(f.values.begin(), f.values.end(), out.mutable_data());
  return out;
}

psb::GridFunction function_from_array(const psb::GridSpec& spec,
                                      const py::array_t<std::complex<double>,
                                                        py::array::c_style |
                                                            py::array::forcecast>& values,
                                      const std::string& domain) {
  if (static_cast<std::size_t>(values.size()) != spec.node_count()) {
    throw psb::Error::parameter("grid_function: array has " +
                                std::to_string(values.size()) + " entries, grid wants " +
                                std::to_string(spec.node_count()));
  }
  psb::GridFunction f{spec,
                      domain == "frequency" ? psb::Domain::frequency : psb::Domain::space,
                      std::vector<std::complex<double>>(
                          values.data(), values.data() + values.size())};
  return f;
}

psb::CubeFamilySpec cube_family(int window, bool centered, bool dyadic) {
  psb::CubeFamilySpec fam;
  fam.max_halfwidth_cells = window;
  fam.placement = centered ? psb::Placement::centered_only : psb::Placement::all_containing;
  fam.sharp_dyadic_sides = dyadic;
  return fam;
}

psb::SamplingPlan plan_from(int levels, double threshold) {
  psb::SamplingPlan plan;
  if (levels > 0) plan.refinement_levels = levels;
  if (threshold > 0.0) plan.stability_threshold = threshold;
  return plan;
}

double spec_value(const std::map<std::string, double>& spec, const std::string& key,
                  double fallback) {
  const auto it = spec.find(key);
  return it == spec.end() ? fallback : it->second;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "pseudodifferential operators, maximal functions, and variable Lebesgue norms";

  py::register_exception<psb::Error>(m, "Error");

  py::class_<psb::GridSpec>(m, "GridSpec")
      .def_readonly("dimension", &psb::GridSpec::dimension)
      .def_readonly("half_extent", &psb::GridSpec::half_extent)
      .def_readonly("points_per_axis", &psb::GridSpec::points_per_axis)
      .def_property_readonly("node_count", &psb::GridSpec::node_count)
      .def_property_readonly("dx", &psb::GridSpec::dx)
      .def("__repr__", [](const psb::GridSpec& s) {
        return "GridSpec(dimension=" + std::to_string(s.dimension) +
               ", half_extent=" + std::to_string(s.half_extent) +
               ", points_per_axis=" + std::to_string(s.points_per_axis) + ")";
      });

  py::class_<psb::GridFunction>(m, "GridFunction")
      .def_readonly("spec", &psb::GridFunction::spec)
      .def_property_readonly("domain",
                             [](const psb::GridFunction& f) {
                               return f.domain == psb::Domain::space ? "space" : "frequency";
                             })
      .def_property_readonly("values", &values_array)
      .def("__len__", [](const psb::GridFunction& f) { return f.size(); });

  py::class_<psb::Symbol>(m, "Symbol")
      .def_readonly("id", &psb::Symbol::id)
      .def_readonly("dimension", &psb::Symbol::dimension)
      .def_readonly("x_independent", &psb::Symbol::x_independent)
      .def("__call__", [](const psb::Symbol& a, double x, double xi) {
        return a.evaluate({x, 0.0}, {xi, 0.0});
      });

  py::class_<psb::ExponentFunction>(m, "ExponentFunction")
      .def_readonly("id", &psb::ExponentFunction::id)
      .def_readonly("p_minus", &psb::ExponentFunction::p_minus)
      .def_readonly("p_plus", &psb::ExponentFunction::p_plus)
      .def("__call__",
           [](const psb::ExponentFunction& p, double x, double y) {
             return p.evaluate({x, y});
           },
           py::arg("x"), py::arg("y") = 0.0);

  py::class_<psb::CertificateReport>(m, "CertificateReport")
      .def_readonly("symbol_id", &psb::CertificateReport::symbol_id)
      .def_readonly("class_name", &psb::CertificateReport::class_name)
      .def_readonly("spec", &psb::CertificateReport::spec_desc)
      .def_readonly("stability_factor", &psb::CertificateReport::stability_factor)
      .def_readonly("ok", &psb::CertificateReport::pass)
      .def("json", &psb::CertificateReport::to_json);

  py::class_<psb::ExperimentConfig>(m, "ExperimentConfig")
      .def_readonly("preset", &psb::ExperimentConfig::preset)
      .def("json", &psb::config_to_json);

  py::class_<psb::ExperimentResult>(m, "ExperimentResult")
      .def_readonly("preset", &psb::ExperimentResult::preset)
      .def_readonly("ok", &psb::ExperimentResult::pass)
      .def_readonly("wall_seconds", &psb::ExperimentResult::wall_seconds)
      .def("json", &psb::ExperimentResult::to_json)
      .def("csv", &psb::ExperimentResult::to_csv);

  m.def("make_grid", &psb::make_grid, py::arg("dimension"), py::arg("half_extent"),
        py::arg("points_per_axis"));
  m.def("grid_function", &function_from_array, py::arg("spec"), py::arg("values"),
        py::arg("domain") = "space");
  m.def(
      "generate_family",
      [](const psb::GridSpec& spec, const std::string& kind, int count,
         unsigned long long seed) {
        std::vector<std::pair<std::string, psb::GridFunction>> out;
        for (psb::FamilyMember& member :
             psb::generate_family(spec, psb::TestFamilySpec{kind_from_name(kind), count,
                                                            seed})) {
          out.emplace_back(std::move(member.id), std::move(member.f));
        }
        return out;
      },
      py::arg("spec"), py::arg("kind"), py::arg("count"), py::arg("seed") = 0);

  m.def("forward_transform", &psb::forward_transform);
  m.def("inverse_transform", &psb::inverse_transform);

  m.def(
      "catalog_symbol",
      [](const std::string& id, const std::map<std::string, double>& params, int dimension) {
        return psb::catalog_symbol(id, psb::SymbolParams(params.begin(), params.end()),
                                   dimension);
      },
      py::arg("id"), py::arg("params") = std::map<std::string, double>{},
      py::arg("dimension") = 1);
  m.def("coordinate_symbol", &psb::coordinate_symbol, py::arg("dimension") = 1);
  m.def("scale_symbol", &psb::scale_symbol, py::arg("symbol"), py::arg("factor"));

  m.def(
      "apply_op",
      [](const psb::Symbol& a, const psb::GridFunction& f, const std::string& path) {
        psb::ApplyOptions opts;
        if (path == "multiplier") {
          opts.path = psb::ApplyPath::multiplier;
        } else if (path == "full") {
          opts.path = psb::ApplyPath::full;
        } else if (path != "auto") {
          throw psb::Error::parameter("apply_op: path must be auto, multiplier, or full");
        }
        return psb::apply_op(a, f, opts);
      },
      py::arg("symbol"), py::arg("f"), py::arg("path") = "auto");

  m.def(
      "certify",
      [](const psb::Symbol& a, const std::string& cls,
         const std::map<std::string, double>& spec, int levels, double threshold) {
        const psb::SamplingPlan plan = plan_from(levels, threshold);
        if (cls == "hormander") {
          psb::HormanderSpec hs;
          hs.m = spec_value(spec, "m", hs.m);
          hs.rho = spec_value(spec, "rho", hs.rho);
          hs.delta = spec_value(spec, "delta", hs.delta);
          hs.K_xi = static_cast<int>(spec_value(spec, "K_xi", hs.K_xi));
          hs.K_x = static_cast<int>(spec_value(spec, "K_x", hs.K_x));
          return psb::certify_hormander(a, hs, plan);
        }
        if (cls == "miyachi") {
          psb::MiyachiSpec ms;
          ms.m = spec_value(spec, "m", ms.m);
          ms.rho = spec_value(spec, "rho", ms.rho);
          ms.delta = spec_value(spec, "delta", ms.delta);
          ms.kappa = spec_value(spec, "kappa", ms.kappa);
          ms.kappa_prime = spec_value(spec, "kappa_prime", ms.kappa_prime);
          return psb::certify_miyachi(a, ms, plan);
        }
        throw psb::Error::parameter("certify: class must be hormander or miyachi");
      },
      py::arg("symbol"), py::arg("cls"), py::arg("spec") = std::map<std::string, double>{},
      py::arg("levels") = 0, py::arg("threshold") = 0.0);
  m.def("miyachi_norm", &psb::miyachi_norm);

  m.def(
      "hardy_littlewood",
      [](const psb::GridFunction& f, int window, bool centered) {
        return psb::hardy_littlewood(f, cube_family(window, centered, true));
      },
      py::arg("f"), py::arg("window"), py::arg("centered") = false);
  m.def(
      "q_maximal",
      [](const psb::GridFunction& f, double q, int window, bool centered) {
        return psb::q_maximal(f, q, cube_family(window, centered, true));
      },
      py::arg("f"), py::arg("q"), py::arg("window"), py::arg("centered") = false);
  m.def(
      "sharp_maximal",
      [](const psb::GridFunction& f, int window, bool centered, bool dyadic) {
        return psb::sharp_maximal(f, cube_family(window, centered, dyadic));
      },
      py::arg("f"), py::arg("window"), py::arg("centered") = false, py::arg("dyadic") = true);

  m.def(
      "exponent_catalog",
      [](const std::string& id, const std::map<std::string, double>& params, int dimension) {
        return psb::exponent_catalog(id, psb::ExponentParams(params.begin(), params.end()),
                                     dimension);
      },
      py::arg("id"), py::arg("params") = std::map<std::string, double>{},
      py::arg("dimension") = 1);
  m.def("conjugate_exponent", &psb::conjugate_exponent);
  m.def("vlp_norm", &psb::vlp_norm, py::arg("f"), py::arg("p"));
  m.def("modular", &psb::modular, py::arg("f"), py::arg("p"), py::arg("lam"));
  m.def("constant_norm", &psb::constant_norm, py::arg("f"), py::arg("p"));
  m.def("pairing_integral", &psb::pairing_integral, py::arg("f"), py::arg("g"));
  m.def("distribution_measure", &psb::distribution_measure, py::arg("f"), py::arg("lam"));

  m.def("preset_config", &psb::preset_config, py::arg("name"));
  m.def("parse_config", &psb::parse_config, py::arg("text"));
  m.def("run_experiment", &psb::run_experiment, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("write_experiment", &psb::write_experiment, py::arg("result"), py::arg("out_dir"));

  m.def("save_psbf", &psb::save_psbf, py::arg("f"), py::arg("path"));
  m.def(
      "load_psbf",
      [](const std::string& path, const std::string& domain) {
        return psb::load_psbf(path, domain == "frequency" ? psb::Domain::frequency
                                                          : psb::Domain::space);
      },
      py::arg("path"), py::arg("domain") = "space");
}
