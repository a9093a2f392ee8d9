#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "hslab/dirichlet_solver.hpp"
#include "hslab/verifier.hpp"

namespace py = pybind11;
using namespace hslab;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

// (N, 2m, 2m) complex array -> CoefficientField; N must be a power of two.
CoefficientField field_from_array(const CArray& samples, double length) {
  if (samples.ndim() != 3 || samples.shape(1) != samples.shape(2) || samples.shape(1) % 2)
    throw InvalidArgument("coefficient samples must have shape (N, 2m, 2m)");
  const int n = static_cast<int>(samples.shape(0));
  const int dim = static_cast<int>(samples.shape(1));
  TorusGrid grid(n, length);
  auto view = samples.unchecked<3>();
  std::vector<Mat> mats(n, Mat(dim, dim));
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) mats[i](r, c) = view(i, r, c);
  return CoefficientField(grid, dim / 2, CoefficientKind::general, std::move(mats));
}

CArray field_to_array(const CoefficientField& a) {
  const int n = a.grid().size();
  const int dim = a.dim();
  CArray out({n, dim, dim});
  auto view = out.mutable_unchecked<3>();
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) view(i, r, c) = a.sample(i)(r, c);
  return out;
}

// values[j] component-major -> (M, N, components).
CArray field_values(const HalfSpaceField& f) {
  const int n = f.grid.size();
  CArray out({f.tgrid.size(), n, f.components});
  auto view = out.mutable_unchecked<3>();
  for (int j = 0; j < f.tgrid.size(); ++j)
    for (int c = 0; c < f.components; ++c)
      for (int i = 0; i < n; ++i) view(j, i, c) = f.values[j](c * n + i);
  return out;
}

py::dict wellposedness_dict(const WellPosedness& w) {
  py::dict d;
  d["sigma_min_S"] = w.sigma_min_s;
  d["sigma_min_R"] = w.sigma_min_r;
  d["sigma_floor"] = w.sigma_floor;
  d["d_plus"] = w.d_plus;
  d["expected_d_plus"] = w.expected_d_plus;
  d["dirichlet"] = w.dirichlet;
  d["regularity"] = w.regularity;
  return d;
}

SolverOptions solver_options(double sigma_floor) {
  SolverOptions o;
  o.sigma_floor = sigma_floor;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dirichlet problems for t-independent elliptic systems on a periodic half-space";

  py::register_exception<NotAccretive>(m, "NotAccretive");
  py::register_exception<NoGap>(m, "NoGap");
  py::register_exception<IllPosed>(m, "IllPosed");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  m.def(
      "make_coefficient",
      [](const std::string& kind, int points, int comps, std::uint64_t seed, double length) {
        return field_to_array(make_class(coefficient_kind_from_string(kind),
                                         TorusGrid(points, length), comps, seed));
      },
      py::arg("kind"), py::arg("N") = 32, py::arg("m") = 1, py::arg("seed") = 1,
      py::arg("L") = 2.0 * kPi, "Samples (N, 2m, 2m) of a coefficient from a well-posed class.");

  m.def(
      "estimate_kappa",
      [](const CArray& samples, double length) {
        return estimate_kappa(field_from_array(samples, length));
      },
      py::arg("samples"), py::arg("L") = 2.0 * kPi);

  m.def(
      "check_wellposed",
      [](const CArray& samples, double length, double sigma_floor) {
        return wellposedness_dict(
            check_wellposed(field_from_array(samples, length), solver_options(sigma_floor)));
      },
      py::arg("samples"), py::arg("L") = 2.0 * kPi, py::arg("sigma_floor") = 1e-6);

  m.def(
      "assemble_D",
      [](int points, int comps, double length) {
        return assemble_D(TorusGrid(points, length), comps).entries;
      },
      py::arg("N"), py::arg("m") = 1, py::arg("L") = 2.0 * kPi);

  m.def(
      "assemble_TA",
      [](const CArray& samples, double length) {
        return assemble_TA(field_from_array(samples, length)).entries;
      },
      py::arg("samples"), py::arg("L") = 2.0 * kPi);

  m.def(
      "matrix_sign",
      [](const Mat& t) {
        SignResult r = matrix_sign(t);
        return py::make_tuple(r.sign, r.iterations);
      },
      py::arg("T"), "Newton sign iteration; returns (sign, iterations).");

  m.def("expm", &expm, py::arg("A"));

  m.def(
      "solve_dirichlet",
      [](const CArray& samples, const Vec& u0, double t_min, double t_max, int nodes,
         double length) {
        CoefficientField a = field_from_array(samples, length);
        DirichletProblem problem(a);
        TGrid tg = t_min > 0 && t_max > 0 ? TGrid(t_min, t_max, nodes)
                                          : TGrid::defaults(a.grid(), nodes);
        std::optional<DirichletSolution> solved;
        {
          py::gil_scoped_release release;
          solved = problem.solve(u0, tg);
        }
        const DirichletSolution& sol = *solved;
        py::dict d;
        d["t"] = py::cast(tg.nodes());
        d["U"] = field_values(sol.u);
        d["gradU"] = field_values(sol.gradient);
        d["data"] = sol.data;
        d["constant_part"] = sol.constant_part;
        d["trace_error"] = sol.trace_error;
        d["decay"] = sol.decay;
        return d;
      },
      py::arg("samples"), py::arg("u0"), py::arg("t_min") = 0.0, py::arg("t_max") = 0.0,
      py::arg("M") = 200, py::arg("L") = 2.0 * kPi,
      "Solves for boundary data u0 (length mN, component-major).");

  m.def("experiment_ids", &experiment_ids);

  m.def(
      "verify",
      [](const std::string& id, const std::string& coeff, std::uint64_t seed,
         const std::string& config_json) {
        RunConfig cfg = config_json.empty() ? RunConfig{}
                                            : run_config_from_json(nlohmann::json::parse(config_json));
        cfg.validate();
        Verifier v(cfg, CoefficientSource::parse(coeff, seed, cfg.m, cfg.class_params));
        VerdictReport r;
        {
          py::gil_scoped_release release;
          r = v.run(id);
        }
        return r.to_json().dump();
      },
      py::arg("id"), py::arg("coeff") = "identity", py::arg("seed") = 1,
      py::arg("config_json") = "", "Runs one experiment; returns the report as a JSON string.");
}
