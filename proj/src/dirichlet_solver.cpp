#include "hslab/dirichlet_solver.hpp"

#include <algorithm>
#include <cmath>

namespace hslab {

namespace {

RVec singular_values(const Mat& m) {
  Eigen::BDCSVD<Mat> svd(m);
  return svd.singularValues();
}

// Orthonormal constants e_alpha / sqrt(N) for each of the m normal components.
Mat constant_columns(int n, int m) {
  Mat e = Mat::Zero(static_cast<Index>(m) * n, m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int a = 0; a < m; ++a) e.block(static_cast<Index>(a) * n, a, n, 1).setConstant(scale);
  return e;
}

}  // namespace

DirichletProblem::DirichletProblem(const CoefficientField& a, const SolverOptions& options)
    : a_(a), options_(options), gs_(split_generator(a, options.sign)) {
  const int n = a.grid().size();
  const int m = a.m();
  const Index rows = static_cast<Index>(m) * n;
  const Mat& v = gs_.split.v_plus;
  traces_.s_matrix = v.topRows(rows);
  traces_.r_matrix = v.bottomRows(rows);
  traces_.s_singular = singular_values(traces_.s_matrix);
  traces_.r_singular = singular_values(traces_.r_matrix);

  verdict_.sigma_floor = options.sigma_floor;
  verdict_.d_plus = v.cols();
  verdict_.expected_d_plus = static_cast<Index>(m) * (n - 1);
  const bool dims = verdict_.d_plus == verdict_.expected_d_plus;
  verdict_.sigma_min_s = dims ? traces_.s_singular.minCoeff() : 0.0;
  verdict_.sigma_min_r = dims ? traces_.r_singular.minCoeff() : 0.0;
  verdict_.dirichlet = dims && verdict_.sigma_min_s >= options.sigma_floor;
  verdict_.regularity = dims && verdict_.sigma_min_r >= options.sigma_floor;

  if (dims) {
    Mat system(rows, rows);
    system << traces_.s_matrix, constant_columns(n, m);
    data_lu_ = std::make_unique<Eigen::PartialPivLU<Mat>>(system);
    if (!(data_lu_->rcond() > 1e-14)) verdict_.dirichlet = false;
  }
}

void DirichletProblem::require_wellposed() const {
  if (!verdict_.dirichlet) {
    throw IllPosed("Dirichlet problem is not well-posed: sigma_min(S) = " +
                   std::to_string(verdict_.sigma_min_s) + ", d_plus = " +
                   std::to_string(verdict_.d_plus) + " (expected " +
                   std::to_string(verdict_.expected_d_plus) + ")");
  }
}

std::pair<Vec, Vec> DirichletProblem::decompose_data(const Vec& u0) const {
  require_wellposed();
  const int n = a_.grid().size();
  const int m = a_.m();
  if (u0.size() != static_cast<Index>(m) * n) throw InvalidArgument("boundary data size mismatch");
  if (!u0.allFinite()) throw InvalidArgument("boundary data must be finite");
  const Vec z = data_lu_->solve(u0);
  const Index dp = verdict_.d_plus;
  return {z.head(dp), z.tail(m) / std::sqrt(static_cast<double>(n))};
}

Vec DirichletProblem::admissible_part(const Vec& u0) const {
  return traces_.s_matrix * decompose_data(u0).first;
}

DirichletSolution DirichletProblem::solve(const Vec& u0, const SemigroupTable& table) const {
  auto [coords, constant] = decompose_data(u0);
  const TGrid& tgrid = table.tgrid();
  const int n = a_.grid().size();
  const int m = a_.m();
  const Index rows = static_cast<Index>(m) * n;
  const SpectralSplit& sp = gs_.split;

  DirichletSolution sol{traces_.s_matrix * coords,
                        std::move(constant),
                        coords,
                        sp.v_plus * coords,
                        {},
                        HalfSpaceField(a_.grid(), tgrid, m),
                        HalfSpaceField(a_.grid(), tgrid, 2 * m)};
  sol.trajectory.resize(tgrid.size());
  for (int j = 0; j < tgrid.size(); ++j) {
    sol.trajectory[j] = table.plus(j) * coords;
    const Vec full = sp.v_plus * sol.trajectory[j];
    sol.u.values[j] = full.head(rows);
    sol.gradient.values[j] = -(sp.v_plus * (sp.t_plus * sol.trajectory[j]));
  }
  const double data_norm = a_.grid().norm(sol.data);
  if (data_norm > 0.0) {
    const double t0 = tgrid.node(0);
    const double t1 = tgrid.node(1);
    const Vec trace =
        sol.u.values[0] - t0 * (sol.u.values[1] - sol.u.values[0]) / (t1 - t0);
    sol.trace_error = a_.grid().norm(trace - sol.data) / data_norm;
    sol.decay = a_.grid().norm(sol.u.values.back()) / data_norm;
    if (!(sol.trace_error <= options_.trace_tolerance)) {
      throw Error("solve_dirichlet: trace recovery error " + std::to_string(sol.trace_error) +
                  " exceeds tolerance " + std::to_string(options_.trace_tolerance));
    }
  }
  return sol;
}

DirichletSolution DirichletProblem::solve(const Vec& u0, const TGrid& tgrid) const {
  require_wellposed();
  return solve(u0, SemigroupTable(gs_.split, tgrid));
}

Mat DirichletProblem::generator_matrix() const {
  require_wellposed();
  const Mat pi = data_lu_->inverse().topRows(verdict_.d_plus);
  return -(traces_.s_matrix * (gs_.split.t_plus * pi));
}

Mat DirichletProblem::semigroup_matrix(const Mat& exp_plus) const {
  require_wellposed();
  const Mat pi = data_lu_->inverse().topRows(verdict_.d_plus);
  return traces_.s_matrix * (exp_plus * pi);
}

WellPosedness check_wellposed(const CoefficientField& a, const SolverOptions& options) {
  return DirichletProblem(a, options).wellposedness();
}

double weakform_residual(const DirichletProblem& problem, const DirichletSolution& solution,
                         const Vec& v, int subsample) {
  const CoefficientField& a = problem.coefficients();
  const TorusGrid& grid = a.grid();
  const TGrid& tgrid = solution.gradient.tgrid;
  const int n = grid.size();
  const int m = a.m();
  const Index rows = static_cast<Index>(m) * n;
  if (v.size() != rows) throw InvalidArgument("weakform_residual: test function size mismatch");

  const Vec dv = apply_dx(grid, m, v);
  // Flux (A grad U) at every node, split into normal and tangential parts.
  std::vector<cplx> tangential(tgrid.size());
  std::vector<cplx> normal(tgrid.size());
  for (int j = 0; j < tgrid.size(); ++j) {
    const Vec flux = apply_pointwise(a.samples(), solution.gradient.values[j]);
    tangential[j] = grid.inner(dv, flux.tail(rows));
    normal[j] = grid.inner(v, flux.head(rows));
  }
  const double scale = grid.norm(solution.data) * grid.norm(v);
  const int last_start = std::max(0, tgrid.size() - 16);
  const int count = std::max(1, std::min(subsample, last_start + 1));
  double worst = 0.0;
  for (int s = 0; s < count; ++s) {
    const int j0 = count == 1 ? 0 : static_cast<int>(std::lround(double(s) * last_start / (count - 1)));
    const auto w = tgrid.tail_dt_weights(j0);
    cplx lhs = 0.0;
    for (std::size_t l = 0; l < w.size(); ++l) lhs += w[l] * tangential[j0 + l];
    const cplx rhs = -normal[j0];
    const double denom = std::abs(lhs) + std::abs(rhs) + scale;
    if (denom > 0.0) worst = std::max(worst, std::abs(lhs - rhs) / denom);
  }
  return worst;
}

GeneratorPackage build_generator(const DirichletProblem& problem, const SemigroupTable& table,
                                 const std::vector<Vec>& samples) {
  const TorusGrid& grid = problem.coefficients().grid();
  const int m = problem.coefficients().m();
  const TGrid& tgrid = table.tgrid();
  GeneratorPackage pkg;
  pkg.generator = problem.generator_matrix();

  const int stride = std::max(1, tgrid.size() / 10);
  std::vector<int> probe;
  for (int j = 0; j < tgrid.size(); j += stride) probe.push_back(j);
  std::vector<Mat> exp_generator(probe.size());
  for (std::size_t p = 0; p < probe.size(); ++p) {
    exp_generator[p] = expm(tgrid.node(probe[p]) * pkg.generator);
  }

  for (const Vec& raw : samples) {
    const Vec u0 = problem.admissible_part(raw);
    const double norm = grid.norm(u0);
    if (norm == 0.0) continue;
    const DirichletSolution sol = problem.solve(u0, table);
    const Index rows = u0.size();
    for (int j = 0; j < tgrid.size(); ++j) {
      const Vec du = sol.gradient.values[j].head(rows);
      pkg.derivative_defect = std::max(
          pkg.derivative_defect, grid.norm(du - pkg.generator * sol.u.values[j]) / norm);
    }
    for (std::size_t p = 0; p < probe.size(); ++p) {
      pkg.semigroup_defect = std::max(
          pkg.semigroup_defect, grid.norm(sol.u.values[probe[p]] - exp_generator[p] * u0) / norm);
    }
    pkg.domain_norms.emplace_back(grid.norm(pkg.generator * u0), grid.norm(apply_dx(grid, m, u0)));
  }
  return pkg;
}

}  // namespace hslab
