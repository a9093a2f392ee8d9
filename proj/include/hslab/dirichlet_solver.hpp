#pragma once

#include <memory>
#include <vector>

#include "hslab/analysis_norms.hpp"
#include "hslab/coefficients.hpp"
#include "hslab/matrix_functions.hpp"
#include "hslab/types.hpp"

namespace hslab {

struct SolverOptions {
  /// Well-posedness threshold on sigma_min of the (orthonormally represented) trace maps.
  double sigma_floor = 1e-6;
  /// Allowed relative distance between the extrapolated trace U(0) and the data.
  double trace_tolerance = 5e-2;
  SignOptions sign;
};

/// S: f -> f_0 and R: f -> f_par on range(chi_+), in the orthonormal v_plus
/// coordinates, with their singular values (descending).
struct TraceMaps {
  Mat s_matrix;
  Mat r_matrix;
  RVec s_singular;
  RVec r_singular;
};

struct WellPosedness {
  double sigma_min_s = 0.0;
  double sigma_min_r = 0.0;
  double sigma_floor = 0.0;
  Index d_plus = 0;
  Index expected_d_plus = 0;
  /// Dirichlet problem for A: S invertible onto its codimension-m data space.
  bool dirichlet = false;
  /// R invertible, the criterion for the Dirichlet problem for A^*.
  bool regularity = false;
};

struct DirichletSolution {
  /// Boundary datum actually solved for (the admissible part of the input).
  Vec data;
  /// Constant (per component) removed from the input to make it admissible.
  Vec constant_part;
  /// f = S^{-1} data in v_plus coordinates and in the ambient space.
  Vec coordinates;
  Vec f;
  /// e^{-t_j T_+} coordinates for every t-node.
  std::vector<Vec> trajectory;
  /// U = (e^{-tT} f)_0 and grad_{t,x} U = d/dt e^{-tT} f.
  HalfSpaceField u;
  HalfSpaceField gradient;
  /// ||U(0) - data|| / ||data|| with U(0) linearly extrapolated from the two
  /// smallest t-nodes.
  double trace_error = 0.0;
  /// ||U(t_max)|| / ||data||.
  double decay = 0.0;
};

/// Everything derived from one coefficient field: T_A, its split, the trace
/// maps and the factorized admissible-data system [S | constants].
class DirichletProblem {
 public:
  explicit DirichletProblem(const CoefficientField& a, const SolverOptions& options = {});

  const CoefficientField& coefficients() const { return a_; }
  const DiscreteOperator& generator() const { return gs_.generator; }
  const SpectralSplit& split() const { return gs_.split; }
  const TraceMaps& traces() const { return traces_; }
  const WellPosedness& wellposedness() const { return verdict_; }
  const SolverOptions& options() const { return options_; }

  /// Throws IllPosed unless S is invertible.
  void require_wellposed() const;

  /// Splits u0 = S f + c with c constant; returns (coordinates of f, c).
  std::pair<Vec, Vec> decompose_data(const Vec& u0) const;
  /// S f, the part of u0 reachable by decaying solutions.
  Vec admissible_part(const Vec& u0) const;

  DirichletSolution solve(const Vec& u0, const SemigroupTable& table) const;
  DirichletSolution solve(const Vec& u0, const TGrid& tgrid) const;

  /// Matrix of the boundary semigroup generator -S T_+ S^{-1} on C^{mN}
  /// (zero on the constants).
  Mat generator_matrix() const;
  /// P_t = S e^{-tT_+} S^{-1} given e^{-tT_+}.
  Mat semigroup_matrix(const Mat& exp_plus) const;

 private:
  CoefficientField a_;
  SolverOptions options_;
  GeneratorSplit gs_;
  TraceMaps traces_;
  WellPosedness verdict_;
  std::unique_ptr<Eigen::PartialPivLU<Mat>> data_lu_;
};

/// Builds the split and trace maps for A and returns the verdict.
WellPosedness check_wellposed(const CoefficientField& a, const SolverOptions& options = {});

/// max over a t-subsample of |LHS - RHS| / (|LHS| + |RHS| + ||u0|| ||v||), with
/// LHS = int_t^{t_max} ((A grad U)_par, d_x v) ds and RHS = -((A grad U_t)_0, v).
double weakform_residual(const DirichletProblem& problem, const DirichletSolution& solution,
                         const Vec& v, int subsample = 8);

/// The boundary semigroup's generator with the checks tying it to the solver.
struct GeneratorPackage {
  Mat generator;
  /// max_j ||dU/dt(t_j) - A U(t_j)|| / ||u0|| over the samples.
  double derivative_defect = 0.0;
  /// max_j ||P_{t_j} u0 - exp(t_j A) u0|| / ||u0|| over the samples.
  double semigroup_defect = 0.0;
  /// (||A u0||, ||d_x u0||) per sample.
  std::vector<std::pair<double, double>> domain_norms;
};

GeneratorPackage build_generator(const DirichletProblem& problem, const SemigroupTable& table,
                                 const std::vector<Vec>& samples);

}  // namespace hslab
