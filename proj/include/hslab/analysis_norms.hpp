#pragma once

#include <vector>

#include "hslab/operator_forge.hpp"
#include "hslab/torus_grid.hpp"
#include "hslab/types.hpp"

namespace hslab {

/// Samples F(t_j, x_i) in C^components, one component-major grid vector per t-node.
struct HalfSpaceField {
  HalfSpaceField(TorusGrid grid, TGrid tgrid, int components);

  TorusGrid grid;
  TGrid tgrid;
  int components;
  std::vector<Vec> values;

  /// Euclidean magnitude |F(t_j, x_i)| as an M x N array.
  Eigen::MatrixXd magnitudes() const;
  /// Copy with values[j] multiplied by t_j.
  HalfSpaceField scaled_by_t() const;
  /// Throws InvalidArgument on shape mismatch or non-finite entries.
  void validate() const;
};

/// Q(t, x) = [(1 - c0) t, (1 + c0) t] x B(x; c1 t).
struct WhitneyBox {
  double c0 = 0.5;
  double c1 = 1.0;
};

/// |||F||| = (sum_j w_j ||F_j||_2^2)^{1/2}.
double square_norm(const HalfSpaceField& f);

/// sup_t t^{-1} ||F||_{L2(Q(t, x_i))} over centers t_j whose box lies inside
/// the t-grid. The box integral integrates the piecewise-linear interpolant
/// in t exactly over the box, and weighs each spatial cell by its overlap
/// with the ball.
RVec ntm_modified(const HalfSpaceField& f, const WhitneyBox& box = {});

/// sup_{|y - x_i| < c t} |F(t, y)| over lattice samples. With
/// `l1_average`, |F(t, .)| is replaced by its average over B(x_i; c t).
RVec ntm_standard(const HalfSpaceField& f, double aperture = 1.0, bool l1_average = false);

/// L2 norm of a real grid function.
double grid_norm(const TorusGrid& grid, const RVec& values);

/// P_t: Fourier multiplier (1 + t^2 k^2)^{-1} on each component.
Vec apply_Pt(const TorusGrid& grid, int components, const Vec& v, double t);
/// t(-Delta)^{1/2}: multiplier t|k|.
Vec apply_scaled_abs_derivative(const TorusGrid& grid, int components, const Vec& v, double t);
/// (I - P_t) / (t(-Delta)^{1/2}): multiplier t|k| / (1 + t^2 k^2), zero at k = 0.
/// Throws InvalidArgument if a component mean exceeds 1e-12 max(1, ||v||).
Vec smoothing_quotient(const TorusGrid& grid, int components, const Vec& v, double t);
/// d/dx on each component.
Vec apply_dx(const TorusGrid& grid, int components, const Vec& v);
/// Average over the dyadic interval of side l with l/2 < t <= l. Throws for t > L.
Vec apply_St(const TorusGrid& grid, int components, const Vec& v, double t);

/// gamma_t(x_i) w = (Q_t w)(x_i) for constant w, as one 2m x 2m matrix per point.
std::vector<Mat> gamma(const ResolventFamily& family, double t);
/// |gamma_t(x_i)|^2 with the operator norm on C^{2m}.
RVec gamma_norm_sq(const std::vector<Mat>& g);

struct DecompositionTerms {
  /// Q_t v.
  Vec principal;
  /// Q_t ((I - P_t) / (t(-Delta)^{1/2})) t(-Delta)^{1/2} v.
  Vec smooth;
  /// (Q_t P_t - gamma_t S_t P_t) v.
  Vec off_diagonal;
  /// gamma_t S_t P_t v.
  Vec paraproduct;
  /// ||smooth + off_diagonal + paraproduct - principal|| / ||principal||.
  double identity_defect = 0.0;
};

/// The three-term principal part decomposition of Q_t v for each column of vs.
std::vector<DecompositionTerms> decompose(const ResolventFamily& family, double t, const Mat& vs);

struct CarlesonBox {
  int level = 0;
  int index = 0;
  double side = 0.0;
  double mass = 0.0;
};

struct CarlesonBoxReport {
  std::vector<CarlesonBox> boxes;
  double carleson_norm = 0.0;
  CarlesonBox argmax;
};

/// density[j](i) = |gamma_{t_j}(x_i)|^2. Box mass over [0, l(Q)] x Q uses the
/// dt/t measure truncated to [t_min, min(l(Q), t_max)].
CarlesonBoxReport carleson_norm(const TorusGrid& grid, const TGrid& tgrid,
                                const std::vector<RVec>& density);

}  // namespace hslab
