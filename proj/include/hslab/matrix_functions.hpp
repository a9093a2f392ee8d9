#pragma once

#include <vector>

#include "hslab/coefficients.hpp"
#include "hslab/operator_forge.hpp"
#include "hslab/torus_grid.hpp"
#include "hslab/types.hpp"

namespace hslab {

struct SignOptions {
  double tolerance = 1e-12;
  int max_iterations = 60;
  /// Relative floor on the spectral gap, as a multiple of ||T||_F.
  double gap_floor = 1e-8;
};

struct SignResult {
  Mat sign;
  int iterations = 0;
  double last_step = 0.0;
};

/// Newton iteration S <- (mu S + (mu S)^{-1}) / 2 with determinantal scaling
/// mu = |det S|^{-1/d}, switched off once the iteration is in its quadratic
/// regime. Throws NoGap when the iterate becomes singular or the iteration
/// wanders (eigenvalues on or near iR), NotConverged otherwise.
SignResult matrix_sign(const Mat& t, const SignOptions& options = {});

/// e^A by scaling and squaring with the degree-13 Pade approximant.
Mat expm(const Mat& a);

/// The Hardy-space decomposition of an operator restricted to an invariant
/// subspace on which it is invertible.
struct SpectralSplit {
  /// Orthonormal basis (d x d') of the invariant subspace.
  Mat basis;
  /// basis^* T basis.
  Mat restricted;
  Mat sign;
  Mat p_plus;
  Mat p_minus;
  /// Orthonormal bases of range(chi_+) / range(chi_-), in subspace coordinates.
  Mat v_plus_local;
  Mat v_minus_local;
  /// The same bases in the ambient space: basis * v_*_local.
  Mat v_plus;
  Mat v_minus;
  /// T restricted to range(chi_+) / range(chi_-), in the v_plus / v_minus bases.
  Mat t_plus;
  Mat t_minus;
  /// min(Re lambda(t_plus), -Re lambda(t_minus)).
  double spectral_gap = 0.0;
  /// ||T basis - basis restricted|| / ||T||.
  double invariance_defect = 0.0;
  int iterations = 0;

  Index d_plus() const { return v_plus.cols(); }
  Index d_minus() const { return v_minus.cols(); }
};

/// Splits T on span(basis). Pass the identity for a full-space split.
SpectralSplit split_on_subspace(const Mat& t, const Mat& basis, const SignOptions& options = {});

/// Orthonormal basis of range(T_A) = upper^{-1} (zero-mean fields).
Mat generator_range_basis(const CoefficientField& a);

/// T_A and its split on range(T_A).
struct GeneratorSplit {
  DiscreteOperator generator;
  SpectralSplit split;
};
GeneratorSplit split_generator(const CoefficientField& a, const SignOptions& options = {});

/// e^{-t_j T_+} (and optionally e^{+t_j T_-}) for every node of a t-grid.
class SemigroupTable {
 public:
  SemigroupTable(const SpectralSplit& split, const TGrid& tgrid, bool with_minus = false);

  const TGrid& tgrid() const { return tgrid_; }
  const Mat& plus(int j) const { return plus_[j]; }
  const Mat& minus(int j) const;
  bool has_minus() const { return !minus_.empty(); }

 private:
  TGrid tgrid_;
  std::vector<Mat> plus_;
  std::vector<Mat> minus_;
};

/// Coordinates of f in the v_plus basis after checking f in range(chi_+).
/// Throws InvalidArgument if ||V V^* f - f|| > tol ||f||.
Vec hardy_coordinates(const SpectralSplit& split, const Vec& f, double tol = 1e-8);

/// e^{-tT} f for f in range(chi_+).
Vec semigroup_apply(const SpectralSplit& split, double t, const Vec& f);

struct DecayReport {
  /// max_j ||e^{-t_j T} f|| e^{t_j gap (1 - slack)} / ||f||.
  double constant = 0.0;
  double slack = 0.1;
};
DecayReport semigroup_decay(const SpectralSplit& split, const SemigroupTable& table,
                            const Vec& f, double slack = 0.1);

/// Admissible functions holomorphic off iR with z psi and psi / z bounded.
enum class Psi {
  /// z e^{-sgn(Re z) z}
  sector_exp,
  /// z (1 + z^2)^{-1}
  resolvent,
  /// z (1 + z^2) e^{-sgn(Re z) z}
  bilinear,
};

const char* to_string(Psi psi);
cplx psi_scalar(Psi psi, cplx z);

/// psi(tT) f for f in span(basis), evaluated separately on range(chi_+) and
/// range(chi_-) through the restricted blocks.
Vec psi_apply(const SpectralSplit& split, Psi psi, double t, const Vec& f);

/// psi(t_j T) f for every node of the table's t-grid.
std::vector<Vec> psi_trajectory(const SpectralSplit& split, const SemigroupTable& table, Psi psi,
                                const Vec& f);

/// |||psi(tT) f||| / ||f|| with the truncated dt/t quadrature; 0 for f = 0.
double quadratic_estimate(const SpectralSplit& split, const SemigroupTable& table, Psi psi,
                          const Vec& f);

}  // namespace hslab
