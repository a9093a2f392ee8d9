#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hslab/torus_grid.hpp"
#include "hslab/types.hpp"

namespace hslab {

enum class CoefficientKind { identity, constant, hermitian, block, general };

std::string to_string(CoefficientKind kind);
CoefficientKind coefficient_kind_from_string(const std::string& name);

/// Grid samples of the t-independent (1+n)m x (1+n)m coefficient matrix A(x),
/// n = 1. Rows/columns are ordered normal-first: indices [0, m) are the
/// normal block, [m, 2m) the tangential block.
class CoefficientField {
 public:
  CoefficientField(TorusGrid grid, int m, CoefficientKind kind, std::vector<Mat> samples);

  const TorusGrid& grid() const { return grid_; }
  int m() const { return m_; }
  int dim() const { return 2 * m_; }
  CoefficientKind kind() const { return kind_; }
  const Mat& sample(int i) const { return samples_[i]; }
  const std::vector<Mat>& samples() const { return samples_; }

  Mat block_nn(int i) const { return samples_[i].topLeftCorner(m_, m_); }
  Mat block_nt(int i) const { return samples_[i].topRightCorner(m_, m_); }
  Mat block_tn(int i) const { return samples_[i].bottomLeftCorner(m_, m_); }
  Mat block_tt(int i) const { return samples_[i].bottomRightCorner(m_, m_); }

  /// Lambda = max_i ||A(x_i)||_op.
  double sup_norm() const;
  /// Pointwise adjoint A(x)^*.
  CoefficientField adjoint() const;

  bool is_hermitian(double tol = 1e-14) const;
  bool is_block(double tol = 0.0) const;
  bool is_constant(double tol = 1e-14) const;

  std::uint64_t content_hash() const;

 private:
  TorusGrid grid_;
  int m_;
  CoefficientKind kind_;
  std::vector<Mat> samples_;
};

/// kappa = min_i lambda_min((A(x_i) + A(x_i)^*) / 2). Throws NotAccretive
/// when kappa <= 1e-10.
double estimate_kappa(const CoefficientField& a);

struct ClassParams {
  double kappa_target = 0.5;
  /// Highest Fourier mode of the x-dependence.
  int roughness = 3;
  /// Entry scale of the random trigonometric coefficients.
  double amplitude = 0.5;
};

/// Random member of one of the well-posed classes (identity, constant,
/// Hermitian, block). Fourier data depend only on (kind, m, seed, params),
/// so the same seed produces the same function on every dyadic grid with
/// N <= 1024.
CoefficientField make_class(CoefficientKind kind, const TorusGrid& grid, int m,
                            std::uint64_t seed, const ClassParams& params = {});

/// Band-limited perturbation direction E with max_x ||E(x)||_op = 1.
/// Non-Hermitian with nonzero normal/tangential coupling unless `hermitian`.
CoefficientField make_direction(const TorusGrid& grid, int m, std::uint64_t seed,
                                int roughness, bool hermitian);

/// A + eps E (kind becomes general unless eps == 0).
CoefficientField perturb(const CoefficientField& a, const CoefficientField& e, double eps);

/// Trigonometric interpolation of every entry onto another dyadic grid.
CoefficientField resample(const CoefficientField& a, const TorusGrid& target);

/// Pointwise auxiliary matrices: upper = [[A00, A0t], [0, I]],
/// lower = [[I, 0], [At0, Att]], b = lower * upper^{-1}.
struct AuxiliaryPair {
  std::vector<Mat> upper;
  std::vector<Mat> upper_inv;
  std::vector<Mat> lower;
  std::vector<Mat> b;
  double min_sigma_upper = 0.0;
};

/// Throws SingularMatrix if some upper(x_i) is numerically singular.
AuxiliaryPair auxiliary_pair(const CoefficientField& a);

/// {m, N, L, kind, entries}; entries[i] holds A(x_i) row-major as [re, im]
/// pairs. Doubles are written with round-trip precision.
nlohmann::json to_json(const CoefficientField& a);
CoefficientField coefficient_from_json(const nlohmann::json& doc);

}  // namespace hslab
