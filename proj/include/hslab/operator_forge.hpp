#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <deque>
#include <vector>

#include "hslab/coefficients.hpp"
#include "hslab/torus_grid.hpp"
#include "hslab/types.hpp"

namespace hslab {

/// Dense operator on C^{2m} valued grid functions. Unknown (c, i) sits at
/// row c * N + i with components ordered normal-first.
struct DiscreteOperator {
  Mat entries;
  int points = 0;
  int m = 0;
  std::string label;

  Index dim() const { return entries.rows(); }
};

/// D = [[0, d/dx], [-d/dx, 0]] (x) I_m.
DiscreteOperator assemble_D(const TorusGrid& grid, int m);

/// Block-diagonal (under point-major ordering) multiplication operator.
DiscreteOperator multiplication_operator(const TorusGrid& grid, const std::vector<Mat>& field,
                                         std::string label);

/// x <- M x and x <- x M for a pointwise field M without forming M densely.
void multiply_pointwise_left(const std::vector<Mat>& field, Mat& x);
void multiply_pointwise_right(Mat& x, const std::vector<Mat>& field);
Vec apply_pointwise(const std::vector<Mat>& field, const Vec& v);
std::vector<Mat> pointwise_adjoint(const std::vector<Mat>& field);

/// T_A = upper^{-1} D lower. Cross-checks the factorization
/// upper^{-1} D B upper and throws Error if it disagrees beyond 1e-10.
DiscreteOperator assemble_TA(const CoefficientField& a);
/// Relative Frobenius gap between upper^{-1} D lower and upper^{-1} D B upper.
double factorization_defect(const CoefficientField& a);

/// Theta_t = (t B^* D)(I + (t B^* D)^2)^{-1}, via one LU solve.
DiscreteOperator assemble_theta(const CoefficientField& a, double t);
/// Q_t = Theta_t (upper^{-1})^*.
DiscreteOperator assemble_Q(const CoefficientField& a, double t);

/// Everything needed to apply Theta_t and Q_t for many t against one A.
class ResolventFamily {
 public:
  explicit ResolventFamily(const CoefficientField& a);

  const CoefficientField& coefficients() const { return a_; }
  const AuxiliaryPair& auxiliary() const { return aux_; }
  /// X = B^* D, so that Theta_t = tX (I + t^2 X^2)^{-1}.
  const Mat& generator_factor() const { return x_; }
  Index dim() const { return x_.rows(); }

  struct Solve {
    Mat result;
    double rcond = 0.0;
  };
  /// Theta_t applied to the columns of w.
  Solve apply_theta(double t, const Mat& w) const;
  /// Q_t applied to the columns of w.
  Solve apply_q(double t, const Mat& w) const;

  std::shared_ptr<const Mat> theta(double t) const;
  std::shared_ptr<const Mat> q(double t) const;

 private:
  CoefficientField a_;
  AuxiliaryPair aux_;
  std::vector<Mat> upper_inv_adj_;
  Mat x_;
  Mat x_sq_;
  std::uint64_t hash_;
};

/// Process-wide cache of dense operator families keyed by (content hash, t,
/// label). Concurrent inserts of distinct keys are safe; readers only ever
/// see completed entries. Oldest entries are evicted past the byte budget.
class OperatorCache {
 public:
  struct Key {
    std::uint64_t hash;
    double t;
    int label;
    bool operator==(const Key&) const = default;
  };

  explicit OperatorCache(std::size_t byte_budget);

  std::shared_ptr<const Mat> find(const Key& key) const;
  /// Inserts unless present; returns the stored entry.
  std::shared_ptr<const Mat> insert(const Key& key, std::shared_ptr<const Mat> value);
  void clear();
  std::size_t entries() const;

 private:
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  std::size_t budget_;
  std::size_t bytes_ = 0;
  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, std::shared_ptr<const Mat>, KeyHash> map_;
  std::deque<Key> order_;
};

OperatorCache& operator_cache();

}  // namespace hslab
