#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hslab/types.hpp"

namespace hslab {

/// Uniform periodic grid x_i = i L / N with N = 2^J, N >= 8.
///
/// Grid functions with several components are stored component-major:
/// entry (c, i) lives at c * N + i. L2 inner products carry the cell
/// weight dx = L / N, so ||e^{ikx}||^2 = L.
class TorusGrid {
 public:
  explicit TorusGrid(int points, double length = 2.0 * kPi);

  int size() const { return n_; }
  double length() const { return length_; }
  double dx() const { return length_ / n_; }
  int depth() const { return depth_; }
  double point(int i) const { return i * dx(); }

  /// Integer mode number of DFT slot `slot`, in {-N/2+1, ..., N/2}.
  int mode(int slot) const { return slot <= n_ / 2 ? slot : slot - n_; }
  /// Physical wavenumber 2*pi*mode/L of DFT slot `slot`.
  double wavenumber(int slot) const { return 2.0 * kPi * mode(slot) / length_; }
  /// DFT slot holding integer mode `k` (k taken modulo N).
  int slot_of_mode(int k) const { return ((k % n_) + n_) % n_; }

  /// Coefficients c_k with f(x_j) = sum_k c_k e^{i k x_j}.
  Vec forward(const Vec& f) const;
  Vec inverse(const Vec& coeffs) const;

  double norm_sq(const Vec& f) const { return dx() * f.squaredNorm(); }
  double norm(const Vec& f) const;
  cplx inner(const Vec& f, const Vec& g) const { return dx() * f.dot(g); }
  /// ||f||^2 evaluated from DFT coefficients (Parseval).
  double coefficient_norm_sq(const Vec& coeffs) const { return length_ * coeffs.squaredNorm(); }

  /// Applies the Fourier multiplier symbol(k) to each of `components` blocks.
  Vec apply_multiplier(const Vec& f, int components,
                       const std::function<cplx(double)>& symbol) const;
  /// Mean of each component block.
  Vec component_means(const Vec& f, int components) const;

  /// Distance on the circle of circumference L.
  double periodic_distance(double a, double b) const;
  /// Length of [x_i - dx/2, x_i + dx/2] inside the open ball B(center; radius),
  /// measured on the circle.
  double cell_overlap(int i, double center, double radius) const;

  /// e^{i k x} sampled on the grid for integer mode k.
  Vec plane_wave(int k) const;

 private:
  int n_;
  double length_;
  int depth_;
};

/// Dense N x N matrix of d/dx, exact on band-limited grid functions.
Mat spectral_derivative(const TorusGrid& grid);

/// Logarithmic grid t_j = t_min rho^j on [t_min, t_max] with trapezoid
/// weights (in log t) for the measure dt/t.
class TGrid {
 public:
  TGrid(double t_min, double t_max, int samples);
  /// t_min = L/(8N), t_max = 16 L.
  static TGrid defaults(const TorusGrid& grid, int samples);

  int size() const { return static_cast<int>(nodes_.size()); }
  double t_min() const { return nodes_.front(); }
  double t_max() const { return nodes_.back(); }
  double node(int j) const { return nodes_[j]; }
  double log_step() const { return step_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  /// sum_j w_j values_j, i.e. the truncated integral of values dt/t.
  double integrate(std::span<const double> values) const;

  /// Weights for the tail integral over [t_{first}, t_max] of g(t) dt/t,
  /// trapezoid with fourth-order Gregory end corrections when at least
  /// eight nodes are available. Returned vector has size() - first entries.
  std::vector<double> tail_weights(int first) const;
  /// Same as tail_weights(first), multiplied by t_j: integrates g(t) dt.
  std::vector<double> tail_dt_weights(int first) const;

  /// Integral of the piecewise-linear (in log t) interpolant of values dt/t
  /// over [t_min, min(upper, t_max)].
  double integrate_below(std::span<const double> values, double upper) const;

  /// Integral of the piecewise-linear (in t) interpolant of values dt over
  /// [lo, hi] clipped to [t_min, t_max]; the per-node weights are returned.
  std::vector<std::pair<int, double>> interval_dt_weights(double lo, double hi) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  double step_;
};

/// Dyadic intervals of the torus: level s has 2^s intervals of side L 2^{-s},
/// each holding N / 2^s consecutive grid points.
class DyadicTree {
 public:
  explicit DyadicTree(const TorusGrid& grid);

  int levels() const { return depth_ + 1; }
  int intervals(int level) const { return 1 << level; }
  double side(int level) const { return length_ / static_cast<double>(1 << level); }
  int points_per_interval(int level) const { return n_ >> level; }
  int interval_of(int level, int point) const { return point >> (depth_ - level); }
  int first_point(int level, int interval) const { return interval * points_per_interval(level); }
  /// Level s with side(s)/2 < t <= side(s); clamped to the finest level.
  /// Throws InvalidArgument when t > L or t <= 0.
  int level_for_scale(double t) const;

 private:
  int n_;
  int depth_;
  double length_;
};

}  // namespace hslab
