#include "hslab/torus_grid.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

namespace hslab {

namespace {

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

TorusGrid::TorusGrid(int points, double length) : n_(points), length_(length), depth_(0) {
  if (!is_power_of_two(points) || points < 8) {
    throw InvalidArgument("TorusGrid: N must be a power of two >= 8, got " +
                          std::to_string(points));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw InvalidArgument("TorusGrid: period must be positive");
  }
  while ((1 << depth_) < n_) ++depth_;
}

Vec TorusGrid::forward(const Vec& f) const {
  Vec out(n_);
  fft_engine().fwd(out, f);
  return out / static_cast<double>(n_);
}

Vec TorusGrid::inverse(const Vec& coeffs) const {
  Vec out(n_);
  fft_engine().inv(out, coeffs);
  return out * static_cast<double>(n_);
}

double TorusGrid::norm(const Vec& f) const { return std::sqrt(norm_sq(f)); }

Vec TorusGrid::apply_multiplier(const Vec& f, int components,
                                const std::function<cplx(double)>& symbol) const {
  if (f.size() != static_cast<Index>(components) * n_) {
    throw InvalidArgument("apply_multiplier: size mismatch");
  }
  std::vector<cplx> sym(n_);
  for (int s = 0; s < n_; ++s) sym[s] = symbol(wavenumber(s));
  Vec out(f.size());
  for (int c = 0; c < components; ++c) {
    Vec block = forward(f.segment(static_cast<Index>(c) * n_, n_));
    for (int s = 0; s < n_; ++s) block(s) *= sym[s];
    out.segment(static_cast<Index>(c) * n_, n_) = inverse(block);
  }
  return out;
}

Vec TorusGrid::component_means(const Vec& f, int components) const {
  Vec means(components);
  for (int c = 0; c < components; ++c) {
    means(c) = f.segment(static_cast<Index>(c) * n_, n_).mean();
  }
  return means;
}

double TorusGrid::periodic_distance(double a, double b) const {
  double d = std::fmod(std::abs(a - b), length_);
  return std::min(d, length_ - d);
}

double TorusGrid::cell_overlap(int i, double center, double radius) const {
  const double h = dx();
  if (2.0 * radius >= length_) return h;
  double delta = std::remainder(point(i) - center, length_);
  double total = 0.0;
  for (double shift : {-length_, 0.0, length_}) {
    const double lo = std::max(delta + shift - 0.5 * h, -radius);
    const double hi = std::min(delta + shift + 0.5 * h, radius);
    if (hi > lo) total += hi - lo;
  }
  return std::min(total, h);
}

Vec TorusGrid::plane_wave(int k) const {
  Vec v(n_);
  const double kw = 2.0 * kPi * k / length_;
  for (int i = 0; i < n_; ++i) v(i) = std::polar(1.0, kw * point(i));
  return v;
}

Mat spectral_derivative(const TorusGrid& grid) {
  const int n = grid.size();
  Mat d(n, n);
  Vec unit = Vec::Zero(n);
  for (int l = 0; l < n; ++l) {
    unit.setZero();
    unit(l) = 1.0;
    d.col(l) = grid.apply_multiplier(unit, 1, [](double k) { return cplx(0.0, k); });
  }
  return d;
}

TGrid::TGrid(double t_min, double t_max, int samples) {
  if (!(t_min > 0.0) || !(t_max > t_min) || samples < 2) {
    throw InvalidArgument("TGrid: need 0 < t_min < t_max and at least two samples");
  }
  step_ = std::log(t_max / t_min) / (samples - 1);
  nodes_.resize(samples);
  weights_.assign(samples, step_);
  for (int j = 0; j < samples; ++j) nodes_[j] = t_min * std::exp(step_ * j);
  nodes_.back() = t_max;
  weights_.front() *= 0.5;
  weights_.back() *= 0.5;
}

TGrid TGrid::defaults(const TorusGrid& grid, int samples) {
  return TGrid(grid.length() / (8.0 * grid.size()), 16.0 * grid.length(), samples);
}

double TGrid::integrate(std::span<const double> values) const {
  if (values.size() != nodes_.size()) {
    throw InvalidArgument("tgrid_integral: expected " + std::to_string(nodes_.size()) +
                          " values, got " + std::to_string(values.size()));
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) sum += weights_[j] * values[j];
  return sum;
}

std::vector<double> TGrid::tail_weights(int first) const {
  const int n = size() - first;
  if (first < 0 || n < 1) throw InvalidArgument("tail_weights: bad start index");
  std::vector<double> w(n, step_);
  if (n == 1) {
    w[0] = 0.0;
  } else if (n < 8) {
    w.front() *= 0.5;
    w.back() *= 0.5;
  } else {
    static constexpr double kEnd[4] = {17.0 / 48, 59.0 / 48, 43.0 / 48, 49.0 / 48};
    for (int i = 0; i < 4; ++i) {
      w[i] = step_ * kEnd[i];
      w[n - 1 - i] = step_ * kEnd[i];
    }
  }
  return w;
}

std::vector<double> TGrid::tail_dt_weights(int first) const {
  auto w = tail_weights(first);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] *= nodes_[first + i];
  return w;
}

double TGrid::integrate_below(std::span<const double> values, double upper) const {
  if (values.size() != nodes_.size()) throw InvalidArgument("integrate_below: size mismatch");
  if (upper <= t_min()) return 0.0;
  const double u_end = std::log(std::min(upper, t_max()) / t_min());
  double sum = 0.0;
  for (int j = 0; j + 1 < size(); ++j) {
    const double u0 = j * step_;
    if (u0 >= u_end) break;
    const double a = std::min(step_, u_end - u0);
    sum += a * values[j] + a * a / (2.0 * step_) * (values[j + 1] - values[j]);
  }
  return sum;
}

std::vector<std::pair<int, double>> TGrid::interval_dt_weights(double lo, double hi) const {
  std::vector<std::pair<int, double>> out;
  lo = std::max(lo, t_min());
  hi = std::min(hi, t_max());
  if (!(hi > lo)) return out;
  for (int j = 0; j + 1 < size(); ++j) {
    const double t0 = nodes_[j];
    const double t1 = nodes_[j + 1];
    const double a = std::max(lo, t0);
    const double b = std::min(hi, t1);
    if (!(b > a)) continue;
    const double len = t1 - t0;
    const double w0 = ((t1 - a) * (t1 - a) - (t1 - b) * (t1 - b)) / (2.0 * len);
    const double w1 = ((b - t0) * (b - t0) - (a - t0) * (a - t0)) / (2.0 * len);
    if (!out.empty() && out.back().first == j) {
      out.back().second += w0;
    } else {
      out.emplace_back(j, w0);
    }
    out.emplace_back(j + 1, w1);
  }
  return out;
}

DyadicTree::DyadicTree(const TorusGrid& grid)
    : n_(grid.size()), depth_(grid.depth()), length_(grid.length()) {}

int DyadicTree::level_for_scale(double t) const {
  if (!(t > 0.0) || t > length_) {
    throw InvalidArgument("dyadic averaging needs 0 < t <= L");
  }
  int level = 0;
  while (level < depth_ && side(level) / 2.0 >= t) ++level;
  return level;
}

}  // namespace hslab
