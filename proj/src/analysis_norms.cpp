#include "hslab/analysis_norms.hpp"

#include <algorithm>
#include <cmath>

#include "hslab/parallel.hpp"

namespace hslab {

HalfSpaceField::HalfSpaceField(TorusGrid grid_, TGrid tgrid_, int components_)
    : grid(grid_), tgrid(std::move(tgrid_)), components(components_) {
  values.assign(tgrid.size(), Vec::Zero(static_cast<Index>(components) * grid.size()));
}

Eigen::MatrixXd HalfSpaceField::magnitudes() const {
  const int n = grid.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(tgrid.size(), n);
  for (int j = 0; j < tgrid.size(); ++j) {
    for (int c = 0; c < components; ++c) {
      out.row(j) += values[j].segment(static_cast<Index>(c) * n, n).cwiseAbs2().transpose();
    }
  }
  return out.cwiseSqrt();
}

HalfSpaceField HalfSpaceField::scaled_by_t() const {
  HalfSpaceField out(*this);
  for (int j = 0; j < tgrid.size(); ++j) out.values[j] *= tgrid.node(j);
  return out;
}

void HalfSpaceField::validate() const {
  if (static_cast<int>(values.size()) != tgrid.size()) {
    throw InvalidArgument("HalfSpaceField: one sample per t-node required");
  }
  for (const auto& v : values) {
    if (v.size() != static_cast<Index>(components) * grid.size()) {
      throw InvalidArgument("HalfSpaceField: sample size mismatch");
    }
    if (!v.allFinite()) throw InvalidArgument("HalfSpaceField: non-finite entry");
  }
}

double square_norm(const HalfSpaceField& f) {
  std::vector<double> norms(f.values.size());
  for (std::size_t j = 0; j < norms.size(); ++j) norms[j] = f.grid.norm_sq(f.values[j]);
  return std::sqrt(f.tgrid.integrate(norms));
}

RVec ntm_modified(const HalfSpaceField& f, const WhitneyBox& box) {
  if (!(box.c0 > 0.0 && box.c0 < 1.0) || !(box.c1 > 0.0)) {
    throw InvalidArgument("Whitney box needs c0 in (0,1) and c1 > 0");
  }
  const int n = f.grid.size();
  const Eigen::MatrixXd sq = f.magnitudes().cwiseAbs2();
  std::vector<int> centers;
  for (int j = 0; j < f.tgrid.size(); ++j) {
    const double t = f.tgrid.node(j);
    if ((1.0 - box.c0) * t >= f.tgrid.t_min() && (1.0 + box.c0) * t <= f.tgrid.t_max()) {
      centers.push_back(j);
    }
  }
  if (centers.empty()) throw InvalidArgument("no Whitney box fits inside the t-grid");
  RVec out = RVec::Zero(n);
  parallel_for(n, [&](int i) {
    double best = 0.0;
    std::vector<double> ball(n);
    for (int j : centers) {
      const double t = f.tgrid.node(j);
      for (int l = 0; l < n; ++l) ball[l] = f.grid.cell_overlap(l, f.grid.point(i), box.c1 * t);
      double mass = 0.0;
      for (const auto& [node, weight] :
           f.tgrid.interval_dt_weights((1.0 - box.c0) * t, (1.0 + box.c0) * t)) {
        double row = 0.0;
        for (int l = 0; l < n; ++l) {
          if (ball[l] > 0.0) row += ball[l] * sq(node, l);
        }
        mass += weight * row;
      }
      best = std::max(best, std::sqrt(mass) / t);
    }
    out(i) = best;
  });
  return out;
}

RVec ntm_standard(const HalfSpaceField& f, double aperture, bool l1_average) {
  if (!(aperture > 0.0)) throw InvalidArgument("non-tangential aperture must be positive");
  const int n = f.grid.size();
  const Eigen::MatrixXd mag = f.magnitudes();
  RVec out = RVec::Zero(n);
  parallel_for(n, [&](int i) {
    double best = 0.0;
    for (int j = 0; j < f.tgrid.size(); ++j) {
      const double radius = aperture * f.tgrid.node(j);
      if (l1_average) {
        double mass = 0.0;
        double measure = 0.0;
        for (int l = 0; l < n; ++l) {
          const double w = f.grid.cell_overlap(l, f.grid.point(i), radius);
          mass += w * mag(j, l);
          measure += w;
        }
        if (measure > 0.0) best = std::max(best, mass / measure);
      } else {
        for (int l = 0; l < n; ++l) {
          if (f.grid.periodic_distance(f.grid.point(l), f.grid.point(i)) < radius) {
            best = std::max(best, mag(j, l));
          }
        }
      }
    }
    out(i) = best;
  });
  return out;
}

double grid_norm(const TorusGrid& grid, const RVec& values) {
  return std::sqrt(grid.dx() * values.squaredNorm());
}

Vec apply_Pt(const TorusGrid& grid, int components, const Vec& v, double t) {
  return grid.apply_multiplier(v, components,
                               [t](double k) { return cplx(1.0 / (1.0 + t * t * k * k)); });
}

Vec apply_scaled_abs_derivative(const TorusGrid& grid, int components, const Vec& v, double t) {
  return grid.apply_multiplier(v, components, [t](double k) { return cplx(t * std::abs(k)); });
}

Vec smoothing_quotient(const TorusGrid& grid, int components, const Vec& v, double t) {
  const double mean = grid.component_means(v, components).cwiseAbs().maxCoeff();
  if (mean > 1e-12 * std::max(1.0, v.norm())) {
    throw InvalidArgument("smoothing_quotient: input must have zero mean (mean " +
                          std::to_string(mean) + ")");
  }
  return grid.apply_multiplier(v, components, [t](double k) {
    const double s = t * std::abs(k);
    return cplx(s / (1.0 + s * s));
  });
}

Vec apply_dx(const TorusGrid& grid, int components, const Vec& v) {
  return grid.apply_multiplier(v, components, [](double k) { return cplx(0.0, k); });
}

Vec apply_St(const TorusGrid& grid, int components, const Vec& v, double t) {
  const DyadicTree tree(grid);
  const int level = tree.level_for_scale(t);
  const int n = grid.size();
  const int width = tree.points_per_interval(level);
  Vec out(v.size());
  for (int c = 0; c < components; ++c) {
    for (int q = 0; q < tree.intervals(level); ++q) {
      const Index start = static_cast<Index>(c) * n + tree.first_point(level, q);
      out.segment(start, width).setConstant(v.segment(start, width).mean());
    }
  }
  return out;
}

std::vector<Mat> gamma(const ResolventFamily& family, double t) {
  const CoefficientField& a = family.coefficients();
  const int n = a.grid().size();
  const int comps = a.dim();
  Mat constants = Mat::Zero(static_cast<Index>(comps) * n, comps);
  for (int c = 0; c < comps; ++c) constants.block(static_cast<Index>(c) * n, c, n, 1).setOnes();
  const Mat y = family.apply_q(t, constants).result;
  std::vector<Mat> g(n, Mat(comps, comps));
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < comps; ++r) {
      for (int c = 0; c < comps; ++c) g[i](r, c) = y(static_cast<Index>(r) * n + i, c);
    }
  }
  return g;
}

RVec gamma_norm_sq(const std::vector<Mat>& g) {
  RVec out(static_cast<Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    Eigen::JacobiSVD<Mat> svd(g[i]);
    const double s = svd.singularValues()(0);
    out(static_cast<Index>(i)) = s * s;
  }
  return out;
}

std::vector<DecompositionTerms> decompose(const ResolventFamily& family, double t, const Mat& vs) {
  const TorusGrid& grid = family.coefficients().grid();
  const int comps = family.coefficients().dim();
  const Index count = vs.cols();
  // Columns: [v | quotient(t|D| v) | P_t v] for each input.
  Mat rhs(vs.rows(), 3 * count);
  std::vector<Vec> smoothed(count);
  for (Index k = 0; k < count; ++k) {
    const Vec v = vs.col(k);
    rhs.col(k) = v;
    rhs.col(count + k) =
        smoothing_quotient(grid, comps, apply_scaled_abs_derivative(grid, comps, v, t), t);
    smoothed[k] = apply_Pt(grid, comps, v, t);
    rhs.col(2 * count + k) = smoothed[k];
  }
  const Mat applied = family.apply_q(t, rhs).result;
  const std::vector<Mat> g = gamma(family, t);
  std::vector<DecompositionTerms> out(count);
  for (Index k = 0; k < count; ++k) {
    DecompositionTerms& d = out[k];
    d.principal = applied.col(k);
    d.smooth = applied.col(count + k);
    d.paraproduct = apply_pointwise(g, apply_St(grid, comps, smoothed[k], t));
    d.off_diagonal = applied.col(2 * count + k) - d.paraproduct;
    const Vec sum = d.smooth + d.off_diagonal + d.paraproduct;
    d.identity_defect =
        (sum - d.principal).norm() / std::max(d.principal.norm(), 1e-300);
  }
  return out;
}

CarlesonBoxReport carleson_norm(const TorusGrid& grid, const TGrid& tgrid,
                                const std::vector<RVec>& density) {
  if (static_cast<int>(density.size()) != tgrid.size()) {
    throw InvalidArgument("carleson_norm: one density row per t-node required");
  }
  const DyadicTree tree(grid);
  CarlesonBoxReport report;
  std::vector<double> column(tgrid.size());
  for (int level = 0; level < tree.levels(); ++level) {
    const int width = tree.points_per_interval(level);
    for (int q = 0; q < tree.intervals(level); ++q) {
      const int first = tree.first_point(level, q);
      for (int j = 0; j < tgrid.size(); ++j) {
        column[j] = density[j].segment(first, width).sum() * grid.dx();
      }
      CarlesonBox box{level, q, tree.side(level), tgrid.integrate_below(column, tree.side(level))};
      const double ratio = box.mass / box.side;
      if (ratio > report.carleson_norm || report.boxes.empty()) {
        report.carleson_norm = std::max(ratio, 0.0);
        report.argmax = box;
      }
      report.boxes.push_back(box);
    }
  }
  return report;
}

}  // namespace hslab
