#include "hslab/matrix_functions.hpp"

#include <algorithm>
#include <cmath>

#include "hslab/parallel.hpp"

namespace hslab {

SignResult matrix_sign(const Mat& t, const SignOptions& options) {
  if (t.rows() != t.cols() || t.rows() == 0) throw InvalidArgument("matrix_sign: square input");
  const Index d = t.rows();
  const double t_norm = t.norm();
  SignResult out;
  Mat s = t;
  bool scaling = true;
  bool finishing = false;
  double previous = 1.0;
  int wandering = 0;
  for (int k = 1; k <= options.max_iterations; ++k) {
    Eigen::PartialPivLU<Mat> lu(s);
    const double rc = lu.rcond();
    if (!(rc > 1e-15)) {
      throw NoGap("matrix_sign: iterate became singular (reciprocal condition " +
                  std::to_string(rc) + "); spectrum meets the imaginary axis");
    }
    Mat inv = lu.inverse();
    Mat next;
    if (scaling) {
      double log_abs_det = 0.0;
      const Mat& lu_mat = lu.matrixLU();
      for (Index i = 0; i < d; ++i) log_abs_det += std::log(std::abs(lu_mat(i, i)));
      const double mu = std::exp(-log_abs_det / static_cast<double>(d));
      next = 0.5 * (mu * s + inv / mu);
    } else {
      next = 0.5 * (s + inv);
    }
    const double step = (next - s).norm() / std::max(s.norm(), 1e-300);
    s = std::move(next);
    out.iterations = k;
    out.last_step = step;
    if (step <= options.tolerance || finishing) break;
    if (step < 1e-2) scaling = false;
    // Quadratic regime: the next step is at roundoff level.
    if (step <= 1e-6) finishing = true;
    wandering = (step > 0.5 * previous && step > 1e-3) ? wandering + 1 : 0;
    if (wandering >= 8) {
      throw NoGap("matrix_sign: Newton iteration stagnates; eigenvalues near the imaginary axis");
    }
    previous = step;
    if (k == options.max_iterations) {
      throw NotConverged("matrix_sign: no convergence in " + std::to_string(k) +
                         " iterations (last step " + std::to_string(step) + ")");
    }
  }
  const double involution = (s * s - Mat::Identity(d, d)).norm() / std::sqrt(double(d));
  if (!(involution <= 1e-8)) {
    throw NotConverged("matrix_sign: sign^2 != I (defect " + std::to_string(involution) + ")");
  }
  (void)t_norm;
  out.sign = std::move(s);
  return out;
}

Mat expm(const Mat& a) {
  static constexpr double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
  static constexpr double theta13 = 5.371920351148152;
  const Index d = a.rows();
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const Mat x = a / std::ldexp(1.0, s);
  const Mat eye = Mat::Identity(d, d);
  const Mat x2 = x * x;
  const Mat x4 = x2 * x2;
  const Mat x6 = x4 * x2;
  const Mat inner_u = x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2);
  const Mat u = x * (inner_u + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * eye);
  const Mat inner_v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2);
  const Mat v = inner_v + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * eye;
  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < s; ++i) r = (r * r).eval();
  return r;
}

namespace {

Mat range_columns(const Mat& projector, Index rank) {
  Eigen::ColPivHouseholderQR<Mat> qr(projector);
  Mat q = qr.householderQ() * Mat::Identity(projector.rows(), rank);
  return q;
}

double min_real(const Mat& m, double sign) {
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::ComplexEigenSolver<Mat> es(m, false);
  return (sign * es.eigenvalues().real().array()).minCoeff();
}

}  // namespace

SpectralSplit split_on_subspace(const Mat& t, const Mat& basis, const SignOptions& options) {
  if (t.rows() != t.cols() || basis.rows() != t.rows()) {
    throw InvalidArgument("split_on_subspace: shape mismatch");
  }
  SpectralSplit sp;
  sp.basis = basis;
  const Mat t_basis = t * basis;
  sp.restricted = basis.adjoint() * t_basis;
  sp.invariance_defect = (t_basis - basis * sp.restricted).norm() / std::max(t.norm(), 1e-300);

  SignResult sign = matrix_sign(sp.restricted, options);
  sp.iterations = sign.iterations;
  sp.sign = std::move(sign.sign);
  const Index d = sp.sign.rows();
  const Mat eye = Mat::Identity(d, d);
  sp.p_plus = 0.5 * (eye + sp.sign);
  sp.p_minus = 0.5 * (eye - sp.sign);
  const Index rank_plus = static_cast<Index>(std::llround(sp.p_plus.trace().real()));
  sp.v_plus_local = range_columns(sp.p_plus, rank_plus);
  sp.v_minus_local = range_columns(sp.p_minus, d - rank_plus);
  sp.v_plus = basis * sp.v_plus_local;
  sp.v_minus = basis * sp.v_minus_local;
  sp.t_plus = sp.v_plus_local.adjoint() * sp.restricted * sp.v_plus_local;
  sp.t_minus = sp.v_minus_local.adjoint() * sp.restricted * sp.v_minus_local;
  sp.spectral_gap = std::min(min_real(sp.t_plus, 1.0), min_real(sp.t_minus, -1.0));
  if (!(sp.spectral_gap > options.gap_floor * sp.restricted.norm())) {
    throw NoGap("spectral split: gap " + std::to_string(sp.spectral_gap) +
                " below floor; spectrum touches the imaginary axis");
  }
  return sp;
}

Mat generator_range_basis(const CoefficientField& a) {
  const TorusGrid& grid = a.grid();
  const int n = grid.size();
  const int comps = a.dim();
  Mat w = Mat::Zero(static_cast<Index>(comps) * n, static_cast<Index>(comps) * (n - 1));
  Index col = 0;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int c = 0; c < comps; ++c) {
    for (int slot = 1; slot < n; ++slot) {
      w.block(static_cast<Index>(c) * n, col++, n, 1) = grid.plane_wave(grid.mode(slot)) * scale;
    }
  }
  const AuxiliaryPair aux = auxiliary_pair(a);
  multiply_pointwise_left(aux.upper_inv, w);
  Eigen::HouseholderQR<Mat> qr(w);
  return qr.householderQ() * Mat::Identity(w.rows(), w.cols());
}

GeneratorSplit split_generator(const CoefficientField& a, const SignOptions& options) {
  GeneratorSplit gs{assemble_TA(a), {}};
  gs.split = split_on_subspace(gs.generator.entries, generator_range_basis(a), options);
  return gs;
}

SemigroupTable::SemigroupTable(const SpectralSplit& split, const TGrid& tgrid, bool with_minus)
    : tgrid_(tgrid) {
  const int count = tgrid.size();
  plus_.resize(count);
  if (with_minus) minus_.resize(count);
  parallel_for(count, [&](int j) {
    plus_[j] = expm(-tgrid.node(j) * split.t_plus);
    if (with_minus) minus_[j] = expm(tgrid.node(j) * split.t_minus);
  });
}

const Mat& SemigroupTable::minus(int j) const {
  if (minus_.empty()) throw InvalidArgument("SemigroupTable built without the chi_- part");
  return minus_[j];
}

Vec hardy_coordinates(const SpectralSplit& split, const Vec& f, double tol) {
  const Vec c = split.v_plus.adjoint() * f;
  const double miss = (split.v_plus * c - f).norm();
  if (!(miss <= tol * f.norm()) && f.norm() > 0.0) {
    throw InvalidArgument("vector lies outside range(chi_+) (relative distance " +
                          std::to_string(miss / f.norm()) + ")");
  }
  return c;
}

Vec semigroup_apply(const SpectralSplit& split, double t, const Vec& f) {
  const Vec c = hardy_coordinates(split, f);
  if (t == 0.0) return split.v_plus * c;
  if (t < 0.0) throw InvalidArgument("semigroup_apply: t must be >= 0");
  return split.v_plus * (expm(-t * split.t_plus) * c);
}

DecayReport semigroup_decay(const SpectralSplit& split, const SemigroupTable& table, const Vec& f,
                            double slack) {
  DecayReport r;
  r.slack = slack;
  const Vec c = hardy_coordinates(split, f);
  const double f_norm = c.norm();
  if (f_norm == 0.0) return r;
  for (int j = 0; j < table.tgrid().size(); ++j) {
    const double t = table.tgrid().node(j);
    const double ratio = (table.plus(j) * c).norm() / f_norm;
    r.constant = std::max(r.constant, ratio * std::exp(t * split.spectral_gap * (1.0 - slack)));
  }
  return r;
}

const char* to_string(Psi psi) {
  switch (psi) {
    case Psi::sector_exp: return "z*exp(-sgn(Re z) z)";
    case Psi::resolvent: return "z/(1+z^2)";
    case Psi::bilinear: return "z(1+z^2)exp(-sgn(Re z) z)";
  }
  return "?";
}

cplx psi_scalar(Psi psi, cplx z) {
  const double sgn = z.real() > 0.0 ? 1.0 : (z.real() < 0.0 ? -1.0 : 0.0);
  switch (psi) {
    case Psi::sector_exp: return z * std::exp(-sgn * z);
    case Psi::resolvent: return z / (1.0 + z * z);
    case Psi::bilinear: return z * (1.0 + z * z) * std::exp(-sgn * z);
  }
  return 0.0;
}

namespace {

// psi on one half: x = tT_+- and decay = e^{-tT_+} or e^{+tT_-}.
Vec psi_block(Psi psi, const Mat& x, const Mat* decay, const Vec& c) {
  if (c.size() == 0) return c;
  switch (psi) {
    case Psi::sector_exp: return x * (*decay * c);
    case Psi::resolvent: {
      Mat k = x * x;
      k.diagonal().array() += 1.0;
      return x * k.partialPivLu().solve(c);
    }
    case Psi::bilinear: {
      const Vec e = *decay * c;
      return x * (e + x * (x * e));
    }
  }
  return c;
}

struct HalfCoordinates {
  Vec plus;
  Vec minus;
};

HalfCoordinates split_coordinates(const SpectralSplit& split, const Vec& f) {
  const Vec y = split.basis.adjoint() * f;
  const double miss = (split.basis * y - f).norm();
  if (!(miss <= 1e-8 * f.norm()) && f.norm() > 0.0) {
    throw InvalidArgument("psi: vector lies outside the split subspace");
  }
  return {split.v_plus_local.adjoint() * (split.p_plus * y),
          split.v_minus_local.adjoint() * (split.p_minus * y)};
}

bool needs_exp(Psi psi) { return psi != Psi::resolvent; }

}  // namespace

Vec psi_apply(const SpectralSplit& split, Psi psi, double t, const Vec& f) {
  if (!(t > 0.0)) throw InvalidArgument("psi_apply: t must be > 0");
  const HalfCoordinates hc = split_coordinates(split, f);
  Vec out = Vec::Zero(f.size());
  if (hc.plus.size() > 0) {
    const Mat x = t * split.t_plus;
    Mat e;
    if (needs_exp(psi)) e = expm(-x);
    out += split.v_plus * psi_block(psi, x, &e, hc.plus);
  }
  if (hc.minus.size() > 0) {
    const Mat x = t * split.t_minus;
    Mat e;
    if (needs_exp(psi)) e = expm(x);
    out += split.v_minus * psi_block(psi, x, &e, hc.minus);
  }
  return out;
}

std::vector<Vec> psi_trajectory(const SpectralSplit& split, const SemigroupTable& table, Psi psi,
                                const Vec& f) {
  const HalfCoordinates hc = split_coordinates(split, f);
  const bool use_minus = hc.minus.norm() > 1e-14 * std::max(1.0, f.norm());
  if (use_minus && needs_exp(psi) && !table.has_minus()) {
    throw InvalidArgument("psi_trajectory: input has a chi_- part but the table has no minus block");
  }
  const int count = table.tgrid().size();
  std::vector<Vec> out(count);
  parallel_for(count, [&](int j) {
    const double t = table.tgrid().node(j);
    Vec v = split.v_plus * psi_block(psi, t * split.t_plus, &table.plus(j), hc.plus);
    if (use_minus) {
      const Mat* e = needs_exp(psi) ? &table.minus(j) : nullptr;
      v += split.v_minus * psi_block(psi, t * split.t_minus, e, hc.minus);
    }
    out[j] = std::move(v);
  });
  return out;
}

double quadratic_estimate(const SpectralSplit& split, const SemigroupTable& table, Psi psi,
                          const Vec& f) {
  const double f_norm_sq = f.squaredNorm();
  if (f_norm_sq == 0.0) return 0.0;
  const auto traj = psi_trajectory(split, table, psi, f);
  std::vector<double> norms(traj.size());
  for (std::size_t j = 0; j < traj.size(); ++j) norms[j] = traj[j].squaredNorm();
  return std::sqrt(table.tgrid().integrate(norms) / f_norm_sq);
}

}  // namespace hslab
