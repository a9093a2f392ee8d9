#include "hslab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hslab {

namespace {

constexpr double kKappaFloor = 1e-10;
// Dyadic reference grid on which the accretivity shift is computed. Every
// dyadic grid with N <= kReferencePoints is a subset of it.
constexpr int kReferencePoints = 1024;

double min_real_part_eigenvalue(const Mat& a) {
  const Mat re = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(re, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double op_norm(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

Mat random_matrix(std::mt19937_64& rng, int rows, int cols, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat out(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) out(i, j) = cplx(normal(rng), normal(rng)) * scale;
  }
  return out;
}

// Trigonometric polynomial sum_{|k| <= r} C_k e^{i k 2 pi x / L}.
struct TrigPolynomial {
  std::vector<Mat> coeffs;  // index k + r
  int degree = 0;
  double length = 2.0 * kPi;

  Mat operator()(double x) const {
    Mat out = Mat::Zero(coeffs.front().rows(), coeffs.front().cols());
    for (int k = -degree; k <= degree; ++k) {
      out += coeffs[k + degree] * std::polar(1.0, 2.0 * kPi * k * x / length);
    }
    return out;
  }
};

TrigPolynomial random_trig(std::mt19937_64& rng, int size, int degree, double scale,
                           bool hermitian, double length) {
  TrigPolynomial p;
  p.degree = degree;
  p.length = length;
  p.coeffs.resize(2 * degree + 1);
  for (auto& c : p.coeffs) c = random_matrix(rng, size, size, scale);
  if (hermitian) {
    Mat& c0 = p.coeffs[degree];
    c0 = 0.5 * (c0 + c0.adjoint()).eval();
    for (int k = 1; k <= degree; ++k) p.coeffs[degree - k] = p.coeffs[degree + k].adjoint();
  }
  return p;
}

std::vector<Mat> sample(const TrigPolynomial& p, const TorusGrid& grid) {
  std::vector<Mat> out(grid.size());
  for (int i = 0; i < grid.size(); ++i) out[i] = p(grid.point(i));
  return out;
}

// Shift making min_x lambda_min(Re p(x)) >= kappa on the reference grid.
double accretive_shift(const TrigPolynomial& p, double kappa) {
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kReferencePoints; ++i) {
    const double x = p.length * i / kReferencePoints;
    worst = std::min(worst, min_real_part_eigenvalue(p(x)));
  }
  return std::max(0.0, kappa - worst);
}

std::uint64_t mix_seed(std::uint64_t seed, CoefficientKind kind, int m) {
  const std::uint64_t tag[3] = {seed, static_cast<std::uint64_t>(kind),
                                static_cast<std::uint64_t>(m)};
  return fnv1a(tag, sizeof(tag));
}

}  // namespace

std::string to_string(CoefficientKind kind) {
  switch (kind) {
    case CoefficientKind::identity: return "identity";
    case CoefficientKind::constant: return "constant";
    case CoefficientKind::hermitian: return "hermitian";
    case CoefficientKind::block: return "block";
    case CoefficientKind::general: return "general";
  }
  return "general";
}

CoefficientKind coefficient_kind_from_string(const std::string& name) {
  if (name == "identity") return CoefficientKind::identity;
  if (name == "constant") return CoefficientKind::constant;
  if (name == "hermitian") return CoefficientKind::hermitian;
  if (name == "block") return CoefficientKind::block;
  if (name == "general") return CoefficientKind::general;
  throw InvalidArgument("unknown coefficient kind '" + name + "'");
}

CoefficientField::CoefficientField(TorusGrid grid, int m, CoefficientKind kind,
                                   std::vector<Mat> samples)
    : grid_(grid), m_(m), kind_(kind), samples_(std::move(samples)) {
  if (m < 1) throw InvalidArgument("CoefficientField: m must be >= 1");
  if (static_cast<int>(samples_.size()) != grid_.size()) {
    throw InvalidArgument("CoefficientField: one sample per grid point required");
  }
  for (const auto& s : samples_) {
    if (s.rows() != 2 * m || s.cols() != 2 * m) {
      throw InvalidArgument("CoefficientField: samples must be 2m x 2m");
    }
    if (!s.allFinite()) throw InvalidArgument("CoefficientField: non-finite entry");
  }
}

double CoefficientField::sup_norm() const {
  double lambda = 0.0;
  for (const auto& s : samples_) lambda = std::max(lambda, op_norm(s));
  return lambda;
}

CoefficientField CoefficientField::adjoint() const {
  std::vector<Mat> adj(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) adj[i] = samples_[i].adjoint();
  return CoefficientField(grid_, m_, kind_, std::move(adj));
}

bool CoefficientField::is_hermitian(double tol) const {
  for (const auto& s : samples_) {
    if ((s - s.adjoint()).cwiseAbs().maxCoeff() > tol * std::max(1.0, s.cwiseAbs().maxCoeff())) {
      return false;
    }
  }
  return true;
}

bool CoefficientField::is_block(double tol) const {
  for (const auto& s : samples_) {
    if (s.topRightCorner(m_, m_).cwiseAbs().maxCoeff() > tol) return false;
    if (s.bottomLeftCorner(m_, m_).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

bool CoefficientField::is_constant(double tol) const {
  for (const auto& s : samples_) {
    if ((s - samples_.front()).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

std::uint64_t CoefficientField::content_hash() const {
  const std::int64_t header[2] = {grid_.size(), m_};
  std::uint64_t h = fnv1a(header, sizeof(header));
  const double len = grid_.length();
  h = fnv1a(&len, sizeof(len), h);
  for (const auto& s : samples_) {
    h = fnv1a(s.data(), sizeof(cplx) * static_cast<std::size_t>(s.size()), h);
  }
  return h;
}

double estimate_kappa(const CoefficientField& a) {
  double kappa = std::numeric_limits<double>::infinity();
  int where = 0;
  for (int i = 0; i < a.grid().size(); ++i) {
    const double v = min_real_part_eigenvalue(a.sample(i));
    if (v < kappa) {
      kappa = v;
      where = i;
    }
  }
  if (!(kappa > kKappaFloor)) throw NotAccretive(kappa, where);
  return kappa;
}

CoefficientField make_class(CoefficientKind kind, const TorusGrid& grid, int m,
                            std::uint64_t seed, const ClassParams& params) {
  if (!(params.kappa_target > 0.0)) throw InvalidArgument("make_class: kappa_target must be > 0");
  if (params.roughness < 0 || params.roughness > grid.size() / 4) {
    throw InvalidArgument("make_class: roughness must lie in [0, N/4]");
  }
  if (kReferencePoints % grid.size() != 0) {
    throw InvalidArgument("make_class: N must divide the reference grid size 1024");
  }
  const int dim = 2 * m;
  std::mt19937_64 rng(mix_seed(seed, kind, m));
  const double len = grid.length();
  const Mat eye = Mat::Identity(dim, dim);

  switch (kind) {
    case CoefficientKind::identity:
      return CoefficientField(grid, m, kind, std::vector<Mat>(grid.size(), eye));

    case CoefficientKind::constant: {
      TrigPolynomial p = random_trig(rng, dim, 0, params.amplitude, false, len);
      p.coeffs[0] += accretive_shift(p, params.kappa_target) * eye;
      return CoefficientField(grid, m, kind, sample(p, grid));
    }

    case CoefficientKind::hermitian: {
      TrigPolynomial p = random_trig(rng, dim, params.roughness, params.amplitude, true, len);
      p.coeffs[params.roughness] += accretive_shift(p, params.kappa_target) * eye;
      auto samples = sample(p, grid);
      for (auto& s : samples) s = (0.5 * (s + s.adjoint())).eval();
      return CoefficientField(grid, m, kind, std::move(samples));
    }

    case CoefficientKind::block: {
      const Mat eye_m = Mat::Identity(m, m);
      TrigPolynomial nn = random_trig(rng, m, params.roughness, params.amplitude, false, len);
      TrigPolynomial tt = random_trig(rng, m, params.roughness, params.amplitude, false, len);
      nn.coeffs[params.roughness] += accretive_shift(nn, params.kappa_target) * eye_m;
      tt.coeffs[params.roughness] += accretive_shift(tt, params.kappa_target) * eye_m;
      std::vector<Mat> samples(grid.size(), Mat::Zero(dim, dim));
      for (int i = 0; i < grid.size(); ++i) {
        samples[i].topLeftCorner(m, m) = nn(grid.point(i));
        samples[i].bottomRightCorner(m, m) = tt(grid.point(i));
      }
      return CoefficientField(grid, m, kind, std::move(samples));
    }

    case CoefficientKind::general:
      break;
  }
  throw InvalidArgument("make_class: 'general' is not a generated class");
}

CoefficientField make_direction(const TorusGrid& grid, int m, std::uint64_t seed,
                                int roughness, bool hermitian) {
  if (roughness < 0 || roughness > grid.size() / 4) {
    throw InvalidArgument("make_direction: roughness must lie in [0, N/4]");
  }
  std::mt19937_64 rng(fnv1a(&seed, sizeof(seed), 0x9e3779b97f4a7c15ULL + m));
  TrigPolynomial p = random_trig(rng, 2 * m, roughness, 1.0, hermitian, grid.length());
  double peak = 0.0;
  for (int i = 0; i < kReferencePoints; ++i) {
    peak = std::max(peak, op_norm(p(grid.length() * i / kReferencePoints)));
  }
  for (auto& c : p.coeffs) c /= peak;
  return CoefficientField(grid, m, CoefficientKind::general, sample(p, grid));
}

CoefficientField perturb(const CoefficientField& a, const CoefficientField& e, double eps) {
  if (a.grid().size() != e.grid().size() || a.m() != e.m()) {
    throw InvalidArgument("perturb: grid or system size mismatch");
  }
  std::vector<Mat> out(a.samples());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += eps * e.sample(static_cast<int>(i));
  return CoefficientField(a.grid(), a.m(), eps == 0.0 ? a.kind() : CoefficientKind::general,
                          std::move(out));
}

CoefficientField resample(const CoefficientField& a, const TorusGrid& target) {
  const int n_src = a.grid().size();
  const int n_dst = target.size();
  const int dim = a.dim();
  std::vector<Mat> out(n_dst, Mat::Zero(dim, dim));
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      Vec values(n_src);
      for (int i = 0; i < n_src; ++i) values(i) = a.sample(i)(r, c);
      const Vec coeffs = a.grid().forward(values);
      Vec dst = Vec::Zero(n_dst);
      const int kmax = std::min(n_src, n_dst) / 2;
      for (int k = -kmax + 1; k < kmax; ++k) {
        dst(target.slot_of_mode(k)) = coeffs(a.grid().slot_of_mode(k));
      }
      const cplx nyq = coeffs(a.grid().slot_of_mode(kmax));
      if (n_dst > n_src) {
        dst(target.slot_of_mode(kmax)) += 0.5 * nyq;
        dst(target.slot_of_mode(-kmax)) += 0.5 * nyq;
      } else {
        dst(target.slot_of_mode(kmax)) += nyq;
      }
      const Vec vals = target.inverse(dst);
      for (int i = 0; i < n_dst; ++i) out[i](r, c) = vals(i);
    }
  }
  return CoefficientField(target, a.m(), a.kind(), std::move(out));
}

AuxiliaryPair auxiliary_pair(const CoefficientField& a) {
  const int m = a.m();
  const int dim = a.dim();
  const int n = a.grid().size();
  AuxiliaryPair aux;
  aux.upper.resize(n);
  aux.upper_inv.resize(n);
  aux.lower.resize(n);
  aux.b.resize(n);
  aux.min_sigma_upper = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const Mat& s = a.sample(i);
    Mat up = Mat::Identity(dim, dim);
    up.topRows(m) = s.topRows(m);
    Mat lo = Mat::Identity(dim, dim);
    lo.bottomRows(m) = s.bottomRows(m);
    Eigen::JacobiSVD<Mat> svd(up);
    const double smin = svd.singularValues()(dim - 1);
    aux.min_sigma_upper = std::min(aux.min_sigma_upper, smin);
    if (!(smin > 1e-12 * std::max(1.0, svd.singularValues()(0)))) {
      throw SingularMatrix("auxiliary matrix upper(x) is singular at grid point " +
                           std::to_string(i));
    }
    aux.upper_inv[i] = up.partialPivLu().inverse();
    aux.b[i] = lo * aux.upper_inv[i];
    aux.upper[i] = std::move(up);
    aux.lower[i] = std::move(lo);
  }
  return aux;
}

nlohmann::json to_json(const CoefficientField& a) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& s : a.samples()) {
    nlohmann::json row = nlohmann::json::array();
    for (int r = 0; r < s.rows(); ++r) {
      for (int c = 0; c < s.cols(); ++c) row.push_back({s(r, c).real(), s(r, c).imag()});
    }
    entries.push_back(std::move(row));
  }
  return {{"m", a.m()},
          {"N", a.grid().size()},
          {"L", a.grid().length()},
          {"kind", to_string(a.kind())},
          {"entries", std::move(entries)}};
}

CoefficientField coefficient_from_json(const nlohmann::json& doc) {
  try {
    const int m = doc.at("m").get<int>();
    const int n = doc.at("N").get<int>();
    const double len = doc.at("L").get<double>();
    const auto kind = coefficient_kind_from_string(doc.value("kind", std::string("general")));
    const auto& entries = doc.at("entries");
    if (static_cast<int>(entries.size()) != n) {
      throw InvalidArgument("coefficient file: expected " + std::to_string(n) + " samples");
    }
    const int dim = 2 * m;
    std::vector<Mat> samples(n, Mat(dim, dim));
    for (int i = 0; i < n; ++i) {
      const auto& row = entries[i];
      if (static_cast<int>(row.size()) != dim * dim) {
        throw InvalidArgument("coefficient file: sample " + std::to_string(i) +
                              " has wrong entry count");
      }
      for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
          const auto& pair = row[r * dim + c];
          samples[i](r, c) = cplx(pair.at(0).get<double>(), pair.at(1).get<double>());
        }
      }
    }
    return CoefficientField(TorusGrid(n, len), m, kind, std::move(samples));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed coefficient document: ") + e.what());
  }
}

}  // namespace hslab
