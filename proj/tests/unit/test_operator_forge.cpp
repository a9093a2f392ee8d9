#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "hslab/analysis_norms.hpp"
#include "hslab/operator_forge.hpp"

using namespace hslab;

namespace {

// Two-component mode vector e^{ikx} (a, b).
Vec mode_pair(const TorusGrid& grid, int k, cplx a, cplx b) {
  int n = grid.size();
  Vec w = grid.plane_wave(k);
  Vec v(2 * n);
  v.head(n) = a * w;
  v.tail(n) = b * w;
  return v;
}

CoefficientField diag_field(const TorusGrid& grid, cplx a, cplx d) {
  Mat a0 = Mat::Zero(2, 2);
  a0(0, 0) = a;
  a0(1, 1) = d;
  return CoefficientField(grid, 1, CoefficientKind::constant, std::vector<Mat>(grid.size(), a0));
}

// Coordinates (alpha, beta) of a pure mode-k vector.
std::pair<cplx, cplx> mode_coords(const TorusGrid& grid, int k, const Vec& v) {
  int n = grid.size();
  int s = grid.slot_of_mode(k);
  return {grid.forward(v.head(n))(s), grid.forward(v.tail(n))(s)};
}

}  // namespace

TEST_CASE("D acts on mode 2 by [[0, 2i], [-2i, 0]]") {
  TorusGrid grid(32);
  Mat d = assemble_D(grid, 1).entries;
  CHECK((d - d.adjoint()).norm() < 1e-12 * d.norm());
  Vec e1 = mode_pair(grid, 2, 1.0, 0.0), e2 = mode_pair(grid, 2, 0.0, 1.0);
  auto [a1, b1] = mode_coords(grid, 2, d * e1);
  auto [a2, b2] = mode_coords(grid, 2, d * e2);
  CHECK(std::abs(a1) < 1e-12);
  CHECK(std::abs(b1 - cplx(0, -2)) < 1e-12);
  CHECK(std::abs(a2 - cplx(0, 2)) < 1e-12);
  CHECK(std::abs(b2) < 1e-12);

  Vec constants = mode_pair(grid, 0, 0.3, -1.7);
  CHECK((d * constants).norm() < 1e-12);
}

TEST_CASE("D squared is the Laplacian symbol and the kernel is the constants") {
  TorusGrid grid(16);
  for (int m : {1, 2}) {
    Mat d = assemble_D(grid, m).entries;
    Mat d2 = d * d;
    for (int k = -7; k <= 8; ++k) {
      Vec w = grid.plane_wave(k);
      Vec v = Vec::Zero(2 * m * 16);
      v.segment(16 * (m % 2), 16) = w;  // any single component
      CHECK((d2 * v - double(k * k) * v).norm() < 1e-10 * (1 + k * k) * v.norm());
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(d);
    int zeros = 0;
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
      if (std::abs(es.eigenvalues()(i)) < 1e-9) ++zeros;
    CHECK(zeros == 2 * m);
  }
}

TEST_CASE("T_A equals D for the identity") {
  TorusGrid grid(32);
  CoefficientField a = make_class(CoefficientKind::identity, grid, 1, 0);
  CHECK((assemble_TA(a).entries - assemble_D(grid, 1).entries).norm() < 1e-12);
}

TEST_CASE("constant diagonal T_A has the 2x2 mode symbol") {
  TorusGrid grid(32);
  double a = 2.0, d = 0.5;
  Mat t = assemble_TA(diag_field(grid, a, d)).entries;
  for (int k : {1, 3, -5}) {
    auto [a1, b1] = mode_coords(grid, k, t * mode_pair(grid, k, 1.0, 0.0));
    auto [a2, b2] = mode_coords(grid, k, t * mode_pair(grid, k, 0.0, 1.0));
    Mat block(2, 2);
    block << a1, a2, b1, b2;
    Mat oracle(2, 2);
    // upper^{-1} = diag(1/a, 1), lower = diag(1, d).
    oracle << 0.0, cplx(0, k * d / a), cplx(0, -k), 0.0;
    CHECK((block - oracle).norm() < 1e-12 * (1 + std::abs(k)));
    Eigen::ComplexEigenSolver<Mat> es(block);
    double expected = std::abs(k) * std::sqrt(d / a);
    for (int i = 0; i < 2; ++i) CHECK(std::abs(std::abs(es.eigenvalues()(i)) - expected) < 1e-12);
  }
}

TEST_CASE("Hermitian T_A spectrum is symmetric under reflection in iR") {
  TorusGrid grid(32);
  CoefficientField a = make_class(CoefficientKind::hermitian, grid, 1, 5);
  CHECK(factorization_defect(a) < 1e-10);
  Eigen::ComplexEigenSolver<Mat> es(assemble_TA(a).entries, false);
  Vec ev = es.eigenvalues();
  double max_abs = ev.cwiseAbs().maxCoeff();
  int kernel = 0;
  for (Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) < 1e-8 * max_abs) {
      ++kernel;
      continue;
    }
    // Off the kernel the spectrum avoids iR and contains -conj(lambda).
    CHECK(std::abs(ev(i).real()) > 1e-3);
    double nearest = 1e300;
    for (Index j = 0; j < ev.size(); ++j) nearest = std::min(nearest, std::abs(ev(j) + std::conj(ev(i))));
    CHECK(nearest < 1e-8 * max_abs);
  }
  CHECK(kernel == 2);
}

TEST_CASE("block Hermitian T_A has real spectrum") {
  TorusGrid grid(32);
  CoefficientField b = make_class(CoefficientKind::block, grid, 1, 5);
  std::vector<Mat> samples = b.samples();
  for (Mat& s : samples) s = ((s + s.adjoint()) / 2.0).eval();
  CoefficientField a(grid, 1, CoefficientKind::block, samples);
  Eigen::ComplexEigenSolver<Mat> es(assemble_TA(a).entries, false);
  Vec ev = es.eigenvalues();
  CHECK(ev.imag().cwiseAbs().maxCoeff() <= 1e-8 * ev.cwiseAbs().maxCoeff());
}

TEST_CASE("Theta_t for the identity is the rational function of the mode block") {
  TorusGrid grid(32);
  CoefficientField a = make_class(CoefficientKind::identity, grid, 1, 0);
  double t = 0.37;
  Mat theta = assemble_theta(a, t).entries;
  for (int k : {1, 2, -4}) {
    Mat dk(2, 2);
    dk << 0.0, cplx(0, k), cplx(0, -k), 0.0;
    Mat td = t * dk;
    Mat oracle = td * (Mat::Identity(2, 2) + td * td).inverse();
    auto [a1, b1] = mode_coords(grid, k, theta * mode_pair(grid, k, 1.0, 0.0));
    auto [a2, b2] = mode_coords(grid, k, theta * mode_pair(grid, k, 0.0, 1.0));
    Mat block(2, 2);
    block << a1, a2, b1, b2;
    CHECK((block - oracle).norm() < 1e-12);
  }
  CHECK((theta * mode_pair(grid, 0, 1.0, 2.0)).norm() < 1e-12);
  CHECK((assemble_Q(a, t).entries - theta).norm() < 1e-12);
}

TEST_CASE("Theta_t is O(t) on a fixed band-limited field") {
  TorusGrid grid(32);
  CoefficientField a = make_class(CoefficientKind::hermitian, grid, 1, 2);
  Vec v = mode_pair(grid, 1, 1.0, 0.5) + mode_pair(grid, -2, 0.2, 1.0);
  double t1 = 1e-3, t2 = 1e-4;
  double n1 = (assemble_theta(a, t1).entries * v).norm();
  double n2 = (assemble_theta(a, t2).entries * v).norm();
  CHECK(n1 / n2 == doctest::Approx(10.0).epsilon(1e-3));
}

TEST_CASE("Q_t obeys submultiplicativity and matches gamma on constants") {
  TorusGrid grid(32);
  CoefficientField a = make_class(CoefficientKind::hermitian, grid, 1, 8);
  double t = 0.5;
  Mat theta = assemble_theta(a, t).entries;
  Mat q = assemble_Q(a, t).entries;
  AuxiliaryPair aux = auxiliary_pair(a);
  double inv_norm = 0.0;
  for (const Mat& u : aux.upper_inv)
    inv_norm = std::max(inv_norm, Eigen::JacobiSVD<Mat>(u).singularValues()(0));
  auto opnorm = [](const Mat& m) { return Eigen::JacobiSVD<Mat>(m).singularValues()(0); };
  CHECK(opnorm(q) <= opnorm(theta) * inv_norm * (1 + 1e-12));

  ResolventFamily family(a);
  std::vector<Mat> g = gamma(family, t);
  for (int c = 0; c < 2; ++c) {
    Vec w = Vec::Zero(64);
    w.segment(32 * c, 32).setOnes();
    Vec qw = q * w;
    for (int i = 0; i < 32; ++i) {
      CHECK(std::abs(g[i](0, c) - qw(i)) < 1e-12);
      CHECK(std::abs(g[i](1, c) - qw(32 + i)) < 1e-12);
    }
  }
  CHECK((family.apply_q(t, Mat::Identity(64, 64)).result - q).norm() < 1e-12 * q.norm());
}

TEST_CASE("operator cache returns stored entries and evicts past the budget") {
  OperatorCache cache(3 * 16 * 16 * sizeof(cplx));
  auto make = [] { return std::make_shared<const Mat>(Mat::Identity(16, 16)); };
  auto first = cache.insert({1, 0.5, 0}, make());
  CHECK(cache.find({1, 0.5, 0}) == first);
  CHECK(cache.insert({1, 0.5, 0}, make()) == first);
  cache.insert({2, 0.5, 0}, make());
  cache.insert({3, 0.5, 0}, make());
  cache.insert({4, 0.5, 0}, make());
  CHECK(cache.find({1, 0.5, 0}) == nullptr);
  CHECK(cache.find({4, 0.5, 0}) != nullptr);
  cache.clear();
  CHECK(cache.entries() == 0);
}
