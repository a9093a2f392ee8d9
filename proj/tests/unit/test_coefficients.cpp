#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "hslab/coefficients.hpp"

using namespace hslab;

namespace {

CoefficientField constant_field(const TorusGrid& grid, const Mat& a0) {
  return CoefficientField(grid, static_cast<int>(a0.rows() / 2), CoefficientKind::constant,
                          std::vector<Mat>(grid.size(), a0));
}

// Smallest eigenvalue of the Hermitian part, via a dense eigensolve.
double min_real_part_eig(const Mat& a) {
  Mat h = (a + a.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("kappa of the identity and a diagonal matrix") {
  TorusGrid grid(32);
  CHECK(estimate_kappa(make_class(CoefficientKind::identity, grid, 1, 0)) ==
        doctest::Approx(1.0));
  Mat a0 = Mat::Zero(2, 2);
  a0(0, 0) = 2.0;
  a0(1, 1) = 0.5;
  CHECK(estimate_kappa(constant_field(grid, a0)) == doctest::Approx(0.5));
}

TEST_CASE("I + 0.3 H has kappa at least 0.7") {
  TorusGrid grid(32);
  CoefficientField h = make_direction(grid, 1, 11, 3, true);
  CHECK(h.is_hermitian(1e-13));
  CoefficientField a = perturb(make_class(CoefficientKind::identity, grid, 1, 0), h, 0.3);
  double kappa = estimate_kappa(a);
  double oracle = 1e300;
  for (const Mat& s : a.samples()) oracle = std::min(oracle, min_real_part_eig(s));
  CHECK(kappa == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(kappa >= 0.7 - 1e-12);
}

TEST_CASE("non-accretive fields are rejected with the offending point") {
  TorusGrid grid(32);
  std::vector<Mat> samples(32, Mat::Identity(2, 2));
  samples[5](1, 1) = -0.25;
  CoefficientField a(grid, 1, CoefficientKind::general, samples);
  try {
    estimate_kappa(a);
    FAIL("expected NotAccretive");
  } catch (const NotAccretive& e) {
    CHECK(e.location() == 5);
    CHECK(e.value() == doctest::Approx(-0.25));
  }
}

TEST_CASE("class generators produce members of their class") {
  TorusGrid grid(64);
  ClassParams params;
  for (int m : {1, 2}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      CoefficientField c = make_class(CoefficientKind::constant, grid, m, seed, params);
      CHECK(c.is_constant());
      CHECK(min_real_part_eig(c.sample(0)) >= params.kappa_target - 1e-12);

      CoefficientField h = make_class(CoefficientKind::hermitian, grid, m, seed, params);
      CHECK(h.is_hermitian());
      CHECK(estimate_kappa(h) >= params.kappa_target - 1e-12);

      CoefficientField b = make_class(CoefficientKind::block, grid, m, seed, params);
      CHECK(b.is_block());
      CHECK(estimate_kappa(b) >= params.kappa_target - 1e-12);
    }
  }
}

TEST_CASE("hermitian class is band-limited to the roughness") {
  TorusGrid grid(64);
  ClassParams params;
  params.roughness = 3;
  CoefficientField h = make_class(CoefficientKind::hermitian, grid, 1, 4, params);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      Vec entry(64);
      for (int i = 0; i < 64; ++i) entry(i) = h.sample(i)(r, c);
      Vec coeffs = grid.forward(entry);
      for (int s = 0; s < 64; ++s) {
        if (std::abs(grid.mode(s)) > 3) CHECK(std::abs(coeffs(s)) < 1e-13);
      }
    }
  }
}

TEST_CASE("same seed gives the same function on nested grids") {
  TorusGrid coarse(32), fine(64);
  CoefficientField a = make_class(CoefficientKind::hermitian, coarse, 1, 9);
  CoefficientField b = make_class(CoefficientKind::hermitian, fine, 1, 9);
  for (int i = 0; i < 32; ++i) CHECK((a.sample(i) - b.sample(2 * i)).norm() < 1e-13);
  CoefficientField r = resample(a, fine);
  for (int i = 0; i < 64; ++i) CHECK((r.sample(i) - b.sample(i)).norm() < 1e-12);
}

TEST_CASE("perturb at zero is the identity map and adds Weyl-bounded shifts") {
  TorusGrid grid(32);
  CoefficientField a = make_class(CoefficientKind::identity, grid, 1, 0);
  CoefficientField e = make_direction(grid, 1, 5, 3, true);
  // Normalized on a fine reference grid, so the coarse-grid maximum is at most 1.
  CHECK(e.sup_norm() <= 1.0 + 1e-12);
  CHECK(e.sup_norm() > 0.9);
  CoefficientField same = perturb(a, e, 0.0);
  CHECK(same.kind() == CoefficientKind::identity);
  CHECK(same.content_hash() == a.content_hash());
  CHECK(estimate_kappa(perturb(a, e, 0.2)) >= 0.8 - 1e-12);

  CoefficientField g = make_direction(grid, 1, 5, 3, false);
  CoefficientField p = perturb(make_class(CoefficientKind::hermitian, grid, 1, 2), g, 0.05);
  CHECK(p.kind() == CoefficientKind::general);
  CHECK_FALSE(p.is_hermitian());
  CHECK_FALSE(p.is_block());
  CHECK_FALSE(p.is_constant());
}

TEST_CASE("auxiliary pair recovers b = lower upper^{-1}") {
  TorusGrid grid(32);
  CoefficientField a = make_class(CoefficientKind::hermitian, grid, 2, 3);
  AuxiliaryPair aux = auxiliary_pair(a);
  for (int i = 0; i < 32; i += 5) {
    CHECK((aux.upper[i] * aux.upper_inv[i] - Mat::Identity(4, 4)).norm() < 1e-12);
    CHECK((aux.b[i] * aux.upper[i] - aux.lower[i]).norm() < 1e-12);
    CHECK(aux.upper[i].block(0, 0, 2, 2).isApprox(a.block_nn(i)));
  }
  CHECK(aux.min_sigma_upper > 0.0);
}

TEST_CASE("json round trip is exact") {
  TorusGrid grid(32, 5.0);
  CoefficientField a = make_class(CoefficientKind::hermitian, grid, 2, 6);
  CoefficientField b = coefficient_from_json(nlohmann::json::parse(to_json(a).dump()));
  CHECK(b.m() == 2);
  CHECK(b.grid().size() == 32);
  CHECK(b.grid().length() == 5.0);
  CHECK(b.kind() == CoefficientKind::hermitian);
  CHECK(b.content_hash() == a.content_hash());
  CHECK(coefficient_kind_from_string(to_string(CoefficientKind::block)) ==
        CoefficientKind::block);
}
