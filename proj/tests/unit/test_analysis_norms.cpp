#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hslab/analysis_norms.hpp"

using namespace hslab;

namespace {

Vec random_field(int size, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(size);
  for (int i = 0; i < size; ++i) v(i) = cplx(g(rng), g(rng));
  return v;
}

// Removes the mean of each of `components` blocks.
Vec zero_mean(const TorusGrid& grid, int components, Vec v) {
  int n = grid.size();
  for (int c = 0; c < components; ++c) {
    cplx mean = v.segment(c * n, n).mean();
    v.segment(c * n, n).array() -= mean;
  }
  return v;
}

HalfSpaceField constant_field(const TorusGrid& grid, const TGrid& tgrid, cplx value) {
  HalfSpaceField f(grid, tgrid, 1);
  for (auto& v : f.values) v.setConstant(value);
  return f;
}

}  // namespace

TEST_CASE("square norm of e^{-t} against the exponential integral") {
  TorusGrid grid(32);
  TGrid tg(1e-3, 20.0, 400);
  HalfSpaceField f(grid, tg, 1);
  CHECK(square_norm(f) == 0.0);
  for (int j = 0; j < tg.size(); ++j) f.values[j].setConstant(std::exp(-tg.node(j)));
  // int e^{-2t} dt/t = E1(2 a) - E1(2 b), E1(x) = -Ei(-x).
  double oracle = grid.length() * (std::expint(-2 * tg.t_max()) - std::expint(-2 * tg.t_min()));
  double got = square_norm(f);
  CHECK(got * got == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("scaled t-derivative of the Poisson mode has square norm 1/4 per unit") {
  TorusGrid grid(32);
  TGrid tg(1e-5, 1e3, 400);
  int k = 3;
  HalfSpaceField f(grid, tg, 1);
  Vec w = grid.plane_wave(k);
  for (int j = 0; j < tg.size(); ++j) {
    double t = tg.node(j);
    f.values[j] = t * k * std::exp(-t * k) * w;
  }
  double got = square_norm(f);
  CHECK(got * got == doctest::Approx(0.25 * grid.length()).epsilon(1e-6));
}

TEST_CASE("modified maximal function of a constant is |c| sqrt(4 c0 c1)") {
  TorusGrid grid(32);
  TGrid tg(1e-3, 50.0, 200);
  CHECK(ntm_modified(HalfSpaceField(grid, tg, 1)).maxCoeff() == 0.0);
  for (WhitneyBox box : {WhitneyBox{0.5, 1.0}, WhitneyBox{0.25, 0.3}}) {
    RVec n = ntm_modified(constant_field(grid, tg, cplx(1.5, -2.0)), box);
    double expected = 2.5 * std::sqrt(4 * box.c0 * box.c1);
    CHECK(n.maxCoeff() == doctest::Approx(expected).epsilon(1e-10));
    CHECK(n.minCoeff() == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("modified maximal function is monotone") {
  TorusGrid grid(32);
  TGrid tg(1e-2, 20.0, 100);
  std::mt19937_64 rng(4);
  HalfSpaceField f(grid, tg, 2), g(grid, tg, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int j = 0; j < tg.size(); ++j) {
    f.values[j] = random_field(64, rng);
    g.values[j] = f.values[j] * (1.0 + u(rng));
  }
  RVec nf = ntm_modified(f), ng = ntm_modified(g);
  for (int i = 0; i < 32; ++i) CHECK(nf(i) <= ng(i) + 1e-14);
}

TEST_CASE("standard maximal function: zero, constant, and one spike") {
  TorusGrid grid(32);
  TGrid tg(1e-2, 20.0, 100);
  CHECK(ntm_standard(HalfSpaceField(grid, tg, 1)).maxCoeff() == 0.0);
  RVec c = ntm_standard(constant_field(grid, tg, cplx(0, 3)));
  CHECK(c.minCoeff() == doctest::Approx(3.0));
  CHECK(c.maxCoeff() == doctest::Approx(3.0));

  HalfSpaceField spike(grid, tg, 1);
  int j1 = 60, i1 = 10;
  spike.values[j1](i1) = 1.0;
  RVec n = ntm_standard(spike);
  double t1 = tg.node(j1);
  for (int i = 0; i < 32; ++i) {
    double expected = grid.periodic_distance(grid.point(i), grid.point(i1)) < t1 ? 1.0 : 0.0;
    CHECK(n(i) == expected);
  }
  RVec l1 = ntm_standard(constant_field(grid, tg, 2.0), 1.0, true);
  CHECK(l1.maxCoeff() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("P_t multiplier") {
  TorusGrid grid(32);
  Vec one = Vec::Constant(32, 1.0);
  CHECK((apply_Pt(grid, 1, one, 7.0) - one).norm() < 1e-12);
  Vec w = grid.plane_wave(4);
  CHECK((apply_Pt(grid, 1, w, 0.25) - 0.5 * w).norm() < 1e-12);

  Vec v = grid.plane_wave(1) + 0.5 * grid.plane_wave(-3);
  double e1 = (apply_Pt(grid, 1, v, 1e-2) - v).norm();
  double e2 = (apply_Pt(grid, 1, v, 1e-3) - v).norm();
  CHECK(e1 / e2 == doctest::Approx(100.0).epsilon(1e-3));
}

TEST_CASE("smoothing quotient") {
  TorusGrid grid(32);
  Vec w = grid.plane_wave(2);
  CHECK((smoothing_quotient(grid, 1, w, 0.5) - 0.5 * w).norm() < 1e-12);
  double t = 1e-4;
  CHECK(smoothing_quotient(grid, 1, w, t).norm() / w.norm() ==
        doctest::Approx(2 * t).epsilon(1e-6));

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    Vec v = zero_mean(grid, 2, random_field(64, rng));
    for (double s : {0.01, 0.3, 2.0}) {
      CHECK(smoothing_quotient(grid, 2, v, s).norm() <= 0.5 * v.norm() + 1e-12);
      // quotient composed with t|D| reproduces I - P_t on zero-mean fields.
      Vec lhs = smoothing_quotient(grid, 2, apply_scaled_abs_derivative(grid, 2, v, s), s);
      Vec rhs = v - apply_Pt(grid, 2, v, s);
      CHECK((lhs - rhs).norm() < 1e-12 * v.norm());
    }
  }
  CHECK_THROWS_AS(smoothing_quotient(grid, 1, Vec::Constant(32, 1.0), 0.3), InvalidArgument);
}

TEST_CASE("dyadic averaging") {
  TorusGrid grid(32);
  double L = grid.length();
  Vec one = Vec::Constant(32, cplx(2, 1));
  CHECK((apply_St(grid, 1, one, 0.3) - one).norm() < 1e-12);

  Vec alt(32);
  for (int i = 0; i < 32; ++i) alt(i) = i % 2 ? -1.0 : 1.0;
  CHECK(apply_St(grid, 1, alt, L).norm() < 1e-14);
  CHECK((apply_St(grid, 1, alt, 1e-6) - alt).norm() < 1e-14);

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Vec v = random_field(64, rng);
    double t = L * std::pow(2.0, -(trial % 6) - 0.5);
    Vec s = apply_St(grid, 2, v, t);
    CHECK(s.norm() <= v.norm() + 1e-12);
    CHECK((apply_St(grid, 2, s, t) - s).norm() < 1e-12 * (1 + s.norm()));
  }
  CHECK_THROWS_AS(apply_St(grid, 1, one, 1.5 * L), InvalidArgument);
}

TEST_CASE("gamma vanishes for identity and constant block coefficients") {
  TorusGrid grid(32);
  ResolventFamily id(make_class(CoefficientKind::identity, grid, 1, 0));
  CHECK(gamma_norm_sq(gamma(id, 0.4)).maxCoeff() < 1e-24);

  Mat a0(2, 2);
  a0 << cplx(1.5, 0.2), 0.0, 0.0, cplx(0.8, -0.4);
  ResolventFamily block(
      CoefficientField(grid, 1, CoefficientKind::block, std::vector<Mat>(32, a0)));
  CHECK(gamma_norm_sq(gamma(block, 0.4)).maxCoeff() < 1e-24);

  ResolventFamily herm(make_class(CoefficientKind::hermitian, grid, 1, 3));
  CHECK(gamma_norm_sq(gamma(herm, 0.4)).maxCoeff() > 1e-4);
}

TEST_CASE("three-term decomposition sums to Q_t v") {
  TorusGrid grid(32);
  std::mt19937_64 rng(12);
  Mat vs(64, 6);
  for (int c = 0; c < 6; ++c) vs.col(c) = random_field(64, rng);
  for (CoefficientKind kind : {CoefficientKind::identity, CoefficientKind::hermitian,
                               CoefficientKind::block}) {
    ResolventFamily family(make_class(kind, grid, 1, 5));
    for (double t : {0.05, 1.0}) {
      auto terms = decompose(family, t, vs);
      REQUIRE(terms.size() == 6);
      for (const auto& term : terms) {
        CHECK(term.identity_defect < 1e-10);
        if (kind == CoefficientKind::identity) CHECK(term.paraproduct.norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("Carleson norm of zero and of an indicator box") {
  TorusGrid grid(32);
  double L = grid.length();
  // log step log(2)/20, so every dyadic side is a node.
  TGrid tg(L / 1024, 16 * L, 281);
  std::vector<RVec> zero(tg.size(), RVec::Zero(32));
  CHECK(carleson_norm(grid, tg, zero).carleson_norm == 0.0);

  DyadicTree tree(grid);
  int level = 2, index = 1;
  double side = tree.side(level);
  std::vector<RVec> density(tg.size(), RVec::Zero(32));
  for (int j = 0; j < tg.size(); ++j) {
    if (tg.node(j) > side * (1 + 1e-12)) continue;
    for (int i = 0; i < 32; ++i)
      if (tree.interval_of(level, i) == index) density[j](i) = 1.0;
  }
  CarlesonBoxReport report = carleson_norm(grid, tg, density);
  CHECK(report.carleson_norm == doctest::Approx(std::log(side / tg.t_min())).epsilon(1e-6));
  CHECK(report.argmax.level == level);
  CHECK(report.argmax.index == index);
}
