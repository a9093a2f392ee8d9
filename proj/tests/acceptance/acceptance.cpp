// Acceptance run: one PASS/FAIL line per criterion. Tolerances are pinned
// here and do not follow RunConfig defaults.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hslab/dirichlet_solver.hpp"
#include "hslab/io.hpp"
#include "hslab/test_fields.hpp"
#include "hslab/verifier.hpp"

using namespace hslab;
namespace fs = std::filesystem;

namespace pinned {
constexpr double poisson = 1e-8;
constexpr double generator_symbol = 1e-9;
constexpr double hardy_balance = 1e-10;
constexpr double split_algebra = 1e-8;
constexpr double decomposition = 1e-10;
constexpr double ibp_residual = 1e-6;
constexpr double ibp_boundary = 1e-6;
constexpr double ibp_closed_form = 1e-8;
constexpr double weakform = 1e-5;
constexpr double equiv_ratio_low = 0.8;
constexpr double equiv_ratio_high = 1.25;
constexpr double equiv_golden = 1e-3;
constexpr double bilinear_oracle = 1e-6;
constexpr double bilinear_stability = 0.25;
constexpr double quad_golden = 1e-3;
constexpr double quad_stability = 0.20;
constexpr double carleson_zero = 1e-12;
constexpr double carleson_indicator = 1e-6;
constexpr double carleson_stability = 0.15;
constexpr double semigroup_law = 1e-9;
constexpr double rellich_stability = 0.20;
constexpr double block_kato = 1e-6;
constexpr double openness_jump = 2.0;
constexpr double openness_radius = 0.05;
constexpr double finite = 1e12;
constexpr int random_fields = 50;
constexpr int weakform_fields = 10;
constexpr int equiv_trials = 20;
constexpr int bilinear_trials = 200;
}  // namespace pinned

namespace {

// Accumulates named measurements against bounds for one criterion.
class Tally {
 public:
  void le(const std::string& what, double value, double bound) {
    bool ok = value <= bound;  // NaN fails
    record(ok, what + "=" + short_double(value) + (ok ? "<=" : ">") + short_double(bound));
  }
  void in(const std::string& what, double value, double lo, double hi) {
    bool ok = value >= lo && value <= hi;
    record(ok, what + "=" + short_double(value) + (ok ? " in " : " not in ") + "[" +
                   short_double(lo) + "," + short_double(hi) + "]");
  }
  void truth(const std::string& what, bool ok) { record(ok, what + (ok ? " ok" : " FAILED")); }
  void fail(const std::string& what) { record(false, what); }

  // Re-evaluates a report check against a pinned bound.
  void report_le(const VerdictReport& r, const std::string& name, double bound) {
    if (auto v = find(r, name)) le(r.id + "." + name, *v, bound);
    else fail(r.id + "." + name + " missing");
  }
  void report_in(const VerdictReport& r, const std::string& name, double lo, double hi) {
    if (auto v = find(r, name)) in(r.id + "." + name, *v, lo, hi);
    else fail(r.id + "." + name + " missing");
  }
  void report_true(const VerdictReport& r, const std::string& name) {
    if (auto v = find(r, name)) truth(r.id + "." + name, *v == 1.0);
    else fail(r.id + "." + name + " missing");
  }
  void report_completed(const VerdictReport& r) {
    if (!r.error.empty()) fail(r.id + " error: " + r.error);
  }

  bool pass() const { return failures_.empty(); }
  std::string summary() const {
    const std::vector<std::string>& items = failures_.empty() ? notes_ : failures_;
    std::string out;
    for (std::size_t i = 0; i < items.size() && i < 6; ++i) out += (i ? "; " : "") + items[i];
    if (items.size() > 6) out += "; ...";
    return out;
  }

 private:
  static std::optional<double> find(const VerdictReport& r, const std::string& name) {
    for (const Check& c : r.checks)
      if (c.name == name) return c.value;
    return std::nullopt;
  }
  static std::string short_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }
  void record(bool ok, std::string text) { (ok ? notes_ : failures_).push_back(std::move(text)); }

  std::vector<std::string> notes_;
  std::vector<std::string> failures_;
};

CoefficientField coefficient(CoefficientKind kind, const TorusGrid& grid, std::uint64_t seed) {
  return make_class(kind, grid, 1, seed);
}

Vec random_vec(Index size, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(size);
  for (Index i = 0; i < size; ++i) v(i) = cplx(g(rng), g(rng));
  return v;
}

// Shared verifiers so resolution caches are reused across criteria.
struct Sources {
  RunConfig config;
  Verifier identity;
  Verifier hermitian;
  Verifier block;

  static RunConfig make_config() {
    RunConfig c;
    c.trials.equiv = pinned::equiv_trials;
    c.trials.bilinear = pinned::bilinear_trials;
    c.trials.decomp = pinned::random_fields;
    c.trials.weakform = pinned::weakform_fields;
    return c;
  }
  Sources()
      : config(make_config()),
        identity(config, CoefficientSource::named(CoefficientKind::identity, 1, 1)),
        hermitian(config, CoefficientSource::named(CoefficientKind::hermitian, 7, 1)),
        block(config, CoefficientSource::named(CoefficientKind::block, 3, 1)) {}
};

void poisson_golden(Tally& t) {
  TorusGrid grid(32);
  DirichletProblem problem(coefficient(CoefficientKind::identity, grid, 0));
  TGrid tg(1e-4, 16 * grid.length(), 400);
  double worst = 0.0;
  for (int k = -15; k <= 16; ++k) {
    if (k == 0) continue;
    Vec u0 = grid.plane_wave(k);
    DirichletSolution sol = problem.solve(u0, tg);
    for (int j = 0; j < tg.size(); ++j) {
      Vec expected = std::exp(-std::abs(k) * tg.node(j)) * u0;
      // Relative error wherever e^{-|k|t} >= 1e-6; absolute (against ||u0||) beyond.
      double scale = std::max(expected.norm(), 1e-6 * u0.norm());
      worst = std::max(worst, (sol.u.values[j] - expected).norm() / scale);
    }
  }
  t.le("poisson_mode_error", worst, pinned::poisson);

  Eigen::ComplexEigenSolver<Mat> es(problem.generator_matrix(), false);
  std::vector<double> got, oracle;
  double imag = 0.0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    got.push_back(es.eigenvalues()(i).real());
    imag = std::max(imag, std::abs(es.eigenvalues()(i).imag()));
  }
  for (int s = 0; s < 32; ++s) oracle.push_back(-std::abs(grid.mode(s)));
  std::sort(got.begin(), got.end());
  std::sort(oracle.begin(), oracle.end());
  double symbol = imag;
  for (std::size_t i = 0; i < got.size(); ++i) symbol = std::max(symbol, std::abs(got[i] - oracle[i]));
  t.le("generator_eigenvalue_error", symbol, pinned::generator_symbol);

  const SpectralSplit& sp = problem.split();
  double balance = 0.0;
  for (int k = -15; k <= 16; ++k) {
    if (k == 0) continue;
    Vec e = Vec::Zero(64);
    e.head(32) = grid.plane_wave(k);
    Vec f = sp.v_plus * (sp.v_plus.adjoint() * e);
    double f0 = grid.norm(f.head(32)), fpar = grid.norm(f.tail(32));
    balance = std::max(balance, std::abs(f0 - fpar) / grid.norm(f));
  }
  t.le("hardy_balance", balance, pinned::hardy_balance);
}

void split_algebra(Tally& t) {
  TorusGrid grid(32);
  std::vector<std::pair<std::string, CoefficientField>> cases;
  cases.emplace_back("identity", coefficient(CoefficientKind::identity, grid, 0));
  cases.emplace_back("constant", coefficient(CoefficientKind::constant, grid, 1));
  cases.emplace_back("block", coefficient(CoefficientKind::block, grid, 1));
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
    cases.emplace_back("hermitian" + std::to_string(seed),
                       coefficient(CoefficientKind::hermitian, grid, seed));
  double worst = 0.0;
  std::string where;
  for (const auto& [name, a] : cases) {
    const SpectralSplit s = split_generator(a).split;
    const Mat& tr = s.restricted;
    const Index d = tr.rows();
    const Mat id = Mat::Identity(d, d);
    const double errors[] = {
        (s.sign * s.sign - id).norm() / id.norm(),
        (s.p_plus + s.p_minus - id).norm() / id.norm(),
        (s.p_plus * s.p_plus - s.p_plus).norm() / s.p_plus.norm(),
        (s.p_minus * s.p_minus - s.p_minus).norm() / s.p_minus.norm(),
        (s.p_plus * tr - tr * s.p_plus).norm() / tr.norm(),
    };
    for (double e : errors) {
      if (!(e <= worst)) {
        worst = e;
        where = name;
      }
    }
  }
  t.le("max_split_error(" + where + ")", worst, pinned::split_algebra);
  t.truth("classes=" + std::to_string(cases.size()), cases.size() == 13);
}

void decomposition(Tally& t) {
  TorusGrid grid(32);
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (CoefficientKind kind : {CoefficientKind::identity, CoefficientKind::constant,
                               CoefficientKind::block, CoefficientKind::hermitian}) {
    ResolventFamily family(coefficient(kind, grid, 7));
    Mat vs(64, pinned::random_fields);
    for (int c = 0; c < pinned::random_fields; ++c) vs.col(c) = random_vec(64, rng);
    for (double s : {0.01, 0.3, 3.0}) {
      for (const DecompositionTerms& term : decompose(family, s, vs))
        worst = std::max(worst, term.identity_defect);
    }
  }
  t.le("three_term_defect", worst, pinned::decomposition);
}

void integration_by_parts(Tally& t, Sources& src) {
  for (Verifier* v : {&src.identity, &src.hermitian}) {
    VerdictReport r = v->run("IBP");
    t.report_completed(r);
    t.report_le(r, "identity_residual", pinned::ibp_residual);
    t.report_le(r, "boundary_term_t_min", pinned::ibp_boundary);
    t.report_le(r, "boundary_term_t_max", pinned::ibp_boundary);
    t.report_le(r, "closed_form_identity", pinned::ibp_closed_form);
  }
}

void weak_form(Tally& t) {
  TorusGrid grid(32);
  TGrid tg = TGrid::defaults(grid, 200);
  for (CoefficientKind kind : {CoefficientKind::identity, CoefficientKind::constant,
                               CoefficientKind::block, CoefficientKind::hermitian}) {
    DirichletProblem problem(coefficient(kind, grid, 7));
    DirichletSolution sol = problem.solve(random_boundary_data(grid, 1, 5), tg);
    double worst = 0.0;
    for (int i = 0; i < pinned::weakform_fields; ++i)
      worst = std::max(worst, weakform_residual(problem, sol, random_boundary_data(grid, 1, 100 + i)));
    t.le(to_string(kind), worst, pinned::weakform);
  }
}

void equivalences(Tally& t, Sources& src) {
  VerdictReport r = src.hermitian.run("EQUIV");
  t.report_completed(r);
  t.report_le(r, "C_finite", pinned::finite);
  t.report_in(r, "C_refinement_ratio", pinned::equiv_ratio_low, pinned::equiv_ratio_high);
  t.report_le(r, "identity_mode_ratio_vs_2", pinned::equiv_golden);
  t.report_le(r, "weakform_residual", pinned::weakform);
}

void bilinear(Tally& t, Sources& src) {
  VerdictReport r = src.hermitian.run("BILINEAR");
  t.report_completed(r);
  t.report_le(r, "C_finite", pinned::finite);
  t.report_le(r, "C_refinement_change", pinned::bilinear_stability);
  t.report_le(r, "mode_pair_oracle", pinned::bilinear_oracle);
  t.truth("trials=" + std::to_string(r.table.size() / 2), r.table.size() >= 2 * pinned::bilinear_trials);
}

void quadratic(Tally& t, Sources& src) {
  VerdictReport r = src.hermitian.run("QUAD");
  t.report_completed(r);
  t.report_le(r, "identity_ratio_sq_vs_half", pinned::quad_golden);
  t.report_le(r, "C_refinement_change", pinned::quad_stability);

  // Direct single-mode evaluation of the identity constant.
  TorusGrid grid(32);
  SpectralSplit s = split_generator(coefficient(CoefficientKind::identity, grid, 0)).split;
  SemigroupTable table(s, TGrid(1e-5, 1e4, 400), true);
  double worst = 0.0;
  for (int k : {1, 3, 8}) {
    Vec e = Vec::Zero(64);
    e.head(32) = grid.plane_wave(k);
    Vec f = s.v_plus * (s.v_plus.adjoint() * e);
    double q = quadratic_estimate(s, table, Psi::resolvent, f);
    worst = std::max(worst, std::abs(q * q - 0.5) / 0.5);
  }
  t.le("direct_identity_ratio_sq", worst, pinned::quad_golden);
}

void carleson(Tally& t, Sources& src) {
  VerdictReport id = src.identity.run("CARLESON");
  t.report_completed(id);
  t.report_le(id, "carleson_norm_vanishes", pinned::carleson_zero);
  VerdictReport h = src.hermitian.run("CARLESON");
  t.report_completed(h);
  t.report_le(h, "carleson_norm_finite", pinned::finite);
  t.report_le(h, "refinement_change", pinned::carleson_stability);
  t.report_le(h, "indicator_box", pinned::carleson_indicator);
}

void section_four(Tally& t, Sources& src) {
  VerdictReport d = src.hermitian.run("DOMAIN");
  t.report_completed(d);
  t.report_le(d, "semigroup_law", pinned::semigroup_law);
  t.report_le(d, "grad_le_C_generator_finite", pinned::finite);
  t.report_le(d, "generator_le_C_grad_finite", pinned::finite);
  t.report_le(d, "grad_le_C_generator_refinement_change", pinned::rellich_stability);
  t.report_le(d, "generator_le_C_grad_refinement_change", pinned::rellich_stability);

  VerdictReport r = src.hermitian.run("RELLICH");
  t.report_completed(r);
  t.report_true(r, "wellposed_A_and_adjoint");
  t.report_le(r, "trace_constant_finite", pinned::finite);
  t.report_le(r, "rellich_constant_finite", pinned::finite);
  t.report_le(r, "trace_constant_refinement_change", pinned::rellich_stability);
  t.report_le(r, "rellich_constant_refinement_change", pinned::rellich_stability);

  VerdictReport k = src.block.run("BLOCK-KATO");
  t.report_completed(k);
  t.report_le(k, "solver_matches_sqrt_oracle", pinned::block_kato);
}

void openness(Tally& t, Sources& src) {
  VerdictReport r = src.identity.run("OPENNESS");
  t.report_completed(r);
  t.report_le(r, "non_hermitian_adjacent_jump", pinned::openness_jump);
  t.report_true(r, "non_hermitian_direction_leaves_classes");
  t.report_true(r, "wellposed_up_to_radius");

  TorusGrid grid(32);
  CoefficientField id = coefficient(CoefficientKind::identity, grid, 0);
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    CoefficientField e = make_direction(grid, 1, seed, 3, false);
    WellPosedness w = check_wellposed(perturb(id, e, pinned::openness_radius));
    t.truth("direct_eps0.05_seed" + std::to_string(seed), w.dirichlet);
  }
}

std::string read_tree(const fs::path& root, std::map<std::string, std::string>& files) {
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::string rel = fs::relative(entry.path(), root).string();
    if (rel.find(".timing.json") != std::string::npos) continue;
    files[rel] = read_file(entry.path().string());
  }
  return root.string();
}

int run_cli(const std::string& args) {
  int status = std::system(args.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism(Tally& t) {
  const char* cli = std::getenv("HSLAB_CLI");
  if (!cli) {
    t.fail("HSLAB_CLI not set");
    return;
  }
  fs::path root = fs::temp_directory_path() / ("hslab_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  // Fewer trials than the defaults keep two full runs inside the time budget;
  // every experiment still runs.
  write_file_atomic((root / "config.json").string(),
                    R"({"trials": {"equiv": 6, "bilinear": 40, "quad": 8, "decomp": 12,
                        "rellich": 30, "domain": 30, "block_kato": 4, "weakform": 4}})");
  std::map<std::string, std::string> first, second;
  for (const char* run : {"a", "b"}) {
    std::string cmd = std::string("'") + cli + "' verify all --config '" +
                      (root / "config.json").string() + "' --out '" + (root / run).string() +
                      "' > /dev/null 2>&1";
    t.truth(std::string("run_") + run + "_exit0", run_cli(cmd) == 0);
  }
  read_tree(root / "a", first);
  read_tree(root / "b", second);
  std::size_t reports = 0;
  for (const auto& [name, _] : first)
    if (name.size() > 5 && name.substr(name.size() - 5) == ".json") ++reports;
  t.truth("reports=" + std::to_string(reports), reports == experiment_ids().size());
  t.truth("byte_identical(" + std::to_string(first.size()) + " files)", first == second);
  fs::remove_all(root);
}

}  // namespace

int main() {
  Sources src;
  struct Criterion {
    int number;
    const char* title;
    std::function<void(Tally&)> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "Poisson golden suite", poisson_golden},
      {2, "spectral split algebra", split_algebra},
      {3, "three-term decomposition identity", decomposition},
      {4, "integration by parts in t", [&](Tally& t) { integration_by_parts(t, src); }},
      {5, "weak-form residual", weak_form},
      {6, "four-way norm equivalence", [&](Tally& t) { equivalences(t, src); }},
      {7, "bilinear estimate", [&](Tally& t) { bilinear(t, src); }},
      {8, "quadratic estimates", [&](Tally& t) { quadratic(t, src); }},
      {9, "Carleson norm", [&](Tally& t) { carleson(t, src); }},
      {10, "semigroup, Rellich, domain and block-Kato", [&](Tally& t) { section_four(t, src); }},
      {11, "openness sweep", [&](Tally& t) { openness(t, src); }},
      {12, "determinism of verify all", determinism},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    Tally tally;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(tally);
    } catch (const std::exception& e) {
      tally.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = tally.pass() && secs <= 60.0;
    if (secs > 60.0) tally.fail("over 60 s");
    if (!ok) ++failed;
    std::printf("%s %2d %s [%.1fs]: %s\n", ok ? "PASS" : "FAIL", c.number, c.title, secs,
                tally.summary().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
