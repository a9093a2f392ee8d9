// Command-line front end. Exit codes: 0 all verdicts pass, 2 some verdict
// fails, 1 usage or configuration error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "hslab/dirichlet_solver.hpp"
#include "hslab/io.hpp"
#include "hslab/run_config.hpp"
#include "hslab/test_fields.hpp"
#include "hslab/verifier.hpp"

namespace fs = std::filesystem;
using namespace hslab;
using nlohmann::json;

namespace {

constexpr int kPass = 0;
constexpr int kUsage = 1;
constexpr int kFail = 2;

struct Common {
  std::string config_path;
  std::string coeff;
  std::optional<std::uint64_t> seed;
  std::optional<int> points;
  std::optional<int> samples;
  std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "run configuration JSON");
  cmd->add_option("--coeff", c.coeff, "identity|constant|hermitian|block or a coefficient JSON file");
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--N", c.points, "grid points (power of two)");
  cmd->add_option("--M", c.samples, "t-grid samples");
  cmd->add_option("--out", c.out, "output directory or file");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_run_config(c.config_path);
  if (!c.coeff.empty()) cfg.coefficient = c.coeff;
  if (c.seed) cfg.seed = *c.seed;
  if (c.points) cfg.points = *c.points;
  if (c.samples) cfg.samples = *c.samples;
  cfg.validate();
  return cfg;
}

CoefficientSource source_of(const RunConfig& cfg) {
  return CoefficientSource::parse(cfg.coefficient, cfg.seed, cfg.m, cfg.class_params);
}

std::string directory_label(const CoefficientSource& s) {
  const fs::path p(s.label());
  return p.has_extension() ? p.stem().string() : s.label();
}

// "modes:1,3", "random" or a CSV file with one row per grid point.
Vec boundary_data(const std::string& spec, const TorusGrid& grid, int m, std::uint64_t seed) {
  if (spec == "random") return random_boundary_data(grid, m, seed);
  if (spec.rfind("modes:", 0) == 0) {
    std::vector<int> modes;
    std::stringstream ss(spec.substr(6));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        modes.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw InvalidArgument("bad mode '" + item + "' in --u0");
      }
    }
    if (modes.empty()) throw InvalidArgument("--u0 modes: needs at least one mode");
    return mode_data(grid, m, modes);
  }
  auto [components, u] = parse_boundary_csv(grid, read_file(spec));
  if (components != m) throw InvalidArgument("boundary data has the wrong number of components");
  return u;
}

void emit(const VerdictReport& r, const fs::path& dir) {
  const std::string stem = (dir / r.id).string();
  write_file_atomic(stem + ".json", r.to_json().dump(2) + "\n");
  if (!r.table_header.empty()) write_file_atomic(stem + ".csv", r.table_csv());
  write_file_atomic(stem + ".timing.json", json{{"id", r.id}, {"seconds", r.seconds}}.dump(2) + "\n");
  std::printf("%-10s %s", r.id.c_str(), r.pass() ? "PASS" : "FAIL");
  for (const Check& c : r.checks) {
    if (!c.pass) std::printf("  [%s = %.3e]", c.name.c_str(), c.value);
  }
  if (!r.error.empty()) std::printf("  error: %s", r.error.c_str());
  std::printf("\n");
  std::fflush(stdout);
}

bool run_suite(Verifier& v, const std::vector<std::string>& ids, const fs::path& dir) {
  bool ok = true;
  for (const auto& id : ids) {
    const VerdictReport r = v.run(id);
    emit(r, dir);
    ok = ok && r.pass();
  }
  return ok;
}

int cmd_gen_coeff(const Common& c, const std::string& kind, int m, double eps,
                  std::uint64_t direction_seed) {
  RunConfig cfg = resolve(c);
  cfg.m = m;
  const TorusGrid grid = cfg.grid();
  CoefficientField a = make_class(coefficient_kind_from_string(kind), grid, m, cfg.seed, cfg.class_params);
  if (eps != 0.0) {
    a = perturb(a, make_direction(grid, m, direction_seed, std::max(1, cfg.class_params.roughness), false), eps);
  }
  const std::string path = c.out == "out" ? "coefficient.json" : c.out;
  write_file_atomic(path, to_json(a).dump() + "\n");
  std::printf("wrote %s (kind %s, N %d, m %d, kappa %.6g)\n", path.c_str(), to_string(a.kind()).c_str(),
              grid.size(), m, estimate_kappa(a));
  return kPass;
}

int cmd_check(const Common& c) {
  const RunConfig cfg = resolve(c);
  const CoefficientSource src = source_of(cfg);
  const CoefficientField a = src.on(cfg.grid());
  const double kappa = estimate_kappa(a);
  SolverOptions options;
  options.sigma_floor = cfg.sigma_floor;
  const WellPosedness wp = check_wellposed(a, options);
  const WellPosedness adj = check_wellposed(a.adjoint(), options);
  const json doc{{"coefficient", src.descriptor(cfg.grid())},
                 {"kappa", kappa},
                 {"Lambda", a.sup_norm()},
                 {"sigma_min_S", wp.sigma_min_s},
                 {"sigma_min_R", wp.sigma_min_r},
                 {"sigma_floor", wp.sigma_floor},
                 {"d_plus", wp.d_plus},
                 {"expected_d_plus", wp.expected_d_plus},
                 {"dirichlet_wellposed", wp.dirichlet},
                 {"regularity_wellposed", wp.regularity},
                 {"adjoint_dirichlet_wellposed", adj.dirichlet}};
  std::cout << doc.dump(2) << "\n";
  return wp.dirichlet ? kPass : kFail;
}

int cmd_solve(const Common& c, const std::string& u0_spec) {
  const RunConfig cfg = resolve(c);
  const CoefficientSource src = source_of(cfg);
  const TorusGrid grid = cfg.grid();
  const TGrid tgrid = cfg.tgrid();
  const CoefficientField a = src.on(grid);
  estimate_kappa(a);
  SolverOptions options;
  options.sigma_floor = cfg.sigma_floor;
  const DirichletProblem problem(a, options);
  const Vec u0 = boundary_data(u0_spec, grid, cfg.m, cfg.seed);
  const DirichletSolution sol = problem.solve(u0, tgrid);
  const fs::path dir(c.out);
  write_file_atomic((dir / "boundary.csv").string(), boundary_csv(grid, cfg.m, sol.data));
  write_file_atomic((dir / "U.csv").string(), field_csv(sol.u));
  write_file_atomic((dir / "gradU.csv").string(), field_csv(sol.gradient));
  const bool decay_ok = sol.decay <= cfg.tolerances.decay;
  const json doc{{"coefficient", src.descriptor(grid)},
                 {"N", grid.size()},
                 {"M", tgrid.size()},
                 {"t_min", tgrid.t_min()},
                 {"t_max", tgrid.t_max()},
                 {"sigma_min_S", problem.wellposedness().sigma_min_s},
                 {"data_norm", grid.norm(sol.data)},
                 {"removed_constant_norm", sol.constant_part.norm()},
                 {"trace_error", sol.trace_error},
                 {"decay", sol.decay},
                 {"decay_pass", decay_ok}};
  write_file_atomic((dir / "solve.json").string(), doc.dump(2) + "\n");
  std::cout << doc.dump(2) << "\n";
  return decay_ok ? kPass : kFail;
}

int cmd_verify(const Common& c, const std::string& which) {
  RunConfig cfg = resolve(c);
  std::vector<std::string> ids;
  if (which == "all") {
    ids = cfg.experiments.empty() ? experiment_ids() : cfg.experiments;
  } else {
    const auto& known = experiment_ids();
    if (std::find(known.begin(), known.end(), which) == known.end()) {
      throw InvalidArgument("unknown experiment " + which);
    }
    ids = {which};
  }
  const CoefficientSource src = source_of(cfg);
  const fs::path out(c.out);
  bool ok = true;
  if (which == "all" && !src.is_identity()) {
    // Self-test on A = I before touching the user's coefficient.
    RunConfig golden = cfg;
    golden.coefficient = "identity";
    Verifier gate(golden, CoefficientSource::named(CoefficientKind::identity, cfg.seed, cfg.m));
    std::printf("golden suite (identity)\n");
    if (!run_suite(gate, ids, out / "golden")) {
      std::printf("golden suite failed; user coefficient not run\n");
      return kFail;
    }
  }
  Verifier v(cfg, src);
  std::printf("suite (%s)\n", src.label().c_str());
  ok = run_suite(v, ids, out / directory_label(src)) && ok;
  return ok ? kPass : kFail;
}

int cmd_sweep(const Common& c, std::optional<double> eps_max, std::optional<int> points) {
  RunConfig cfg = resolve(c);
  if (eps_max) cfg.openness_eps_max = *eps_max;
  if (points) cfg.openness_points = *points;
  cfg.validate();
  Verifier v(cfg, source_of(cfg));
  const VerdictReport r = v.run("OPENNESS");
  emit(r, fs::path(c.out) / "sweep");
  return r.pass() ? kPass : kFail;
}

int cmd_dump(const Common& c, const std::string& what, double t) {
  const RunConfig cfg = resolve(c);
  const CoefficientField a = source_of(cfg).on(cfg.grid());
  Mat m;
  if (what == "D") m = assemble_D(a.grid(), a.m()).entries;
  else if (what == "TA") m = assemble_TA(a).entries;
  else if (what == "theta") m = assemble_theta(a, t).entries;
  else if (what == "Q") m = assemble_Q(a, t).entries;
  else if (what == "sign") m = split_generator(a).split.sign;
  else if (what == "generator") m = DirichletProblem(a).generator_matrix();
  else throw InvalidArgument("dump: unknown matrix " + what);
  const std::string path = c.out == "out" ? what + ".bin" : c.out;
  write_file_atomic(path, matrix_dump(m));
  std::printf("wrote %s (%lld x %lld)\n", path.c_str(), static_cast<long long>(m.rows()),
              static_cast<long long>(m.cols()));
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"halfspace_lab: Dirichlet problems for t-independent elliptic systems on the half-space"};
  app.require_subcommand(1);

  Common gen_c, check_c, solve_c, verify_c, sweep_c, dump_c;
  std::string kind = "hermitian";
  int m = 1;
  double eps = 0.0;
  std::uint64_t direction_seed = 1;
  auto* gen = app.add_subcommand("gen-coeff", "generate a coefficient field JSON");
  add_common(gen, gen_c);
  gen->add_option("--kind", kind, "identity|constant|hermitian|block");
  gen->add_option("--m", m, "system size");
  gen->add_option("--perturb", eps, "add eps times a non-Hermitian direction");
  gen->add_option("--direction-seed", direction_seed, "seed of the perturbation direction");

  auto* check = app.add_subcommand("check", "accretivity and well-posedness verdict");
  add_common(check, check_c);

  std::string u0 = "random";
  auto* solve = app.add_subcommand("solve", "solve the Dirichlet problem and write CSV fields");
  add_common(solve, solve_c);
  solve->add_option("--u0", u0, "modes:k1,k2,... | random | boundary CSV file");

  std::string which;
  auto* verify = app.add_subcommand("verify", "run an experiment (or all) and write reports");
  add_common(verify, verify_c);
  verify->add_option("id", which, "experiment id or 'all'")->required();

  std::optional<double> eps_max;
  std::optional<int> points;
  auto* sweep = app.add_subcommand("sweep", "openness sweep of sigma_min(S) along perturbations");
  add_common(sweep, sweep_c);
  sweep->add_option("--eps-max", eps_max, "largest perturbation size");
  sweep->add_option("--points", points, "schedule length");

  std::string what = "TA";
  double t = 1.0;
  auto* dump = app.add_subcommand("dump", "binary dump of an assembled matrix");
  add_common(dump, dump_c);
  dump->add_option("--matrix", what, "D|TA|theta|Q|sign|generator");
  dump->add_option("--t", t, "t for theta and Q");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen) return cmd_gen_coeff(gen_c, kind, m, eps, direction_seed);
    if (*check) return cmd_check(check_c);
    if (*solve) return cmd_solve(solve_c, u0);
    if (*verify) return cmd_verify(verify_c, which);
    if (*sweep) return cmd_sweep(sweep_c, eps_max, points);
    if (*dump) return cmd_dump(dump_c, what, t);
  } catch (const NotAccretive& e) {
    std::fprintf(stderr, "NotAccretive: %s\n", e.what());
    return kUsage;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const IllPosed& e) {
    std::fprintf(stderr, "IllPosed: %s\n", e.what());
    return kFail;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
