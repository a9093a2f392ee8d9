#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hslab/analysis_norms.hpp"
#include "hslab/coefficients.hpp"
#include "hslab/torus_grid.hpp"

namespace hslab {

/// Pass/fail thresholds of the verifier. Relative unless stated.
struct Tolerances {
  double poisson = 1e-8;
  double generator_symbol = 1e-9;
  double hardy_balance = 1e-10;
  double split_algebra = 1e-8;
  double decomposition = 1e-10;
  double ibp_residual = 1e-6;
  double ibp_boundary = 1e-6;
  double ibp_closed_form = 1e-8;
  double weakform = 1e-5;
  double decay = 1e-8;
  double equiv_golden = 1e-3;
  /// C(2N)/C(N) must lie in [1/equiv_stability, equiv_stability].
  double equiv_stability = 1.25;
  double bilinear_oracle = 1e-6;
  double bilinear_stability = 0.25;
  double quad_golden = 1e-3;
  double quad_stability = 0.20;
  double carleson_zero = 1e-12;
  double carleson_indicator = 1e-6;
  double carleson_stability = 0.15;
  double semigroup_law = 1e-9;
  double generator_derivative = 1e-7;
  double generator_semigroup = 1e-8;
  double rellich_stability = 0.20;
  double block_kato = 1e-6;
  double kato_golden = 1e-9;
  /// Largest allowed ratio of sigma_min(S) between adjacent epsilons.
  double openness_jump = 2.0;
  /// Perturbation size up to which the verdict must stay well-posed.
  double openness_radius = 0.05;
};

struct Trials {
  int equiv = 20;
  int weakform = 10;
  int bilinear = 200;
  int ibp = 8;
  int quad = 20;
  int decomp = 50;
  int rellich = 100;
  int domain = 100;
  int block_kato = 10;
};

struct RunConfig {
  int schema = 1;
  int points = 32;
  int samples = 200;
  /// 0 selects the grid defaults L/(8N) and 16L.
  double t_min = 0.0;
  double t_max = 0.0;
  double length = 2.0 * kPi;
  int m = 1;
  WhitneyBox box;
  double aperture = 1.0;
  bool l1_average = false;
  double sigma_floor = 1e-6;
  std::uint64_t seed = 1;
  ClassParams class_params;
  /// Class name (identity, constant, hermitian, block) or a coefficient JSON path.
  std::string coefficient = "identity";
  std::vector<std::string> experiments;
  Trials trials;
  Tolerances tolerances;
  /// Lower end of the t-grid used by closed-form checks.
  double golden_t_min = 1e-4;
  int golden_samples = 400;
  /// t-grid for the integration-by-parts identity, where t ||d_t F|| must vanish at both ends.
  double ibp_t_min = 1e-9;
  int ibp_samples = 400;
  double openness_eps_max = 0.5;
  int openness_points = 20;

  TorusGrid grid(int refinement = 0) const;
  TGrid tgrid(int refinement = 0) const;
  /// Throws InvalidArgument naming the first bad field.
  void validate() const;
};

const std::vector<std::string>& experiment_ids();

nlohmann::json to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

}  // namespace hslab
