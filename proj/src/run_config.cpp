#include "hslab/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace hslab {

using nlohmann::json;

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

template <class T>
void read(const json& doc, const char* key, T& value) {
  if (doc.contains(key)) value = doc.at(key).get<T>();
}

void reject_unknown(const json& doc, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : doc.items()) {
    if (!known.count(item.key())) throw InvalidArgument("unknown key '" + item.key() + "' in " + where);
  }
}

#define HSLAB_TOLERANCE_FIELDS(X)                                                             \
  X(poisson) X(generator_symbol) X(hardy_balance) X(split_algebra) X(decomposition)          \
  X(ibp_residual) X(ibp_boundary) X(ibp_closed_form) X(weakform) X(decay) X(equiv_golden)    \
  X(equiv_stability) X(bilinear_oracle) X(bilinear_stability) X(quad_golden)                 \
  X(quad_stability) X(carleson_zero) X(carleson_indicator) X(carleson_stability)             \
  X(semigroup_law) X(generator_derivative) X(generator_semigroup) X(rellich_stability)        \
  X(block_kato) X(kato_golden) X(openness_jump) X(openness_radius)

#define HSLAB_TRIAL_FIELDS(X) \
  X(equiv) X(weakform) X(bilinear) X(ibp) X(quad) X(decomp) X(rellich) X(domain) X(block_kato)

}  // namespace

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {"EQUIV",    "BILINEAR", "IBP",     "QUAD",
                                               "DECOMP",   "CARLESON", "RELLICH", "DOMAIN",
                                               "OPENNESS", "BLOCK-KATO"};
  return ids;
}

TorusGrid RunConfig::grid(int refinement) const { return TorusGrid(points << refinement, length); }

TGrid RunConfig::tgrid(int refinement) const {
  const TorusGrid g = grid(refinement);
  const double lo = t_min > 0.0 ? t_min : g.length() / (8.0 * g.size());
  const double hi = t_max > 0.0 ? t_max : 16.0 * g.length();
  return TGrid(lo, hi, samples << refinement);
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidArgument("config: " + what); };
  if (schema != 1) fail("unsupported schema " + std::to_string(schema));
  if (!is_power_of_two(points) || points < 32) fail("N must be a power of two >= 32");
  if (samples < 16) fail("M must be at least 16");
  if (t_min < 0.0 || t_max < 0.0) fail("t_min and t_max must be positive (or 0 for defaults)");
  if (t_min > 0.0 && t_max > 0.0 && !(t_min < t_max)) fail("t_min must be below t_max");
  if (!(length > 0.0)) fail("L must be positive");
  if (m < 1) fail("m must be at least 1");
  if (!(box.c0 > 0.0 && box.c0 < 1.0)) fail("c0 must lie in (0, 1)");
  if (!(box.c1 > 0.0)) fail("c1 must be positive");
  if (!(aperture > 0.0)) fail("aperture must be positive");
  if (!(sigma_floor > 0.0)) fail("sigma_floor must be positive");
  if (!(class_params.kappa_target > 0.0)) fail("kappa_target must be positive");
  if (class_params.roughness < 0 || 4 * class_params.roughness > points) {
    fail("roughness must lie in [0, N/4]");
  }
  if (!(golden_t_min > 0.0) || golden_samples < 16) fail("golden t-grid invalid");
  if (!(ibp_t_min > 0.0) || ibp_samples < 16) fail("ibp t-grid invalid");
  if (!(openness_eps_max > 0.0) || openness_points < 2) fail("openness schedule invalid");
  const Trials& t = trials;
  for (int n : {t.equiv, t.weakform, t.bilinear, t.ibp, t.quad, t.decomp, t.rellich, t.domain,
                t.block_kato}) {
    if (n < 1) fail("trial counts must be positive");
  }
  const auto& ids = experiment_ids();
  for (const auto& e : experiments) {
    if (std::find(ids.begin(), ids.end(), e) == ids.end()) fail("unknown experiment " + e);
  }
  if (coefficient.empty()) fail("coefficient spec is empty");
}

json to_json(const RunConfig& c) {
  json tol;
#define X(name) tol[#name] = c.tolerances.name;
  HSLAB_TOLERANCE_FIELDS(X)
#undef X
  json trials;
#define X(name) trials[#name] = c.trials.name;
  HSLAB_TRIAL_FIELDS(X)
#undef X
  return json{{"schema", c.schema},
              {"N", c.points},
              {"M", c.samples},
              {"t_min", c.t_min},
              {"t_max", c.t_max},
              {"L", c.length},
              {"m", c.m},
              {"c0", c.box.c0},
              {"c1", c.box.c1},
              {"aperture", c.aperture},
              {"l1_average", c.l1_average},
              {"sigma_floor", c.sigma_floor},
              {"seed", c.seed},
              {"kappa_target", c.class_params.kappa_target},
              {"roughness", c.class_params.roughness},
              {"amplitude", c.class_params.amplitude},
              {"coefficient", c.coefficient},
              {"experiments", c.experiments},
              {"trials", trials},
              {"tolerances", tol},
              {"golden_t_min", c.golden_t_min},
              {"golden_M", c.golden_samples},
              {"ibp_t_min", c.ibp_t_min},
              {"ibp_M", c.ibp_samples},
              {"openness_eps_max", c.openness_eps_max},
              {"openness_points", c.openness_points}};
}

RunConfig run_config_from_json(const json& doc) {
  if (!doc.is_object()) throw InvalidArgument("config must be a JSON object");
  reject_unknown(doc,
                 {"schema", "N", "M", "t_min", "t_max", "L", "m", "c0", "c1", "aperture",
                  "l1_average", "sigma_floor", "seed", "kappa_target", "roughness", "amplitude",
                  "coefficient", "experiments", "trials", "tolerances", "golden_t_min",
                  "golden_M", "ibp_t_min", "ibp_M", "openness_eps_max", "openness_points"},
                 "config");
  RunConfig c;
  try {
    read(doc, "schema", c.schema);
    read(doc, "N", c.points);
    read(doc, "M", c.samples);
    read(doc, "t_min", c.t_min);
    read(doc, "t_max", c.t_max);
    read(doc, "L", c.length);
    read(doc, "m", c.m);
    read(doc, "c0", c.box.c0);
    read(doc, "c1", c.box.c1);
    read(doc, "aperture", c.aperture);
    read(doc, "l1_average", c.l1_average);
    read(doc, "sigma_floor", c.sigma_floor);
    read(doc, "seed", c.seed);
    read(doc, "kappa_target", c.class_params.kappa_target);
    read(doc, "roughness", c.class_params.roughness);
    read(doc, "amplitude", c.class_params.amplitude);
    read(doc, "coefficient", c.coefficient);
    read(doc, "experiments", c.experiments);
    read(doc, "golden_t_min", c.golden_t_min);
    read(doc, "golden_M", c.golden_samples);
    read(doc, "ibp_t_min", c.ibp_t_min);
    read(doc, "ibp_M", c.ibp_samples);
    read(doc, "openness_eps_max", c.openness_eps_max);
    read(doc, "openness_points", c.openness_points);
    if (doc.contains("trials")) {
      const json& t = doc.at("trials");
      reject_unknown(t, {
#define X(name) #name,
          HSLAB_TRIAL_FIELDS(X)
#undef X
      }, "trials");
#define X(name) read(t, #name, c.trials.name);
      HSLAB_TRIAL_FIELDS(X)
#undef X
    }
    if (doc.contains("tolerances")) {
      const json& t = doc.at("tolerances");
      reject_unknown(t, {
#define X(name) #name,
          HSLAB_TOLERANCE_FIELDS(X)
#undef X
      }, "tolerances");
#define X(name) read(t, #name, c.tolerances.name);
      HSLAB_TOLERANCE_FIELDS(X)
#undef X
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidArgument("malformed config file " + path + ": " + e.what());
  }
  return run_config_from_json(doc);
}

}  // namespace hslab
