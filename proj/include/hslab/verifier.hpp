#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hslab/coefficients.hpp"
#include "hslab/dirichlet_solver.hpp"
#include "hslab/run_config.hpp"

namespace hslab {

/// A coefficient that can be realized on any dyadic grid: either a named
/// class (regenerated from its seed) or a stored field (resampled).
class CoefficientSource {
 public:
  static CoefficientSource named(CoefficientKind kind, std::uint64_t seed, int m,
                                 const ClassParams& params = {});
  static CoefficientSource stored(CoefficientField field, std::string path);
  /// Class name or JSON path, as accepted by --coeff.
  static CoefficientSource parse(const std::string& spec, std::uint64_t seed, int m,
                                 const ClassParams& params = {});

  CoefficientField on(const TorusGrid& grid) const;
  bool is_identity() const;
  int m() const { return m_; }
  /// Label used for report directories and descriptors.
  const std::string& label() const { return label_; }
  nlohmann::json descriptor(const TorusGrid& grid) const;

 private:
  CoefficientSource() = default;
  std::optional<CoefficientKind> kind_;
  std::optional<CoefficientField> field_;
  std::uint64_t seed_ = 0;
  int m_ = 1;
  ClassParams params_;
  std::string label_;
};

struct Check {
  std::string name;
  double value = 0.0;
  /// "<=", ">=", "in" (value within [low, high]) or "true".
  std::string relation;
  double low = 0.0;
  double high = 0.0;
  bool pass = false;
};

struct VerdictReport {
  std::string id;
  std::string statement;
  nlohmann::json config;
  nlohmann::json coefficient;
  nlohmann::json resolutions = nlohmann::json::array();
  nlohmann::json constants = nlohmann::json::object();
  std::vector<Check> checks;
  /// Per-trial rows for plotting; written as CSV next to the report.
  std::vector<std::string> table_header;
  std::vector<std::vector<double>> table;
  std::string error;
  std::uint64_t seed = 0;
  /// Wall-clock seconds; kept out of the JSON so reports are reproducible.
  double seconds = 0.0;

  bool pass() const;
  void check_le(const std::string& name, double value, double bound);
  void check_ge(const std::string& name, double value, double bound);
  void check_in(const std::string& name, double value, double low, double high);
  void check_true(const std::string& name, bool ok);
  nlohmann::json to_json() const;
  std::string table_csv() const;
};

/// Runs the experiments for one coefficient source, caching the split,
/// trace maps and semigroup tables per resolution.
class Verifier {
 public:
  Verifier(RunConfig config, CoefficientSource source);

  VerdictReport run(const std::string& id);

  VerdictReport run_equiv();
  VerdictReport run_bilinear();
  VerdictReport run_ibp();
  VerdictReport run_quad();
  VerdictReport run_decomp();
  VerdictReport run_carleson();
  VerdictReport run_rellich();
  VerdictReport run_domain();
  VerdictReport run_openness();
  VerdictReport run_block_kato();

  const RunConfig& config() const { return config_; }
  const CoefficientSource& source() const { return source_; }

  struct Level {
    TorusGrid grid;
    TGrid tgrid;
    CoefficientField a;
    std::shared_ptr<const DirichletProblem> problem;
    std::shared_ptr<const SemigroupTable> table;
  };
  /// Problem and e^{-tT_+} table for `a` on `tgrid`, cached by content.
  const Level& level(const CoefficientField& a, const TGrid& tgrid);
  /// The source coefficient at refinement r (N 2^r, M 2^r).
  const Level& refined(int r);

 private:
  VerdictReport start(const std::string& id) const;

  RunConfig config_;
  CoefficientSource source_;
  std::map<std::string, std::unique_ptr<Level>> levels_;
};

/// One-line description of what each experiment tests.
const std::string& experiment_statement(const std::string& id);

}  // namespace hslab
