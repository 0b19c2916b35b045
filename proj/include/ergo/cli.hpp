#pragma once

// Batch layer behind the ergolearn executable: JSON config handling, ensemble
// evaluation on exact eigenstates, parameter sweeps with checkpointing, and
// the qnd -> shadows -> varspec pipeline.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergo/models.hpp"
#include "ergo/pauli.hpp"
#include "ergo/spectral.hpp"

namespace ergo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Bumped whenever a CSV column set changes; written into every manifest.
inline constexpr int kCsvSchemaVersion = 1;

/// Bad config or arguments. `where` is a JSON field path ("model.n") or a
/// "line:column" position for syntax errors.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string where, const std::string& msg)
      : std::runtime_error(where.empty() ? msg : where + ": " + msg), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// Runtime failure inside a named pipeline stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& msg)
      : std::runtime_error("[" + stage + "] " + msg), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Read-only view of a JSON node that remembers its path for diagnostics.
class Field {
 public:
  Field(const nlohmann::json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const nlohmann::json& json() const noexcept { return *j_; }
  const std::string& path() const noexcept { return path_; }
  bool has(const std::string& key) const;
  Field at(const std::string& key) const;  // throws when missing
  std::optional<Field> find(const std::string& key) const;
  Field index(std::size_t i) const;
  std::size_t size() const;  // arrays only

  double number() const;
  std::int64_t integer() const;
  std::uint64_t uinteger() const;
  bool boolean() const;
  std::string string() const;
  std::vector<double> numbers() const;
  std::vector<std::int64_t> integers() const;
  std::vector<std::string> strings() const;

  double number_or(const std::string& key, double fallback) const;
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;

  /// Rejects keys outside `allowed` (typo guard).
  void allow_only(std::initializer_list<const char*> allowed) const;
  [[noreturn]] void fail(const std::string& msg) const;

 private:
  const nlohmann::json* j_;
  std::string path_;
};

/// Parses a JSON file; syntax errors become ValidationError("line:col").
nlohmann::json load_json_file(const std::filesystem::path& path);
nlohmann::json parse_json_text(const std::string& text);

/// Options shared by every subcommand; flags override config values.
struct CommonOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<int> jobs;
};

struct RunContext {
  nlohmann::json root;
  std::uint64_t seed = 1;
  std::filesystem::path out;
  int jobs = 1;
  Field cfg() const { return Field(root, ""); }
};

RunContext make_context(const CommonOptions& opt);

struct ModelConfig {
  HamiltonianSpec spec;
  /// Magnetization sector used for ED; defaults to the largest sector for
  /// models that conserve magnetization.
  std::optional<int> sector;
  std::size_t max_dim = kDefaultDimCap;
};

/// {"family", "n", "boundary", "g", "h", "h1", "hN", "delta", "sector",
///  "terms": [{"c": 1.0, "op": "X0 X1"}], "max_dim"}
ModelConfig parse_model(const Field& f);
HamiltonianOperator build(const ModelConfig& m);
/// Sector actually used for ED (explicit, or automatic for conserving models).
std::optional<int> resolve_sector(const ModelConfig& m, const HamiltonianOperator& h);

/// Evaluates ED-based diagnostics over a microcanonical window.
struct EnsembleSettings {
  std::size_t size = 0;  // 0 = default table for N, else all states
  double center = 0.0;
  int locality = 2;
  Boundary basis_boundary = Boundary::open;
  bool entropies = true;
  bool varspec = true;
  std::optional<EntropyReference> reference;  // else built-in table, else NaN
  int jobs = 1;
};

struct EnsembleResult {
  std::vector<std::size_t> states;
  std::vector<double> energy;
  std::vector<double> r;  // NaN at spectrum edges
  std::vector<double> entropy;
  std::vector<double> sigma2_0, delta_m, d_e, inv_d_e, sigma2_max, kernel_overlap;
  std::vector<std::size_t> kernel;
  double mean_r = 0.0;
  double d_kl = std::numeric_limits<double>::quiet_NaN();
};

std::size_t resolve_ensemble_size(const EnsembleSettings& s, const EigenDecomposition& eig);
EnsembleResult evaluate_ensemble(const HamiltonianOperator& h, const EigenDecomposition& eig,
                                 const EnsembleSettings& s);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t count = 0;
};
/// Mean and std over finite entries.
MetricSummary summarize(const std::vector<double>& values);

/// Metric names accepted in configs.
const std::vector<std::string>& known_metrics();
/// Per-ensemble summary of one metric ("r", "d_kl", "delta_m", "inv_d_e",
/// "sigma2_max", "sigma2_0", "entropy").
MetricSummary ensemble_metric(const EnsembleResult& r, const std::string& metric);

/// ED with an optional on-disk cache keyed by the Hamiltonian label.
EigenDecomposition diagonalize_cached(const HamiltonianOperator& h, std::optional<int> sector,
                                      std::size_t max_dim,
                                      const std::optional<std::filesystem::path>& cache_dir);

struct GridAxis {
  std::string name;
  std::vector<double> values;
};

struct SweepConfig {
  ModelFamily family = ModelFamily::ising;
  std::map<std::string, double> fixed;
  Boundary boundary = Boundary::open;
  std::vector<GridAxis> axes;
  std::vector<int> sizes;
  std::map<int, std::size_t> ensemble_sizes;
  std::vector<std::string> metrics;
  int locality = 2;
  double center = 0.0;
  std::optional<EntropyReference> reference;
  std::optional<std::filesystem::path> cache_dir;
  std::size_t max_dim = kDefaultDimCap;
  std::uint64_t seed = 1;
  std::filesystem::path out;
  int jobs = 1;
};

struct SweepPoint {
  int n_sites = 0;
  std::map<std::string, double> values;  // grid coordinates
};

SweepConfig parse_sweep_config(const RunContext& ctx);
/// Grid points in output order: N outermost, then axes in config order.
std::vector<SweepPoint> sweep_points(const SweepConfig& cfg);
/// Writes out/sweep.csv (one row per point and metric), out/manifest.json and
/// per-point checkpoints under out/checkpoints; completed points are reused.
/// Returns the number of points computed (not restored).
std::size_t run_sweep(const SweepConfig& cfg, std::ostream* log = nullptr);

int run_basis(const RunContext& ctx);
int run_ed(const RunContext& ctx);
int run_varspec(const RunContext& ctx);
int run_sweep_command(const RunContext& ctx);
int run_qnd(const RunContext& ctx);
int run_shadows(const RunContext& ctx);
int run_ff(const RunContext& ctx);
int run_pipeline(const RunContext& ctx);
/// Runs an ordered subset of {qnd, shadows, varspec}; empty lists are rejected.
int run_stages(const RunContext& ctx, std::vector<std::string> stages);

/// Maps exceptions to exit codes and reports them on `err`.
int dispatch(const std::string& command, const CommonOptions& opt, std::ostream& err);

}  // namespace ergo::cli
