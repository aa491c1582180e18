#pragma once

// Run configuration (JSON), parameter-set presets, CSV emission, run
// manifests and the validation report behind the command-line tool.

#include "tripartite/sweep.hpp"

#include <json.hpp>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace tripartite {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Malformed or invalid configuration. `field` is a dotted path such as
/// "sweep.range" (empty for whole-document errors).
class ConfigError : public std::invalid_argument {
public:
  ConfigError(const std::string& field, const std::string& msg)
      : std::invalid_argument(field.empty() ? msg : field + ": " + msg), field(field) {}
  std::string field;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  SweepConfig sweep;
  std::string output;  // empty: standard output
};

std::vector<std::string> preset_names();

/// Named parameter sets: "set1", "set2" and "uncoupled" (set1 with every
/// coupling zero). All use kappa = 0.5, F_L = 1e-2 sqrt(kappa),
/// gamma_a = gamma_m = 0.05, n_th = 0.
RunConfig preset(const std::string& name);

/// Applies a JSON document on top of a preset (the document's own "preset"
/// key, else set1) and validates the result.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Fully resolved configuration; parse_config(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const RunConfig& cfg);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

inline constexpr const char* kCsvHeader =
    "delta,delta_prime,model,n_cav,n_cav_normalized,n_mech,residual,status,solve_time_s";

/// One line per (grid point, model), in row then model order. NaN fields
/// (failed observables, normalization off, timing off) are left empty.
void write_csv(const std::vector<SweepRow>& rows, std::ostream& out);
void emit_csv(const std::vector<SweepRow>& rows, const std::string& path);

struct SweepFailure {
  std::size_t index;
  double delta;
  ModelKind model;
  std::string error;
};

struct RunManifest {
  nlohmann::json config_echo;
  std::string artifact_version = kArtifactVersion;
  std::string timestamp;  // UTC, ISO 8601
  std::string output;
  std::size_t row_count = 0;
  std::size_t failure_count = 0;
  double wall_time_s = 0.0;
  std::vector<SweepFailure> failures;

  nlohmann::json to_json() const;
};

RunManifest make_manifest(const RunConfig& cfg, const std::vector<SweepRow>& rows, double wall_time_s);

// ---- validation report -------------------------------------------------------

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double expected = 0.0;
  std::string detail;
};

/// Checks for a preset: dispersive verdict, g_eff, Schrieffer-Wolff oracle
/// error (set1/set2), Lorentzian agreement of the uncoupled cavity.
std::vector<ValidationCheck> validate_preset(const std::string& name);

nlohmann::json to_json(const std::vector<ValidationCheck>& checks);

/// "NCxNM,NCxNM,..." -> ladder of tripartite dims.
std::vector<SubsystemDims> parse_ladder(const std::string& spec);

}  // namespace tripartite
