#pragma once

// Detuning sweeps of the tripartite, effective and uncoupled models, curve
// comparison, and Fock-truncation convergence checks.

#include "tripartite/model.hpp"
#include "tripartite/solver.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tripartite {

enum class ModelKind { full, effective, uncoupled };
enum class Axis { delta, delta_prime };

/// Frequency the swept detuning is measured from. `dressed` refers each model
/// to its own Stark-shifted cavity frequency omega_c - g_ac^2/delta_aL, so the
/// Hamiltonian receives delta - stark_offset(model) (zero for the uncoupled
/// cavity).
enum class DetuningReference { bare, dressed };

std::string to_string(ModelKind m);
std::string to_string(Axis a);
std::string to_string(DetuningReference r);
ModelKind model_from_string(const std::string& s);
Axis axis_from_string(const std::string& s);
DetuningReference reference_from_string(const std::string& s);

struct SweepConfig {
  SystemParams params;  // params.delta is ignored; the grid sets it
  double range_min = -6.0;
  double range_max = 6.0;
  int n_points = 201;
  std::vector<ModelKind> models{ModelKind::full, ModelKind::effective};
  SubsystemDims dims{4, 14, true};
  /// Coordinate the grid is laid out in; with delta_prime the grid holds Δ'
  /// and Δ = Δ' - g_eff (g_eff - g_cm).
  Axis axis = Axis::delta_prime;
  DetuningReference reference = DetuningReference::dressed;
  bool normalize = true;
  /// Wall-clock solve times are not reproducible, so they are opt-in.
  bool record_timing = false;
  /// Worker threads; 0 picks the hardware concurrency.
  int workers = 0;
  SteadyStateOptions solver;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Peak photon number of the uncoupled driven cavity, 4 F_L^2 / kappa^2.
double reference_photon_number(const SystemParams& p);

/// g_eff (g_eff - g_cm); the shift between Δ and Δ'.
double displacement_shift(const SystemParams& p);

/// Detuning offset subtracted before building `model` under `ref`.
double stark_offset(const SystemParams& p, ModelKind model, DetuningReference ref);

/// The grid coordinates, evenly spaced and including both end points.
std::vector<double> grid(const SweepConfig& cfg);

struct ModelSample {
  ModelKind model = ModelKind::full;
  bool ok = false;
  std::string error;  // empty when ok
  double n_cav = 0.0;
  double n_cav_normalized = 0.0;  // NaN unless normalization is on
  double n_mech = 0.0;
  double residual = 0.0;
  double solve_time_s = 0.0;  // NaN unless timing is recorded
};

struct SweepRow {
  std::size_t index = 0;
  double delta = 0.0;
  double delta_prime = 0.0;
  std::vector<ModelSample> samples;  // in SweepConfig::models order

  bool ok() const;
  const ModelSample* sample(ModelKind m) const;
};

/// Liouvillian of `model` at the given physical (bare) detuning.
Liouvillian model_liouvillian(ModelKind model, const SystemParams& p, const SubsystemDims& dims);

/// Steady-state observables of one model at one grid point. Solver failures
/// are captured in the sample rather than thrown.
ModelSample solve_point(ModelKind model, const SweepConfig& cfg, double delta);

/// One row per grid point, ordered by grid index regardless of execution order.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg);

std::size_t failed_samples(const std::vector<SweepRow>& rows);

// ---- comparison ----------------------------------------------------------

struct Peak {
  double position = 0.0;
  double height = 0.0;
  double prominence = 0.0;
};

/// Local maxima whose topographic prominence is at least
/// `min_prominence_fraction` of the global maximum of y. A flat top counts
/// once, at its midpoint.
std::vector<Peak> find_peaks(const std::vector<double>& x, const std::vector<double>& y,
                             double min_prominence_fraction = 0.05);

struct SpacingStats {
  std::size_t count = 0;  // number of adjacent gaps
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  /// max |gap - omega_m| / omega_m
  double max_rel_dev_from_omega_m = 0.0;
};

SpacingStats spacing_stats(const std::vector<Peak>& peaks);

struct Curve {
  ModelKind model = ModelKind::full;
  Axis axis = Axis::delta;
  std::vector<double> x;
  std::vector<double> n_cav;  // normalized by n0 when n0 > 0
  std::vector<double> n_mech;
  std::vector<Peak> peaks;
  SpacingStats spacing;
};

struct CompareOptions {
  /// Axis each model is read against; unset picks Δ' for the effective model
  /// and Δ otherwise.
  std::optional<Axis> full_axis, effective_axis, uncoupled_axis;
  double prominence_fraction = 0.05;

  Axis axis_for(ModelKind m) const;
};

struct CurveDifference {
  double max_abs = 0.0;
  double mean_abs = 0.0;
  std::size_t points = 0;  // samples where both curves are defined
};

struct Comparison {
  ModelKind a = ModelKind::full;
  ModelKind b = ModelKind::effective;
  Curve curve_a, curve_b;
  CurveDifference n_cav;
  CurveDifference n_mech;
};

class MissingModelError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Curve of one model from sweep rows; failed samples are skipped.
Curve extract_curve(const std::vector<SweepRow>& rows, ModelKind model, const SystemParams& p,
                    const CompareOptions& opts = {});

/// |curve_b - curve_a| on curve_a's abscissae, b linearly interpolated; points
/// outside b's range are skipped.
CurveDifference curve_difference(const std::vector<double>& xa, const std::vector<double>& ya,
                                 const std::vector<double>& xb, const std::vector<double>& yb);

Comparison compare_models(const std::vector<SweepRow>& rows, const SystemParams& p, ModelKind a = ModelKind::full,
                          ModelKind b = ModelKind::effective, const CompareOptions& opts = {});

// ---- truncation convergence ------------------------------------------------

class NonConvergenceError : public std::runtime_error {
public:
  NonConvergenceError(const std::string& what, std::vector<double> trend)
      : std::runtime_error(what), trend(std::move(trend)) {}
  /// Largest relative change observed between each pair of adjacent rungs.
  std::vector<double> trend;
};

struct ConvergenceOptions {
  std::vector<ModelKind> models{ModelKind::full, ModelKind::effective};
  DetuningReference reference = DetuningReference::dressed;
  double rel_tol = 1e-3;
  /// Changes below this are treated as converged regardless of relative size.
  double abs_floor = 1e-9;
  SteadyStateOptions solver;
};

struct ConvergenceResult {
  SubsystemDims dims;
  std::vector<double> trend;  // one entry per rung pair examined
};

/// Smallest rung whose observables at every probe change by less than
/// rel_tol relative when moving to the next rung. Probes are detunings in the
/// chosen reference.
ConvergenceResult convergence_check(const SystemParams& p, const std::vector<SubsystemDims>& ladder,
                                    const std::vector<double>& probe_deltas, const ConvergenceOptions& opts = {});

}  // namespace tripartite
