#include "tripartite/sweep.hpp"

#include "tripartite/liouville.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace tripartite {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void bad_field(const std::string& field, const std::string& msg) {
  throw std::invalid_argument(field + ": " + msg);
}

int resolve_workers(int requested, std::size_t jobs) {
  int w = requested;
  if (w <= 0) w = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(w), std::max<std::size_t>(jobs, 1)));
}

SubsystemDims dims_for(ModelKind m, const SubsystemDims& d) {
  return m == ModelKind::full ? SubsystemDims::tripartite(d.n_cavity, d.n_mech) : d.without_qubit();
}

}  // namespace

std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::full: return "full";
    case ModelKind::effective: return "effective";
    case ModelKind::uncoupled: return "uncoupled";
  }
  return "?";
}

std::string to_string(Axis a) { return a == Axis::delta ? "delta" : "delta_prime"; }

std::string to_string(DetuningReference r) { return r == DetuningReference::bare ? "bare" : "dressed"; }

ModelKind model_from_string(const std::string& s) {
  if (s == "full") return ModelKind::full;
  if (s == "effective") return ModelKind::effective;
  if (s == "uncoupled") return ModelKind::uncoupled;
  throw std::invalid_argument("unknown model '" + s + "' (expected full, effective or uncoupled)");
}

Axis axis_from_string(const std::string& s) {
  if (s == "delta") return Axis::delta;
  if (s == "delta_prime") return Axis::delta_prime;
  throw std::invalid_argument("unknown axis '" + s + "' (expected delta or delta_prime)");
}

DetuningReference reference_from_string(const std::string& s) {
  if (s == "bare") return DetuningReference::bare;
  if (s == "dressed") return DetuningReference::dressed;
  throw std::invalid_argument("unknown detuning reference '" + s + "' (expected bare or dressed)");
}

void SweepConfig::validate() const {
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    bad_field("params", e.what());
  }
  if (!std::isfinite(range_min) || !std::isfinite(range_max)) bad_field("range", "bounds must be finite");
  if (!(range_min < range_max)) bad_field("range", "minimum must be below maximum");
  if (n_points < 2) bad_field("points", "need at least 2 grid points");
  if (models.empty()) bad_field("models", "at least one model is required");
  for (std::size_t i = 0; i < models.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (models[i] == models[j]) bad_field("models", "duplicate model '" + to_string(models[i]) + "'");
  try {
    dims.validate();
  } catch (const DimensionError& e) {
    bad_field("dims", e.what());
  }
  if (normalize && !(reference_photon_number(params) > 0.0))
    bad_field("normalize", "needs F_L > 0 and kappa > 0 so that n0 = 4 F_L^2 / kappa^2 is positive");
  const bool needs_qubit_detuning =
      std::any_of(models.begin(), models.end(), [](ModelKind m) { return m != ModelKind::uncoupled; }) ||
      axis == Axis::delta_prime || reference == DetuningReference::dressed;
  if (needs_qubit_detuning && params.g_ac != 0.0 && std::abs(params.delta_aL()) < kMinQubitDetuning)
    bad_field("params.omega_a", "omega_a - omega_L must be nonzero for the dispersive models");
  if (workers < 0) bad_field("workers", "must be nonnegative");
}

double reference_photon_number(const SystemParams& p) {
  if (!(p.kappa > 0.0)) return 0.0;
  return 4.0 * p.F_L * p.F_L / (p.kappa * p.kappa);
}

double displacement_shift(const SystemParams& p) {
  if (p.g_ac == 0.0 || p.g_am == 0.0) return 0.0;  // g_eff == g_cm exactly
  const double g = effective_coupling(p);
  return g * (g - p.g_cm) / kOmegaM;
}

double stark_offset(const SystemParams& p, ModelKind model, DetuningReference ref) {
  if (ref == DetuningReference::bare || model == ModelKind::uncoupled || p.g_ac == 0.0) return 0.0;
  return stark_shift(p);
}

std::vector<double> grid(const SweepConfig& cfg) {
  std::vector<double> g(static_cast<std::size_t>(cfg.n_points));
  const double step = (cfg.range_max - cfg.range_min) / (cfg.n_points - 1);
  for (int i = 0; i < cfg.n_points; ++i) g[static_cast<std::size_t>(i)] = cfg.range_min + i * step;
  g.back() = cfg.range_max;
  return g;
}

bool SweepRow::ok() const {
  return std::all_of(samples.begin(), samples.end(), [](const ModelSample& s) { return s.ok; });
}

const ModelSample* SweepRow::sample(ModelKind m) const {
  for (const auto& s : samples)
    if (s.model == m) return &s;
  return nullptr;
}

Liouvillian model_liouvillian(ModelKind model, const SystemParams& p, const SubsystemDims& dims) {
  switch (model) {
    case ModelKind::full: {
      const SubsystemDims d = dims_for(model, dims);
      return build_liouvillian(build_h_hyb(p, d), tripartite_channels(p, d));
    }
    case ModelKind::effective: {
      const SubsystemDims d = dims_for(model, dims);
      return build_liouvillian(build_h_eff(p, d), optomechanical_channels(p, d));
    }
    case ModelKind::uncoupled: {
      const SubsystemDims d = dims_for(model, dims);
      return build_liouvillian(build_h_uncoupled(p, d), optomechanical_channels(p, d));
    }
  }
  throw std::invalid_argument("model_liouvillian: unknown model");
}

ModelSample solve_point(ModelKind model, const SweepConfig& cfg, double delta) {
  ModelSample s;
  s.model = model;
  s.n_cav_normalized = kNaN;
  s.solve_time_s = kNaN;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    SystemParams p = cfg.params;
    p.delta = delta - stark_offset(cfg.params, model, cfg.reference);
    const Liouvillian l = model_liouvillian(model, p, cfg.dims);
    const Operator rho = steady_state(l, cfg.solver);
    const SubsystemDims& d = l.dims;
    const Operator a = embed(annihilation(d.n_cavity), Slot::cavity, d);
    const Operator b = embed(annihilation(d.n_mech), Slot::mech, d);
    s.n_cav = expectation(a.dagger() * a, rho).real();
    s.n_mech = expectation(b.dagger() * b, rho).real();
    s.residual = residual(l, rho);
    if (cfg.normalize) s.n_cav_normalized = s.n_cav / reference_photon_number(cfg.params);
    s.ok = true;
  } catch (const std::exception& e) {
    s.ok = false;
    s.error = e.what();
    s.n_cav = s.n_mech = s.residual = kNaN;
    s.n_cav_normalized = kNaN;
  }
  if (cfg.record_timing)
    s.solve_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const std::vector<double> xs = grid(cfg);
  const double shift = displacement_shift(cfg.params);

  std::vector<SweepRow> rows(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    rows[i].index = i;
    rows[i].delta = cfg.axis == Axis::delta ? xs[i] : xs[i] - shift;
    rows[i].delta_prime = cfg.axis == Axis::delta_prime ? xs[i] : xs[i] + shift;
    rows[i].samples.resize(cfg.models.size());
  }

  // Jobs are (row, model) pairs; each writes only its own slot.
  const std::size_t jobs = rows.size() * cfg.models.size();
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const std::size_t i = j / cfg.models.size();
      const std::size_t m = j % cfg.models.size();
      rows[i].samples[m] = solve_point(cfg.models[m], cfg, rows[i].delta);
    }
  };
  const int n_workers = resolve_workers(cfg.workers, jobs);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  return rows;
}

std::size_t failed_samples(const std::vector<SweepRow>& rows) {
  std::size_t n = 0;
  for (const auto& r : rows)
    for (const auto& s : r.samples) n += s.ok ? 0 : 1;
  return n;
}

// ---- comparison ----------------------------------------------------------

std::vector<Peak> find_peaks(const std::vector<double>& x, const std::vector<double>& y,
                             double min_prominence_fraction) {
  if (x.size() != y.size()) throw std::invalid_argument("find_peaks: x and y differ in length");
  const std::size_t n = y.size();
  std::vector<Peak> peaks;
  if (n < 3) return peaks;
  const double ymax = *std::max_element(y.begin(), y.end());
  const double threshold = min_prominence_fraction * ymax;

  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(y[i] > y[i - 1])) {
      ++i;
      continue;
    }
    // climb a possible plateau
    std::size_t j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    if (j + 1 >= n || !(y[j + 1] < y[i])) {
      i = j + 1;
      continue;
    }
    const double h = y[i];
    double left_min = h;
    for (std::size_t k = i; k-- > 0;) {
      if (y[k] > h) break;
      left_min = std::min(left_min, y[k]);
    }
    double right_min = h;
    for (std::size_t k = j + 1; k < n; ++k) {
      if (y[k] > h) break;
      right_min = std::min(right_min, y[k]);
    }
    const double prominence = h - std::max(left_min, right_min);
    if (prominence >= threshold && prominence > 0.0) {
      const std::size_t mid = (i + j) / 2;
      const double pos = (i + j) % 2 == 0 ? x[mid] : 0.5 * (x[mid] + x[mid + 1]);
      peaks.push_back({pos, h, prominence});
    }
    i = j + 1;
  }
  return peaks;
}

SpacingStats spacing_stats(const std::vector<Peak>& peaks) {
  SpacingStats s;
  if (peaks.size() < 2) return s;
  s.count = peaks.size() - 1;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    const double gap = peaks[i].position - peaks[i - 1].position;
    sum += gap;
    s.min = std::min(s.min, gap);
    s.max = std::max(s.max, gap);
    s.max_rel_dev_from_omega_m = std::max(s.max_rel_dev_from_omega_m, std::abs(gap - kOmegaM) / kOmegaM);
  }
  s.mean = sum / static_cast<double>(s.count);
  return s;
}

Axis CompareOptions::axis_for(ModelKind m) const {
  switch (m) {
    case ModelKind::full: return full_axis.value_or(Axis::delta);
    case ModelKind::effective: return effective_axis.value_or(Axis::delta_prime);
    case ModelKind::uncoupled: return uncoupled_axis.value_or(Axis::delta);
  }
  return Axis::delta;
}

Curve extract_curve(const std::vector<SweepRow>& rows, ModelKind model, const SystemParams& p,
                    const CompareOptions& opts) {
  Curve c;
  c.model = model;
  c.axis = opts.axis_for(model);
  const double n0 = reference_photon_number(p);
  bool present = false;
  for (const auto& r : rows) {
    const ModelSample* s = r.sample(model);
    if (!s) continue;
    present = true;
    if (!s->ok) continue;
    c.x.push_back(c.axis == Axis::delta ? r.delta : r.delta_prime);
    c.n_cav.push_back(n0 > 0.0 ? s->n_cav / n0 : s->n_cav);
    c.n_mech.push_back(s->n_mech);
  }
  if (!present) throw MissingModelError("sweep rows carry no '" + to_string(model) + "' samples");
  c.peaks = find_peaks(c.x, c.n_cav, opts.prominence_fraction);
  c.spacing = spacing_stats(c.peaks);
  return c;
}

CurveDifference curve_difference(const std::vector<double>& xa, const std::vector<double>& ya,
                                 const std::vector<double>& xb, const std::vector<double>& yb) {
  if (xa.size() != ya.size() || xb.size() != yb.size())
    throw std::invalid_argument("curve_difference: abscissa and ordinate lengths differ");
  CurveDifference d;
  if (xb.empty()) return d;
  double sum = 0.0;
  const double tol = 1e-12 * std::max(1.0, std::abs(xb.back() - xb.front()));
  for (std::size_t i = 0; i < xa.size(); ++i) {
    const double x = xa[i];
    if (x < xb.front() - tol || x > xb.back() + tol) continue;
    auto it = std::lower_bound(xb.begin(), xb.end(), x - tol);
    std::size_t k = static_cast<std::size_t>(it - xb.begin());
    double yi;
    if (k < xb.size() && std::abs(xb[k] - x) <= tol) {
      yi = yb[k];
    } else {
      k = std::clamp<std::size_t>(k, 1, xb.size() - 1);
      const double t = (x - xb[k - 1]) / (xb[k] - xb[k - 1]);
      yi = (1.0 - t) * yb[k - 1] + t * yb[k];
    }
    const double diff = std::abs(yi - ya[i]);
    d.max_abs = std::max(d.max_abs, diff);
    sum += diff;
    ++d.points;
  }
  d.mean_abs = d.points ? sum / static_cast<double>(d.points) : 0.0;
  return d;
}

Comparison compare_models(const std::vector<SweepRow>& rows, const SystemParams& p, ModelKind a, ModelKind b,
                          const CompareOptions& opts) {
  Comparison c;
  c.a = a;
  c.b = b;
  c.curve_a = extract_curve(rows, a, p, opts);
  c.curve_b = extract_curve(rows, b, p, opts);
  c.n_cav = curve_difference(c.curve_a.x, c.curve_a.n_cav, c.curve_b.x, c.curve_b.n_cav);
  c.n_mech = curve_difference(c.curve_a.x, c.curve_a.n_mech, c.curve_b.x, c.curve_b.n_mech);
  return c;
}

// ---- truncation convergence ------------------------------------------------

ConvergenceResult convergence_check(const SystemParams& p, const std::vector<SubsystemDims>& ladder,
                                    const std::vector<double>& probe_deltas, const ConvergenceOptions& opts) {
  if (ladder.size() < 2) throw std::invalid_argument("convergence_check: ladder needs at least two rungs");
  if (probe_deltas.empty()) throw std::invalid_argument("convergence_check: no probe detunings");
  if (opts.models.empty()) throw std::invalid_argument("convergence_check: no models");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    ladder[i].validate();
    if (i > 0 && !(ladder[i].n_cavity > ladder[i - 1].n_cavity && ladder[i].n_mech > ladder[i - 1].n_mech))
      throw std::invalid_argument("convergence_check: ladder must increase strictly in both Fock truncations");
  }

  SweepConfig cfg;
  cfg.params = p;
  cfg.reference = opts.reference;
  cfg.normalize = false;
  cfg.solver = opts.solver;

  // observables[rung] = n_cav and n_mech for every (model, probe)
  auto observe = [&](const SubsystemDims& dims) {
    cfg.dims = dims;
    std::vector<double> out;
    for (ModelKind m : opts.models) {
      for (double delta : probe_deltas) {
        const ModelSample s = solve_point(m, cfg, delta);
        if (!s.ok) {
          throw NonConvergenceError("convergence_check: " + to_string(m) + " solve failed at dims " +
                                        to_string(dims) + ": " + s.error,
                                    {});
        }
        out.push_back(s.n_cav);
        out.push_back(s.n_mech);
      }
    }
    return out;
  };

  ConvergenceResult result;
  std::vector<double> prev = observe(ladder[0]);
  const double floor = opts.abs_floor / opts.rel_tol;
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    const std::vector<double> cur = observe(ladder[i]);
    double worst = 0.0;
    for (std::size_t k = 0; k < cur.size(); ++k)
      worst = std::max(worst, std::abs(cur[k] - prev[k]) / std::max(std::abs(cur[k]), floor));
    result.trend.push_back(worst);
    if (worst < opts.rel_tol) {
      result.dims = ladder[i - 1];
      return result;
    }
    prev = cur;
  }
  std::ostringstream os;
  os << "convergence_check: no rung converged to relative change " << opts.rel_tol << "; trend:";
  for (double t : result.trend) os << ' ' << t;
  throw NonConvergenceError(os.str(), result.trend);
}

}  // namespace tripartite
