// Acceptance suite: one PASS/FAIL line per criterion with the measured values.
//
//   acceptance [--only 1,2,...] [--expect-fail 4,6,...] [--csv-dir DIR]
//
// Exit status is 0 when the failures are exactly the criteria listed in
// --expect-fail (all of them when the list is empty).

#include "tripartite/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace tripartite;

namespace {

// Curve-agreement tolerance on normalized cavity occupation.
constexpr double kCurveTolerance = 0.05;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

std::string peak_list(const std::vector<Peak>& peaks) {
  std::string s = "[";
  for (std::size_t i = 0; i < peaks.size(); ++i) s += (i ? " " : "") + fmt(peaks[i].position, 3);
  return s + "]";
}

std::string dims_str(const SubsystemDims& d) { return "(" + std::to_string(d.n_cavity) + "," + std::to_string(d.n_mech) + ")"; }

SystemParams with_kappa(SystemParams p, double kappa) {
  p.kappa = kappa;
  p.F_L = 1e-2 * std::sqrt(kappa);
  return p;
}

// ---- shared sweeps -------------------------------------------------------------

struct ModelSweep {
  SweepConfig cfg;
  std::vector<SweepRow> rows;
  Comparison cmp;
  std::string dims_note;
};

class Context {
public:
  explicit Context(std::string csv_dir) : csv_dir_(std::move(csv_dir)) {}

  // Smallest converged rung of `ladder`; the fallback rung is used (and noted)
  // when the ladder never converges.
  std::pair<SubsystemDims, std::string> converged_dims(const SystemParams& p, const std::vector<SubsystemDims>& ladder,
                                                       const SubsystemDims& fallback) {
    const std::vector<double> probes{-1.0 - displacement_shift(p), -displacement_shift(p), 1.0 - displacement_shift(p)};
    try {
      const ConvergenceResult r = convergence_check(p, ladder, probes);
      std::string trend;
      for (double t : r.trend) trend += (trend.empty() ? "" : ",") + fmt(t, 2);
      return {r.dims, "dims " + dims_str(r.dims) + " converged (trend " + trend + ")"};
    } catch (const NonConvergenceError& e) {
      std::string trend;
      for (double t : e.trend) trend += (trend.empty() ? "" : ",") + fmt(t, 2);
      return {fallback, "dims " + dims_str(fallback) + " NOT converged on ladder (trend " + trend + ")"};
    }
  }

  const ModelSweep& sweep(const std::string& key, const SystemParams& p, const std::vector<SubsystemDims>& ladder,
                           const SubsystemDims& fallback) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    ModelSweep f;
    f.cfg = preset("set1").sweep;
    f.cfg.params = p;
    const auto [dims, note] = converged_dims(p, ladder, fallback);
    f.cfg.dims = dims;
    f.dims_note = note;
    f.rows = run_sweep(f.cfg);
    f.cmp = compare_models(f.rows, p);
    if (!csv_dir_.empty()) emit_csv(f.rows, (std::filesystem::path(csv_dir_) / (key + ".csv")).string());
    return cache_.emplace(key, std::move(f)).first->second;
  }

  const ModelSweep& set1() {
    return sweep("set1_nth0", preset("set1").sweep.params,
                 {SubsystemDims::tripartite(2, 14), SubsystemDims::tripartite(3, 18), SubsystemDims::tripartite(4, 22)},
                 SubsystemDims::tripartite(4, 22));
  }
  const ModelSweep& set1_thermal() {
    SystemParams p = preset("set1").sweep.params;
    p.n_th = 1.0;
    return sweep("set1_nth1", p,
                 {SubsystemDims::tripartite(2, 18), SubsystemDims::tripartite(3, 22), SubsystemDims::tripartite(4, 26)},
                 SubsystemDims::tripartite(4, 26));
  }
  const ModelSweep& set1_unresolved() {
    return sweep("set1_kappa2", with_kappa(preset("set1").sweep.params, 2.0),
                 {SubsystemDims::tripartite(2, 14), SubsystemDims::tripartite(3, 18), SubsystemDims::tripartite(4, 22)},
                 SubsystemDims::tripartite(4, 22));
  }
  const ModelSweep& set2() {
    return sweep("set2", preset("set2").sweep.params,
                 {SubsystemDims::tripartite(2, 14), SubsystemDims::tripartite(3, 18), SubsystemDims::tripartite(4, 22)},
                 SubsystemDims::tripartite(3, 18));
  }

private:
  std::string csv_dir_;
  std::map<std::string, ModelSweep> cache_;
};

// ---- criteria --------------------------------------------------------------------

Outcome c1_effective_coupling(Context&) {
  const double g1 = effective_coupling(preset("set1").sweep.params);
  const double g2 = effective_coupling(preset("set2").sweep.params);
  const bool exact = std::abs(g1 - 1.001) <= 1e-12 && std::abs(g2 - 1.001) <= 1e-12;
  const bool near_unity = std::abs(g1 - 1.0) <= 1e-3 + 1e-12 && std::abs(g2 - 1.0) <= 1e-3 + 1e-12;
  return {exact && near_unity, "g_eff set1=" + fmt(g1, 10) + " set2=" + fmt(g2, 10) + " (expect 1.001, within 0.1% of omega_m)"};
}

Outcome c2_uncoupled(Context&) {
  const RunConfig cfg = preset("uncoupled");
  const SystemParams& p = cfg.sweep.params;
  const auto rows = run_sweep(cfg.sweep);
  double worst = 0.0, peak = std::nan("");
  std::size_t failed = 0;
  for (const auto& r : rows) {
    const ModelSample& s = r.samples.front();
    if (!s.ok) {
      ++failed;
      continue;
    }
    const double exact = p.F_L * p.F_L / (0.25 * p.kappa * p.kappa + r.delta * r.delta);
    worst = std::max(worst, std::abs(s.n_cav - exact) / exact);
    if (std::abs(r.delta) < 1e-12) peak = s.n_cav_normalized;
  }
  const bool pass = rows.size() == 201 && failed == 0 && worst <= 1e-6 && std::abs(peak - 1.0) <= 1e-6;
  return {pass, std::to_string(rows.size()) + " points, max rel err vs F^2/(k^2/4+D^2)=" + fmt(worst, 3) +
                    " (<=1e-6), n/n0 at D=0: " + fmt(peak, 12) + " (1 +- 1e-6)"};
}

Outcome c3_thermal(Context&) {
  SystemParams p;
  p.g_ac = p.g_am = p.g_cm = p.F_L = 0.0;
  p.n_th = 1.0;
  const SubsystemDims red = SubsystemDims::reduced(2, 40);
  const Operator nb_red = embed(SparseMat(annihilation(40).adjoint() * annihilation(40)), Slot::mech, red);
  const double n_red = expectation(nb_red, steady_state(model_liouvillian(ModelKind::uncoupled, p, red))).real();
  const SubsystemDims full = SubsystemDims::tripartite(2, 40);
  const Operator nb_full = embed(SparseMat(annihilation(40).adjoint() * annihilation(40)), Slot::mech, full);
  const double n_full = expectation(nb_full, steady_state(model_liouvillian(ModelKind::full, p, full))).real();
  const double err = std::max(std::abs(n_red - 1.0), std::abs(n_full - 1.0));
  return {err <= 1e-8, "<b'b> mechanics-only=" + fmt(n_red, 12) + " tripartite=" + fmt(n_full, 12) +
                           " |err|=" + fmt(err, 3) + " (<=1e-8)"};
}

Outcome c4_sw_agreement(Context&) {
  const SystemParams p = preset("set1").sweep.params;
  const SubsystemDims d = SubsystemDims::reduced(4, 10);
  const double err = sw_relative_error(p, d);
  SystemParams wide = p;
  wide.omega_a = p.omega_L + 2.0 * p.delta_aL();
  const double ratio = err / sw_relative_error(wide, d);
  return {err <= 1e-3 && ratio >= 6.0,
          "set1 dims (4,10): rel spectral error=" + fmt(err, 4) + " (<=1e-3); doubling delta_aL shrinks it x" +
              fmt(ratio, 4) + " (>=6)"};
}

Outcome c5_sw_breakdown(Context&) {
  const SubsystemDims d = SubsystemDims::reduced(4, 10);
  const double e1 = sw_relative_error(preset("set1").sweep.params, d);
  const double e2 = sw_relative_error(preset("set2").sweep.params, d);
  return {e2 >= 10.0 * e1, "set2 err=" + fmt(e2, 4) + " set1 err=" + fmt(e1, 4) + " ratio=" + fmt(e2 / e1, 4) + " (>=10)"};
}

// Peaks of a and b matched in order, each within `tol` of its partner.
bool aligned(const std::vector<Peak>& a, const std::vector<Peak>& b, double tol, double& worst) {
  worst = 0.0;
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i].position - b[i].position));
  return worst <= tol;
}

double grid_step(const SweepConfig& c) { return (c.range_max - c.range_min) / (c.n_points - 1); }

Outcome c6_set1_equivalence(Context& ctx) {
  const ModelSweep& f = ctx.set1();
  const Comparison& c = f.cmp;
  const std::size_t failures = failed_samples(f.rows);
  double offset = 0.0;
  const double step = grid_step(f.cfg);
  const bool same_count = c.curve_a.peaks.size() == c.curve_b.peaks.size();
  const bool align = aligned(c.curve_a.peaks, c.curve_b.peaks, step + 1e-12, offset);
  const SpacingStats& sp = c.curve_b.spacing;
  const bool spacing_ok = sp.count >= 1 && sp.max_rel_dev_from_omega_m <= 0.1;
  const bool diff_ok = c.n_cav.max_abs <= kCurveTolerance;
  std::ostringstream os;
  os << f.dims_note << "; max|dn|=" << fmt(c.n_cav.max_abs) << " (<=" << kCurveTolerance << ")"
     << "; peaks full(D)=" << peak_list(c.curve_a.peaks) << " eff(D')=" << peak_list(c.curve_b.peaks)
     << "; max offset=" << fmt(same_count ? offset : std::nan("")) << " (<=" << fmt(step) << ")"
     << "; eff spacing dev=" << fmt(sp.max_rel_dev_from_omega_m) << " full spacing dev="
     << fmt(c.curve_a.spacing.max_rel_dev_from_omega_m) << " (<=0.1); failed samples=" << failures;
  return {failures == 0 && diff_ok && same_count && align && spacing_ok, os.str()};
}

Outcome c7_thermal_peaks(Context& ctx) {
  const ModelSweep& cold = ctx.set1();
  const ModelSweep& hot = ctx.set1_thermal();
  const std::size_t cf = cold.cmp.curve_a.peaks.size(), ce = cold.cmp.curve_b.peaks.size();
  const std::size_t hf = hot.cmp.curve_a.peaks.size(), he = hot.cmp.curve_b.peaks.size();
  std::ostringstream os;
  os << hot.dims_note << "; peak counts n_th=0 -> n_th=1: full " << cf << " -> " << hf << " " << peak_list(hot.cmp.curve_a.peaks)
     << ", effective " << ce << " -> " << he << " " << peak_list(hot.cmp.curve_b.peaks)
     << "; failed samples=" << failed_samples(hot.rows);
  return {failed_samples(hot.rows) == 0 && hf > cf && he > ce, os.str()};
}

Outcome c8_unresolved(Context& ctx) {
  const ModelSweep& f = ctx.set1_unresolved();
  const std::size_t nf = f.cmp.curve_a.peaks.size(), ne = f.cmp.curve_b.peaks.size();
  std::ostringstream os;
  os << f.dims_note << "; kappa=2: peak counts full=" << nf << " " << peak_list(f.cmp.curve_a.peaks) << " effective=" << ne << " "
     << peak_list(f.cmp.curve_b.peaks) << " (expect 1 each); failed samples=" << failed_samples(f.rows);
  return {failed_samples(f.rows) == 0 && nf == 1 && ne == 1, os.str()};
}

Outcome c9_set2_divergence(Context& ctx) {
  const ModelSweep& f2 = ctx.set1();
  const ModelSweep& f3 = ctx.set2();
  const std::size_t nf = f3.cmp.curve_a.peaks.size(), ne = f3.cmp.curve_b.peaks.size();
  const std::size_t ne2 = f2.cmp.curve_b.peaks.size();
  const double diff = f3.cmp.n_cav.max_abs;
  std::ostringstream os;
  os << f3.dims_note << "; full peaks=" << nf << " " << peak_list(f3.cmp.curve_a.peaks) << " (expect 1); effective peaks=" << ne
     << " (criterion-6 effective: " << ne2 << "); max|dn|=" << fmt(diff) << " (>=" << 5 * kCurveTolerance
     << "); failed samples=" << failed_samples(f3.rows);
  return {failed_samples(f3.rows) == 0 && nf == 1 && ne == ne2 && diff >= 5 * kCurveTolerance, os.str()};
}

double curve_max(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  for (double v : b) m = std::max(m, std::abs(v));
  return m;
}

Outcome c10_phonons(Context& ctx) {
  const ModelSweep& f2 = ctx.set1();
  const ModelSweep& f3 = ctx.set2();
  // The curve tolerance is relative to a unit-peak curve; scale it by the larger phonon maximum.
  const double tol1 = kCurveTolerance * curve_max(f2.cmp.curve_a.n_mech, f2.cmp.curve_b.n_mech);
  const double tol2 = kCurveTolerance * curve_max(f3.cmp.curve_a.n_mech, f3.cmp.curve_b.n_mech);
  const double d1 = f2.cmp.n_mech.max_abs, d2 = f3.cmp.n_mech.max_abs;
  auto range = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return "[" + fmt(*lo, 3) + "," + fmt(*hi, 3) + "]";
  };
  std::ostringstream os;
  os << "set1 max|d<b'b>|=" << fmt(d1) << " (<=" << fmt(tol1) << "), full " << range(f2.cmp.curve_a.n_mech) << " eff "
     << range(f2.cmp.curve_b.n_mech) << "; set2 max|d<b'b>|=" << fmt(d2) << " (>" << fmt(tol2) << "), full "
     << range(f3.cmp.curve_a.n_mech) << " eff " << range(f3.cmp.curve_b.n_mech);
  return {d1 <= tol1 && d2 > tol2, os.str()};
}

Outcome c11_solver_properties(Context&) {
  std::mt19937_64 rng(20240611);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const std::vector<SubsystemDims> full_dims{SubsystemDims::tripartite(2, 2), SubsystemDims::tripartite(2, 3),
                                             SubsystemDims::tripartite(3, 2), SubsystemDims::tripartite(2, 4),
                                             SubsystemDims::tripartite(3, 4)};
  const std::vector<SubsystemDims> red_dims{SubsystemDims::reduced(3, 4), SubsystemDims::reduced(4, 5),
                                            SubsystemDims::reduced(3, 8), SubsystemDims::reduced(4, 6),
                                            SubsystemDims::reduced(2, 12)};
  const int draws = 50;
  double worst_trace = 0, worst_herm = 0, worst_eig = 0, worst_res = 0, worst_td = 0;
  int bad = 0, max_d = 0;
  std::string first_error;
  for (int k = 0; k < draws; ++k) {
    SystemParams p;
    p.omega_L = 50.0;
    p.omega_a = p.omega_L + u(10.0, 40.0);
    p.g_ac = u(0.0, 0.2) * p.delta_aL();
    p.g_am = u(0.0, 0.05) * p.delta_aL();
    p.g_cm = u(0.0, 0.5);
    p.F_L = u(0.0, 0.5);
    p.delta = u(-3.0, 3.0);
    p.kappa = u(0.1, 1.0);
    p.gamma_a = u(0.1, 1.0);
    p.gamma_m = u(0.1, 1.0);
    p.n_th = u(0.0, 1.0);
    const bool full = k % 2 == 0;
    const SubsystemDims d = full ? full_dims[(k / 2) % full_dims.size()] : red_dims[(k / 2) % red_dims.size()];
    max_d = std::max(max_d, d.total());
    try {
      const Liouvillian l = model_liouvillian(full ? ModelKind::full : ModelKind::effective, p, d);
      const Operator rho = steady_state(l);
      const DenseMat r = rho.dense();
      worst_trace = std::max(worst_trace, std::abs(r.trace() - cplx(1.0)));
      worst_herm = std::max(worst_herm, (r - r.adjoint()).cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<DenseMat> es(r);
      worst_eig = std::min(worst_eig, es.eigenvalues().minCoeff());
      worst_res = std::max(worst_res, residual(l, rho) / std::max(1.0, inf_norm(l.matrix)));

      const double slowest = full ? std::min({p.kappa, p.gamma_a, p.gamma_m}) : std::min(p.kappa, p.gamma_m);
      DenseMat g = DenseMat::Zero(d.total(), d.total());
      g(d.has_qubit ? d.n_mech : 0, d.has_qubit ? d.n_mech : 0) = 1.0;
      const Operator late = evolve(Operator(d, g), l, 50.0 / slowest, 2.0 / inf_norm(l.matrix));
      worst_td = std::max(worst_td, trace_distance(late.dense(), r));
    } catch (const std::exception& e) {
      ++bad;
      if (first_error.empty()) first_error = e.what();
    }
  }
  const bool pass = bad == 0 && worst_trace <= 1e-10 && worst_herm <= 1e-9 && worst_eig >= -1e-8 && worst_res <= 1e-9 &&
                    worst_td <= 1e-6;
  std::ostringstream os;
  os << draws << " draws (D<=" << max_d << "): |Tr-1|=" << fmt(worst_trace, 2) << " (<=1e-10) herm=" << fmt(worst_herm, 2)
     << " (<=1e-9) min eig=" << fmt(worst_eig, 2) << " (>=-1e-8) scaled residual=" << fmt(worst_res, 2)
     << " (<=1e-9) RK4 trace distance=" << fmt(worst_td, 2) << " (<=1e-6) errors=" << bad
     << (first_error.empty() ? "" : " first: " + first_error);
  return {pass, os.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome c12_determinism(Context&) {
  const auto dir = std::filesystem::temp_directory_path() / ("tripartite_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::ostringstream os;
  bool pass = true;
  struct Run {
    std::string preset, extra;
  };
  // Full uncoupled preset; the two coupled presets on a coarser grid, with different worker counts.
  const std::vector<Run> runs{{"uncoupled", ""}, {"set1", " --points 21"}, {"set2", " --points 21"}};
  for (const auto& r : runs) {
    std::string out[2];
    int status[2];
    for (int k = 0; k < 2; ++k) {
      const auto path = dir / (r.preset + "_" + std::to_string(k) + ".csv");
      const std::string cmd = std::string("TRIPARTITE_WORKERS=") + (k == 0 ? "1" : "4") + " \"" TRIPARTITE_CLI "\" run --preset " +
                              r.preset + r.extra + " --output \"" + path.string() + "\" 2>/dev/null";
      status[k] = std::system(cmd.c_str());
      out[k] = slurp(path.string());
    }
    const bool same = status[0] == 0 && status[1] == 0 && !out[0].empty() && out[0] == out[1];
    pass = pass && same;
    os << r.preset << r.extra << ": " << (same ? "identical" : "DIFFERENT") << " (" << out[0].size() << " bytes)  ";
  }
  std::filesystem::remove_all(dir);
  return {pass, os.str()};
}

std::set<int> parse_ids(const std::string& s) {
  std::set<int> ids;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) ids.insert(std::stoi(item));
  return ids;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string only, expect_fail, csv_dir;
  app.add_option("--only", only, "Comma list of criteria to run");
  app.add_option("--expect-fail", expect_fail, "Comma list of criteria known to fail");
  app.add_option("--csv-dir", csv_dir, "Write the model sweeps as CSV here");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected = parse_ids(only), expected = parse_ids(expect_fail);
  if (!csv_dir.empty()) std::filesystem::create_directories(csv_dir);

  const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria{
      {"effective coupling", c1_effective_coupling},
      {"uncoupled cavity Lorentzian", c2_uncoupled},
      {"thermal fixed point", c3_thermal},
      {"expansion agreement", c4_sw_agreement},
      {"expansion breakdown ordering", c5_sw_breakdown},
      {"set-1 model equivalence", c6_set1_equivalence},
      {"set-1 thermal peaks", c7_thermal_peaks},
      {"unresolved sidebands", c8_unresolved},
      {"set-2 divergence", c9_set2_divergence},
      {"phonon curves", c10_phonons},
      {"solver properties", c11_solver_properties},
      {"determinism", c12_determinism},
  };

  Context ctx(csv_dir);
  int failed = 0, unexpected = 0, fixed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first << "): " << o.detail << " ["
              << fmt(secs, 3) << " s]" << std::endl;
    if (!o.pass) {
      ++failed;
      if (!expected.count(id)) ++unexpected;
    } else if (expected.count(id)) {
      ++fixed;
    }
  }
  std::cout << "summary: " << failed << " failed";
  if (!expected.empty())
    std::cout << ", " << unexpected << " not in the expected-failure list, " << fixed << " listed but passed";
  std::cout << std::endl;
  return unexpected == 0 && fixed == 0 ? 0 : 1;
}
