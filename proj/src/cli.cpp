#include "tripartite/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace tripartite {

using nlohmann::json;

namespace {

constexpr double kPresetDriveScale = 1e-2;

// Reads typed values out of a JSON object, tracking the dotted path and
// rejecting keys nobody asked for.
class Reader {
public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }
  const json& at(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(field(key), "must be finite");
  }
  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    const auto x = v.get<long long>();
    if (x < -1'000'000'000LL || x > 1'000'000'000LL) throw ConfigError(field(key), "out of range");
    out = static_cast<int>(x);
  }
  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
    out = v.get<bool>();
  }
  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    out = v.get<std::string>();
  }
  template <class T>
  void enumerated(const std::string& key, T& out, const std::function<T(const std::string&)>& conv) {
    std::string s;
    string(key, s);
    if (!has(key)) return;
    try {
      out = conv(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(field(key), e.what());
    }
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
  }

private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string backend_name(SteadyStateBackend b) { return b == SteadyStateBackend::sparse_lu ? "sparse_lu" : "bicgstab"; }

SteadyStateBackend backend_from_string(const std::string& s) {
  if (s == "sparse_lu") return SteadyStateBackend::sparse_lu;
  if (s == "bicgstab") return SteadyStateBackend::bicgstab;
  throw std::invalid_argument("unknown solver backend '" + s + "' (expected sparse_lu or bicgstab)");
}

// Maps a validation message "field: text" from SweepConfig onto the config grammar.
ConfigError translate(const std::invalid_argument& e) {
  static const std::map<std::string, std::string> paths = {
      {"range", "sweep.range"}, {"points", "sweep.points"}, {"normalize", "sweep.normalize"},
      {"models", "models"},     {"dims", "dims"},          {"workers", "workers"},
      {"params", "params"},     {"params.omega_a", "params.omega_a"}};
  const std::string msg = e.what();
  const auto colon = msg.find(": ");
  if (colon != std::string::npos) {
    const auto it = paths.find(msg.substr(0, colon));
    if (it != paths.end()) return ConfigError(it->second, msg.substr(colon + 2));
  }
  return ConfigError("", msg);
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<std::string> preset_names() { return {"set1", "set2", "uncoupled"}; }

RunConfig preset(const std::string& name) {
  RunConfig cfg;
  SweepConfig& s = cfg.sweep;
  SystemParams& p = s.params;
  p.omega_a = 1.5e4;
  p.omega_L = 1e4;
  p.delta = 0.0;
  p.g_ac = 500.0;
  p.g_am = 50.0;
  p.g_cm = 1e-3;
  p.kappa = 0.5;
  p.F_L = kPresetDriveScale * std::sqrt(p.kappa);
  p.gamma_a = 0.05;
  p.gamma_m = 0.05;
  p.n_th = 0.0;
  s.range_min = -6.0;
  s.range_max = 6.0;
  s.n_points = 201;
  s.models = {ModelKind::full, ModelKind::effective};
  s.dims = SubsystemDims::tripartite(4, 14);
  s.axis = Axis::delta_prime;
  s.reference = DetuningReference::dressed;
  s.normalize = true;

  if (name == "set1") return cfg;
  if (name == "set2") {
    p.omega_a = 1.5e3;
    p.omega_L = 1e3;
    p.g_ac = 50.0;
    return cfg;
  }
  if (name == "uncoupled") {
    p.g_ac = p.g_am = p.g_cm = 0.0;
    s.models = {ModelKind::uncoupled};
    s.axis = Axis::delta;
    s.reference = DetuningReference::bare;
    return cfg;
  }
  throw ConfigError("preset", "unknown preset '" + name + "' (expected set1, set2 or uncoupled)");
}

RunConfig parse_config(const json& doc) {
  Reader top(doc, "");
  std::string preset_name = "set1";
  top.string("preset", preset_name);
  RunConfig cfg = preset(preset_name);
  SweepConfig& s = cfg.sweep;
  SystemParams& p = s.params;

  if (top.has("params")) {
    Reader r(top.at("params"), "params");
    r.number("omega_a", p.omega_a);
    r.number("omega_L", p.omega_L);
    r.number("g_ac", p.g_ac);
    r.number("g_am", p.g_am);
    r.number("g_cm", p.g_cm);
    r.number("kappa", p.kappa);
    r.number("gamma_a", p.gamma_a);
    r.number("gamma_m", p.gamma_m);
    r.number("n_th", p.n_th);
    const bool has_f = r.has("F_L");
    const bool has_scale = r.has("drive_scale");
    if (has_f && has_scale) throw ConfigError("params.drive_scale", "give either F_L or drive_scale, not both");
    double scale = kPresetDriveScale;
    r.number("drive_scale", scale);
    p.F_L = scale * std::sqrt(std::max(p.kappa, 0.0));
    r.number("F_L", p.F_L);
    r.finish();
  } else {
    p.F_L = kPresetDriveScale * std::sqrt(std::max(p.kappa, 0.0));
  }

  if (top.has("models")) {
    const json& m = top.at("models");
    if (!m.is_array()) throw ConfigError("models", "expected an array of model names");
    s.models.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string f = "models[" + std::to_string(i) + "]";
      if (!m[i].is_string()) throw ConfigError(f, "expected a string");
      try {
        s.models.push_back(model_from_string(m[i].get<std::string>()));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(f, e.what());
      }
    }
  }

  if (top.has("dims")) {
    Reader r(top.at("dims"), "dims");
    r.integer("n_cavity", s.dims.n_cavity);
    r.integer("n_mech", s.dims.n_mech);
    r.finish();
  }

  if (top.has("sweep")) {
    Reader r(top.at("sweep"), "sweep");
    if (r.has("range")) {
      const json& v = r.at("range");
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError("sweep.range", "expected [min, max]");
      s.range_min = v[0].get<double>();
      s.range_max = v[1].get<double>();
    }
    r.integer("points", s.n_points);
    r.enumerated<Axis>("axis", s.axis, axis_from_string);
    r.enumerated<DetuningReference>("reference", s.reference, reference_from_string);
    r.boolean("normalize", s.normalize);
    r.finish();
  }

  if (top.has("solver")) {
    Reader r(top.at("solver"), "solver");
    r.enumerated<SteadyStateBackend>("backend", s.solver.backend, backend_from_string);
    r.number("residual_tol", s.solver.residual_tol);
    r.integer("max_refinements", s.solver.max_refinements);
    r.boolean("equilibrate", s.solver.equilibrate);
    r.finish();
    if (!(s.solver.residual_tol > 0.0)) throw ConfigError("solver.residual_tol", "must be positive");
    if (s.solver.max_refinements < 0) throw ConfigError("solver.max_refinements", "must be nonnegative");
  }

  top.boolean("record_timing", s.record_timing);
  top.integer("workers", s.workers);
  top.string("output", cfg.output);
  top.finish();

  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw translate(e);
  }
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json config_to_json(const RunConfig& cfg) {
  const SweepConfig& s = cfg.sweep;
  const SystemParams& p = s.params;
  json models = json::array();
  for (ModelKind m : s.models) models.push_back(to_string(m));
  return json{
      {"params",
       {{"omega_a", p.omega_a},
        {"omega_L", p.omega_L},
        {"g_ac", p.g_ac},
        {"g_am", p.g_am},
        {"g_cm", p.g_cm},
        {"F_L", p.F_L},
        {"kappa", p.kappa},
        {"gamma_a", p.gamma_a},
        {"gamma_m", p.gamma_m},
        {"n_th", p.n_th}}},
      {"models", models},
      {"dims", {{"n_cavity", s.dims.n_cavity}, {"n_mech", s.dims.n_mech}}},
      {"sweep",
       {{"range", {s.range_min, s.range_max}},
        {"points", s.n_points},
        {"axis", to_string(s.axis)},
        {"reference", to_string(s.reference)},
        {"normalize", s.normalize}}},
      {"solver",
       {{"backend", backend_name(s.solver.backend)},
        {"residual_tol", s.solver.residual_tol},
        {"max_refinements", s.solver.max_refinements},
        {"equilibrate", s.solver.equilibrate}}},
      {"record_timing", s.record_timing},
      {"workers", s.workers},
      {"output", cfg.output},
  };
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    for (const auto& s : r.samples) {
      out << format_double(r.delta) << ',' << format_double(r.delta_prime) << ',' << to_string(s.model) << ',';
      if (s.ok) {
        out << format_double(s.n_cav) << ',' << format_double(s.n_cav_normalized) << ',' << format_double(s.n_mech)
            << ',' << format_double(s.residual) << ",ok,";
      } else {
        out << ",,,,failed,";
      }
      out << format_double(s.solve_time_s) << '\n';
    }
  }
}

void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("emit_csv: no rows");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write CSV to '" + path + "'");
  write_csv(rows, out);
  out.flush();
  if (!out) throw IoError("error while writing CSV to '" + path + "'");
}

json RunManifest::to_json() const {
  json fails = json::array();
  for (const auto& f : failures)
    fails.push_back({{"index", f.index}, {"delta", f.delta}, {"model", tripartite::to_string(f.model)}, {"error", f.error}});
  return json{{"artifact_version", artifact_version},
              {"timestamp", timestamp},
              {"config_echo", config_echo},
              {"sweeps",
               json::array({{{"output", output},
                             {"row_count", row_count},
                             {"failure_count", failure_count},
                             {"wall_time_s", wall_time_s},
                             {"failures", fails}}})}};
}

RunManifest make_manifest(const RunConfig& cfg, const std::vector<SweepRow>& rows, double wall_time_s) {
  RunManifest m;
  m.config_echo = config_to_json(cfg);
  m.timestamp = utc_timestamp();
  m.output = cfg.output;
  m.row_count = rows.size();
  m.wall_time_s = wall_time_s;
  for (const auto& r : rows)
    for (const auto& s : r.samples)
      if (!s.ok) m.failures.push_back({r.index, r.delta, s.model, s.error});
  m.failure_count = m.failures.size();
  return m;
}

// ---- validation report -------------------------------------------------------

namespace {

ValidationCheck check(std::string name, bool pass, double measured, double expected, std::string detail) {
  return {std::move(name), pass, measured, expected, std::move(detail)};
}

ValidationCheck verdict_check(const SystemParams& p, Verdict expected) {
  const DispersiveReport r = dispersive_report(p);
  std::ostringstream os;
  os << "ratio_ac=" << format_double(r.ratio_ac) << " ratio_am=" << format_double(r.ratio_am)
     << " verdict=" << to_string(r.verdict) << " expected=" << to_string(expected);
  return check("dispersive_verdict", r.verdict == expected, r.ratio_am, DispersiveThresholds{}.ratio_am, os.str());
}

ValidationCheck g_eff_check(const SystemParams& p) {
  const double g = effective_coupling(p);
  return check("g_eff", std::abs(g - 1.001) <= 1e-12, g, 1.001, "g_cm + 2 g_ac^2 g_am / delta_aL^2");
}

const SubsystemDims kSwDims = SubsystemDims::reduced(4, 10);

}  // namespace

std::vector<ValidationCheck> validate_preset(const std::string& name) {
  const RunConfig cfg = preset(name);
  const SystemParams& p = cfg.sweep.params;
  std::vector<ValidationCheck> out;

  if (name == "set1") {
    out.push_back(verdict_check(p, Verdict::valid));
    out.push_back(g_eff_check(p));
    const double err = sw_relative_error(p, kSwDims);
    out.push_back(check("sw_oracle_error", err <= 1e-3, err, 1e-3,
                        "relative spectral-norm error of the third-order expansion at dims (4, 10); bound 1e-3"));
    SystemParams wide = p;
    wide.omega_a = p.omega_L + 2.0 * p.delta_aL();
    const double ratio = err / sw_relative_error(wide, kSwDims);
    out.push_back(check("sw_error_scaling", ratio >= 6.0, ratio, 6.0,
                        "error shrink factor when delta_aL doubles; bound >= 6"));
  } else if (name == "set2") {
    out.push_back(verdict_check(p, Verdict::invalid));
    out.push_back(g_eff_check(p));
    const double err2 = sw_relative_error(p, kSwDims);
    const double err1 = sw_relative_error(preset("set1").sweep.params, kSwDims);
    out.push_back(check("sw_breakdown", err2 >= 10.0 * err1, err2 / err1, 10.0,
                        "set2 / set1 expansion error ratio; bound >= 10"));
  } else if (name == "uncoupled") {
    SweepConfig s = cfg.sweep;
    s.dims = SubsystemDims::tripartite(4, 2);
    const auto rows = run_sweep(s);
    double worst = 0.0, peak = 0.0;
    bool all_ok = true;
    for (const auto& r : rows) {
      const ModelSample& smp = r.samples.front();
      if (!smp.ok) {
        all_ok = false;
        continue;
      }
      const double exact = p.F_L * p.F_L / (0.25 * p.kappa * p.kappa + r.delta * r.delta);
      worst = std::max(worst, std::abs(smp.n_cav - exact) / exact);
      if (std::abs(r.delta) < 1e-12) peak = smp.n_cav_normalized;
    }
    out.push_back(check("lorentzian", all_ok && worst <= 1e-6, worst, 1e-6,
                        "max relative error of <a'a> against F_L^2 / (kappa^2/4 + delta^2) over the grid"));
    out.push_back(check("normalized_peak", all_ok && std::abs(peak - 1.0) <= 1e-6, peak, 1.0,
                        "n_cav / n0 at delta = 0"));
  } else {
    throw ConfigError("preset", "unknown preset '" + name + "'");
  }
  return out;
}

json to_json(const std::vector<ValidationCheck>& checks) {
  json arr = json::array();
  for (const auto& c : checks)
    arr.push_back({{"check", c.name},
                   {"pass", c.pass},
                   {"measured", c.measured},
                   {"expected", c.expected},
                   {"detail", c.detail}});
  return arr;
}

std::vector<SubsystemDims> parse_ladder(const std::string& spec) {
  std::vector<SubsystemDims> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    auto whole_int = [](const char* b, const char* e, int& v) {
      const auto r = std::from_chars(b, e, v);
      return b != e && r.ec == std::errc() && r.ptr == e;
    };
    int nc = 0, nm = 0;
    const bool ok = x != std::string::npos && whole_int(item.data(), item.data() + x, nc) &&
                    whole_int(item.data() + x + 1, item.data() + item.size(), nm);
    if (!ok) throw ConfigError("ladder", "expected NCxNM[,NCxNM...], got '" + item + "'");
    out.push_back(SubsystemDims::tripartite(nc, nm));
    try {
      out.back().validate();
    } catch (const DimensionError& e) {
      throw ConfigError("ladder", e.what());
    }
  }
  if (out.empty()) throw ConfigError("ladder", "empty ladder");
  return out;
}

}  // namespace tripartite
