// Command-line front end: run sweeps, validate presets, check truncation convergence.

#include "tripartite/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace tripartite;
using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double to_number(const std::string& s, const std::string& field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError(field, "expected a number, got '" + s + "'");
  return v;
}

std::pair<std::string, std::string> pair_of(const std::string& s, const std::string& field, const char* shape) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw ConfigError(field, std::string("expected ") + shape + ", got '" + s + "'");
  return {parts[0], parts[1]};
}

int env_workers() {
  const char* v = std::getenv("TRIPARTITE_WORKERS");
  if (!v || !*v) return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 0) throw ConfigError("TRIPARTITE_WORKERS", std::string("expected a nonnegative integer, got '") + v + "'");
  return static_cast<int>(n);
}

struct RunFlags {
  std::string config, output, preset, dims, range, models, axis, reference, manifest;
  int points = 0;
  bool normalize = false, no_normalize = false, timing = false;
};

json load_document(const RunFlags& f) {
  json doc = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + f.config + "'");
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("", std::string("malformed JSON in '") + f.config + "': " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("", "config document must be a JSON object");
  }
  // A preset flag replaces the file's base preset; the file's keys still apply on top.
  if (!f.preset.empty()) doc["preset"] = f.preset;

  if (!f.output.empty()) doc["output"] = f.output;
  if (!f.dims.empty()) {
    const auto [nc, nm] = pair_of(f.dims, "dims", "NC,NM");
    doc["dims"]["n_cavity"] = static_cast<int>(to_number(nc, "dims.n_cavity"));
    doc["dims"]["n_mech"] = static_cast<int>(to_number(nm, "dims.n_mech"));
  }
  if (f.points != 0) doc["sweep"]["points"] = f.points;
  if (!f.range.empty()) {
    const auto [lo, hi] = pair_of(f.range, "sweep.range", "MIN,MAX");
    doc["sweep"]["range"] = {to_number(lo, "sweep.range"), to_number(hi, "sweep.range")};
  }
  if (!f.models.empty()) doc["models"] = split(f.models, ',');
  if (!f.axis.empty()) doc["sweep"]["axis"] = f.axis;
  if (!f.reference.empty()) doc["sweep"]["reference"] = f.reference;
  if (f.normalize) doc["sweep"]["normalize"] = true;
  if (f.no_normalize) doc["sweep"]["normalize"] = false;
  if (f.timing) doc["record_timing"] = true;
  return doc;
}

int cmd_run(const RunFlags& f) {
  RunConfig cfg = parse_config(load_document(f));
  if (cfg.sweep.workers == 0) cfg.sweep.workers = env_workers();

  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_sweep(cfg.sweep);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (cfg.output.empty()) {
    write_csv(rows, std::cout);
  } else {
    emit_csv(rows, cfg.output);
  }
  const std::string manifest_path =
      !f.manifest.empty() ? f.manifest : (cfg.output.empty() ? std::string() : cfg.output + ".manifest.json");
  const RunManifest m = make_manifest(cfg, rows, wall);
  if (!manifest_path.empty()) {
    std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest to '" + manifest_path + "'");
    out << m.to_json().dump(2) << '\n';
  }
  for (const auto& fail : m.failures)
    std::cerr << "failed: row " << fail.index << " delta=" << format_double(fail.delta) << " model="
              << to_string(fail.model) << ": " << fail.error << '\n';
  return m.failure_count == 0 ? 0 : 1;
}

int cmd_validate(const std::string& name) {
  const auto checks = validate_preset(name);
  std::cout << json{{"preset", name}, {"checks", to_json(checks)}}.dump(2) << '\n';
  for (const auto& c : checks)
    if (!c.pass) return 1;
  return 0;
}

int cmd_converge(const std::string& name, const std::string& ladder_spec, const std::string& probes_spec,
                 const std::string& models_spec) {
  const RunConfig cfg = preset(name);
  ConvergenceOptions opts;
  opts.reference = cfg.sweep.reference;
  opts.models = cfg.sweep.models;
  if (!models_spec.empty()) {
    opts.models.clear();
    for (const auto& m : split(models_spec, ',')) opts.models.push_back(model_from_string(m));
  }
  // Probes are given on the preset's grid axis.
  const double shift = cfg.sweep.axis == Axis::delta_prime ? displacement_shift(cfg.sweep.params) : 0.0;
  std::vector<double> probes;
  for (const auto& s : split(probes_spec, ',')) probes.push_back(to_number(s, "probes") - shift);

  json out{{"preset", name}, {"ladder", ladder_spec}, {"probes", probes_spec}};
  try {
    const ConvergenceResult r = convergence_check(cfg.sweep.params, parse_ladder(ladder_spec), probes, opts);
    out["converged"] = true;
    out["dims"] = {{"n_cavity", r.dims.n_cavity}, {"n_mech", r.dims.n_mech}};
    out["trend"] = r.trend;
    std::cout << out.dump(2) << '\n';
    return 0;
  } catch (const NonConvergenceError& e) {
    out["converged"] = false;
    out["trend"] = e.trend;
    out["error"] = e.what();
    std::cout << out.dump(2) << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady states of the driven qubit-cavity-mechanics system and its effective optomechanical model"};
  app.set_version_flag("--version", kArtifactVersion);
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Detuning sweep; writes CSV and a run manifest");
  run->add_option("--config", rf.config, "JSON config file (see docs/config.md)");
  run->add_option("--output", rf.output, "CSV path (default: standard output)");
  run->add_option("--preset", rf.preset, "Base parameter set")->check(CLI::IsMember(preset_names()));
  run->add_option("--dims", rf.dims, "Fock truncations NC,NM");
  run->add_option("--points", rf.points, "Grid points")->check(CLI::PositiveNumber);
  run->add_option("--range", rf.range, "Grid range MIN,MAX (use --range=MIN,MAX for negative MIN)");
  run->add_option("--models", rf.models, "Comma list of full,effective,uncoupled");
  run->add_option("--axis", rf.axis, "Grid coordinate")->check(CLI::IsMember({"delta", "delta_prime"}));
  run->add_option("--reference", rf.reference, "Detuning reference")->check(CLI::IsMember({"bare", "dressed"}));
  run->add_flag("--normalize", rf.normalize, "Divide n_cav by n0 = 4 F_L^2 / kappa^2");
  run->add_flag("--no-normalize", rf.no_normalize, "Leave n_cav_normalized empty");
  run->add_flag("--timing", rf.timing, "Record per-point solve times (breaks byte-reproducibility)");
  run->add_option("--manifest", rf.manifest, "Manifest path (default: <output>.manifest.json)");

  std::string vpreset;
  auto* validate = app.add_subcommand("validate", "Pass/fail report for a preset (JSON on stdout)");
  validate->add_option("--preset", vpreset)->required()->check(CLI::IsMember(preset_names()));

  std::string cpreset, ladder, probes = "-1,0,1", cmodels;
  auto* converge = app.add_subcommand("converge", "Smallest converged truncation on a ladder");
  converge->add_option("--preset", cpreset)->required()->check(CLI::IsMember(preset_names()));
  converge->add_option("--ladder", ladder, "NCxNM,NCxNM,... strictly increasing")->required();
  converge->add_option("--probes", probes, "Probe detunings on the preset's grid axis")->capture_default_str();
  converge->add_option("--models", cmodels, "Comma list of models (default: the preset's)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rf.normalize && rf.no_normalize) throw ConfigError("sweep.normalize", "--normalize and --no-normalize conflict");
    if (*run) return cmd_run(rf);
    if (*validate) return cmd_validate(vpreset);
    if (*converge) return cmd_converge(cpreset, ladder, probes, cmodels);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
