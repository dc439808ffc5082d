#include "consensus/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "consensus/errors.hpp"

namespace consensus::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

struct GlobalOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  double tol = 1e-12;
  long max_iter = 1'000'000;
};

std::string format_complex(Complex z) {
  std::ostringstream os;
  os << std::setprecision(4);
  const double re = std::abs(z.real()) < 5e-13 ? 0.0 : z.real();
  const double im = z.imag();
  if (std::abs(im) < 1e-12) {
    os << re;
  } else {
    os << re << (im < 0 ? "-" : "+") << std::abs(im) << "i";
  }
  return os.str();
}

// Sub-document given inline or as a path relative to `base`.
Json resolve(const Json& j, const fs::path& base) {
  if (j.is_string()) return io::read_json_file(base / j.get<std::string>());
  return j;
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) fail(ErrorKind::ParseError, "cannot create output directory " + dir);
  return p;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::ParseError, "cannot write " + path.string());
  return f;
}

MareOptions mare_options(const GlobalOptions& g, double q_scale, int n, bool history) {
  MareOptions o;
  o.tol = g.tol;
  o.max_iter = g.max_iter;
  o.record_history = history;
  if (q_scale != 1.0) o.Q = q_scale * Matrix::Identity(n, n);
  return o;
}

// ---------------------------------------------------------------- classify

int cmd_classify(const std::string& model_file, std::ostream& out) {
  const AgentModel model = io::model_from_json(io::read_json_file(model_file));
  const SpectralClass cls = classify(model);
  out << "Stability: " << to_string(cls.kind);
  if (cls.defective_unit_eigenvalue) out << " (defective unit eigenvalue)";
  out << "\nEigenvalues:";
  for (const Complex& z : linalg::sorted(cls.eigenvalues)) out << ' ' << format_complex(z);
  out << "\nStabilizable (A, B): "
      << (linalg::stabilizable(model.A(), model.B()) ? "yes" : "no")
      << "\nDetectable (A, C): " << (linalg::detectable(model.A(), model.C()) ? "yes" : "no")
      << "\nunstable_product = " << io::format_double(cls.unstable_product)
      << "\ndelta bound: ";
  if (cls.unstable_product > 1.0) {
    out << "delta < " << io::format_double(1.0 / cls.unstable_product) << '\n';
  } else {
    out << "none (no modulus > 1)\n";
  }
  return kSuccess;
}

// ------------------------------------------------------------------ design

struct DesignArgs {
  std::string model_file;
  std::string method = "algorithm2";
  double delta = 0.95;
  std::string k_file;
  std::string gains_file;
  double q_scale = 1.0;
  std::string out_file;
};

int cmd_design(const DesignArgs& a, const GlobalOptions& g, std::ostream& out) {
  const AgentModel model = io::model_from_json(io::read_json_file(a.model_file));
  const fs::path dir = ensure_dir(g.out_dir);
  const fs::path gains_path = a.out_file.empty() ? dir / "gains.json" : fs::path(a.out_file);

  std::optional<Matrix> user_k;
  if (!a.k_file.empty()) user_k = io::matrix_from_json(io::read_json_file(a.k_file).at("K"), "K");

  const DesignMethod method = design_method_from_string(a.method);
  std::optional<DesignResult> result;
  if (method == DesignMethod::UserSupplied) {
    if (a.gains_file.empty()) fail(ErrorKind::ParseError, "--method user needs --gains-file");
    ProtocolGains gains = io::gains_from_json(io::read_json_file(a.gains_file), model);
    result.emplace(DesignResult{std::move(gains), std::nullopt, std::nullopt, {}});
  } else {
    const Matrix k = design_k(model, user_k);
    if (method == DesignMethod::Algorithm1) {
      result.emplace(algorithm1(model, k));
    } else {
      result.emplace(algorithm2(model, k, a.delta, mare_options(g, a.q_scale, model.n(), true)));
    }
  }

  {
    std::ofstream f = open_out(gains_path);
    f << io::gains_to_json(result->gains).dump(2) << '\n';
  }
  out << "method: " << to_string(result->gains.method()) << '\n';
  out << "K = " << io::matrix_to_json(result->gains.K()).dump() << '\n';
  out << "L = " << io::matrix_to_json(result->gains.L()).dump() << '\n';
  if (result->gains.certified_delta()) {
    out << "certified_delta = " << io::format_double(*result->gains.certified_delta()) << '\n';
  }
  if (result->split) {
    out << "n1 = " << result->split->n1() << ", M = " << io::matrix_to_json(result->split->M).dump()
        << ", X eigenvalues:";
    for (const Complex& z : linalg::sorted(linalg::eigenvalues(result->split->X))) {
      out << ' ' << format_complex(z);
    }
    out << '\n';
  }
  if (result->mare) {
    const MareSolution& m = *result->mare;
    out << "P = " << io::matrix_to_json(m.P).dump() << '\n'
        << "MARE iterations = " << m.iterations << ", residual = " << io::format_double(m.residual)
        << '\n';
    std::ofstream f = open_out(dir / "mare.csv");
    io::write_mare_csv(f, m);
  }
  for (const auto& w : result->warnings) out << "warning: " << w << '\n';
  out << "wrote " << gains_path.string() << '\n';
  return kSuccess;
}

// ------------------------------------------------------------------ region

struct RegionArgs {
  std::string model_file;
  std::string gains_file;
  int resolution = 301;
  double half_width = 1.5;
  bool ascii = false;
  std::string image;
  bool serial = false;
};

int cmd_region(const RegionArgs& a, const GlobalOptions& g, std::ostream& out) {
  const AgentModel model = io::model_from_json(io::read_json_file(a.model_file));
  const ProtocolGains gains = io::gains_from_json(io::read_json_file(a.gains_file), model);
  RegionOptions opts;
  opts.resolution = a.resolution;
  opts.half_width = a.half_width;
  const ConsensusRegion region =
      a.serial ? scan_region_serial(model, gains.L(), opts) : scan_region(model, gains.L(), opts);

  const fs::path dir = ensure_dir(g.out_dir);
  {
    std::ofstream f = open_out(dir / "region.csv");
    io::write_region_csv(f, region);
  }
  {
    std::ofstream f = open_out(dir / "intervals.json");
    f << io::intervals_to_json(region.real_intervals()).dump(2) << '\n';
  }
  if (!a.image.empty()) {
    std::ofstream f = open_out(a.image);
    io::write_region_pgm(f, region);
  }

  out << "real intervals:";
  if (region.real_intervals().empty()) out << " none";
  for (const RealInterval& iv : region.real_intervals()) {
    out << " (" << io::format_double(iv.lo) << ", " << io::format_double(iv.hi) << ")";
  }
  out << '\n';
  out << "stable fraction of unit-disk samples: " << std::setprecision(6)
      << 100.0 * region.stable_fraction_within(1.0) << "%\n";
  long stable = 0;
  for (const GridCell& c : region.cells()) stable += c.stable ? 1 : 0;
  out << "stable grid nodes: " << stable << " / " << region.cells().size() << '\n';
  if (a.ascii) out << region.render_ascii();
  return kSuccess;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const std::string& model_file, const std::string& gains_file,
               const std::string& topology_file, std::ostream& out) {
  const AgentModel model = io::model_from_json(io::read_json_file(model_file));
  const ProtocolGains gains = io::gains_from_json(io::read_json_file(gains_file), model);
  const Topology topology = io::topology_from_json(io::read_json_file(topology_file));
  if (topology.n_agents() < 1) fail(ErrorKind::DimensionMismatch, "empty topology");
  const TopologySpectrum spectrum = analyze_spectrum(topology);
  const ConsensusVerdict v = check_theorem1(model, gains.K(), gains.L(), spectrum);
  out << "A + B K: " << (v.feedback_stable ? "Schur stable" : "NOT Schur stable")
      << " (margin " << std::setprecision(6) << v.feedback_margin << ")\n";
  for (const EigenvalueCheck& c : v.checks) {
    out << "lambda = " << format_complex(c.lambda) << ": " << (c.stable ? "in S" : "NOT in S")
        << " (margin " << std::setprecision(6) << c.margin << ")\n";
  }
  if (v.consensus) {
    out << "PASS\n";
    return kSuccess;
  }
  out << "FAIL at";
  for (const Complex& z : v.failing()) out << ' ' << format_complex(z);
  if (!v.feedback_stable) out << " (A + B K unstable)";
  out << '\n';
  return kAnalysisFailure;
}

// ---------------------------------------------------------------- simulate

ProtocolGains scenario_gains(const ScenarioConfig& s, const AgentModel& model,
                             const GlobalOptions& g) {
  if (s.gains) return io::gains_from_json(*s.gains, model);
  if (!s.design) fail(ErrorKind::ParseError, "scenario needs \"gains\" or \"design\"");
  const Json& d = *s.design;
  const DesignMethod method = design_method_from_string(d.value("method", "algorithm2"));
  std::optional<Matrix> user_k;
  if (d.contains("K")) user_k = io::matrix_from_json(d.at("K"), "K");
  const Matrix k = design_k(model, user_k);
  if (method == DesignMethod::Algorithm1) return algorithm1(model, k).gains;
  if (method == DesignMethod::Algorithm2) {
    const double q_scale = d.value("q_scale", 1.0);
    return algorithm2(model, k, d.value("delta", 0.95), mare_options(g, q_scale, model.n(), false))
        .gains;
  }
  fail(ErrorKind::ParseError, "design method \"user\" needs inline \"gains\"");
}

int cmd_simulate(const std::string& scenario_file, const GlobalOptions& g, std::ostream& out) {
  ScenarioConfig s = load_scenario(scenario_file);
  if (g.seed) s.seed = *g.seed;
  const AgentModel model = io::model_from_json(s.model);
  const Topology topology = io::topology_from_json(s.topology);
  ProtocolGains gains = scenario_gains(s, model, g);
  const int agents = topology.n_agents();
  const int n = model.n();

  std::optional<Formation> formation;
  if (s.formation) formation = io::formation_from_json(*s.formation);
  if (s.mode == SimMode::Formation && !formation) {
    fail(ErrorKind::ParseError, "formation mode needs a \"formation\" entry");
  }
  const std::vector<Vector> x0 = s.x0 ? *s.x0 : random_initial_states(agents, n, s.seed);
  const std::vector<Vector> v0 = s.v0 ? *s.v0 : zero_states(agents, n);

  ClosedLoopSystem sys{model, topology, gains, s.mode, formation};
  const TrajectoryLog log = simulate(sys, x0, v0, s.steps);

  const fs::path dir = ensure_dir(g.out_dir);
  {
    std::ofstream f = open_out(dir / "trajectory.csv");
    io::write_trajectory_csv(f, log);
  }
  {
    std::ofstream f = open_out(dir / "errors.csv");
    io::write_error_csv(f, log);
  }

  Json summary;
  summary["mode"] = to_string(s.mode);
  summary["steps"] = log.steps;
  summary["seed"] = s.seed;
  summary["diverged"] = log.diverged;
  summary["final_consensus_error"] = log.consensus_error.back();
  summary["final_absolute_consensus_error"] = log.absolute_consensus_error.back();
  constexpr double kAchieved = 1e-6;
  summary["consensus_achieved"] = !log.diverged && log.consensus_error.back() < kAchieved;
  if (!log.formation_error.empty()) {
    summary["final_formation_error"] = log.formation_error.back();
    summary["formation_achieved"] = !log.diverged && log.formation_error.back() < kAchieved;
  }
  const TopologySpectrum spectrum = analyze_spectrum(topology);
  if (spectrum.has_spanning_tree) {
    const ConsensusVerdict v = check_theorem1(model, gains.K(), gains.L(), spectrum);
    Json failing = Json::array();
    for (const Complex& z : v.failing()) failing.push_back(format_complex(z));
    summary["theorem1"] = Json{{"consensus", v.consensus}, {"failing", failing}};
    // The final value applies to x_i - h_i in formation mode.
    std::vector<Vector> shifted = x0;
    Matrix last = log.x.back();
    if (s.mode == SimMode::Formation) {
      for (int i = 0; i < agents; ++i) {
        shifted[i] -= formation->offsets[i];
        last.col(i) -= formation->offsets[i];
      }
    }
    if (!log.diverged) {
      const std::vector<Vector> w = predict_final_value(model, spectrum, shifted, log.steps);
      summary["prediction_deviation"] = prediction_deviation(last, w.back());
    }
  }
  if (!log.diagnostics.empty()) summary["diagnostics"] = log.diagnostics;
  {
    std::ofstream f = open_out(dir / "summary.json");
    f << summary.dump(2) << '\n';
  }
  out << summary.dump(2) << '\n';
  return kSuccess;
}

}  // namespace

ScenarioConfig load_scenario(const fs::path& path) {
  const Json j = io::read_json_file(path);
  if (!j.is_object()) fail(ErrorKind::ParseError, path.string() + ": scenario must be an object");
  const fs::path base = path.parent_path();
  ScenarioConfig s;
  auto need = [&](const char* key) -> const Json& {
    if (!j.contains(key)) fail(ErrorKind::ParseError, path.string() + ": missing \"" + key + "\"");
    return j.at(key);
  };
  s.model = resolve(need("model"), base);
  s.topology = resolve(need("topology"), base);
  if (j.contains("gains")) s.gains = resolve(j.at("gains"), base);
  if (j.contains("design")) s.design = resolve(j.at("design"), base);
  if (j.contains("formation")) s.formation = resolve(j.at("formation"), base);
  const std::string mode = j.value("mode", s.formation ? "formation" : "observer");
  if (mode == "observer") {
    s.mode = SimMode::Observer;
  } else if (mode == "static") {
    s.mode = SimMode::Static;
  } else if (mode == "formation") {
    s.mode = SimMode::Formation;
  } else {
    fail(ErrorKind::ParseError, path.string() + ": unknown mode \"" + mode + "\"");
  }
  if (j.contains("x0")) s.x0 = io::vectors_from_json(j.at("x0"), "x0");
  if (j.contains("v0")) s.v0 = io::vectors_from_json(j.at("v0"), "v0");
  s.seed = j.value("seed", std::uint64_t{1});
  s.steps = j.value("steps", 1000);
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Design and verification toolkit for discrete-time observer-type consensus"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--out-dir", g.out_dir, "Directory for CSV/JSON artifacts");
  auto* seed_opt = app.add_option("--seed", seed, "Override the scenario seed");
  app.add_option("--tol", g.tol, "MARE convergence tolerance (relative step)");
  app.add_option("--max-iter", g.max_iter, "MARE iteration limit");

  std::string model_file, gains_file, topology_file, scenario_file;

  auto* classify_cmd = app.add_subcommand("classify", "Spectral classification of a model");
  classify_cmd->add_option("model", model_file)->required();

  DesignArgs d;
  auto* design_cmd = app.add_subcommand("design", "Synthesize protocol gains");
  design_cmd->add_option("model", d.model_file)->required();
  design_cmd->add_option("--method", d.method)
      ->check(CLI::IsMember({"algorithm1", "algorithm2", "user"}));
  design_cmd->add_option("--delta", d.delta, "Disk radius for algorithm2");
  design_cmd->add_option("--k-file", d.k_file, "JSON file with a \"K\" matrix");
  design_cmd->add_option("--gains-file", d.gains_file, "Gains to validate with --method user");
  design_cmd->add_option("--q-scale", d.q_scale, "MARE weight Q = s I");
  design_cmd->add_option("--out", d.out_file, "Gains JSON path (default <out-dir>/gains.json)");

  RegionArgs r;
  auto* region_cmd = app.add_subcommand("region", "Scan the consensus region");
  region_cmd->add_option("model", r.model_file)->required();
  region_cmd->add_option("gains", r.gains_file)->required();
  region_cmd->add_option("--resolution", r.resolution)->check(CLI::Range(2, 5001));
  region_cmd->add_option("--half-width", r.half_width);
  region_cmd->add_flag("--ascii", r.ascii, "Print a character rendering");
  region_cmd->add_option("--image", r.image, "Write a PGM image of the stable set");
  region_cmd->add_flag("--serial", r.serial, "Use the single-threaded reference scan");

  auto* verify_cmd = app.add_subcommand("verify", "Check consensus for a topology");
  verify_cmd->add_option("model", model_file)->required();
  verify_cmd->add_option("gains", gains_file)->required();
  verify_cmd->add_option("topology", topology_file)->required();

  auto* simulate_cmd = app.add_subcommand("simulate", "Run a closed-loop scenario");
  simulate_cmd->add_option("scenario", scenario_file)->required();

  std::vector<const char*> argv{"consensus"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = e.get_exit_code();
    (code == 0 ? out : err) << (code == 0 ? app.help() : std::string(e.what()) + "\n");
    return code == 0 ? kSuccess : kInputError;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*classify_cmd) return cmd_classify(model_file, out);
    if (*design_cmd) return cmd_design(d, g, out);
    if (*region_cmd) return cmd_region(r, g, out);
    if (*verify_cmd) return cmd_verify(model_file, gains_file, topology_file, out);
    if (*simulate_cmd) return cmd_simulate(scenario_file, g, out);
  } catch (const ConsensusError& e) {
    err << "error: " << e.what() << '\n';
    return is_input_error(e.kind()) ? kInputError : kAnalysisFailure;
  } catch (const nlohmann::json::exception& e) {
    err << "error: ParseError: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace consensus::cli
