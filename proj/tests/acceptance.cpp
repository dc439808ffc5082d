// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "consensus/cli.hpp"
#include "consensus/errors.hpp"
#include "consensus/io.hpp"
#include "consensus/network_sim.hpp"
#include "consensus/region.hpp"
#include "oracles.hpp"

namespace {

using namespace consensus;
using namespace oracle::fixtures;
using oracle::data_path;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Complex random_in_disk(oracle::Rng& rng, double radius) {
  return std::polar(radius * std::sqrt(rng.uniform()), rng.uniform(0.0, 2.0 * M_PI));
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("consensus_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str() + e.str();
  return code;
}

// 1. Two-interval real-axis region through the region command.
Outcome two_interval_region() {
  Outcome r;
  const fs::path dir = scratch("region");
  const auto t0 = std::chrono::steady_clock::now();
  const int code = run_cli({"region", data_path("ex1_model.json"), data_path("ex1_gains.json"),
                            "--resolution", "301", "--out-dir", dir.string()});
  const double secs = seconds_since(t0);
  r.require(code == 0, "region exit code " + std::to_string(code));
  if (code != 0) return r;
  const io::Json iv = io::read_json_file(dir / "intervals.json");
  r.require(iv.size() == 2, "expected 2 intervals, got " + std::to_string(iv.size()));
  if (iv.size() != 2) return r;
  const double e = std::sqrt(0.02);
  const double want[2][2] = {{-1.0, -e}, {e, 1.0}};
  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    for (int s = 0; s < 2; ++s) worst = std::max(worst, std::abs(iv[k][s].get<double>() - want[k][s]));
  }
  r.require(worst < 1e-3, "endpoint error " + num(worst));
  r.require(secs < 5.0, "runtime " + num(secs) + " s");
  r.note("max endpoint error " + num(worst) + ", " + num(secs) + " s");
  return r;
}

// 2. Base topology spectrum and the three verify verdicts.
Outcome topology_triptych() {
  Outcome r;
  const TopologySpectrum s = analyze_spectrum(validate_topology(ex1_D()));
  std::vector<double> got;
  for (const Complex& z : s.non_one_eigenvalues()) got.push_back(z.real());
  std::sort(got.begin(), got.end());
  const std::vector<double> want{-0.2935, 0.164, 0.4, 0.4624, 0.868};
  double worst = got.size() == want.size() ? 0.0 : 1.0;
  for (std::size_t k = 0; k < std::min(got.size(), want.size()); ++k) {
    worst = std::max(worst, std::abs(got[k] - want[k]));
  }
  r.require(worst < 1e-3, "eigenvalue error " + num(worst));

  std::string out;
  int code = run_cli({"verify", data_path("ex1_model.json"), data_path("ex1_gains.json"),
                      data_path("ex1_topology.json")},
                     &out);
  r.require(code == 0 && out.find("PASS") != std::string::npos, "base topology not PASS");

  const AgentModel m(ex1_A(), ex1_B(), ex1_C());
  const std::pair<const char*, double> cases[] = {{"ex1_topology_case1.json", 0.0352},
                                                  {"ex1_topology_case2.json", -0.0315}};
  for (const auto& [file, target] : cases) {
    code = run_cli({"verify", data_path("ex1_model.json"), data_path("ex1_gains.json"), data_path(file)},
                   &out);
    r.require(code == 1 && out.find("FAIL") != std::string::npos,
              std::string(file) + " not FAIL");
    const ConsensusVerdict v = check_theorem1(
        m, ex1_K(), ex1_L(), analyze_spectrum(io::topology_from_json(io::read_json_file(data_path(file)))));
    const auto bad = v.failing();
    r.require(bad.size() == 1 && std::abs(bad[0] - Complex(target)) < 1e-3,
              std::string(file) + " failing eigenvalue mismatch");
  }
  r.note("max eigenvalue error " + num(worst));
  return r;
}

// 3. Unit-disk gain for the neutrally stable rotation model.
Outcome unit_disk_gain() {
  Outcome r;
  const AgentModel m(ex2_A(), ex2_B(), ex2_C());
  const DesignResult d = algorithm1(m, ex2_K());
  const double err = max_abs(d.gains.L() - ex2_L_printed());
  r.require(err < 1e-3, "L differs from [-0.2143, 0.7857, -0.2857] by " + num(err) +
                            " (computed L = [" + num(d.gains.L()(0, 0)) + ", " +
                            num(d.gains.L()(1, 0)) + ", " + num(d.gains.L()(2, 0)) + "])");
  oracle::Rng rng(31337);
  int unstable = 0;
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Complex s = random_in_disk(rng, 0.999);
    worst = std::max(worst, linalg::spectral_radius(protocol_matrix(m, d.gains.L(), s)));
    unstable += protocol_matrix_stable(m, d.gains.L(), s) ? 0 : 1;
  }
  r.require(unstable == 0, std::to_string(unstable) + " of 1000 sigma unstable");
  r.note("unit-disk property: worst radius " + num(worst));
  return r;
}

// 4. Riccati design for the double integrator.
Outcome riccati_design() {
  Outcome r;
  const AgentModel m(ex3_A(), ex3_B(), ex3_C());
  MareOptions o;
  o.Q = 3.0 * Matrix::Identity(2, 2);
  const DesignResult d = algorithm2(m, ex3_K(), 0.95, o);
  const Matrix& p = d.mare->P;
  const Matrix want = ex3_P_printed();
  double rel = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) rel = std::max(rel, std::abs(p(i, j) - want(i, j)) / std::abs(want(i, j)));
  }
  r.require(rel < 0.01, "P relative error " + num(rel));
  const double lerr = max_abs(d.gains.L() - ex3_L_printed());
  r.require(lerr < 1e-3, "L error " + num(lerr));
  const double res = oracle::mare_residual(ex3_A(), ex3_C(), 0.95, *o.Q, p) / std::max(1.0, max_abs(p));
  r.require(res < 1e-8, "relative residual " + num(res));
  r.note("Q = 3I, P rel err " + num(rel) + ", L err " + num(lerr) + ", residual " + num(res));
  return r;
}

// 5. Double-integrator network consensus and final-value tracking.
Outcome double_integrator_consensus() {
  Outcome r;
  const AgentModel m(ex3_A(), ex3_B(), ex3_C());
  MareOptions o;
  o.Q = 3.0 * Matrix::Identity(2, 2);
  const ProtocolGains g = algorithm2(m, ex3_K(), 0.95, o).gains;
  const Topology t = validate_topology(ex3_D());
  const ClosedLoopSystem sys{m, t, g, SimMode::Observer, {}};
  const std::vector<Vector> x0 = random_initial_states(6, 2, 2024);
  const int steps = 10000;
  const TrajectoryLog log = simulate(sys, x0, zero_states(6, 2), steps);
  r.require(!log.diverged, "diverged");
  int reached = -1;
  for (std::size_t k = 0; k < log.consensus_error.size(); ++k) {
    if (log.consensus_error[k] < 1e-6) {
      reached = static_cast<int>(k);
      break;
    }
  }
  r.require(reached >= 0 && log.consensus_error.back() < 1e-6, "consensus error not below 1e-6");
  const auto w = predict_final_value(m, analyze_spectrum(t), x0, steps);
  const double dev = prediction_deviation(log.x.back(), w.back());
  r.require(dev < 1e-6, "prediction deviation " + num(dev));
  r.note("error < 1e-6 from step " + std::to_string(reached) + ", final deviation " + num(dev));
  return r;
}

// 6. Hexagon formation.
Outcome hexagon_formation() {
  Outcome r;
  const AgentModel m(ex4_A(), ex4_B(), ex4_C());
  const ProtocolGains g(m, ex4_K(), ex4_L(), DesignMethod::UserSupplied);
  const ClosedLoopSystem sys{m, validate_topology(ex3_D()), g, SimMode::Formation,
                             Formation{ex4_offsets()}};
  const TrajectoryLog log = simulate(sys, random_initial_states(6, 4, 4), zero_states(6, 4), 10000);
  r.require(!log.diverged, "diverged");
  r.require(log.formation_error.back() < 1e-6, "formation error " + num(log.formation_error.back()));
  double worst = 0.0;
  const Matrix& x = log.x.back();
  for (int i = 0; i < 6; ++i) {
    const double len = (x.col(i).head(2) - x.col((i + 1) % 6).head(2)).norm();
    worst = std::max(worst, std::abs(len - 8.0));
  }
  r.require(worst < 1e-4, "edge length error " + num(worst));
  r.note("formation error " + num(log.formation_error.back()) + ", edge error " + num(worst));
  return r;
}

// 7. Existence boundary of the modified Riccati equation.
Outcome critical_delta() {
  Outcome r;
  const AgentModel m(Matrix::Constant(1, 1, 1.2), Matrix::Ones(1, 1), Matrix::Ones(1, 1));
  try {
    const MareSolution s = solve_mare(m, 0.8);
    const double rel = s.residual / std::max(1.0, max_abs(s.P));
    r.require(rel < 1e-8, "delta 0.8 residual " + num(rel));
    r.note("delta 0.8: P = " + num(s.P(0, 0)) + " in " + std::to_string(s.iterations) + " iterations");
  } catch (const ConsensusError& e) {
    r.require(false, std::string("delta 0.8 raised ") + e.what());
  }
  try {
    (void)solve_mare(m, 0.9);
    r.require(false, "delta 0.9 converged");
  } catch (const ConsensusError& e) {
    r.require(e.kind() == ErrorKind::Diverged, std::string("delta 0.9 raised ") + e.what());
    if (e.kind() == ErrorKind::Diverged) r.note("delta 0.9: Diverged");
  }
  return r;
}

// 8. Reduction to per-eigenvalue stability against simulation.
Outcome reduction_suite() {
  Outcome r;
  const auto t0 = std::chrono::steady_clock::now();
  oracle::Rng rng(8);
  int instances = 0, predicted_true = 0, mismatches = 0, excluded = 0;
  std::string first_mismatch;
  while (instances < 200) {
    const int n_agents = rng.integer(2, 6);
    const int n = rng.integer(1, 3);
    const int p = rng.integer(1, n);
    const int q = rng.integer(1, n);
    Matrix a = oracle::random_matrix(rng, n, n);
    a *= rng.uniform(0.9, 1.2) / std::max(1e-3, linalg::spectral_radius(a));
    const Matrix b = oracle::random_matrix(rng, n, p);
    const Matrix c = oracle::random_matrix(rng, q, n);
    if (!linalg::stabilizable(a, b) || !linalg::detectable(a, c)) continue;
    const AgentModel m(a, b, c);
    const Matrix k = design_k(m);
    const Topology t = validate_topology(oracle::random_spanning_tree_weights(rng, n_agents));
    const TopologySpectrum spec = analyze_spectrum(t);

    Matrix l;
    if (rng.coin(0.6)) {
      try {
        const double delta = rng.uniform(0.3, 0.95) / classify(m).unstable_product;
        l = algorithm2(m, k, delta).gains.L() * rng.uniform(0.5, 1.5);
      } catch (const ConsensusError&) {
        continue;
      }
    } else {
      l = oracle::random_matrix(rng, n, q);
    }

    double worst = linalg::spectral_radius(Matrix(a + b * k));
    for (const Complex& lam : spec.non_one_eigenvalues()) {
      worst = std::max(worst, linalg::spectral_radius(protocol_matrix(m, l, lam)));
    }
    if (std::abs(worst - 1.0) < 1e-3) {
      ++excluded;
      continue;
    }
    ++instances;
    const bool predicted = check_theorem1(m, k, l, spec).consensus;
    predicted_true += predicted ? 1 : 0;

    const ProtocolGains g(m, k, l, DesignMethod::UserSupplied);
    const ClosedLoopSystem sys{m, t, g, SimMode::Observer, {}};
    const TrajectoryLog log =
        simulate(sys, random_initial_states(n_agents, n, rng.next()), zero_states(n_agents, n), 10000);
    const bool converged = log.consensus_error.back() < 1e-8;
    const bool failed = log.diverged || log.absolute_consensus_error.back() > 1e-4;
    const bool agrees = predicted ? converged : failed;
    if (!agrees) {
      ++mismatches;
      if (first_mismatch.empty()) {
        first_mismatch = "instance " + std::to_string(instances) + " predicted " +
                         (predicted ? "true" : "false") + ", worst radius " + num(worst) +
                         ", final error " + num(log.consensus_error.back());
      }
    }
  }
  const double secs = seconds_since(t0);
  r.require(mismatches == 0, std::to_string(mismatches) + " mismatches (" + first_mismatch + ")");
  r.require(secs < 120.0, "runtime " + num(secs) + " s");
  r.note(std::to_string(instances) + " instances, " + std::to_string(predicted_true) +
         " predicted consensus, " + std::to_string(excluded) + " excluded near the unit circle, " +
         num(secs) + " s");
  return r;
}

// 9. Per-agent recursion against the stacked Kronecker recursion.
Outcome kronecker_equivalence() {
  Outcome r;
  oracle::Rng rng(9);
  int instances = 0;
  double worst = 0.0;
  while (instances < 50) {
    const int n_agents = rng.integer(1, 4);
    const int n = rng.integer(1, 3);
    const int p = rng.integer(1, n);
    const int q = rng.integer(1, n);
    const Matrix a = oracle::random_matrix(rng, n, n);
    const Matrix b = oracle::random_matrix(rng, n, p);
    if (!linalg::stabilizable(a, b)) continue;
    const AgentModel m(a, b, oracle::random_matrix(rng, q, n));
    const ProtocolGains g(m, design_k(m), oracle::random_matrix(rng, n, q, -0.5, 0.5),
                          DesignMethod::UserSupplied);
    const ClosedLoopSystem sys{m, validate_topology(oracle::random_spanning_tree_weights(rng, n_agents)),
                               g, SimMode::Observer, {}};
    const auto x0 = random_initial_states(n_agents, n, rng.next());
    const auto v0 = random_initial_states(n_agents, n, rng.next());
    const TrajectoryLog s1 = simulate(sys, x0, v0, 100);
    const TrajectoryLog s2 = simulate_stacked(sys, x0, v0, 100);
    ++instances;
    if (s1.x.size() != s2.x.size()) {
      r.require(false, "trajectory lengths differ");
      continue;
    }
    for (std::size_t k = 0; k < s1.x.size(); ++k) {
      const double sx = std::max(1.0, max_abs(s2.x[k]));
      const double sv = std::max(1.0, max_abs(s2.v[k]));
      worst = std::max(worst, max_abs(s1.x[k] - s2.x[k]) / sx);
      worst = std::max(worst, max_abs(s1.v[k] - s2.v[k]) / sv);
    }
  }
  r.require(worst < 1e-12, "max relative difference " + num(worst));
  r.note("50 instances, max relative difference " + num(worst));
  return r;
}

// 10. Independent oracles for the Schur test and the standard Riccati solution.
Outcome oracle_cross_checks() {
  Outcome r;
  oracle::Rng rng(10);
  int compared = 0, disagreements = 0, skipped = 0;
  while (compared < 1000) {
    const int n = rng.integer(1, 4);
    const Matrix mtx = oracle::random_matrix(rng, n, n, -1.2, 1.2);
    const double rad = oracle::companion_radius(mtx);
    if (std::abs(rad - 1.0) < 1e-10) {
      ++skipped;
      continue;
    }
    ++compared;
    disagreements += is_schur(mtx) == (rad < 1.0) ? 0 : 1;
  }
  r.require(disagreements == 0, std::to_string(disagreements) + " Schur disagreements");

  int pairs = 0;
  double worst = 0.0;
  while (pairs < 20) {
    const int n = rng.integer(1, 4);
    const int q = rng.integer(1, n);
    const Matrix a = oracle::random_matrix(rng, n, n, -1.5, 1.5);
    const Matrix c = oracle::random_matrix(rng, q, n);
    if (!linalg::detectable(a, c)) continue;
    ++pairs;
    const Matrix p = solve_mare(a, c, 0.0).P;
    const Matrix ref = oracle::riccati_doubling(a, c, Matrix::Identity(n, n));
    worst = std::max(worst, max_abs(p - ref) / std::max(1.0, max_abs(ref)));
  }
  r.require(worst < 1e-8, "Riccati relative difference " + num(worst));
  r.note("1000 matrices (" + std::to_string(skipped) + " in boundary band), Riccati max rel diff " +
         num(worst));
  return r;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"two-interval region", two_interval_region},
      {"topology triptych", topology_triptych},
      {"unit-disk gain", unit_disk_gain},
      {"Riccati design", riccati_design},
      {"double-integrator consensus", double_integrator_consensus},
      {"hexagon formation", hexagon_formation},
      {"critical delta", critical_delta},
      {"reduction suite", reduction_suite},
      {"Kronecker equivalence", kronecker_equivalence},
      {"oracle cross-checks", oracle_cross_checks},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("unexpected exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] AC%d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
