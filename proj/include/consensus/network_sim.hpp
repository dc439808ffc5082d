#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "consensus/gain_design.hpp"
#include "consensus/topology.hpp"

namespace consensus {

enum class SimMode { Observer, Static, Formation };

const char* to_string(SimMode mode);

/// Agents x+ = A x + B K v driven by the observer-type protocol
///   v_i+ = (A + B K) v_i + L (sum_j d_ij C (v_i - v_j) - zeta_i),
///   zeta_i = sum_j d_ij (y_i - y_j [- C (h_i - h_j)]).
struct ClosedLoopSystem {
  AgentModel model;
  Topology topology;
  ProtocolGains gains;
  SimMode mode = SimMode::Observer;
  std::optional<Formation> formation;

  /// [[A, B K], [0, A + B K]]
  Matrix block_A() const;
  /// [[0, 0], [-L C, L C]]
  Matrix block_H() const;
  /// I_N (x) block_A + (I_N - D) (x) block_H, acting on z = [x_1; v_1; ...; x_N; v_N].
  Matrix stacked_matrix() const;
};

struct SimOptions {
  double overflow_limit = 1e30;
};

struct TrajectoryLog {
  /// Completed steps; states are stored for k = 0..steps.
  int steps = 0;
  /// x[k].col(i) is agent i's state at step k.
  std::vector<Matrix> x;
  /// Protocol states; empty for the static network.
  std::vector<Matrix> v;
  /// max_ij ||x_i - x_j|| / max(1, max_i ||x_i||)
  std::vector<double> consensus_error;
  /// max_ij ||x_i - x_j||
  std::vector<double> absolute_consensus_error;
  /// max_ij ||x_i - h_i - x_j + h_j|| / max(1, max_i ||x_i||); formation mode only.
  std::vector<double> formation_error;
  bool diverged = false;
  std::optional<int> diverged_at;
  std::vector<std::string> diagnostics;

  int n_agents() const { return x.empty() ? 0 : static_cast<int>(x.front().cols()); }
};

/// Consensus errors of one snapshot (columns are agents).
double relative_disagreement(const Matrix& states);
double absolute_disagreement(const Matrix& states);

/// Per-agent recursion in O(N n^2) per step; dispatches to the formation
/// protocol when system.mode is Formation.
TrajectoryLog simulate(const ClosedLoopSystem& system, const std::vector<Vector>& x0,
                       const std::vector<Vector>& v0, int steps, const SimOptions& options = {});

/// Serial reference: iterates the stacked 2 N n recursion z+ = G z with the
/// Kronecker-structured G. Observer mode only.
TrajectoryLog simulate_stacked(const ClosedLoopSystem& system, const std::vector<Vector>& x0,
                               const std::vector<Vector>& v0, int steps,
                               const SimOptions& options = {});

/// Static coupled network x_i+ = A x_i + L C sum_j d_ij (x_i - x_j).
TrajectoryLog simulate_static(const AgentModel& model, const Topology& topology, const Matrix& l,
                              const std::vector<Vector>& x0, int steps,
                              const SimOptions& options = {});

/// Throws InfeasibleFormation unless ||(A - I)(h_i - h_j)|| < tolerance for all
/// pairs; the message names the worst pair.
void check_formation_feasible(const AgentModel& model, const Formation& formation,
                              double tolerance = 1e-9);

TrajectoryLog simulate_formation(const ClosedLoopSystem& system, const std::vector<Vector>& x0,
                                 const std::vector<Vector>& v0, int steps,
                                 const SimOptions& options = {});

/// Final consensus trajectory A^k (sum_i r_i x_i(0)) for k = 0..steps.
std::vector<Vector> predict_final_value(const AgentModel& model, const TopologySpectrum& spectrum,
                                        const std::vector<Vector>& x0, int steps);

/// max_i ||x_i(k) - w(k)|| / max(1, ||w(k)||).
double prediction_deviation(const Matrix& states, const Vector& predicted);

/// Reproducible initial states: mt19937_64 seeded with `seed`, 53-bit mantissa
/// mapped to [-1, 1).
std::vector<Vector> random_initial_states(int n_agents, int dim, std::uint64_t seed);

std::vector<Vector> zero_states(int n_agents, int dim);

}  // namespace consensus
