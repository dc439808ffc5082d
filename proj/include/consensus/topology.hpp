#pragma once

#include <optional>
#include <span>
#include <vector>

#include "consensus/linalg.hpp"

namespace consensus {

/// Directed communication topology encoded by a row-stochastic weight matrix.
///
/// Edge convention: d(i, j) > 0 for i != j means agent i receives from agent j,
/// i.e. the graph has the edge (j, i). The row index is always the receiver.
class Topology {
 public:
  int n_agents() const { return static_cast<int>(d_.rows()); }
  const Matrix& weights() const { return d_; }
  double weight(int receiver, int sender) const { return d_(receiver, sender); }

  /// True when `receiver` obtains information from `sender` (i != j, d_ij > 0).
  bool has_edge(int sender, int receiver) const {
    return sender != receiver && d_(receiver, sender) > 0.0;
  }

 private:
  explicit Topology(Matrix d) : d_(std::move(d)) {}
  friend Topology validate_topology(const Matrix& d);

  Matrix d_;
};

/// Directed edge (sender -> receiver), zero-based.
struct Edge {
  int from;
  int to;
};

struct TopologySpectrum {
  CVector eigenvalues;
  /// Left Perron vector r with r^T D = r^T and r^T 1 = 1; present only when the
  /// graph has a directed spanning tree (otherwise it is not unique).
  std::optional<Vector> perron_left_vector;
  bool has_spanning_tree = false;
  double non_one_max_modulus = 0.0;

  /// Eigenvalues of D with the single eigenvalue closest to 1 removed.
  std::vector<Complex> non_one_eigenvalues() const;
};

/// A constant formation: one offset vector h_i per agent.
struct Formation {
  std::vector<Vector> offsets;

  /// Throws DimensionMismatch unless there is one `state_dim` vector per agent.
  void validate(int n_agents, int state_dim) const;
  bool all_equal() const;
};

inline constexpr double kRowSumTolerance = 1e-9;
inline constexpr double kUnitEigenvalueTolerance = 1e-9;

/// Validates D (square, finite, nonnegative, positive diagonal, unit row sums
/// within 1e-9). Rows are renormalized so the stored matrix is stochastic to
/// rounding.
Topology validate_topology(const Matrix& d);

/// Builds D from an edge list: each receiver spreads (1 - floor) uniformly over
/// its in-neighbours and keeps the remainder on its diagonal. Duplicate edges
/// are counted once. Agents without in-neighbours get d_ii = 1.
Topology build_from_edges(int n, std::span<const Edge> edges, double self_weight_floor);

/// Directed reachability test: some root reaches every node.
bool has_directed_spanning_tree(const Topology& t);

TopologySpectrum analyze_spectrum(const Topology& t);

/// Membership in the family of spanning-tree graphs whose non-one eigenvalues
/// lie in the closed disk of radius delta.
bool in_gamma_delta(const TopologySpectrum& s, double delta);

}  // namespace consensus
