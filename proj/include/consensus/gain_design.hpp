#pragma once

#include <optional>
#include <string>
#include <vector>

#include "consensus/stability.hpp"

namespace consensus {

enum class DesignMethod { UserSupplied, Algorithm1, Algorithm2 };

const char* to_string(DesignMethod method);
/// Throws ParseError for unknown names.
DesignMethod design_method_from_string(const std::string& name);

/// Protocol gains (K, L). Construction checks that A + B K is Schur stable.
class ProtocolGains {
 public:
  ProtocolGains(const AgentModel& model, Matrix k, Matrix l, DesignMethod method,
                std::optional<double> certified_delta = std::nullopt);

  const Matrix& K() const { return k_; }
  const Matrix& L() const { return l_; }
  DesignMethod method() const { return method_; }
  /// Radius of the certified disk in the consensus region; 1 encodes the open
  /// unit disk.
  std::optional<double> certified_delta() const { return certified_delta_; }

 private:
  Matrix k_, l_;
  DesignMethod method_;
  std::optional<double> certified_delta_;
};

/// Real Jordan split of a neutrally stable A:
///   [U W]^{-1} A [U W] = blockdiag(M, X)
/// with M orthogonal (unit-modulus part) and X Schur stable.
struct JordanSplit {
  Matrix U;
  Matrix W;
  Matrix M;
  Matrix X;
  /// Orthonormal rows spanning range(U^T C^T).
  Matrix V;

  int n1() const { return static_cast<int>(U.cols()); }
};

struct MareOptions {
  std::optional<Matrix> Q;   // identity when absent
  std::optional<Matrix> P0;  // zero when absent
  double tol = 1e-12;
  long max_iter = 1'000'000;
  double divergence_guard = 1e12;
  bool record_history = false;
};

struct MareStep {
  long iteration = 0;
  double step_norm = 0.0;
  double trace = 0.0;
};

struct MareSolution {
  Matrix P;
  double delta = 0.0;
  Matrix Q;
  long iterations = 0;
  /// ||P - F(P)||_inf for the returned P.
  double residual = 0.0;
  std::vector<MareStep> history;
  std::vector<std::string> warnings;
};

struct DesignResult {
  ProtocolGains gains;
  std::optional<JordanSplit> split;
  std::optional<MareSolution> mare;
  std::vector<std::string> warnings;
};

/// Right-hand side of the modified Riccati recursion,
///   A P A^T - (1 - delta^2) A P C^T (C P C^T + I)^{-1} C P A^T + Q.
Matrix mare_map(const Matrix& a, const Matrix& c, double delta, const Matrix& q, const Matrix& p);

/// Observer gain -A P C^T (C P C^T + I)^{-1}.
Matrix mare_gain(const Matrix& a, const Matrix& c, const Matrix& p);

/// Fixed-point iteration of the modified Riccati recursion. delta = 0 gives the
/// standard discrete Riccati equation.
MareSolution solve_mare(const AgentModel& model, double delta, const MareOptions& options = {});

/// Same iteration on an explicit pair (A, C), without the model wrapper.
MareSolution solve_mare(const Matrix& a, const Matrix& c, double delta,
                        const MareOptions& options = {});

/// Stabilizing state feedback. With no user gain, returns the discrete LQR gain
/// for unit state and input weights, in the feedback convention u = K x.
Matrix design_k(const AgentModel& model, const std::optional<Matrix>& user_k = std::nullopt);

JordanSplit jordan_split(const AgentModel& model);

/// Observer gain for neutrally stable A whose consensus region is the open
/// unit disk. Schur-stable A yields L = 0.
DesignResult algorithm1(const AgentModel& model, const Matrix& k);

/// Observer gain from the modified Riccati equation; the consensus region
/// contains the closed disk of radius delta.
DesignResult algorithm2(const AgentModel& model, const Matrix& k, double delta,
                        const MareOptions& options = {});

}  // namespace consensus
