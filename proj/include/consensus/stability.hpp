#pragma once

#include <vector>

#include "consensus/linalg.hpp"
#include "consensus/topology.hpp"

namespace consensus {

/// Agent dynamics x+ = A x + B u, y = C x shared by every agent.
class AgentModel {
 public:
  /// Throws DimensionMismatch / DomainError on inconsistent or non-finite data.
  AgentModel(Matrix a, Matrix b, Matrix c);

  int n() const { return static_cast<int>(a_.rows()); }
  int p() const { return static_cast<int>(b_.cols()); }
  int q() const { return static_cast<int>(c_.rows()); }

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const Matrix& C() const { return c_; }

 private:
  Matrix a_, b_, c_;
};

enum class StabilityKind { SchurStable, NeutrallyStable, Unstable };

const char* to_string(StabilityKind kind);

struct SpectralClass {
  StabilityKind kind = StabilityKind::Unstable;
  CVector eigenvalues;
  /// Product of |lambda| over eigenvalues with |lambda| > 1 + 1e-8 (1 if none).
  double unstable_product = 1.0;
  /// Some unit-modulus eigenvalue has a Jordan block larger than one.
  bool defective_unit_eigenvalue = false;
};

struct ClassifyOptions {
  double modulus_band = 1e-8;
  /// Singular-value cutoff for rank(A - lambda I), relative to ||A||_2.
  double rank_cutoff = 1e-10;
  /// Eigenvalues closer than this are treated as one repeated eigenvalue.
  double cluster_radius = 1e-6;
};

inline constexpr double kSchurGuard = 1e-12;

/// Strict Schur test: spectral radius < 1 - 1e-12.
bool is_schur(const Matrix& m);
bool is_schur(const CMatrix& m);

SpectralClass classify(const AgentModel& model, const ClassifyOptions& options = {});

/// A + (1 - sigma) L C, the matrix whose Schur stability defines the
/// consensus region.
CMatrix protocol_matrix(const AgentModel& model, const Matrix& l, Complex sigma);

bool protocol_matrix_stable(const AgentModel& model, const Matrix& l, Complex sigma);

/// 1 - spectral radius of A + (1 - sigma) L C.
double protocol_margin(const AgentModel& model, const Matrix& l, Complex sigma);

struct EigenvalueCheck {
  Complex lambda;
  bool stable = false;
  double margin = 0.0;
};

struct ConsensusVerdict {
  bool consensus = false;
  bool feedback_stable = false;
  /// 1 - spectral radius of A + B K.
  double feedback_margin = 0.0;
  std::vector<EigenvalueCheck> checks;

  std::vector<Complex> failing() const;
};

/// Reduces network consensus to Schur stability of A + B K and of
/// A + (1 - lambda_i) L C for every non-one eigenvalue lambda_i of D.
ConsensusVerdict check_theorem1(const AgentModel& model, const Matrix& k, const Matrix& l,
                                const TopologySpectrum& spectrum);

/// Throws DimensionMismatch unless K is p x n.
void check_feedback_shape(const AgentModel& model, const Matrix& k);
/// Throws DimensionMismatch unless L is n x q.
void check_observer_shape(const AgentModel& model, const Matrix& l);

}  // namespace consensus
