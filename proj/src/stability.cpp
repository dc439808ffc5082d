#include "consensus/stability.hpp"

#include <algorithm>
#include <cmath>

#include "consensus/errors.hpp"

namespace consensus {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

AgentModel::AgentModel(Matrix a, Matrix b, Matrix c)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  if (a_.rows() == 0 || a_.rows() != a_.cols()) {
    fail(ErrorKind::DimensionMismatch, "A must be square and non-empty, got " + shape(a_));
  }
  if (b_.rows() != a_.rows() || b_.cols() == 0) {
    fail(ErrorKind::DimensionMismatch, "B must have " + std::to_string(a_.rows()) +
                                           " rows, got " + shape(b_));
  }
  if (c_.cols() != a_.rows() || c_.rows() == 0) {
    fail(ErrorKind::DimensionMismatch, "C must have " + std::to_string(a_.rows()) +
                                           " columns, got " + shape(c_));
  }
  if (!all_finite(a_) || !all_finite(b_) || !all_finite(c_)) {
    fail(ErrorKind::DomainError, "model matrices must be finite");
  }
}

const char* to_string(StabilityKind kind) {
  switch (kind) {
    case StabilityKind::SchurStable: return "SchurStable";
    case StabilityKind::NeutrallyStable: return "NeutrallyStable";
    case StabilityKind::Unstable: return "Unstable";
  }
  return "Unknown";
}

bool is_schur(const Matrix& m) { return linalg::spectral_radius(m) < 1.0 - kSchurGuard; }

bool is_schur(const CMatrix& m) { return linalg::spectral_radius(m) < 1.0 - kSchurGuard; }

SpectralClass classify(const AgentModel& model, const ClassifyOptions& options) {
  const Matrix& a = model.A();
  const int n = model.n();
  SpectralClass out;
  out.eigenvalues = linalg::eigenvalues(a);

  double max_modulus = 0.0;
  bool outside = false;
  for (Eigen::Index k = 0; k < out.eigenvalues.size(); ++k) {
    const double r = std::abs(out.eigenvalues(k));
    max_modulus = std::max(max_modulus, r);
    if (r > 1.0 + options.modulus_band) {
      outside = true;
      out.unstable_product *= r;
    }
  }

  // Semisimplicity of eigenvalues on (or numerically next to) the unit circle.
  const double cutoff = options.rank_cutoff * linalg::norm2(a);
  const double near = std::max(options.modulus_band, options.cluster_radius);
  std::vector<char> done(out.eigenvalues.size(), 0);
  for (Eigen::Index k = 0; k < out.eigenvalues.size(); ++k) {
    if (done[k] || std::abs(std::abs(out.eigenvalues(k)) - 1.0) > near) continue;
    Complex mean = 0.0;
    int algebraic = 0;
    for (Eigen::Index j = k; j < out.eigenvalues.size(); ++j) {
      if (!done[j] && std::abs(out.eigenvalues(j) - out.eigenvalues(k)) < options.cluster_radius) {
        done[j] = 1;
        mean += out.eigenvalues(j);
        ++algebraic;
      }
    }
    mean /= static_cast<double>(algebraic);
    const CMatrix shifted = a.cast<Complex>() - mean * CMatrix::Identity(n, n);
    const int geometric = n - linalg::numerical_rank(shifted, cutoff);
    if (geometric < algebraic) out.defective_unit_eigenvalue = true;
  }

  if (max_modulus < 1.0 - options.modulus_band) {
    out.kind = StabilityKind::SchurStable;
  } else if (outside || out.defective_unit_eigenvalue) {
    out.kind = StabilityKind::Unstable;
  } else {
    out.kind = StabilityKind::NeutrallyStable;
  }
  return out;
}

void check_feedback_shape(const AgentModel& model, const Matrix& k) {
  if (k.rows() != model.p() || k.cols() != model.n()) {
    fail(ErrorKind::DimensionMismatch, "K must be " + std::to_string(model.p()) + "x" +
                                           std::to_string(model.n()) + ", got " + shape(k));
  }
}

void check_observer_shape(const AgentModel& model, const Matrix& l) {
  if (l.rows() != model.n() || l.cols() != model.q()) {
    fail(ErrorKind::DimensionMismatch, "L must be " + std::to_string(model.n()) + "x" +
                                           std::to_string(model.q()) + ", got " + shape(l));
  }
}

CMatrix protocol_matrix(const AgentModel& model, const Matrix& l, Complex sigma) {
  check_observer_shape(model, l);
  const Matrix lc = l * model.C();
  return model.A().cast<Complex>() + (1.0 - sigma) * lc.cast<Complex>();
}

bool protocol_matrix_stable(const AgentModel& model, const Matrix& l, Complex sigma) {
  return is_schur(protocol_matrix(model, l, sigma));
}

double protocol_margin(const AgentModel& model, const Matrix& l, Complex sigma) {
  return 1.0 - linalg::spectral_radius(protocol_matrix(model, l, sigma));
}

std::vector<Complex> ConsensusVerdict::failing() const {
  std::vector<Complex> out;
  for (const auto& c : checks) {
    if (!c.stable) out.push_back(c.lambda);
  }
  return out;
}

ConsensusVerdict check_theorem1(const AgentModel& model, const Matrix& k, const Matrix& l,
                                const TopologySpectrum& spectrum) {
  if (!spectrum.has_spanning_tree) {
    fail(ErrorKind::NoSpanningTree, "topology has no directed spanning tree");
  }
  check_feedback_shape(model, k);
  check_observer_shape(model, l);
  ConsensusVerdict v;
  const Matrix closed = model.A() + model.B() * k;
  v.feedback_margin = 1.0 - linalg::spectral_radius(closed);
  v.feedback_stable = is_schur(closed);
  bool all = v.feedback_stable;
  for (const Complex& lambda : spectrum.non_one_eigenvalues()) {
    const CMatrix m = protocol_matrix(model, l, lambda);
    EigenvalueCheck c;
    c.lambda = lambda;
    c.margin = 1.0 - linalg::spectral_radius(m);
    c.stable = is_schur(m);
    all = all && c.stable;
    v.checks.push_back(c);
  }
  v.consensus = all;
  return v;
}

}  // namespace consensus
