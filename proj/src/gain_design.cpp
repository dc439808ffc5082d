#include "consensus/gain_design.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "consensus/errors.hpp"

namespace consensus {

const char* to_string(DesignMethod method) {
  switch (method) {
    case DesignMethod::UserSupplied: return "UserSupplied";
    case DesignMethod::Algorithm1: return "Algorithm1";
    case DesignMethod::Algorithm2: return "Algorithm2";
  }
  return "Unknown";
}

DesignMethod design_method_from_string(const std::string& name) {
  if (name == "UserSupplied" || name == "user") return DesignMethod::UserSupplied;
  if (name == "Algorithm1" || name == "algorithm1") return DesignMethod::Algorithm1;
  if (name == "Algorithm2" || name == "algorithm2") return DesignMethod::Algorithm2;
  fail(ErrorKind::ParseError, "unknown design method '" + name + "'");
}

ProtocolGains::ProtocolGains(const AgentModel& model, Matrix k, Matrix l, DesignMethod method,
                             std::optional<double> certified_delta)
    : k_(std::move(k)), l_(std::move(l)), method_(method), certified_delta_(certified_delta) {
  check_feedback_shape(model, k_);
  check_observer_shape(model, l_);
  if (!is_schur(Matrix(model.A() + model.B() * k_))) {
    fail(ErrorKind::UserGainUnstable, "A + B K is not Schur stable");
  }
  if (certified_delta_ && !(*certified_delta_ > 0.0 && *certified_delta_ <= 1.0)) {
    fail(ErrorKind::DomainError, "certified delta must lie in (0, 1]");
  }
}

namespace {

double symmetric_scale(const Matrix& m) { return std::max(1.0, linalg::inf_norm(m)); }

bool is_symmetric(const Matrix& m) {
  return m.rows() == m.cols() &&
         linalg::inf_norm(m - m.transpose()) <= 1e-12 * symmetric_scale(m);
}

double min_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Unit-norm vector with its first non-negligible component real and positive.
CVector normalize_phase(CVector w) {
  w.normalize();
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (std::abs(w(k)) > 1e-8) {
      w *= std::conj(w(k)) / std::abs(w(k));
      break;
    }
  }
  return w;
}

Vector normalize_sign(Vector v) {
  v.normalize();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) > 1e-8) {
      if (v(k) < 0) v = -v;
      break;
    }
  }
  return v;
}

Matrix real_null_space(const Matrix& m, double cutoff) {
  const Eigen::Index cols = m.cols();
  Matrix padded = Matrix::Zero(std::max(m.rows(), cols), cols);
  padded.topRows(m.rows()) = m;
  Eigen::JacobiSVD<Matrix> svd(padded, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

struct UnitCluster {
  Complex lambda;  // on the unit circle, imag >= 0
  int multiplicity;
  double angle;
};

std::vector<UnitCluster> unit_clusters(const CVector& ev) {
  constexpr double band = 1e-8;
  constexpr double radius = 1e-6;
  constexpr double real_snap = 1e-9;
  std::vector<UnitCluster> out;
  std::vector<char> done(ev.size(), 0);
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (done[k] || std::abs(std::abs(ev(k)) - 1.0) > band) continue;
    Complex mean = 0.0;
    int count = 0;
    for (Eigen::Index j = k; j < ev.size(); ++j) {
      if (!done[j] && std::abs(ev(j) - ev(k)) < radius) {
        done[j] = 1;
        mean += ev(j);
        ++count;
      }
    }
    mean /= static_cast<double>(count);
    if (mean.imag() < -real_snap) continue;  // represented by its conjugate
    if (std::abs(mean.imag()) <= real_snap) mean = Complex(mean.real() > 0 ? 1.0 : -1.0, 0.0);
    mean /= std::abs(mean);
    double angle = std::arg(mean);
    if (angle < 0) angle += 2.0 * std::numbers::pi;
    out.push_back({mean, count, angle});
  }
  std::sort(out.begin(), out.end(),
            [](const UnitCluster& x, const UnitCluster& y) { return x.angle < y.angle; });
  return out;
}

}  // namespace

Matrix mare_map(const Matrix& a, const Matrix& c, double delta, const Matrix& q, const Matrix& p) {
  const Eigen::Index outputs = c.rows();
  const Matrix s = c * p * c.transpose() + Matrix::Identity(outputs, outputs);
  const Matrix apct = a * p * c.transpose();
  const Eigen::LLT<Matrix> llt(s);
  const Matrix correction = apct * llt.solve(apct.transpose());
  Matrix next = a * p * a.transpose() - (1.0 - delta * delta) * correction + q;
  return 0.5 * (next + next.transpose());
}

Matrix mare_gain(const Matrix& a, const Matrix& c, const Matrix& p) {
  const Eigen::Index outputs = c.rows();
  const Matrix s = c * p * c.transpose() + Matrix::Identity(outputs, outputs);
  const Matrix apct = a * p * c.transpose();
  // -A P C^T S^{-1}, computed as the transpose of S^{-1} (A P C^T)^T.
  const Eigen::LLT<Matrix> llt(s);
  return -Matrix(llt.solve(apct.transpose()).transpose());
}

MareSolution solve_mare(const Matrix& a, const Matrix& c, double delta,
                        const MareOptions& options) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || c.cols() != n) fail(ErrorKind::DimensionMismatch, "MARE needs A n x n and C q x n");
  if (!(delta >= 0.0 && delta < 1.0)) fail(ErrorKind::DomainError, "MARE delta must lie in [0, 1)");

  Matrix q = options.Q.value_or(Matrix::Identity(n, n));
  Matrix p = options.P0.value_or(Matrix::Zero(n, n));
  if (q.rows() != n || q.cols() != n || p.rows() != n || p.cols() != n) {
    fail(ErrorKind::DimensionMismatch, "Q and P0 must be n x n");
  }
  if (!is_symmetric(q) || min_eigenvalue(q) <= 0.0) {
    fail(ErrorKind::DomainError, "Q must be symmetric positive definite");
  }
  if (!is_symmetric(p) || min_eigenvalue(p) < -1e-12 * symmetric_scale(p)) {
    fail(ErrorKind::DomainError, "P0 must be symmetric positive semidefinite");
  }
  if (!linalg::detectable(a, c)) fail(ErrorKind::NotDetectable, "(A, C) is not detectable");

  MareSolution sol;
  sol.delta = delta;
  sol.Q = q;
  const bool zero_start = p.isZero(0.0);
  bool warned_monotone = false;
  double trace = p.trace();
  bool converged = false;

  for (long it = 1; it <= options.max_iter; ++it) {
    Matrix next = mare_map(a, c, delta, q, p);
    const double next_norm = linalg::inf_norm(next);
    if (!next.allFinite() || next_norm > options.divergence_guard) {
      std::ostringstream os;
      os << "||P_k|| exceeded " << options.divergence_guard << " at iteration " << it
         << "; delta is outside the range where a solution exists";
      fail(ErrorKind::Diverged, os.str());
    }
    const double step = linalg::inf_norm(next - p) / std::max(1.0, next_norm);
    const double next_trace = next.trace();
    if (zero_start && !warned_monotone && next_trace < trace - 1e-9 * std::max(1.0, std::abs(trace))) {
      sol.warnings.push_back("trace(P_k) decreased at iteration " + std::to_string(it));
      warned_monotone = true;
    }
    if (options.record_history) sol.history.push_back({it, step, next_trace});
    p = std::move(next);
    trace = next_trace;
    sol.iterations = it;
    if (step < options.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    fail(ErrorKind::MaxIterations,
         "MARE iteration did not converge in " + std::to_string(options.max_iter) + " steps");
  }
  sol.residual = linalg::inf_norm(p - mare_map(a, c, delta, q, p));
  if (sol.residual >= 1e-8 * std::max(1.0, linalg::inf_norm(p))) {
    sol.warnings.push_back("MARE residual above 1e-8 relative");
  }
  sol.P = std::move(p);
  return sol;
}

MareSolution solve_mare(const AgentModel& model, double delta, const MareOptions& options) {
  return solve_mare(model.A(), model.C(), delta, options);
}

Matrix design_k(const AgentModel& model, const std::optional<Matrix>& user_k) {
  const Matrix& a = model.A();
  const Matrix& b = model.B();
  if (user_k) {
    check_feedback_shape(model, *user_k);
    if (!is_schur(Matrix(a + b * *user_k))) {
      fail(ErrorKind::UserGainUnstable, "user-supplied K leaves A + B K unstable");
    }
    return *user_k;
  }
  if (!linalg::stabilizable(a, b)) fail(ErrorKind::NotStabilizable, "(A, B) is not stabilizable");
  // LQR with unit weights: the delta = 0 Riccati fixed point of the dual pair.
  const MareSolution dual = solve_mare(Matrix(a.transpose()), Matrix(b.transpose()), 0.0);
  const Matrix& x = dual.P;
  const Matrix r = Matrix::Identity(model.p(), model.p()) + b.transpose() * x * b;
  Matrix k = -Matrix(r.llt().solve(b.transpose() * x * a));
  if (!is_schur(Matrix(a + b * k))) {
    fail(ErrorKind::NotStabilizable, "LQR gain failed to stabilize A + B K");
  }
  return k;
}

JordanSplit jordan_split(const AgentModel& model) {
  const SpectralClass cls = classify(model);
  if (cls.kind == StabilityKind::Unstable) {
    fail(ErrorKind::NotNeutrallyStable, "A is not neutrally stable");
  }
  const Matrix& a = model.A();
  const int n = model.n();
  const CMatrix ac = a.cast<Complex>();
  const double cutoff = 1e-10 * std::max(1.0, linalg::norm2(a));

  std::vector<Vector> u_cols;
  std::vector<Vector> left_cols;
  std::vector<Matrix> m_blocks;
  for (const UnitCluster& cl : unit_clusters(cls.eigenvalues)) {
    if (cl.lambda.imag() == 0.0) {
      const Matrix shifted = a - cl.lambda.real() * Matrix::Identity(n, n);
      const Matrix right = real_null_space(shifted, cutoff);
      const Matrix left = real_null_space(shifted.transpose(), cutoff);
      if (right.cols() != cl.multiplicity || left.cols() != cl.multiplicity) {
        fail(ErrorKind::IllConditionedBasis, "eigenspace dimension does not match multiplicity");
      }
      for (Eigen::Index j = 0; j < right.cols(); ++j) {
        u_cols.push_back(normalize_sign(right.col(j)));
        left_cols.push_back(left.col(j));
        m_blocks.push_back(Matrix::Constant(1, 1, cl.lambda.real()));
      }
      continue;
    }
    const CMatrix shifted = ac - cl.lambda * CMatrix::Identity(n, n);
    const CMatrix right = linalg::null_space(shifted, cutoff);
    const CMatrix left = linalg::null_space(shifted.adjoint(), cutoff);
    if (right.cols() != cl.multiplicity || left.cols() != cl.multiplicity) {
      fail(ErrorKind::IllConditionedBasis, "eigenspace dimension does not match multiplicity");
    }
    const double cs = cl.lambda.real();
    const double sn = cl.lambda.imag();
    for (Eigen::Index j = 0; j < right.cols(); ++j) {
      const CVector w = normalize_phase(right.col(j));
      u_cols.push_back(w.real());
      u_cols.push_back(w.imag());
      left_cols.push_back(left.col(j).real());
      left_cols.push_back(left.col(j).imag());
      Matrix block(2, 2);
      block << cs, sn, -sn, cs;
      m_blocks.push_back(block);
    }
  }

  const int n1 = static_cast<int>(u_cols.size());
  JordanSplit split;
  split.U = Matrix(n, n1);
  for (int j = 0; j < n1; ++j) split.U.col(j) = u_cols[j];
  split.M = Matrix::Zero(n1, n1);
  for (int off = 0; const Matrix& b : m_blocks) {
    split.M.block(off, off, b.rows(), b.cols()) = b;
    off += static_cast<int>(b.rows());
  }

  // Complementary invariant subspace: orthogonal to every left eigenvector of
  // the unit-modulus eigenvalues.
  if (n1 == 0) {
    split.W = Matrix::Identity(n, n);
  } else {
    Matrix y(n, n1);
    for (int j = 0; j < n1; ++j) y.col(j) = left_cols[j];
    Matrix padded = Matrix::Zero(n, n);
    padded.topRows(n1) = y.transpose();
    Eigen::JacobiSVD<Matrix> svd(padded, Eigen::ComputeFullV);
    split.W = svd.matrixV().rightCols(n - n1);
  }

  Matrix t(n, n);
  t << split.U, split.W;
  if (linalg::condition_number(t) > 1e10) {
    fail(ErrorKind::IllConditionedBasis, "[U W] is numerically singular");
  }
  const Matrix blocks = t.partialPivLu().solve(a * t);
  const double scale = std::max(1.0, linalg::inf_norm(a));
  if (n1 > 0 && n1 < n) {
    const double off = std::max(blocks.topRightCorner(n1, n - n1).cwiseAbs().maxCoeff(),
                                blocks.bottomLeftCorner(n - n1, n1).cwiseAbs().maxCoeff());
    if (off > 1e-8 * scale) {
      fail(ErrorKind::IllConditionedBasis, "block decomposition residual too large");
    }
  }
  if (n1 > 0 && (blocks.topLeftCorner(n1, n1) - split.M).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    fail(ErrorKind::IllConditionedBasis, "unit-modulus block is not the expected rotation");
  }
  split.X = blocks.bottomRightCorner(n - n1, n - n1);

  // V: orthonormal rows spanning range(U^T C^T).
  if (n1 == 0) {
    split.V = Matrix(0, 0);
    return split;
  }
  const Matrix uc = split.U.transpose() * model.C().transpose();
  Eigen::JacobiSVD<Matrix> svd(uc, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double cut = 1e-10 * (s.size() > 0 ? s(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cut && s(rank) > 0.0) ++rank;
  split.V = svd.matrixU().leftCols(rank).transpose();
  for (Eigen::Index r = 0; r < split.V.rows(); ++r) {
    for (Eigen::Index j = 0; j < split.V.cols(); ++j) {
      if (std::abs(split.V(r, j)) > 1e-12) {
        if (split.V(r, j) < 0) split.V.row(r) *= -1.0;
        break;
      }
    }
  }
  return split;
}

DesignResult algorithm1(const AgentModel& model, const Matrix& k) {
  const Matrix kk = design_k(model, k);
  const SpectralClass cls = classify(model);
  if (cls.kind == StabilityKind::Unstable) {
    fail(ErrorKind::NotNeutrallyStable,
         "A is not neutrally stable; use algorithm2 (Riccati-based design) instead");
  }
  if (cls.kind == StabilityKind::SchurStable) {
    DesignResult out{ProtocolGains(model, kk, Matrix::Zero(model.n(), model.q()),
                                   DesignMethod::Algorithm1, 1.0),
                     std::nullopt, std::nullopt, {}};
    out.warnings.push_back("A is Schur stable: no unit-modulus part, L = 0");
    return out;
  }
  if (!linalg::detectable(model.A(), model.C())) {
    fail(ErrorKind::NotDetectable, "(A, C) is not detectable");
  }
  JordanSplit split = jordan_split(model);
  if (split.V.rows() == 0) fail(ErrorKind::SingularProjection, "U^T C^T is zero");
  const Matrix proj = model.C() * split.U * split.V.transpose();  // q x m
  if (linalg::condition_number(proj) > 1e10) {
    fail(ErrorKind::SingularProjection, "C U V^T is numerically singular");
  }
  // Square when C U has full row rank; otherwise the left inverse still gives
  // L C U = -U M V^T V.
  const Matrix proj_inv = proj.rows() == proj.cols()
                              ? Matrix(proj.partialPivLu().inverse())
                              : Matrix(proj.completeOrthogonalDecomposition().pseudoInverse());
  Matrix l = -split.U * split.M * split.V.transpose() * proj_inv;
  DesignResult out{ProtocolGains(model, kk, std::move(l), DesignMethod::Algorithm1, 1.0),
                   std::move(split), std::nullopt, {}};
  if (proj.rows() != proj.cols()) {
    out.warnings.push_back("C U is not of full row rank; used the left inverse of C U V^T");
  }
  return out;
}

DesignResult algorithm2(const AgentModel& model, const Matrix& k, double delta,
                        const MareOptions& options) {
  if (!(delta > 0.0 && delta < 1.0)) fail(ErrorKind::DeltaOutOfRange, "delta must lie in (0, 1)");
  const Matrix kk = design_k(model, k);
  if (!linalg::detectable(model.A(), model.C())) {
    fail(ErrorKind::NotDetectable, "(A, C) is not detectable");
  }
  const SpectralClass cls = classify(model);
  std::vector<std::string> warnings;
  bool hard_bound = false;
  if (cls.unstable_product > 1.0 && delta >= 1.0 / cls.unstable_product) {
    std::ostringstream os;
    os << "delta " << delta << " >= 1/prod|lambda_u| = " << 1.0 / cls.unstable_product;
    if (linalg::numerical_rank(model.C(), 1e-10 * linalg::norm2(model.C())) == 1) {
      hard_bound = true;
    } else {
      warnings.push_back(os.str() + "; the bound is only sufficient here, attempting anyway");
    }
  }
  MareSolution mare = solve_mare(model, delta, options);
  if (hard_bound) {
    fail(ErrorKind::DeltaOutOfRange,
         "delta violates 1/prod|lambda_u| with rank-one C although the iteration converged");
  }
  Matrix l = mare_gain(model.A(), model.C(), mare.P);
  for (const auto& w : mare.warnings) warnings.push_back(w);
  DesignResult out{ProtocolGains(model, kk, std::move(l), DesignMethod::Algorithm2, delta),
                   std::nullopt, std::move(mare), std::move(warnings)};
  return out;
}

}  // namespace consensus
