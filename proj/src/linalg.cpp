#include "consensus/linalg.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "consensus/errors.hpp"

namespace consensus {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RowSumError: return "RowSumError";
    case ErrorKind::NegativeWeight: return "NegativeWeight";
    case ErrorKind::ZeroDiagonal: return "ZeroDiagonal";
    case ErrorKind::SelfLoopError: return "SelfLoopError";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::SpectrumError: return "SpectrumError";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NoSpanningTree: return "NoSpanningTree";
    case ErrorKind::NotStabilizable: return "NotStabilizable";
    case ErrorKind::UserGainUnstable: return "UserGainUnstable";
    case ErrorKind::NotNeutrallyStable: return "NotNeutrallyStable";
    case ErrorKind::NotDetectable: return "NotDetectable";
    case ErrorKind::SingularProjection: return "SingularProjection";
    case ErrorKind::IllConditionedBasis: return "IllConditionedBasis";
    case ErrorKind::Diverged: return "Diverged";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::DeltaOutOfRange: return "DeltaOutOfRange";
    case ErrorKind::InfeasibleFormation: return "InfeasibleFormation";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "UnknownError";
}

bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RowSumError:
    case ErrorKind::NegativeWeight:
    case ErrorKind::ZeroDiagonal:
    case ErrorKind::SelfLoopError:
    case ErrorKind::IndexOutOfRange:
    case ErrorKind::DomainError:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::ParseError:
    case ErrorKind::InfeasibleFormation:
      return true;
    default:
      return false;
  }
}

namespace linalg {

CVector eigenvalues(const Matrix& m) {
  if (m.size() == 0) return CVector(0);
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues();
}

CVector eigenvalues(const CMatrix& m) {
  if (m.size() == 0) return CVector(0);
  Eigen::ComplexEigenSolver<CMatrix> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues();
}

double spectral_radius(const Matrix& m) {
  const CVector ev = eigenvalues(m);
  return ev.size() == 0 ? 0.0 : ev.cwiseAbs().maxCoeff();
}

double spectral_radius(const CMatrix& m) {
  const CVector ev = eigenvalues(m);
  return ev.size() == 0 ? 0.0 : ev.cwiseAbs().maxCoeff();
}

double inf_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double norm2(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

int numerical_rank(const CMatrix& m, double cutoff) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  return static_cast<int>((s.array() > cutoff).count());
}

int numerical_rank(const Matrix& m, double cutoff) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  return static_cast<int>((s.array() > cutoff).count());
}

double condition_number(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

CMatrix null_space(const CMatrix& m, double cutoff) {
  const Eigen::Index cols = m.cols();
  if (m.rows() == 0) return CMatrix::Identity(cols, cols);
  // Pad to square so the full set of right singular vectors is available.
  CMatrix padded = CMatrix::Zero(std::max(m.rows(), cols), cols);
  padded.topRows(m.rows()) = m;
  Eigen::JacobiSVD<CMatrix> svd(padded, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

bool stabilizable(const Matrix& a, const Matrix& b, double rank_cutoff) {
  const Eigen::Index n = a.rows();
  if (n == 0) return true;
  Eigen::EigenSolver<Matrix> es(a, false);
  const CVector ev = es.eigenvalues();
  CMatrix pbh(n, n + b.cols());
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (std::abs(ev(k)) < 1.0 - 1e-8) continue;
    pbh.leftCols(n) = a.cast<Complex>() - ev(k) * CMatrix::Identity(n, n);
    pbh.rightCols(b.cols()) = b.cast<Complex>();
    Eigen::JacobiSVD<CMatrix> svd(pbh);
    const auto& s = svd.singularValues();
    const double scale = std::max(1.0, s(0));
    if ((s.array() > rank_cutoff * scale).count() < n) return false;
  }
  return true;
}

bool detectable(const Matrix& a, const Matrix& c, double rank_cutoff) {
  return stabilizable(a.transpose(), c.transpose(), rank_cutoff);
}

std::vector<Complex> sorted(const CVector& values) {
  std::vector<Complex> out(values.data(), values.data() + values.size());
  std::sort(out.begin(), out.end(), [](const Complex& x, const Complex& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  return out;
}

}  // namespace linalg
}  // namespace consensus
