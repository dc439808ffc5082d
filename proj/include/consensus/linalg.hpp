#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace consensus {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

namespace linalg {

CVector eigenvalues(const Matrix& m);
CVector eigenvalues(const CMatrix& m);

double spectral_radius(const Matrix& m);
double spectral_radius(const CMatrix& m);

/// Max absolute row sum.
double inf_norm(const Matrix& m);

/// Largest singular value; zero for empty matrices.
double norm2(const Matrix& m);

/// Number of singular values strictly above `cutoff`.
int numerical_rank(const CMatrix& m, double cutoff);
int numerical_rank(const Matrix& m, double cutoff);

/// Ratio of extreme singular values (infinity when rank deficient).
double condition_number(const Matrix& m);

/// Orthonormal basis (columns) of the null space of `m`, taken as the right
/// singular vectors whose singular values are at most `cutoff`.
CMatrix null_space(const CMatrix& m, double cutoff);

/// PBH eigenvector test: every eigenvalue of `a` with modulus >= 1 - 1e-8 is
/// controllable through `b`, i.e. rank [a - lambda I, b] = n.
bool stabilizable(const Matrix& a, const Matrix& b, double rank_cutoff = 1e-10);
bool detectable(const Matrix& a, const Matrix& c, double rank_cutoff = 1e-10);

/// Sort complex numbers by (real, imag) for stable printing.
std::vector<Complex> sorted(const CVector& values);

}  // namespace linalg
}  // namespace consensus
