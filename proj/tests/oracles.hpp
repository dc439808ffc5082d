#pragma once

// Reference computations for tests. Nothing here calls the library's solvers;
// only Eigen's dense kernels and plain loops are used.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

inline std::string data_path(const std::string& name) {
  return std::string(CONSENSUS_DATA_DIR) + "/" + name;
}

// SplitMix64; deterministic across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool coin(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

inline Matrix random_matrix(Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  }
  return m;
}

inline Matrix random_orthogonal(Rng& rng, int n) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, n, n));
  Matrix q = qr.householderQ();
  return q;
}

/// Coefficients c_1..c_n of det(zI - M) = z^n + c_1 z^{n-1} + ... + c_n by the
/// Faddeev-LeVerrier recursion.
inline std::vector<double> characteristic_polynomial(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<double> c(n);
  Matrix mk = Matrix::Zero(n, n);
  const Matrix id = Matrix::Identity(n, n);
  double prev = 1.0;
  for (int k = 1; k <= n; ++k) {
    mk = m * mk + prev * id;
    c[k - 1] = -(m * mk).trace() / k;
    prev = c[k - 1];
  }
  return c;
}

/// Roots via the eigenvalues of the companion matrix of the monic polynomial.
inline std::vector<Complex> companion_roots(const std::vector<double>& c) {
  const int n = static_cast<int>(c.size());
  Matrix comp = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) comp(0, k) = -c[k];
  for (int k = 1; k < n; ++k) comp(k, k - 1) = 1.0;
  Eigen::EigenSolver<Matrix> es(comp, false);
  std::vector<Complex> roots(es.eigenvalues().data(), es.eigenvalues().data() + n);
  return roots;
}

/// Durand-Kerner iteration followed by Newton polishing.
inline std::vector<Complex> durand_kerner_roots(const std::vector<double>& c) {
  const int n = static_cast<int>(c.size());
  auto eval = [&](Complex z) {
    Complex acc = 1.0;
    for (double ck : c) acc = acc * z + ck;
    return acc;
  };
  auto deriv = [&](Complex z) {
    Complex p = 1.0, dp = 0.0;
    for (double ck : c) {
      dp = dp * z + p;
      p = p * z + ck;
    }
    return dp;
  };
  double bound = 1.0;
  for (double ck : c) bound = std::max(bound, 1.0 + std::abs(ck));
  std::vector<Complex> z(n);
  const Complex seed(0.4, 0.9);
  for (int k = 0; k < n; ++k) z[k] = bound * std::pow(seed, k);
  for (int it = 0; it < 2000; ++it) {
    double change = 0.0;
    for (int k = 0; k < n; ++k) {
      Complex den = 1.0;
      for (int j = 0; j < n; ++j) {
        if (j != k) den *= (z[k] - z[j]);
      }
      const Complex step = eval(z[k]) / den;
      z[k] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-15) break;
  }
  for (Complex& zk : z) {
    for (int it = 0; it < 3; ++it) {
      const Complex d = deriv(zk);
      if (std::abs(d) < 1e-300) break;
      zk -= eval(zk) / d;
    }
  }
  return z;
}

inline double max_modulus(const std::vector<Complex>& roots) {
  double r = 0.0;
  for (const Complex& z : roots) r = std::max(r, std::abs(z));
  return r;
}

inline double companion_radius(const Matrix& m) {
  return max_modulus(companion_roots(characteristic_polynomial(m)));
}

/// Structure-preserving doubling for the filter Riccati equation
///   P = A P A^T - A P C^T (C P C^T + I)^{-1} C P A^T + Q,
/// written in control form with (A^T, C^T).
inline Matrix riccati_doubling(const Matrix& a, const Matrix& c, const Matrix& q) {
  const int n = static_cast<int>(a.rows());
  const Matrix id = Matrix::Identity(n, n);
  Matrix ak = a.transpose();
  Matrix gk = c.transpose() * c;
  Matrix hk = q;
  for (int it = 0; it < 200; ++it) {
    const Eigen::PartialPivLU<Matrix> w(id + gk * hk);
    const Matrix wa = w.solve(ak);
    const Matrix wg = w.solve(gk);
    const Matrix a_next = ak * wa;
    const Matrix g_next = gk + ak * wg * ak.transpose();
    const Matrix h_next = hk + ak.transpose() * hk * wa;
    const double change = (h_next - hk).lpNorm<Eigen::Infinity>() /
                          std::max(1.0, h_next.lpNorm<Eigen::Infinity>());
    ak = a_next;
    gk = g_next;
    hk = 0.5 * (h_next + h_next.transpose());
    if (change < 1e-15) break;
  }
  return hk;
}

/// Residual of the modified Riccati equation, written out longhand.
inline double mare_residual(const Matrix& a, const Matrix& c, double delta, const Matrix& q,
                            const Matrix& p) {
  const int qd = static_cast<int>(c.rows());
  const Matrix s = c * p * c.transpose() + Matrix::Identity(qd, qd);
  const Matrix rhs = a * p * a.transpose() -
                     (1.0 - delta * delta) * a * p * c.transpose() * s.inverse() * c * p *
                         a.transpose() +
                     q;
  return (p - rhs).lpNorm<Eigen::Infinity>();
}

/// Kronecker product by explicit loops.
inline Matrix kron(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (int i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < x.cols(); ++j) {
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return out;
}

/// Random row-stochastic D whose graph has a directed spanning tree: a random
/// tree rooted at a random node plus extra edges, random positive weights.
inline Matrix random_spanning_tree_weights(Rng& rng, int n, double extra_edge_probability = 0.3) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int k = n - 1; k > 0; --k) std::swap(order[k], order[rng.integer(0, k)]);
  Matrix adj = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const int parent = order[rng.integer(0, k - 1)];
    adj(order[k], parent) = 1.0;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && rng.coin(extra_edge_probability)) adj(i, j) = 1.0;
    }
  }
  Matrix d = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = rng.uniform(0.2, 1.0);
    for (int j = 0; j < n; ++j) {
      if (adj(i, j) > 0) d(i, j) = rng.uniform(0.1, 1.0);
    }
    d.row(i) /= d.row(i).sum();
  }
  return d;
}

/// Roots of z^2 - 1.02 z + s^2 lie in the open unit disk iff 0.02 < s^2 < 1.
inline bool planar_pair_stable(double s) { return 0.02 < s * s && s * s < 1.0; }

namespace fixtures {

inline Matrix mat(int rows, int cols, std::initializer_list<double> v) {
  Matrix m(rows, cols);
  auto it = v.begin();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = *it++;
  }
  return m;
}

inline Matrix ex1_A() { return mat(2, 2, {0, 1, -1, 1.02}); }
inline Matrix ex1_B() { return mat(2, 1, {1, 0}); }
inline Matrix ex1_C() { return Matrix::Identity(2, 2); }
inline Matrix ex1_K() { return mat(1, 2, {-0.5, -0.5}); }
inline Matrix ex1_L() { return mat(2, 2, {0, -1, 1, 0}); }
inline Matrix ex1_D() {
  return mat(6, 6, {0.3, 0.2, 0.2, 0.2, 0, 0.1, 0.2, 0.6, 0.2, 0, 0, 0,
                    0.2, 0.2, 0.6, 0, 0, 0,     0.2, 0, 0, 0.4, 0.4, 0,
                    0, 0, 0, 0.4, 0.2, 0.4,     0.1, 0, 0, 0, 0.4, 0.5});
}
inline Matrix ex1_D_case1() {
  return mat(6, 6, {0.2, 0.2, 0.2, 0.2, 0.1, 0.1, 0.2, 0.6, 0.2, 0, 0, 0,
                    0.2, 0.2, 0.6, 0, 0, 0,       0.2, 0, 0, 0.4, 0.4, 0,
                    0.1, 0, 0, 0.4, 0.2, 0.3,     0.1, 0, 0, 0, 0.4, 0.5});
}
// Fifth row as printed carries a stray 0.1 (row sum 1.1); dropping it
// reproduces the listed spectrum.
inline Matrix ex1_D_case2() {
  return mat(6, 6, {0.3, 0.2, 0.2, 0.2, 0, 0.1, 0.2, 0.6, 0.2, 0, 0, 0,
                    0.2, 0.2, 0.6, 0, 0, 0,     0.2, 0, 0, 0.4, 0.4, 0,
                    0, 0, 0, 0.4, 0.6, 0,       0.1, 0, 0, 0, 0, 0.9});
}

inline Matrix ex2_A() { return mat(3, 3, {0.2, 0.6, 0, -1.4, 0.8, 0, 0.7, 0.2, -0.5}); }
inline Matrix ex2_B() { return mat(3, 1, {0, 1, 0}); }
inline Matrix ex2_C() { return mat(1, 3, {1, 0, 1}); }
inline Matrix ex2_K() { return mat(1, 3, {1.2, -0.9, -0.2}); }
inline Matrix ex2_L_printed() { return mat(3, 1, {-0.2143, 0.7857, -0.2857}); }

inline Matrix ex3_A() { return mat(2, 2, {1, 1, 0, 1}); }
inline Matrix ex3_B() { return mat(2, 1, {0, 1}); }
inline Matrix ex3_C() { return mat(1, 2, {1, 0}); }
inline Matrix ex3_K() { return mat(1, 2, {-0.5, -1.5}); }
inline Matrix ex3_P_printed() { return 1e4 * mat(2, 2, {1.1780, 0.0602, 0.0602, 0.0062}); }
inline Matrix ex3_L_printed() { return mat(2, 1, {-1.051, -0.051}); }
inline Matrix ex3_D() {
  return mat(6, 6, {0.4, 0, 0, 0.1, 0.3, 0.2, 0.5, 0.5, 0, 0, 0, 0,
                    0.3, 0.2, 0.5, 0, 0, 0,   0.5, 0, 0, 0.5, 0, 0,
                    0, 0, 0, 0.4, 0.4, 0.2,   0, 0, 0, 0, 0.3, 0.7});
}

inline Matrix ex4_A() {
  Matrix a = Matrix::Identity(4, 4);
  a.topRightCorner(2, 2) = Matrix::Identity(2, 2);
  return a;
}
inline Matrix ex4_B() {
  Matrix b = Matrix::Zero(4, 2);
  b.bottomRows(2) = Matrix::Identity(2, 2);
  return b;
}
inline Matrix ex4_C() {
  Matrix c = Matrix::Zero(2, 4);
  c.leftCols(2) = Matrix::Identity(2, 2);
  return c;
}
inline Matrix ex4_K() {
  Matrix k(2, 4);
  k << -0.5 * Matrix::Identity(2, 2), -1.5 * Matrix::Identity(2, 2);
  return k;
}
inline Matrix ex4_L() {
  Matrix l(4, 2);
  l << -1.051 * Matrix::Identity(2, 2), -0.051 * Matrix::Identity(2, 2);
  return l;
}
inline std::vector<Vector> ex4_offsets() {
  const double s = std::sqrt(3.0);
  const double xy[6][2] = {{0, 0}, {8, 0}, {12, 4 * s}, {8, 8 * s}, {0, 8 * s}, {-4, 4 * s}};
  std::vector<Vector> h;
  for (const auto& p : xy) {
    Vector v = Vector::Zero(4);
    v << p[0], p[1], 0, 0;
    h.push_back(v);
  }
  return h;
}

}  // namespace fixtures

}  // namespace oracle
