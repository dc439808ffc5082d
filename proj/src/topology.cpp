#include "consensus/topology.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include <Eigen/SVD>

#include "consensus/errors.hpp"

namespace consensus {

namespace {

std::string where(int i, int j) {
  std::ostringstream os;
  os << "entry (" << i + 1 << ", " << j + 1 << ")";
  return os.str();
}

Eigen::Index index_closest_to_one(const CVector& ev) {
  Eigen::Index best = 0;
  double best_dist = std::abs(ev(0) - 1.0);
  for (Eigen::Index k = 1; k < ev.size(); ++k) {
    const double dist = std::abs(ev(k) - 1.0);
    if (dist < best_dist) {
      best = k;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace

Topology validate_topology(const Matrix& d) {
  if (d.rows() == 0 || d.rows() != d.cols()) {
    fail(ErrorKind::DimensionMismatch, "topology matrix must be square and non-empty");
  }
  const int n = static_cast<int>(d.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = d(i, j);
      if (!std::isfinite(v)) fail(ErrorKind::DomainError, where(i, j) + " is not finite");
      if (v < 0.0) fail(ErrorKind::NegativeWeight, where(i, j) + " is negative");
    }
    if (d(i, i) <= 0.0) fail(ErrorKind::ZeroDiagonal, where(i, i) + " must be strictly positive");
  }
  Matrix normalized = d;
  for (int i = 0; i < n; ++i) {
    const double sum = d.row(i).sum();
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream os;
      os << "row " << i + 1 << " sums to " << sum;
      fail(ErrorKind::RowSumError, os.str());
    }
    normalized.row(i) /= sum;
  }
  return Topology(std::move(normalized));
}

Topology build_from_edges(int n, std::span<const Edge> edges, double self_weight_floor) {
  if (n <= 0) fail(ErrorKind::DomainError, "number of agents must be positive");
  if (!(self_weight_floor > 0.0 && self_weight_floor < 1.0)) {
    fail(ErrorKind::DomainError, "self_weight_floor must lie in (0, 1)");
  }
  std::vector<std::set<int>> in_neighbours(n);
  for (const Edge& e : edges) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
      std::ostringstream os;
      os << "edge (" << e.from + 1 << ", " << e.to + 1 << ") outside 1.." << n;
      fail(ErrorKind::IndexOutOfRange, os.str());
    }
    if (e.from == e.to) {
      fail(ErrorKind::SelfLoopError, "self-loop at agent " + std::to_string(e.from + 1));
    }
    in_neighbours[e.to].insert(e.from);
  }
  Matrix d = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto deg = static_cast<double>(in_neighbours[i].size());
    if (deg == 0) {
      d(i, i) = 1.0;
      continue;
    }
    const double w = (1.0 - self_weight_floor) / deg;
    double off = 0.0;
    for (int j : in_neighbours[i]) {
      d(i, j) = w;
      off += w;
    }
    d(i, i) = 1.0 - off;
  }
  return validate_topology(d);
}

bool has_directed_spanning_tree(const Topology& t) {
  const int n = t.n_agents();
  for (int root = 0; root < n; ++root) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{root};
    seen[root] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int j = stack.back();
      stack.pop_back();
      for (int i = 0; i < n; ++i) {
        if (!seen[i] && t.has_edge(j, i)) {
          seen[i] = 1;
          ++count;
          stack.push_back(i);
        }
      }
    }
    if (count == n) return true;
  }
  return false;
}

std::vector<Complex> TopologySpectrum::non_one_eigenvalues() const {
  std::vector<Complex> out;
  if (eigenvalues.size() == 0) return out;
  const Eigen::Index skip = index_closest_to_one(eigenvalues);
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    if (k != skip) out.push_back(eigenvalues(k));
  }
  return out;
}

TopologySpectrum analyze_spectrum(const Topology& t) {
  const Matrix& d = t.weights();
  const int n = t.n_agents();
  TopologySpectrum s;
  s.eigenvalues = linalg::eigenvalues(d);
  s.has_spanning_tree = has_directed_spanning_tree(t);

  int unit_count = 0;
  for (Eigen::Index k = 0; k < s.eigenvalues.size(); ++k) {
    if (std::abs(s.eigenvalues(k) - 1.0) < kUnitEigenvalueTolerance) ++unit_count;
  }
  if (s.has_spanning_tree && unit_count != 1) {
    fail(ErrorKind::SpectrumError,
         "graph has a spanning tree but eigenvalue 1 appears " + std::to_string(unit_count) +
             " times");
  }

  s.non_one_max_modulus = 0.0;
  for (const Complex& l : s.non_one_eigenvalues()) {
    s.non_one_max_modulus = std::max(s.non_one_max_modulus, std::abs(l));
  }

  if (s.has_spanning_tree) {
    const Matrix m = (Matrix::Identity(n, n) - d).transpose();
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    Vector r = svd.matrixV().col(n - 1);
    r /= r.sum();
    s.perron_left_vector = std::move(r);
  }
  return s;
}

bool in_gamma_delta(const TopologySpectrum& s, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) fail(ErrorKind::DomainError, "delta must lie in (0, 1)");
  return s.has_spanning_tree && s.non_one_max_modulus <= delta;
}

void Formation::validate(int n_agents, int state_dim) const {
  if (static_cast<int>(offsets.size()) != n_agents) {
    fail(ErrorKind::DimensionMismatch, "formation has " + std::to_string(offsets.size()) +
                                           " offsets for " + std::to_string(n_agents) + " agents");
  }
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (offsets[i].size() != state_dim) {
      fail(ErrorKind::DimensionMismatch,
           "offset " + std::to_string(i + 1) + " does not match the state dimension");
    }
  }
}

bool Formation::all_equal() const {
  for (std::size_t i = 1; i < offsets.size(); ++i) {
    if (offsets[i] != offsets[0]) return false;
  }
  return true;
}

}  // namespace consensus
