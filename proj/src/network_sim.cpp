#include "consensus/network_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "consensus/errors.hpp"

namespace consensus {

const char* to_string(SimMode mode) {
  switch (mode) {
    case SimMode::Observer: return "observer";
    case SimMode::Static: return "static";
    case SimMode::Formation: return "formation";
  }
  return "unknown";
}

Matrix ClosedLoopSystem::block_A() const {
  const int n = model.n();
  const Matrix bk = model.B() * gains.K();
  Matrix out = Matrix::Zero(2 * n, 2 * n);
  out.topLeftCorner(n, n) = model.A();
  out.topRightCorner(n, n) = bk;
  out.bottomRightCorner(n, n) = model.A() + bk;
  return out;
}

Matrix ClosedLoopSystem::block_H() const {
  const int n = model.n();
  const Matrix lc = gains.L() * model.C();
  Matrix out = Matrix::Zero(2 * n, 2 * n);
  out.bottomLeftCorner(n, n) = -lc;
  out.bottomRightCorner(n, n) = lc;
  return out;
}

Matrix ClosedLoopSystem::stacked_matrix() const {
  const int agents = topology.n_agents();
  const Matrix eye = Matrix::Identity(agents, agents);
  const Matrix laplacian = eye - topology.weights();
  return Matrix(Eigen::kroneckerProduct(eye, block_A())) +
         Matrix(Eigen::kroneckerProduct(laplacian, block_H()));
}

double absolute_disagreement(const Matrix& states) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < states.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < states.cols(); ++j) {
      worst = std::max(worst, (states.col(i) - states.col(j)).norm());
    }
  }
  return worst;
}

double relative_disagreement(const Matrix& states) {
  double scale = 1.0;
  for (Eigen::Index i = 0; i < states.cols(); ++i) scale = std::max(scale, states.col(i).norm());
  return absolute_disagreement(states) / scale;
}

namespace {

Matrix pack(const std::vector<Vector>& states, int agents, int dim, const char* what) {
  if (static_cast<int>(states.size()) != agents) {
    fail(ErrorKind::DimensionMismatch, std::string(what) + " must hold one state per agent");
  }
  Matrix out(dim, agents);
  for (int i = 0; i < agents; ++i) {
    if (states[i].size() != dim) {
      fail(ErrorKind::DimensionMismatch,
           std::string(what) + " entry " + std::to_string(i + 1) + " has the wrong dimension");
    }
    out.col(i) = states[i];
  }
  return out;
}

bool overflowed(const Matrix& m, double limit) {
  return !m.allFinite() || (m.size() > 0 && m.cwiseAbs().maxCoeff() > limit);
}

double formation_disagreement(const Matrix& x, const Matrix& h) {
  double scale = 1.0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) scale = std::max(scale, x.col(i).norm());
  return absolute_disagreement(x - h) / scale;
}

void record(TrajectoryLog& log, const Matrix& x, const Matrix* v, const Matrix* h) {
  log.x.push_back(x);
  if (v) log.v.push_back(*v);
  log.absolute_consensus_error.push_back(absolute_disagreement(x));
  log.consensus_error.push_back(relative_disagreement(x));
  if (h) log.formation_error.push_back(formation_disagreement(x, *h));
}

void check_steps(int steps) {
  if (steps < 1) fail(ErrorKind::DomainError, "steps must be at least 1");
}

// Shared observer/formation kernel. Offsets enter only through C h, which is
// identically zero for the plain consensus protocol.
TrajectoryLog run_observer(const ClosedLoopSystem& sys, const Matrix* offsets,
                           const std::vector<Vector>& x0, const std::vector<Vector>& v0,
                           int steps, const SimOptions& options) {
  check_steps(steps);
  const int n = sys.model.n();
  const int agents = sys.topology.n_agents();
  const Matrix& a = sys.model.A();
  const Matrix& c = sys.model.C();
  const Matrix& d = sys.topology.weights();
  const Matrix bk = sys.model.B() * sys.gains.K();
  const Matrix abk = a + bk;
  const Matrix& l = sys.gains.L();
  const Matrix ch = offsets ? Matrix(c * *offsets) : Matrix::Zero(c.rows(), agents);

  Matrix x = pack(x0, agents, n, "x0");
  Matrix v = pack(v0, agents, n, "v0");
  TrajectoryLog log;
  log.x.reserve(steps + 1);
  log.v.reserve(steps + 1);
  record(log, x, &v, offsets);

  Matrix coupling(c.rows(), agents);
  for (int k = 1; k <= steps; ++k) {
    const Matrix cx = c * x;
    const Matrix cv = c * v;
#pragma omp parallel for if (agents >= 64)
    for (int i = 0; i < agents; ++i) {
      auto acc = coupling.col(i);
      acc.setZero();
      for (int j = 0; j < agents; ++j) {
        const double w = d(i, j);
        if (j == i || w == 0.0) continue;
        // C(v_i - v_j) minus the (offset-corrected) relative output y_i - y_j.
        acc.noalias() += w * ((cv.col(i) - cv.col(j)) -
                              ((cx.col(i) - cx.col(j)) - (ch.col(i) - ch.col(j))));
      }
    }
    Matrix x_next = a * x + bk * v;
    Matrix v_next = abk * v + l * coupling;
    x = std::move(x_next);
    v = std::move(v_next);
    record(log, x, &v, offsets);
    log.steps = k;
    if (overflowed(x, options.overflow_limit) || overflowed(v, options.overflow_limit)) {
      log.diverged = true;
      log.diverged_at = k;
      break;
    }
  }
  return log;
}

}  // namespace

TrajectoryLog simulate(const ClosedLoopSystem& system, const std::vector<Vector>& x0,
                       const std::vector<Vector>& v0, int steps, const SimOptions& options) {
  switch (system.mode) {
    case SimMode::Formation:
      return simulate_formation(system, x0, v0, steps, options);
    case SimMode::Static:
      return simulate_static(system.model, system.topology, system.gains.L(), x0, steps, options);
    case SimMode::Observer:
      break;
  }
  return run_observer(system, nullptr, x0, v0, steps, options);
}

TrajectoryLog simulate_stacked(const ClosedLoopSystem& system, const std::vector<Vector>& x0,
                               const std::vector<Vector>& v0, int steps,
                               const SimOptions& options) {
  check_steps(steps);
  const int n = system.model.n();
  const int agents = system.topology.n_agents();
  const Matrix g = system.stacked_matrix();
  const Matrix x_init = pack(x0, agents, n, "x0");
  const Matrix v_init = pack(v0, agents, n, "v0");
  Vector z(2 * n * agents);
  for (int i = 0; i < agents; ++i) {
    z.segment(2 * n * i, n) = x_init.col(i);
    z.segment(2 * n * i + n, n) = v_init.col(i);
  }
  auto unpack = [&](const Vector& zz, Matrix& x, Matrix& v) {
    for (int i = 0; i < agents; ++i) {
      x.col(i) = zz.segment(2 * n * i, n);
      v.col(i) = zz.segment(2 * n * i + n, n);
    }
  };
  TrajectoryLog log;
  Matrix x(n, agents), v(n, agents);
  unpack(z, x, v);
  record(log, x, &v, nullptr);
  for (int k = 1; k <= steps; ++k) {
    z = g * z;
    unpack(z, x, v);
    record(log, x, &v, nullptr);
    log.steps = k;
    if (overflowed(x, options.overflow_limit) || overflowed(v, options.overflow_limit)) {
      log.diverged = true;
      log.diverged_at = k;
      break;
    }
  }
  return log;
}

TrajectoryLog simulate_static(const AgentModel& model, const Topology& topology, const Matrix& l,
                              const std::vector<Vector>& x0, int steps,
                              const SimOptions& options) {
  check_steps(steps);
  check_observer_shape(model, l);
  const int n = model.n();
  const int agents = topology.n_agents();
  const Matrix& a = model.A();
  const Matrix lc = l * model.C();
  const Matrix& d = topology.weights();

  TrajectoryLog log;
  if (!linalg::detectable(model.A(), model.C())) {
    log.diagnostics.push_back(
        "(A, C) is not detectable: no L gives the open unit disk as consensus region");
  }
  Matrix x = pack(x0, agents, n, "x0");
  record(log, x, nullptr, nullptr);
  Matrix diff(n, agents);
  for (int k = 1; k <= steps; ++k) {
    for (int i = 0; i < agents; ++i) {
      auto acc = diff.col(i);
      acc.setZero();
      for (int j = 0; j < agents; ++j) {
        const double w = d(i, j);
        if (j == i || w == 0.0) continue;
        acc.noalias() += w * (x.col(i) - x.col(j));
      }
    }
    Matrix next = a * x + lc * diff;
    x = std::move(next);
    record(log, x, nullptr, nullptr);
    log.steps = k;
    if (overflowed(x, options.overflow_limit)) {
      log.diverged = true;
      log.diverged_at = k;
      break;
    }
  }
  return log;
}

void check_formation_feasible(const AgentModel& model, const Formation& formation,
                              double tolerance) {
  const int agents = static_cast<int>(formation.offsets.size());
  formation.validate(agents, model.n());
  const Matrix drift = model.A() - Matrix::Identity(model.n(), model.n());
  double worst = -1.0;
  int wi = 0, wj = 0;
  for (int i = 0; i < agents; ++i) {
    for (int j = i + 1; j < agents; ++j) {
      const double r = (drift * (formation.offsets[i] - formation.offsets[j])).norm();
      if (r > worst) {
        worst = r;
        wi = i;
        wj = j;
      }
    }
  }
  if (worst >= tolerance) {
    std::ostringstream os;
    os << "(A - I)(h_" << wi + 1 << " - h_" << wj + 1 << ") has norm " << worst
       << " (tolerance " << tolerance << ")";
    fail(ErrorKind::InfeasibleFormation, os.str());
  }
}

TrajectoryLog simulate_formation(const ClosedLoopSystem& system, const std::vector<Vector>& x0,
                                 const std::vector<Vector>& v0, int steps,
                                 const SimOptions& options) {
  if (!system.formation) fail(ErrorKind::DomainError, "formation mode requires offsets");
  const Formation& f = *system.formation;
  f.validate(system.topology.n_agents(), system.model.n());
  check_formation_feasible(system.model, f);
  const Matrix h = pack(f.offsets, system.topology.n_agents(), system.model.n(), "formation");
  return run_observer(system, &h, x0, v0, steps, options);
}

std::vector<Vector> predict_final_value(const AgentModel& model, const TopologySpectrum& spectrum,
                                        const std::vector<Vector>& x0, int steps) {
  if (!spectrum.has_spanning_tree || !spectrum.perron_left_vector) {
    fail(ErrorKind::NoSpanningTree, "final value needs a directed spanning tree");
  }
  const Vector& r = *spectrum.perron_left_vector;
  const Matrix x = pack(x0, static_cast<int>(r.size()), model.n(), "x0");
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  Vector w = x * r;
  out.push_back(w);
  for (int k = 1; k <= steps; ++k) {
    w = model.A() * w;
    out.push_back(w);
  }
  return out;
}

double prediction_deviation(const Matrix& states, const Vector& predicted) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < states.cols(); ++i) {
    worst = std::max(worst, (states.col(i) - predicted).norm());
  }
  return worst / std::max(1.0, predicted.norm());
}

std::vector<Vector> random_initial_states(int n_agents, int dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<Vector> out(n_agents, Vector(dim));
  for (int i = 0; i < n_agents; ++i) {
    for (int k = 0; k < dim; ++k) {
      const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      out[i](k) = 2.0 * u - 1.0;
    }
  }
  return out;
}

std::vector<Vector> zero_states(int n_agents, int dim) {
  return std::vector<Vector>(n_agents, Vector::Zero(dim));
}

}  // namespace consensus
