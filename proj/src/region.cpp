#include "consensus/region.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "consensus/errors.hpp"

namespace consensus {

namespace {

struct Sample {
  bool stable;
  double margin;
};

// A and L C are hoisted out of the per-sample work.
class ProtocolEvaluator {
 public:
  ProtocolEvaluator(const AgentModel& model, const Matrix& l) {
    check_observer_shape(model, l);
    a_ = model.A().cast<Complex>();
    lc_ = (l * model.C()).cast<Complex>();
  }

  Sample operator()(Complex sigma) const {
    const CMatrix m = a_ + (1.0 - sigma) * lc_;
    const double rho = linalg::spectral_radius(m);
    return {rho < 1.0 - kSchurGuard, 1.0 - rho};
  }

  bool stable(double sigma) const { return (*this)(Complex(sigma, 0.0)).stable; }

 private:
  CMatrix a_;
  CMatrix lc_;
};

void check_options(const RegionOptions& o) {
  if (o.resolution < 2) fail(ErrorKind::DomainError, "resolution must be at least 2");
  if (!(o.half_width > 0.0)) fail(ErrorKind::DomainError, "scan window must be non-empty");
  if (!(o.sweep_step > 0.0) || !(o.endpoint_tolerance > 0.0)) {
    fail(ErrorKind::DomainError, "sweep step and endpoint tolerance must be positive");
  }
}

GridCell make_cell(const ProtocolEvaluator& eval, int row, int col, const RegionOptions& o) {
  GridCell c;
  c.re = grid_coordinate(col, o.resolution, o.half_width);
  c.im = grid_coordinate(row, o.resolution, o.half_width);
  const Sample s = eval(Complex(c.re, c.im));
  c.stable = s.stable;
  c.margin = s.margin;
  return c;
}

double bisect(const ProtocolEvaluator& eval, double stable_side, double unstable_side,
              double tolerance) {
  double a = stable_side;
  double b = unstable_side;
  while (std::abs(b - a) >= tolerance) {
    const double mid = 0.5 * (a + b);
    if (eval.stable(mid)) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double grid_coordinate(int k, int resolution, double half_width) {
  // Integer numerator keeps k and resolution-1-k exact negatives of each other.
  const double numerator = 2.0 * k - (resolution - 1);
  return half_width * numerator / (resolution - 1);
}

ConsensusRegion::ConsensusRegion(AgentModel model, Matrix l, RegionOptions options,
                                 std::vector<GridCell> cells, std::vector<RealInterval> intervals)
    : model_(std::move(model)),
      l_(std::move(l)),
      options_(options),
      cells_(std::move(cells)),
      intervals_(std::move(intervals)) {}

bool ConsensusRegion::contains(Complex sigma) const {
  return protocol_matrix_stable(model_, l_, sigma);
}

double ConsensusRegion::stable_fraction_within(double radius) const {
  long total = 0;
  long stable = 0;
  for (const GridCell& c : cells_) {
    if (std::hypot(c.re, c.im) < radius) {
      ++total;
      if (c.stable) ++stable;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(stable) / static_cast<double>(total);
}

std::string ConsensusRegion::render_ascii(int max_width) const {
  const int res = options_.resolution;
  const int stride = std::max(1, (res + max_width - 1) / std::max(1, max_width));
  std::ostringstream os;
  for (int row = res - 1; row >= 0; row -= stride) {
    for (int col = 0; col < res; col += stride) {
      os << (cell(row, col).stable ? '#' : '.');
    }
    os << '\n';
  }
  return os.str();
}

std::vector<RealInterval> real_axis_intervals(const AgentModel& model, const Matrix& l,
                                              const RegionOptions& options) {
  check_options(options);
  const ProtocolEvaluator eval(model, l);
  const double lo = -options.half_width;
  const double hi = options.half_width;
  const auto steps = static_cast<long>(std::llround((hi - lo) / options.sweep_step));

  std::vector<double> xs(steps + 1);
  std::vector<char> flags(steps + 1);
  for (long k = 0; k <= steps; ++k) {
    xs[k] = (k == steps) ? hi : lo + static_cast<double>(k) * options.sweep_step;
    flags[k] = eval.stable(xs[k]);
  }

  std::vector<RealInterval> out;
  RealInterval current;
  bool open = false;
  if (flags[0]) {
    current.lo = lo;
    current.lo_clipped = true;
    open = true;
  }
  for (long k = 0; k < steps; ++k) {
    if (flags[k] == flags[k + 1]) continue;
    if (flags[k + 1]) {
      current = RealInterval{};
      current.lo = bisect(eval, xs[k + 1], xs[k], options.endpoint_tolerance);
      open = true;
    } else {
      current.hi = bisect(eval, xs[k], xs[k + 1], options.endpoint_tolerance);
      out.push_back(current);
      open = false;
    }
  }
  if (open) {
    current.hi = hi;
    current.hi_clipped = true;
    out.push_back(current);
  }
  return out;
}

ConsensusRegion scan_region_serial(const AgentModel& model, const Matrix& l,
                                   const RegionOptions& options) {
  check_options(options);
  const ProtocolEvaluator eval(model, l);
  const int res = options.resolution;
  std::vector<GridCell> cells(static_cast<std::size_t>(res) * res);
  for (int row = 0; row < res; ++row) {
    for (int col = 0; col < res; ++col) {
      cells[static_cast<std::size_t>(row) * res + col] = make_cell(eval, row, col, options);
    }
  }
  return ConsensusRegion(model, l, options, std::move(cells),
                         real_axis_intervals(model, l, options));
}

ConsensusRegion scan_region(const AgentModel& model, const Matrix& l,
                            const RegionOptions& options) {
  check_options(options);
  const ProtocolEvaluator eval(model, l);
  const int res = options.resolution;
  std::vector<GridCell> cells(static_cast<std::size_t>(res) * res);
#pragma omp parallel for schedule(dynamic, 4)
  for (int row = 0; row < res; ++row) {
    for (int col = 0; col < res; ++col) {
      cells[static_cast<std::size_t>(row) * res + col] = make_cell(eval, row, col, options);
    }
  }
  return ConsensusRegion(model, l, options, std::move(cells),
                         real_axis_intervals(model, l, options));
}

bool contains(const ConsensusRegion& /*region*/, const AgentModel& model, const Matrix& l,
              Complex sigma) {
  return protocol_matrix_stable(model, l, sigma);
}

std::vector<Complex> disk_samples(double delta, int samples) {
  const int ring = std::max(16, samples / 4);
  const int interior = std::max(0, samples - ring);
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(ring + interior));
  for (int k = 0; k < ring; ++k) {
    out.push_back(std::polar(delta, 2.0 * std::numbers::pi * k / ring));
  }
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < interior; ++k) {
    const double r = delta * std::sqrt((k + 0.5) / interior);
    out.push_back(std::polar(r, golden * k));
  }
  return out;
}

bool disk_radius_certified(const AgentModel& model, const Matrix& l, double delta, int samples) {
  if (!(delta > 0.0 && delta < 1.0)) fail(ErrorKind::DomainError, "delta must lie in (0, 1)");
  if (samples < 64) fail(ErrorKind::DomainError, "at least 64 samples are required");
  const ProtocolEvaluator eval(model, l);
  for (const Complex& s : disk_samples(delta, samples)) {
    if (!eval(s).stable) return false;
  }
  return true;
}

}  // namespace consensus
