#pragma once

#include <string>
#include <vector>

#include "consensus/stability.hpp"

namespace consensus {

/// Open interval (lo, hi) of the real axis inside the consensus region. A
/// clipped end coincides with the scan window rather than a transition.
struct RealInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_clipped = false;
  bool hi_clipped = false;
};

struct RegionOptions {
  int resolution = 301;
  /// The grid covers [-half_width, half_width]^2 in the complex plane.
  double half_width = 1.5;
  /// Real-axis sweep step before bisection.
  double sweep_step = 1e-3;
  /// Bisection stops once the bracket is narrower than this.
  double endpoint_tolerance = 1e-6;
};

struct GridCell {
  double re = 0.0;
  double im = 0.0;
  bool stable = false;
  /// 1 - spectral radius of A + (1 - sigma) L C.
  double margin = 0.0;
};

/// Sampled consensus region: the complex sigma for which A + (1 - sigma) L C
/// is Schur stable. The grid is for diagnostics; `contains` recomputes exactly.
class ConsensusRegion {
 public:
  ConsensusRegion(AgentModel model, Matrix l, RegionOptions options, std::vector<GridCell> cells,
                  std::vector<RealInterval> intervals);

  const RegionOptions& options() const { return options_; }
  int resolution() const { return options_.resolution; }
  /// Row-major, row index = imaginary part (ascending), column = real part.
  const std::vector<GridCell>& cells() const { return cells_; }
  const GridCell& cell(int row, int col) const { return cells_[row * options_.resolution + col]; }
  const std::vector<RealInterval>& real_intervals() const { return intervals_; }

  bool contains(Complex sigma) const;

  /// Fraction of grid nodes with |sigma| < radius that are stable.
  double stable_fraction_within(double radius) const;

  /// Character rendering, '#' stable and '.' unstable, top row = largest imag.
  std::string render_ascii(int max_width = 61) const;

 private:
  AgentModel model_;
  Matrix l_;
  RegionOptions options_;
  std::vector<GridCell> cells_;
  std::vector<RealInterval> intervals_;
};

/// Grid coordinate of node `k` of a `resolution`-point axis over [-w, w].
double grid_coordinate(int k, int resolution, double half_width);

/// OpenMP-parallel scan. Produces flags bit-identical to `scan_region_serial`.
ConsensusRegion scan_region(const AgentModel& model, const Matrix& l,
                            const RegionOptions& options = {});

/// Single-threaded reference scan.
ConsensusRegion scan_region_serial(const AgentModel& model, const Matrix& l,
                                   const RegionOptions& options = {});

/// Real-axis sweep over the scan window followed by bisection of every
/// stability transition.
std::vector<RealInterval> real_axis_intervals(const AgentModel& model, const Matrix& l,
                                              const RegionOptions& options = {});

/// Membership query; never interpolates.
bool contains(const ConsensusRegion& region, const AgentModel& model, const Matrix& l,
              Complex sigma);

/// Quasi-uniform points of the closed disk of radius `delta`: a ring on the
/// boundary circle plus a sunflower lattice of the interior.
std::vector<Complex> disk_samples(double delta, int samples);

/// Sampling certificate (not a proof) that the closed disk of radius delta lies
/// in the consensus region. Throws DomainError unless 0 < delta < 1 and
/// samples >= 64.
bool disk_radius_certified(const AgentModel& model, const Matrix& l, double delta, int samples);

}  // namespace consensus
