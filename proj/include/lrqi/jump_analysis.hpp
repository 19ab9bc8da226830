#pragma once

#include <vector>

#include "lrqi/fault_detection.hpp"

namespace lrqi {

struct JumpConfig {
  int L = 10;
  int L_bar = 1;
  double estimation_radius = 2.0;  // in detection cells
  int grid_nx = 128;               // detection grid, fixes the cell width
  int grid_ny = 128;
  int min_side_points = 6;
};

void validate(const JumpConfig& cfg);

struct JumpEstimate {
  double magnitude = 0.0;
  bool reliable = true;
};

/// Two-sided plane fits around fault points. Holds a spatial index over the cloud so many
/// points can be estimated without rebuilding it.
class JumpEstimator {
 public:
  JumpEstimator(const PointCloud& cloud, const JumpConfig& cfg);

  /// |q+(x0) - q-(x0)| for an ordinary fault point.
  JumpEstimate value_jump(const FaultPoint& point) const;
  /// |grad q+ - grad q-| for a gradient fault point.
  JumpEstimate gradient_jump(const FaultPoint& point) const;

  /// Fills jump and reliable for every point according to its kind.
  void estimate(std::vector<FaultPoint>& points) const;

 private:
  struct SidePlanes;
  bool fit_sides(const FaultPoint& point, SidePlanes& out) const;

  const PointCloud* cloud_;
  JumpConfig cfg_;
  DetectionGrid grid_;
};

JumpEstimate estimate_jump(const FaultPoint& point, const PointCloud& cloud, const JumpConfig& cfg);
JumpEstimate estimate_gradient_jump(const FaultPoint& point, const PointCloud& cloud, const JumpConfig& cfg);

/// Linear min-max binning of each kind's jumps onto {L_bar, ..., L} (round half up). A
/// population without spread, and unreliable estimates, get class L.
std::vector<FaultPoint> classify_jumps(std::vector<FaultPoint> points, const JumpConfig& cfg);

/// The same binning applied to bare magnitudes.
std::vector<int> classify_values(const std::vector<double>& jumps, int L_bar, int L);

}  // namespace lrqi
