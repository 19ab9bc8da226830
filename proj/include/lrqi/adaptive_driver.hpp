#pragma once

#include <optional>
#include <vector>

#include "lrqi/jump_analysis.hpp"
#include "lrqi/quasi_interpolation.hpp"

namespace lrqi {

enum class RefinementMode { isotropic, anisotropic, fault_driven };

std::string to_string(RefinementMode m);

struct AdaptiveConfig {
  QIConfig qi;
  JumpConfig jump;
  DetectionConfig detection;
  int L_aniso = 1;  // first iteration with one-directional insertions
  RefinementMode mode = RefinementMode::anisotropic;
  int cells_per_dir = 2;
};

void validate(const AdaptiveConfig& cfg);

/// Default settings for the given mode and minimal jump class (L^A = L_bar).
AdaptiveConfig default_config(RefinementMode mode, int L_bar, int degree = 3);

struct IterationRecord {
  int iteration = 0;
  std::size_t ndofs = 0;
  double rmse = 0.0;
  std::optional<double> rmse_reference;
  double t_mark_refine = 0.0;
  double t_solve = 0.0;
  double t_eval = 0.0;
};

struct FitReport {
  std::vector<IterationRecord> iterations;
  double t_detect = 0.0;  // detection, jump estimation and classification

  double mark_refine_time() const;
  double solve_time() const;
  double eval_time() const;  // evaluation plus detection/estimation
  double total_time() const;
  const IterationRecord& final() const { return iterations.back(); }
};

struct FitResult {
  Surface surface;
  FitReport report;
  std::vector<FaultPoint> faults;
};

/// One element demanded for bisection.
struct MarkedElement {
  TickBox box;
  bool split[2] = {false, false};  // indexed by Axis
  int demanded = 0;
};

/// Marks elements for one iteration. `active` carries dismissal state across iterations
/// (one flag per point); a point whose demand is met is cleared.
std::vector<MarkedElement> mark(const std::vector<FaultPoint>& points, std::vector<char>& active,
                                const LRMesh& mesh, int iteration, const AdaptiveConfig& cfg);

/// Bisects every marked element in its marked directions. Each inserted line spans the union
/// of the transversal extents of the splines overlapping the element.
void refine(LRSpline& spline, const std::vector<MarkedElement>& marked);

/// detect -> estimate -> classify once, then mark/refine/solve/evaluate until nothing is
/// marked or L iterations ran. `reference`, when given, is a cloud on the same sites used
/// for an additional RMSE column (e.g. noise-free values).
FitResult run_jump_driven_fit(const PointCloud& cloud, const AdaptiveConfig& cfg,
                              const PointCloud* reference = nullptr);

/// Same loop with every fault point treated as class L and isotropic marking.
FitResult run_fault_driven_fit(const PointCloud& cloud, const AdaptiveConfig& cfg,
                               const PointCloud* reference = nullptr);

/// Dispatches on cfg.mode.
FitResult run_fit(const PointCloud& cloud, const AdaptiveConfig& cfg, const PointCloud* reference = nullptr);

/// Detection, estimation and classification only.
std::vector<FaultPoint> analyze_faults(const PointCloud& cloud, const AdaptiveConfig& cfg);

}  // namespace lrqi
