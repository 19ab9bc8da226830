#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lrqi/lr_basis.hpp"
#include "lrqi/point_cloud.hpp"

namespace lrqi {

enum class FaultKind { ordinary, gradient };

/// x_aligned: the fault runs parallel to the x-axis. y_aligned: parallel to the y-axis.
enum class Alignment { none, x_aligned, y_aligned };

struct FaultPoint {
  Point2 location;
  FaultKind kind = FaultKind::ordinary;
  Point2 direction{1.0, 0.0};  // unit tangent
  Alignment alignment = Alignment::none;
  double jump = 0.0;
  std::optional<int> jump_class;
  bool reliable = true;
};

std::string to_string(FaultKind k);
std::string to_string(Alignment a);

/// Uniform cell grid over a cloud's domain with per-cell point indices (CSR layout).
class DetectionGrid {
 public:
  DetectionGrid() = default;
  DetectionGrid(const PointCloud& cloud, int nx, int ny);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double cell_width() const { return w_; }
  double cell_height() const { return h_; }
  const Rect& domain() const { return domain_; }

  int cell_of(double x, double y) const;
  int cell_index(int i, int j) const { return j * nx_ + i; }
  Rect cell_box(int i, int j) const;

  std::span<const int> cell(int i, int j) const {
    const int c = cell_index(i, j);
    return {members_.data() + offsets_[c], members_.data() + offsets_[c + 1]};
  }
  std::span<const int> cell(int c) const { return {members_.data() + offsets_[c], members_.data() + offsets_[c + 1]}; }

  /// Indices of points inside the closed rectangle.
  std::vector<int> points_in(const PointCloud& cloud, const Rect& r) const;

 private:
  Rect domain_{};
  int nx_ = 0, ny_ = 0;
  double w_ = 1.0, h_ = 1.0;
  std::vector<int> offsets_;
  std::vector<int> members_;
};

DetectionGrid build_grid(const PointCloud& cloud, int nx, int ny);

struct DetectionConfig {
  int nx = 128;
  int ny = 128;
  double c_res = 4.0;          // candidate: plane RMS > c_res * median cell RMS (noise-free data)
  double noise_z = 6.0;        // residual variance must exceed the noise floor by this many std devs
  double tau_ord = 3.0;        // value-jump threshold in units of the local noise scale
  double tau_grad = 3.0;       // gradient-jump threshold in units of noise / cell width
  double split_gain = 0.5;     // two-plane RMS must be below split_gain * quadratic RMS, noise excluded
  double ordinary_ratio = 0.25;  // ordinary needs value jump > ratio * |grad jump| * cell width
  double theta_tol_deg = 10.0;
  int min_side_points = 5;
  int coarse_angles = 60;
  double relative_floor = 1e-7;  // residual floor relative to the value range
};

struct DetectionStats {
  int candidates = 0;
  int skipped_sparse = 0;
  int rejected = 0;
};

std::vector<FaultPoint> detect_fault_points(const PointCloud& cloud, const DetectionConfig& cfg,
                                            DetectionStats* stats = nullptr);

std::vector<FaultPoint> label_alignment(std::vector<FaultPoint> points, double theta_tol_deg);

}  // namespace lrqi
