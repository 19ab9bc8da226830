#include "lrqi/jump_analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace lrqi {

void validate(const JumpConfig& cfg) {
  if (cfg.L_bar < 1 || cfg.L_bar > cfg.L) throw std::invalid_argument("JumpConfig: need 1 <= L_bar <= L");
  if (!(cfg.estimation_radius > 0)) throw std::invalid_argument("JumpConfig: estimation radius must be positive");
}

struct JumpEstimator::SidePlanes {
  Eigen::Vector3d plus = Eigen::Vector3d::Zero();   // a + b (x - x0) + c (y - y0)
  Eigen::Vector3d minus = Eigen::Vector3d::Zero();
};

JumpEstimator::JumpEstimator(const PointCloud& cloud, const JumpConfig& cfg)
    : cloud_(&cloud), cfg_(cfg), grid_(cloud, cfg.grid_nx, cfg.grid_ny) {
  validate(cfg);
}

bool JumpEstimator::fit_sides(const FaultPoint& point, SidePlanes& out) const {
  const double x0 = point.location.x, y0 = point.location.y;
  // Side normal.
  const double nx = -point.direction.y, ny = point.direction.x;
  double radius = cfg_.estimation_radius * std::max(grid_.cell_width(), grid_.cell_height());

  for (int attempt = 0; attempt < 2; ++attempt, radius *= 2.0) {
    const auto idx = grid_.points_in(*cloud_, {x0 - radius, x0 + radius, y0 - radius, y0 + radius});
    Eigen::Matrix3d g[2] = {Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero()};
    Eigen::Vector3d b[2] = {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
    int count[2] = {0, 0};
    const double r2 = radius * radius;
    for (int k : idx) {
      const auto& p = cloud_->points[k];
      const double dx = p.x - x0, dy = p.y - y0;
      if (dx * dx + dy * dy > r2) continue;
      const double side = nx * dx + ny * dy;
      if (side == 0.0) continue;
      const int s = side > 0 ? 0 : 1;
      // Local coordinates in units of the radius keep the normal matrix well scaled.
      const Eigen::Vector3d phi(1.0, dx / radius, dy / radius);
      g[s] += phi * phi.transpose();
      b[s] += phi * p.z;
      ++count[s];
    }
    if (count[0] < cfg_.min_side_points || count[1] < cfg_.min_side_points) continue;
    Eigen::Vector3d c[2];
    bool ok = true;
    for (int s = 0; s < 2; ++s) {
      Eigen::LDLT<Eigen::Matrix3d> ldlt(g[s]);
      if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12) ok = false;
      c[s] = ldlt.solve(b[s]);
      c[s][1] /= radius;
      c[s][2] /= radius;
    }
    if (!ok) continue;
    out.plus = c[0];
    out.minus = c[1];
    return true;
  }
  return false;
}

JumpEstimate JumpEstimator::value_jump(const FaultPoint& point) const {
  SidePlanes s;
  if (!fit_sides(point, s)) return {0.0, false};
  return {std::abs(s.plus[0] - s.minus[0]), true};
}

JumpEstimate JumpEstimator::gradient_jump(const FaultPoint& point) const {
  SidePlanes s;
  if (!fit_sides(point, s)) return {0.0, false};
  return {std::hypot(s.plus[1] - s.minus[1], s.plus[2] - s.minus[2]), true};
}

void JumpEstimator::estimate(std::vector<FaultPoint>& points) const {
  for (auto& p : points) {
    const JumpEstimate e = p.kind == FaultKind::ordinary ? value_jump(p) : gradient_jump(p);
    p.jump = e.magnitude;
    p.reliable = e.reliable;
  }
}

JumpEstimate estimate_jump(const FaultPoint& point, const PointCloud& cloud, const JumpConfig& cfg) {
  if (point.kind != FaultKind::ordinary) throw std::invalid_argument("estimate_jump: needs an ordinary fault point");
  return JumpEstimator(cloud, cfg).value_jump(point);
}

JumpEstimate estimate_gradient_jump(const FaultPoint& point, const PointCloud& cloud, const JumpConfig& cfg) {
  if (point.kind != FaultKind::gradient)
    throw std::invalid_argument("estimate_gradient_jump: needs a gradient fault point");
  return JumpEstimator(cloud, cfg).gradient_jump(point);
}

std::vector<int> classify_values(const std::vector<double>& jumps, int L_bar, int L) {
  std::vector<int> out(jumps.size(), L);
  if (jumps.empty()) return out;
  const auto [mn, mx] = std::minmax_element(jumps.begin(), jumps.end());
  const double lo = *mn, hi = *mx;
  if (!(hi > lo)) return out;
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    const double t = (jumps[k] - lo) / (hi - lo);
    const int cls = L_bar + static_cast<int>(std::floor(t * (L - L_bar) + 0.5));
    out[k] = std::clamp(cls, L_bar, L);
  }
  return out;
}

std::vector<FaultPoint> classify_jumps(std::vector<FaultPoint> points, const JumpConfig& cfg) {
  validate(cfg);
  for (FaultKind kind : {FaultKind::ordinary, FaultKind::gradient}) {
    std::vector<std::size_t> members;
    std::vector<double> jumps;
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (points[k].kind != kind) continue;
      if (!points[k].reliable) {
        points[k].jump_class = cfg.L;
        continue;
      }
      members.push_back(k);
      jumps.push_back(points[k].jump);
    }
    const auto classes = classify_values(jumps, cfg.L_bar, cfg.L);
    for (std::size_t k = 0; k < members.size(); ++k) points[members[k]].jump_class = classes[k];
  }
  return points;
}

}  // namespace lrqi
