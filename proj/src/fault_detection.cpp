#include "lrqi/fault_detection.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace lrqi {

std::string to_string(FaultKind k) { return k == FaultKind::ordinary ? "ordinary" : "gradient"; }

std::string to_string(Alignment a) {
  switch (a) {
    case Alignment::x_aligned:
      return "x_aligned";
    case Alignment::y_aligned:
      return "y_aligned";
    default:
      return "none";
  }
}

DetectionGrid::DetectionGrid(const PointCloud& cloud, int nx, int ny)
    : domain_(cloud.domain), nx_(nx), ny_(ny) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("build_grid: resolution must be >= 2");
  if (cloud.empty()) throw std::invalid_argument("build_grid: empty cloud");
  if (domain_.degenerate()) throw std::invalid_argument("build_grid: degenerate domain");
  w_ = domain_.width() / nx;
  h_ = domain_.height() / ny;

  std::vector<int> cell_of_point(cloud.size());
  offsets_.assign(static_cast<std::size_t>(nx) * ny + 1, 0);
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    cell_of_point[k] = cell_of(cloud.points[k].x, cloud.points[k].y);
    ++offsets_[cell_of_point[k] + 1];
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  members_.resize(cloud.size());
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t k = 0; k < cloud.size(); ++k) members_[fill[cell_of_point[k]]++] = static_cast<int>(k);
}

int DetectionGrid::cell_of(double x, double y) const {
  const int i = std::clamp(static_cast<int>(std::floor((x - domain_.x0) / domain_.width() * nx_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor((y - domain_.y0) / domain_.height() * ny_)), 0, ny_ - 1);
  return cell_index(i, j);
}

Rect DetectionGrid::cell_box(int i, int j) const {
  return {domain_.x0 + i * w_, domain_.x0 + (i + 1) * w_, domain_.y0 + j * h_, domain_.y0 + (j + 1) * h_};
}

std::vector<int> DetectionGrid::points_in(const PointCloud& cloud, const Rect& r) const {
  std::vector<int> out;
  const int c0 = cell_of(std::max(r.x0, domain_.x0), std::max(r.y0, domain_.y0));
  const int c1 = cell_of(std::min(r.x1, domain_.x1), std::min(r.y1, domain_.y1));
  const int i0 = c0 % nx_, j0 = c0 / nx_, i1 = c1 % nx_, j1 = c1 / nx_;
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i)
      for (int k : cell(i, j)) {
        const auto& p = cloud.points[k];
        if (r.contains(p.x, p.y)) out.push_back(k);
      }
  return out;
}

DetectionGrid build_grid(const PointCloud& cloud, int nx, int ny) { return DetectionGrid(cloud, nx, ny); }

namespace {

// Moments of (1, u, v, z) for a least-squares plane z = a + b u + c v.
struct PlaneMoments {
  double n = 0, u = 0, v = 0, uu = 0, uv = 0, vv = 0, z = 0, uz = 0, vz = 0, zz = 0;

  void add(double pu, double pv, double pz) {
    n += 1;
    u += pu;
    v += pv;
    uu += pu * pu;
    uv += pu * pv;
    vv += pv * pv;
    z += pz;
    uz += pu * pz;
    vz += pv * pz;
    zz += pz * pz;
  }
  PlaneMoments operator-(const PlaneMoments& o) const {
    return {n - o.n, u - o.u, v - o.v, uu - o.uu, uv - o.uv, vv - o.vv, z - o.z, uz - o.uz, vz - o.vz, zz - o.zz};
  }

  // Returns false on a (numerically) singular system.
  bool solve(Eigen::Vector3d& coef, double& sse) const {
    Eigen::Matrix3d m;
    m << n, u, v, u, uu, uv, v, uv, vv;
    const Eigen::Vector3d b(z, uz, vz);
    const double scale = m.diagonal().maxCoeff();
    const double det = m.determinant();
    if (!(std::abs(det) > 1e-10 * scale * scale * scale)) return false;
    coef = m.inverse() * b;
    sse = std::max(0.0, zz - b.dot(coef));
    return true;
  }
};

struct LocalPoint {
  double u, v, z;
};

struct Plane {
  Eigen::Vector3d coef = Eigen::Vector3d::Zero();
  double sse = 0.0;
  bool ok = false;
  double at(double u, double v) const { return coef[0] + coef[1] * u + coef[2] * v; }
};

Plane fit_plane(std::span<const LocalPoint> pts) {
  PlaneMoments m;
  for (const auto& p : pts) m.add(p.u, p.v, p.z);
  Plane pl;
  pl.ok = m.solve(pl.coef, pl.sse);
  if (pl.ok) {
    // Direct residual sum: the moment formula cancels badly for near-exact fits.
    double sse = 0.0;
    for (const auto& p : pts) {
      const double r = p.z - pl.at(p.u, p.v);
      sse += r * r;
    }
    pl.sse = sse;
  }
  return pl;
}

using Quadratic = Eigen::Matrix<double, 6, 1>;

double quadratic_at(const Quadratic& c, double u, double v) {
  return c[0] + c[1] * u + c[2] * v + c[3] * u * u + c[4] * u * v + c[5] * v * v;
}

Quadratic fit_quadratic(std::span<const LocalPoint> pts) {
  Eigen::Matrix<double, 6, 6> g = Eigen::Matrix<double, 6, 6>::Zero();
  Quadratic b = Quadratic::Zero();
  for (const auto& p : pts) {
    Quadratic phi;
    phi << 1.0, p.u, p.v, p.u * p.u, p.u * p.v, p.v * p.v;
    g.selfadjointView<Eigen::Lower>().rankUpdate(phi);
    b += phi * p.z;
  }
  g = g.selfadjointView<Eigen::Lower>();
  return g.ldlt().solve(b);
}

struct QuadraticResidual {
  double sse = 0.0;
  double noise_var = -1.0;  // negative when no neighbour pairs exist
};

// Residual of the best quadratic, plus a noise variance from residual differences of nearby
// points: smooth misfit nearly cancels between neighbours while independent noise doubles.
QuadraticResidual quadratic_residual(std::span<const LocalPoint> pts, double aspect) {
  const Quadratic c = fit_quadratic(pts);
  constexpr int kSub = 6;
  std::vector<std::pair<int, double>> keyed(pts.size());
  QuadraticResidual out;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto& p = pts[k];
    const double r = p.z - quadratic_at(c, p.u, p.v);
    out.sse += r * r;
    const int bu = std::clamp(static_cast<int>((p.u + 1.0) * 0.5 * kSub), 0, kSub - 1);
    const int bv = std::clamp(static_cast<int>((p.v / aspect + 1.0) * 0.5 * kSub), 0, kSub - 1);
    keyed[k] = {bv * kSub + bu, r};
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double diff = 0.0;
  int pairs = 0;
  for (std::size_t k = 1; k < keyed.size(); ++k)
    if (keyed[k].first == keyed[k - 1].first) {
      const double d = keyed[k].second - keyed[k - 1].second;
      diff += d * d;
      ++pairs;
    }
  if (pairs > 0) out.noise_var = diff / (2.0 * pairs);
  return out;
}

struct Separator {
  double angle = 0.0;  // normal direction
  double offset = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

// Best straight two-plane split of the points for normals at the given angles.
void scan_separators(std::span<const LocalPoint> pts, std::span<const double> angles, int min_side,
                     Separator& best) {
  const int n = static_cast<int>(pts.size());
  std::vector<std::pair<double, int>> order(n);
  std::vector<PlaneMoments> prefix(n + 1);
  for (double theta : angles) {
    const double cx = std::cos(theta), cy = std::sin(theta);
    for (int k = 0; k < n; ++k) order[k] = {cx * pts[k].u + cy * pts[k].v, k};
    std::sort(order.begin(), order.end());
    prefix[0] = PlaneMoments{};
    for (int k = 0; k < n; ++k) {
      prefix[k + 1] = prefix[k];
      const auto& p = pts[order[k].second];
      prefix[k + 1].add(p.u, p.v, p.z);
    }
    for (int k = min_side; k <= n - min_side; ++k) {
      if (order[k - 1].first == order[k].first) continue;
      Eigen::Vector3d c;
      double sl, sr;
      if (!prefix[k].solve(c, sl)) continue;
      if (!(prefix[n] - prefix[k]).solve(c, sr)) continue;
      if (sl + sr < best.sse) {
        best.sse = sl + sr;
        best.angle = theta;
        best.offset = 0.5 * (order[k - 1].first + order[k].first);
      }
    }
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

std::vector<FaultPoint> detect_fault_points(const PointCloud& cloud, const DetectionConfig& cfg,
                                            DetectionStats* stats) {
  DetectionStats local_stats;
  DetectionStats& st = stats ? *stats : local_stats;
  st = {};
  if (cloud.empty()) return {};

  const DetectionGrid grid(cloud, cfg.nx, cfg.ny);
  const double w = grid.cell_width();
  const double h = grid.cell_height();
  const int cells = cfg.nx * cfg.ny;

  double zmin = cloud.points.front().z, zmax = zmin;
  for (const auto& p : cloud.points) {
    zmin = std::min(zmin, p.z);
    zmax = std::max(zmax, p.z);
  }
  const double floor = cfg.relative_floor * std::max(zmax - zmin, 1e-300);

  // Each cell is analysed through a window reaching half a cell into its neighbours, so that a
  // fault running along a cell boundary is still seen from both sides.
  const auto local_points = [&](int i, int j) {
    const Rect box = grid.cell_box(i, j);
    const double cx = 0.5 * (box.x0 + box.x1), cy = 0.5 * (box.y0 + box.y1);
    const Rect win{box.x0 - 0.5 * w, box.x1 + 0.5 * w, box.y0 - 0.5 * h, box.y1 + 0.5 * h};
    std::vector<LocalPoint> pts;
    for (int jj = std::max(j - 1, 0); jj <= std::min(j + 1, cfg.ny - 1); ++jj)
      for (int ii = std::max(i - 1, 0); ii <= std::min(i + 1, cfg.nx - 1); ++ii)
        for (int k : grid.cell(ii, jj)) {
          const auto& p = cloud.points[k];
          if (p.x >= win.x0 && p.x <= win.x1 && p.y >= win.y0 && p.y <= win.y1)
            pts.push_back({(p.x - cx) / w, (p.y - cy) / w, p.z});
        }
    return pts;
  };

  // Pass 1: per-cell plane and quadratic residuals and a point-noise estimate.
  std::vector<double> rms2(cells, -1.0), rq2(cells, -1.0);
  std::vector<int> count(cells, 0);
  std::vector<double> plane_valid, noise_valid;
  for (int j = 0; j < cfg.ny; ++j)
    for (int i = 0; i < cfg.nx; ++i) {
      const auto pts = local_points(i, j);
      if (pts.size() < 8) continue;
      const Plane pl = fit_plane(pts);
      if (!pl.ok) continue;
      const int c = grid.cell_index(i, j);
      const double n = static_cast<double>(pts.size());
      const QuadraticResidual q = quadratic_residual(pts, h / w);
      count[c] = static_cast<int>(pts.size());
      rms2[c] = pl.sse / n;
      rq2[c] = q.sse / n;
      plane_valid.push_back(rms2[c]);
      if (q.noise_var >= 0) noise_valid.push_back(q.noise_var);
    }
  // Residual variance splits into point noise and smooth misfit; only the misfit part scales
  // with c_res, the noise part must be exceeded by a significant margin for the window size.
  const double noise2 = median(noise_valid);
  const double misfit2 = std::max(median(plane_valid) - noise2, floor * floor);
  const auto threshold2 = [&](int n) {
    return noise2 * (1.0 + cfg.noise_z * std::sqrt(2.0 / n)) + cfg.c_res * cfg.c_res * misfit2;
  };

  std::vector<double> coarse(cfg.coarse_angles);
  const double step = std::numbers::pi / cfg.coarse_angles;
  for (int a = 0; a < cfg.coarse_angles; ++a) coarse[a] = a * step;

  // Pass 2: two-sided test on candidate cells, in cell order.
  std::vector<FaultPoint> out;
  for (int j = 0; j < cfg.ny; ++j)
    for (int i = 0; i < cfg.nx; ++i) {
      const int c = grid.cell_index(i, j);
      if (rms2[c] < 0 || rms2[c] <= threshold2(count[c])) continue;
      ++st.candidates;
      const auto pts = local_points(i, j);
      const int n = static_cast<int>(pts.size());
      if (n < 2 * cfg.min_side_points + 2) {
        ++st.skipped_sparse;
        continue;
      }

      // A single quadratic that already explains the window marks smooth curvature, not a fault.
      if (rq2[c] <= threshold2(n)) {
        ++st.rejected;
        continue;
      }

      Separator best;
      scan_separators(pts, coarse, cfg.min_side_points, best);
      if (!std::isfinite(best.sse)) {
        ++st.skipped_sparse;
        continue;
      }
      std::vector<double> fine;
      for (int k = -8; k <= 8; ++k) fine.push_back(best.angle + k * step / 8.0);
      scan_separators(pts, fine, cfg.min_side_points, best);

      const double nxu = std::cos(best.angle), nyu = std::sin(best.angle);
      std::vector<LocalPoint> lo, hi;
      for (const auto& p : pts) (nxu * p.u + nyu * p.v < best.offset ? lo : hi).push_back(p);
      const Plane pl = fit_plane(lo);
      const Plane ph = fit_plane(hi);
      if (!pl.ok || !ph.ok) {
        ++st.skipped_sparse;
        continue;
      }

      const double r2 = std::sqrt((pl.sse + ph.sse) / n);
      if (!(r2 * r2 - noise2 < cfg.split_gain * cfg.split_gain * (rq2[c] - noise2))) {
        ++st.rejected;
        continue;
      }
      const double noise = std::max(r2, floor);

      // Crossing location: the point of the separator closest to the cell centre. It must lie
      // in the cell itself; otherwise a neighbouring window owns this crossing.
      const double dist = -best.offset;
      const double mu = -dist * nxu, mv = -dist * nyu;
      const Rect box = grid.cell_box(i, j);
      const Point2 where{0.5 * (box.x0 + box.x1) + mu * w, 0.5 * (box.y0 + box.y1) + mv * w};
      if (grid.cell_of(where.x, where.y) != c || !cloud.domain.contains(where.x, where.y)) {
        ++st.rejected;
        continue;
      }

      const double value_jump = std::abs(pl.at(mu, mv) - ph.at(mu, mv));
      const double gx = (pl.coef[1] - ph.coef[1]) / w;
      const double gy = (pl.coef[2] - ph.coef[2]) / w;
      const double grad_jump = std::hypot(gx, gy);
      const double cell = std::max(w, h);

      FaultPoint fp;
      if (value_jump > cfg.tau_ord * noise && value_jump > cfg.ordinary_ratio * grad_jump * cell) {
        fp.kind = FaultKind::ordinary;
      } else if (grad_jump > cfg.tau_grad * noise / cell) {
        fp.kind = FaultKind::gradient;
      } else {
        ++st.rejected;
        continue;
      }
      fp.location = where;
      // Tangent, oriented with angle in [0, pi).
      double tx = -nyu, ty = nxu;
      if (ty < 0 || (ty == 0 && tx < 0)) {
        tx = -tx;
        ty = -ty;
      }
      const double len = std::hypot(tx, ty);
      fp.direction = {tx / len, ty / len};
      out.push_back(fp);
    }
  return label_alignment(std::move(out), cfg.theta_tol_deg);
}

std::vector<FaultPoint> label_alignment(std::vector<FaultPoint> points, double theta_tol_deg) {
  const double tol = theta_tol_deg * std::numbers::pi / 180.0;
  for (auto& p : points) {
    const double ax = std::atan2(std::abs(p.direction.y), std::abs(p.direction.x));  // angle to x-axis
    if (ax <= tol)
      p.alignment = Alignment::x_aligned;
    else if (std::numbers::pi / 2 - ax <= tol)
      p.alignment = Alignment::y_aligned;
    else
      p.alignment = Alignment::none;
  }
  return points;
}

}  // namespace lrqi
