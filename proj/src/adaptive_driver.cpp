#include "lrqi/adaptive_driver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <unordered_map>

namespace lrqi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int axis_index(Axis a) { return static_cast<int>(a); }

}  // namespace

std::string to_string(RefinementMode m) {
  switch (m) {
    case RefinementMode::isotropic:
      return "iso";
    case RefinementMode::anisotropic:
      return "aniso";
    default:
      return "fault";
  }
}

void validate(const AdaptiveConfig& cfg) {
  validate(cfg.qi);
  validate(cfg.jump);
  if (cfg.cells_per_dir < 1) throw std::invalid_argument("AdaptiveConfig: cells_per_dir must be >= 1");
  if (cfg.mode == RefinementMode::anisotropic && (cfg.L_aniso < cfg.jump.L_bar || cfg.L_aniso > cfg.jump.L))
    throw std::invalid_argument("AdaptiveConfig: need L_bar <= L_aniso <= L in anisotropic mode");
}

AdaptiveConfig default_config(RefinementMode mode, int L_bar, int degree) {
  AdaptiveConfig cfg;
  cfg.mode = mode;
  cfg.qi.degree = {degree, degree};
  cfg.jump.L_bar = L_bar;
  cfg.L_aniso = L_bar;
  return cfg;
}

double FitReport::mark_refine_time() const {
  double t = 0;
  for (const auto& r : iterations) t += r.t_mark_refine;
  return t;
}
double FitReport::solve_time() const {
  double t = 0;
  for (const auto& r : iterations) t += r.t_solve;
  return t;
}
double FitReport::eval_time() const {
  double t = t_detect;
  for (const auto& r : iterations) t += r.t_eval;
  return t;
}
double FitReport::total_time() const { return mark_refine_time() + solve_time() + eval_time(); }

std::vector<MarkedElement> mark(const std::vector<FaultPoint>& points, std::vector<char>& active,
                                const LRMesh& mesh, int iteration, const AdaptiveConfig& cfg) {
  if (active.size() != points.size()) throw std::invalid_argument("mark: dismissal flags do not match points");
  const bool fault_driven = cfg.mode == RefinementMode::fault_driven;
  const bool one_directional = cfg.mode == RefinementMode::anisotropic && iteration >= cfg.L_aniso;

  std::map<std::tuple<Tick, Tick, Tick, Tick>, MarkedElement> by_box;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (!active[k]) continue;
    const FaultPoint& p = points[k];
    const int cls = fault_driven ? cfg.jump.L : p.jump_class.value_or(cfg.jump.L);
    const Element e = mesh.find_element(p.location.x, p.location.y);

    bool dirs[2] = {true, true};
    if (one_directional && p.alignment != Alignment::none) {
      // A fault parallel to the y-axis needs resolution in x, and vice versa.
      const Axis transverse = p.alignment == Alignment::y_aligned ? Axis::x : Axis::y;
      dirs[axis_index(other(transverse))] = false;
    }
    int governing = std::numeric_limits<int>::max();
    for (Axis a : {Axis::x, Axis::y})
      if (dirs[axis_index(a)]) governing = std::min(governing, e.level(a));
    if (governing >= cls) {
      active[k] = 0;
      continue;
    }

    auto& m = by_box[{e.ticks.y0, e.ticks.x0, e.ticks.y1, e.ticks.x1}];
    m.box = e.ticks;
    m.demanded = std::max(m.demanded, cls);
    for (int d = 0; d < 2; ++d) m.split[d] = m.split[d] || dirs[d];
  }

  std::vector<MarkedElement> out;
  out.reserve(by_box.size());
  for (auto& [key, m] : by_box) {
    // Never bisect a direction that already satisfies the demand.
    for (Axis a : {Axis::x, Axis::y})
      if (mesh.level_of_extent(m.box.extent(a)) >= m.demanded) m.split[axis_index(a)] = false;
    if (m.split[0] || m.split[1]) out.push_back(m);
  }
  return out;
}

void refine(LRSpline& spline, const std::vector<MarkedElement>& marked) {
  for (const MarkedElement& m : marked) {
    for (Axis a : {Axis::x, Axis::y}) {
      if (!m.split[axis_index(a)]) continue;
      if (m.box.extent(a) % 2 != 0) continue;  // tick resolution exhausted
      const Tick mid = (m.box.lo(a) + m.box.hi(a)) / 2;
      const Axis t = other(a);
      Tick lo = m.box.lo(t), hi = m.box.hi(t);
      for (int id : spline.basis.overlapping(m.box)) {
        const TickBox s = spline.basis.spline(id).knots.support();
        lo = std::min(lo, s.lo(t));
        hi = std::max(hi, s.hi(t));
      }
      spline.insert({a, mid, lo, hi, 1});
    }
  }
}

std::vector<FaultPoint> analyze_faults(const PointCloud& cloud, const AdaptiveConfig& cfg) {
  auto points = detect_fault_points(cloud, cfg.detection);
  JumpConfig jc = cfg.jump;
  jc.grid_nx = cfg.detection.nx;
  jc.grid_ny = cfg.detection.ny;
  if (!points.empty()) JumpEstimator(cloud, jc).estimate(points);
  return classify_jumps(std::move(points), jc);
}

namespace {

// Surface values at the data sites, kept current across refinements. Only points under splines
// that were added, removed or changed since the last call are evaluated again.
// Surface values at the data sites, refreshed only on elements under supports whose knots,
// coefficient or weight changed since the previous call. Elements holding many points are
// converted to tensor polynomial form once and the points evaluated by Horner's rule.
class ResidualTracker {
 public:
  ResidualTracker(const PointCloud& cloud, const DetectionGrid& index)
      : cloud_(&cloud), index_(&index), values_(cloud.size(), 0.0) {}

  void update(const LRBasis& basis, const LRMesh& mesh) {
    Snapshot now;
    now.reserve(basis.size());
    for (int id : basis.ids()) {
      const LRBSpline& s = basis.spline(id);
      std::vector<Tick> key(s.knots.u);
      key.insert(key.end(), s.knots.v.begin(), s.knots.v.end());
      now.emplace(std::move(key), Entry{s.coefficient, s.gamma, s.knots.support()});
    }
    const KnotGrid& grid = mesh.grid();
    std::vector<int> dirty;
    if (first_) {
      prepare(grid, basis.bidegree());
      dirty = mesh.elements_overlapping({0, grid.total(), 0, grid.total()});
      first_ = false;
    } else {
      const auto mark = [&](const TickBox& b) {
        for (int e : mesh.elements_overlapping(b)) dirty.push_back(e);
      };
      for (const auto& [key, e] : now) {
        const auto it = last_.find(key);
        if (it == last_.end() || it->second.coefficient != e.coefficient || it->second.gamma != e.gamma)
          mark(e.support);
      }
      for (const auto& [key, e] : last_)
        if (!now.count(key)) mark(e.support);
      std::sort(dirty.begin(), dirty.end());
      dirty.erase(std::unique(dirty.begin(), dirty.end()), dirty.end());
    }
    for (int e : dirty) refresh(basis, mesh.element(e), grid.total());
    last_ = std::move(now);
  }

  double rmse(const PointCloud& data) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < data.size(); ++k) {
      const double r = values_[k] - data.points[k].z;
      sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(data.size()));
  }

 private:
  struct Entry {
    double coefficient, gamma;
    TickBox support;
  };
  struct KeyHash {
    std::size_t operator()(const std::vector<Tick>& k) const noexcept {
      std::size_t h = 1469598103934665603ULL;
      for (Tick t : k) h ^= static_cast<std::size_t>(t) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      return h;
    }
  };
  using Snapshot = std::unordered_map<std::vector<Tick>, Entry, KeyHash>;

  static constexpr std::size_t kPolynomialMin = 40;

  static bool in_span(double t, Tick lo, Tick hi, Tick total) {
    return t >= static_cast<double>(lo) &&
           (t < static_cast<double>(hi) || (hi == total && t == static_cast<double>(hi)));
  }

  void prepare(const KnotGrid& grid, Bidegree deg) {
    tx_.resize(cloud_->size());
    ty_.resize(cloud_->size());
    for (std::size_t k = 0; k < cloud_->size(); ++k) {
      tx_[k] = grid.to_ticks(Axis::x, cloud_->points[k].x);
      ty_[k] = grid.to_ticks(Axis::y, cloud_->points[k].y);
    }
    for (int a = 0; a < 2; ++a) {
      const int n = (a == 0 ? deg.p1 : deg.p2) + 1;
      nodes_[a].resize(n);
      Eigen::MatrixXd v(n, n);
      for (int i = 0; i < n; ++i) {
        nodes_[a][i] = std::cos((2 * i + 1) * std::numbers::pi / (2 * n));
        for (int k = 0; k < n; ++k) v(i, k) = std::pow(nodes_[a][i], k);
      }
      vinv_[a] = v.inverse();
    }
  }

  void refresh(const LRBasis& basis, const Element& el, Tick total) {
    members_.clear();
    for (int k : index_->points_in(*cloud_, el.box))
      if (in_span(tx_[k], el.ticks.x0, el.ticks.x1, total) && in_span(ty_[k], el.ticks.y0, el.ticks.y1, total))
        members_.push_back(k);
    if (members_.size() < kPolynomialMin) {
      for (int k : members_) values_[k] = basis.evaluate(cloud_->points[k].x, cloud_->points[k].y);
      return;
    }
    const KnotGrid& grid = basis.grid();
    const int n1 = static_cast<int>(nodes_[0].size()), n2 = static_cast<int>(nodes_[1].size());
    const double cx = 0.5 * static_cast<double>(el.ticks.x0 + el.ticks.x1);
    const double hx = 0.5 * static_cast<double>(el.ticks.x1 - el.ticks.x0);
    const double cy = 0.5 * static_cast<double>(el.ticks.y0 + el.ticks.y1);
    const double hy = 0.5 * static_cast<double>(el.ticks.y1 - el.ticks.y0);
    const auto at = [&](Axis a, double c, double h, double s) {
      const Rect& d = grid.domain();
      const double lo = a == Axis::x ? d.x0 : d.y0, hi = a == Axis::x ? d.x1 : d.y1;
      return lo + (hi - lo) * ((c + h * s) / static_cast<double>(total));
    };
    Eigen::MatrixXd f(n1, n2);
    for (int j = 0; j < n2; ++j)
      for (int i = 0; i < n1; ++i)
        f(i, j) = basis.evaluate(at(Axis::x, cx, hx, nodes_[0][i]), at(Axis::y, cy, hy, nodes_[1][j]));
    const Eigen::MatrixXd c = vinv_[0] * f * vinv_[1].transpose();
    for (int k : members_) {
      const double xi = (tx_[k] - cx) / hx, eta = (ty_[k] - cy) / hy;
      double sum = 0.0;
      for (int j = n2 - 1; j >= 0; --j) {
        double row = 0.0;
        for (int i = n1 - 1; i >= 0; --i) row = row * xi + c(i, j);
        sum = sum * eta + row;
      }
      values_[k] = sum;
    }
  }

  const PointCloud* cloud_;
  const DetectionGrid* index_;
  std::vector<double> values_;
  std::vector<double> tx_, ty_;
  std::vector<double> nodes_[2];
  Eigen::MatrixXd vinv_[2];
  std::vector<int> members_;
  bool first_ = true;
  Snapshot last_;
};

FitResult run_loop(const PointCloud& cloud, const AdaptiveConfig& cfg, const PointCloud* reference) {
  validate(cfg);
  if (cloud.empty()) throw std::invalid_argument("run_fit: empty cloud");
  if (reference && reference->size() != cloud.size())
    throw std::invalid_argument("run_fit: reference cloud does not match the data sites");

  FitResult result;
  auto t0 = Clock::now();
  if (cfg.mode == RefinementMode::fault_driven) {
    result.faults = detect_fault_points(cloud, cfg.detection);
  } else {
    result.faults = analyze_faults(cloud, cfg);
  }
  result.report.t_detect = seconds_since(t0);

  result.surface.config = cfg.qi;
  LRSpline& spline = result.surface.spline;
  spline = LRSpline::tensor(cloud.domain, cfg.cells_per_dir, cfg.qi.degree);
  QIAssembler assembler(cloud, cfg.qi);
  ResidualTracker values(cloud, assembler.index());

  const auto solve_and_record = [&](IterationRecord rec) {
    auto ts = Clock::now();
    assembler.assemble(spline);
    rec.t_solve = seconds_since(ts);
    auto te = Clock::now();
    rec.ndofs = spline.basis.size();
    values.update(spline.basis, spline.mesh);
    rec.rmse = values.rmse(cloud);
    if (reference) rec.rmse_reference = values.rmse(*reference);
    rec.t_eval = seconds_since(te);
    result.report.iterations.push_back(rec);
  };

  solve_and_record({});
  std::vector<char> active(result.faults.size(), 1);
  for (int it = 1; it <= cfg.jump.L; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    auto tm = Clock::now();
    const auto marked = mark(result.faults, active, spline.mesh, it, cfg);
    if (marked.empty()) break;
    refine(spline, marked);
    rec.t_mark_refine = seconds_since(tm);
    solve_and_record(rec);
  }
  return result;
}

}  // namespace

FitResult run_jump_driven_fit(const PointCloud& cloud, const AdaptiveConfig& cfg, const PointCloud* reference) {
  if (cfg.mode == RefinementMode::fault_driven)
    throw std::invalid_argument("run_jump_driven_fit: mode must be isotropic or anisotropic");
  return run_loop(cloud, cfg, reference);
}

FitResult run_fault_driven_fit(const PointCloud& cloud, const AdaptiveConfig& cfg, const PointCloud* reference) {
  AdaptiveConfig fd = cfg;
  fd.mode = RefinementMode::fault_driven;
  return run_loop(cloud, fd, reference);
}

FitResult run_fit(const PointCloud& cloud, const AdaptiveConfig& cfg, const PointCloud* reference) {
  return cfg.mode == RefinementMode::fault_driven ? run_fault_driven_fit(cloud, cfg, reference)
                                                  : run_jump_driven_fit(cloud, cfg, reference);
}

}  // namespace lrqi
