#include "lrqi/lr_basis.hpp"

#include <cstdio>
#include <ostream>

namespace lrqi {

namespace {

constexpr int kIndexResolution = 128;

using KnotBuffer = std::array<double, kMaxDegree + 2>;

std::span<const double> as_double(const std::vector<Tick>& k, KnotBuffer& buf) {
  for (std::size_t i = 0; i < k.size(); ++i) buf[i] = static_cast<double>(k[i]);
  return {buf.data(), k.size()};
}

bool support_contains(const std::vector<Tick>& k, double t, Tick total) {
  const auto lo = static_cast<double>(k.front());
  const auto hi = static_cast<double>(k.back());
  return lo <= t && (t < hi || (t == hi && k.back() == total));
}

}  // namespace

SplineSplit split_by_knot_insertion(const LocalKnots& knots, Bidegree degree, Axis direction, Tick knot) {
  const int p = degree.along(direction);
  const auto& dir = knots.along(direction);
  std::vector<double> kd(dir.begin(), dir.end());
  const auto s = split_knots<double>(kd, p, static_cast<double>(knot));

  SplineSplit out{knots, s.alpha_left, knots, s.alpha_right};
  auto& first = out.first.along(direction);
  auto& second = out.second.along(direction);
  for (std::size_t i = 0; i < first.size(); ++i) {
    first[i] = static_cast<Tick>(s.left[i]);
    second[i] = static_cast<Tick>(s.right[i]);
  }
  return out;
}

std::size_t LRBasis::KeyHash::operator()(const std::vector<Tick>& k) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (Tick t : k) {
    h ^= static_cast<std::size_t>(t) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

std::vector<Tick> LRBasis::key(const LocalKnots& k) {
  std::vector<Tick> out(k.u);
  out.insert(out.end(), k.v.begin(), k.v.end());
  return out;
}

LRBasis LRBasis::tensor(const LRMesh& mesh) {
  LRBasis b;
  b.grid_ = mesh.grid();
  b.degree_ = mesh.bidegree();
  const Tick total = b.grid_.total();
  b.index_ = BoxIndex(total, total, kIndexResolution);

  std::vector<Tick> global[2];
  for (Axis a : {Axis::x, Axis::y}) {
    std::vector<Tick> pos{0};
    for (Tick t : mesh.line_positions(a, 0, total)) pos.push_back(t);
    pos.push_back(total);
    for (Tick t : pos) {
      const int m = mesh.multiplicity_over(a, t, 0, total);
      if (m == 0) throw std::invalid_argument("LRBasis::tensor: mesh is not a tensor mesh");
      global[static_cast<int>(a)].insert(global[static_cast<int>(a)].end(), m, t);
    }
  }
  const int p1 = b.degree_.p1, p2 = b.degree_.p2;
  const auto& gu = global[0];
  const auto& gv = global[1];
  for (std::size_t j = 0; j + p2 + 2 <= gv.size(); ++j)
    for (std::size_t i = 0; i + p1 + 2 <= gu.size(); ++i) {
      LocalKnots k{{gu.begin() + i, gu.begin() + i + p1 + 2}, {gv.begin() + j, gv.begin() + j + p2 + 2}};
      if (k.u.front() == k.u.back() || k.v.front() == k.v.back()) continue;
      b.add(std::move(k), 1.0, 0.0);
    }
  return b;
}

std::vector<int> LRBasis::ids() const {
  std::vector<int> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < alive_.size(); ++i)
    if (alive_[i]) out.push_back(static_cast<int>(i));
  return out;
}

int LRBasis::find(const LocalKnots& knots) const {
  const auto it = by_knots_.find(key(knots));
  return it == by_knots_.end() ? -1 : it->second;
}

int LRBasis::add(LocalKnots knots, double gamma, double coefficient) {
  int id;
  if (!free_ids_.empty()) {
    id = free_ids_.back();
    free_ids_.pop_back();
  } else {
    id = static_cast<int>(slots_.size());
    slots_.emplace_back();
    alive_.push_back(0);
  }
  by_knots_.emplace(key(knots), id);
  index_.insert(id, knots.support());
  slots_[id] = {std::move(knots), gamma, coefficient};
  alive_[id] = 1;
  ++count_;
  return id;
}

void LRBasis::remove(int id) {
  by_knots_.erase(key(slots_[id].knots));
  index_.erase(id);
  alive_[id] = 0;
  free_ids_.push_back(id);
  --count_;
}

void LRBasis::split(int id, Axis direction, Tick knot, std::vector<int>& work) {
  const LRBSpline parent = slots_[id];
  remove(id);
  const SplineSplit s = split_by_knot_insertion(parent.knots, degree_, direction, knot);
  for (const auto& [child, alpha] : {std::pair{&s.first, s.alpha_first}, std::pair{&s.second, s.alpha_second}}) {
    const double g = alpha * parent.gamma;
    const int existing = find(*child);
    if (existing >= 0) {
      LRBSpline& c = slots_[existing];
      const double weighted = c.coefficient * c.gamma + parent.coefficient * g;
      c.gamma += g;
      c.coefficient = weighted / c.gamma;
    } else {
      work.push_back(add(*child, g, parent.coefficient));
    }
  }
}

bool LRBasis::split_if_traversed(const LRMesh& mesh, int id, Axis normal, Tick fixed, std::vector<int>& work) {
  const LocalKnots& k = slots_[id].knots;
  const auto& dir = k.along(normal);
  if (!(dir.front() < fixed && fixed < dir.back())) return false;
  const auto& across = k.along(other(normal));
  const int m = mesh.multiplicity_over(normal, fixed, across.front(), across.back());
  const auto have = std::count(dir.begin(), dir.end(), fixed);
  if (m <= have) return false;
  split(id, normal, fixed, work);
  return true;
}

bool LRBasis::split_against_mesh(const LRMesh& mesh, int id, std::vector<int>& work) {
  for (Axis a : {Axis::x, Axis::y}) {
    const auto& dir = slots_[id].knots.along(a);
    for (Tick t : mesh.line_positions(a, dir.front(), dir.back()))
      if (split_if_traversed(mesh, id, a, t, work)) return true;
  }
  return false;
}

void LRBasis::update(const LRMesh& mesh, const MeshLine& inserted) {
  TickBox probe;
  if (inserted.normal == Axis::x)
    probe = {inserted.fixed, inserted.fixed, inserted.start, inserted.end};
  else
    probe = {inserted.start, inserted.end, inserted.fixed, inserted.fixed};

  std::vector<int> candidates;
  index_.visit(probe, [&](int id, const TickBox&) { candidates.push_back(id); });
  std::sort(candidates.begin(), candidates.end());

  std::vector<int> work;
  for (int id : candidates)
    if (alive_[id]) split_if_traversed(mesh, id, inserted.normal, inserted.fixed, work);

  while (!work.empty()) {
    const int id = work.back();
    work.pop_back();
    if (alive_[id]) split_against_mesh(mesh, id, work);
  }
}

double LRBasis::value_ticks(const LRBSpline& s, double tx, double ty) const {
  const Tick total = grid_.total();
  KnotBuffer bu, bv;
  const double vu = bspline_value<double>(as_double(s.knots.u, bu), degree_.p1, tx, s.knots.u.back() == total);
  if (vu == 0.0) return 0.0;
  const double vv = bspline_value<double>(as_double(s.knots.v, bv), degree_.p2, ty, s.knots.v.back() == total);
  return s.gamma * vu * vv;
}

std::vector<BasisValue> LRBasis::eval(double x, double y) const {
  if (!grid_.domain().contains(x, y)) throw std::invalid_argument("eval_surface_basis: point outside domain");
  const double tx = grid_.to_ticks(Axis::x, x);
  const double ty = grid_.to_ticks(Axis::y, y);
  const Tick total = grid_.total();
  const auto fx = static_cast<Tick>(std::floor(tx));
  const auto fy = static_cast<Tick>(std::floor(ty));
  std::vector<BasisValue> out;
  index_.visit({fx, std::min(fx + 1, total), fy, std::min(fy + 1, total)}, [&](int id, const TickBox&) {
    const LRBSpline& s = slots_[id];
    if (!support_contains(s.knots.u, tx, total) || !support_contains(s.knots.v, ty, total)) return;
    const double v = value_ticks(s, tx, ty);
    if (v != 0.0) out.push_back({id, v});
  });
  std::sort(out.begin(), out.end(), [](const BasisValue& a, const BasisValue& b) { return a.id < b.id; });
  return out;
}

double LRBasis::evaluate(double x, double y) const {
  if (!grid_.domain().contains(x, y)) throw std::invalid_argument("eval_surface: point outside domain");
  const double tx = grid_.to_ticks(Axis::x, x);
  const double ty = grid_.to_ticks(Axis::y, y);
  const Tick total = grid_.total();
  const auto fx = static_cast<Tick>(std::floor(tx));
  const auto fy = static_cast<Tick>(std::floor(ty));
  double sum = 0.0;
  index_.visit({fx, std::min(fx + 1, total), fy, std::min(fy + 1, total)}, [&](int id, const TickBox&) {
    const LRBSpline& s = slots_[id];
    if (!support_contains(s.knots.u, tx, total) || !support_contains(s.knots.v, ty, total)) return;
    sum += s.coefficient * value_ticks(s, tx, ty);
  });
  return sum;
}

double LRBasis::scaled_value(int id, double x, double y) const {
  const double tx = grid_.to_ticks(Axis::x, x);
  const double ty = grid_.to_ticks(Axis::y, y);
  const LRBSpline& s = slots_[id];
  const Tick total = grid_.total();
  if (!support_contains(s.knots.u, tx, total) || !support_contains(s.knots.v, ty, total)) return 0.0;
  return value_ticks(s, tx, ty);
}

std::vector<int> LRBasis::overlapping(const TickBox& box) const {
  std::vector<int> out;
  index_.visit(box, [&](int id, const TickBox& b) {
    if (b.overlaps_interior(box)) out.push_back(id);
  });
  std::sort(out.begin(), out.end());
  return out;
}

Point2 LRBasis::greville(int id) const {
  const LocalKnots& k = slots_[id].knots;
  const auto avg = [&](const std::vector<Tick>& t, int p, Axis a) {
    const double lo = a == Axis::x ? grid_.domain().x0 : grid_.domain().y0;
    const double w = a == Axis::x ? grid_.domain().width() : grid_.domain().height();
    double sum = 0.0;
    for (int i = 1; i <= p; ++i) sum += static_cast<double>(t[i]);
    return lo + w * (sum / p) / static_cast<double>(grid_.total());
  };
  return {avg(k.u, degree_.p1, Axis::x), avg(k.v, degree_.p2, Axis::y)};
}

void LRBasis::write(std::ostream& os) const {
  os << "# u-knots (p1+2) v-knots (p2+2) gamma coefficient\n";
  char buf[64];
  for (int id : ids()) {
    const LRBSpline& s = slots_[id];
    for (Tick t : s.knots.u) {
      std::snprintf(buf, sizeof buf, "%.17g ", grid_.to_domain(Axis::x, t));
      os << buf;
    }
    for (Tick t : s.knots.v) {
      std::snprintf(buf, sizeof buf, "%.17g ", grid_.to_domain(Axis::y, t));
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", s.gamma, s.coefficient);
    os << buf;
  }
}

LRSpline LRSpline::tensor(const Rect& domain, int cells_per_dir, Bidegree degree) {
  LRSpline s;
  s.mesh = LRMesh::tensor(domain, cells_per_dir, degree);
  s.basis = LRBasis::tensor(s.mesh);
  return s;
}

void LRSpline::insert(const MeshLine& line) {
  mesh.insert(line);
  basis.update(mesh, line);
}

}  // namespace lrqi
