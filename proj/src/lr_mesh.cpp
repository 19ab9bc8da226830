#include "lrqi/lr_mesh.hpp"

#include <cstdio>
#include <ostream>

namespace lrqi {

namespace {

constexpr int kIndexResolution = 128;

int idx(Axis a) { return static_cast<int>(a); }

}  // namespace

LRMesh LRMesh::tensor(const Rect& domain, int cells_per_dir, Bidegree degree) {
  if (degree.p1 < 1 || degree.p2 < 1) throw std::invalid_argument("LRMesh: degrees must be >= 1");
  LRMesh m;
  m.grid_ = KnotGrid(domain, cells_per_dir);
  m.degree_ = degree;
  const Tick total = m.grid_.total();
  m.index_ = BoxIndex(total, total, kIndexResolution);

  for (Axis a : {Axis::x, Axis::y}) {
    const int boundary = degree.along(a) + 1;
    for (int k = 0; k <= cells_per_dir; ++k) {
      const bool edge = k == 0 || k == cells_per_dir;
      m.merge({a, k * kTicksPerCell, 0, total, edge ? boundary : 1});
    }
  }
  for (int j = 0; j < cells_per_dir; ++j)
    for (int i = 0; i < cells_per_dir; ++i)
      m.add_element({i * kTicksPerCell, (i + 1) * kTicksPerCell, j * kTicksPerCell, (j + 1) * kTicksPerCell});
  return m;
}

MeshLine LRMesh::line(Axis normal, double fixed, double start, double end, int multiplicity) const {
  return {normal, grid_.exact_tick(normal, fixed), grid_.exact_tick(other(normal), start),
          grid_.exact_tick(other(normal), end), multiplicity};
}

int LRMesh::level_of_extent(Tick extent) const {
  int level = 0;
  while ((extent << (level + 1)) <= kTicksPerCell) ++level;
  return level;
}

Element LRMesh::make_element(const TickBox& b) const {
  return {b, grid_.to_domain(b), level_of_extent(b.extent(Axis::x)), level_of_extent(b.extent(Axis::y))};
}

void LRMesh::add_element(const TickBox& b) {
  int id;
  if (!free_ids_.empty()) {
    id = free_ids_.back();
    free_ids_.pop_back();
  } else {
    id = id_capacity_++;
  }
  index_.insert(id, b);
  ++element_count_;
}

Element LRMesh::element(int id) const { return make_element(index_.box(id)); }

void LRMesh::merge(const MeshLine& line) {
  SegmentSet& set = lines_[idx(line.normal)][line.fixed];
  std::vector<Tick> cuts{line.start, line.end};
  for (const auto& [s, seg] : set) {
    cuts.push_back(s);
    cuts.push_back(seg.end);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  SegmentSet merged;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const Tick a = cuts[k], b = cuts[k + 1];
    int mult = 0;
    if (line.start <= a && b <= line.end) mult = line.multiplicity;
    auto it = set.upper_bound(a);
    if (it != set.begin()) {
      --it;
      if (it->first <= a && b <= it->second.end) mult = std::max(mult, it->second.mult);
    }
    if (mult == 0) continue;
    if (!merged.empty()) {
      auto last = std::prev(merged.end());
      if (last->second.end == a && last->second.mult == mult) {
        last->second.end = b;
        continue;
      }
    }
    merged.emplace(a, Segment{b, mult});
  }
  set = std::move(merged);
}

int LRMesh::multiplicity_over(Axis normal, Tick fixed, Tick start, Tick end) const {
  const auto& byfixed = lines_[idx(normal)];
  const auto found = byfixed.find(fixed);
  if (found == byfixed.end()) return 0;
  const SegmentSet& set = found->second;
  auto it = set.upper_bound(start);
  if (it == set.begin()) return 0;
  --it;
  int mult = it->second.mult;
  Tick covered = it->second.end;
  if (covered < start) return 0;
  while (covered < end) {
    ++it;
    if (it == set.end() || it->first != covered) return 0;
    mult = std::min(mult, it->second.mult);
    covered = it->second.end;
  }
  return mult;
}

std::vector<Tick> LRMesh::line_positions(Axis normal, Tick lo, Tick hi) const {
  std::vector<Tick> out;
  const auto& byfixed = lines_[idx(normal)];
  for (auto it = byfixed.upper_bound(lo); it != byfixed.end() && it->first < hi; ++it) out.push_back(it->first);
  return out;
}

bool LRMesh::endpoint_supported(Axis normal, Tick fixed, Tick at) const {
  if (at == 0 || at == grid_.total()) return true;
  return multiplicity_over(other(normal), at, fixed, fixed) > 0;
}

void LRMesh::insert(const MeshLine& line) {
  const Tick total = grid_.total();
  if (line.multiplicity < 1 || line.multiplicity > degree_.along(line.normal) + 1)
    throw std::invalid_argument("insert_meshline: multiplicity out of range");
  if (line.fixed < 0 || line.fixed > total || line.start < 0 || line.end > total || !(line.start < line.end))
    throw std::invalid_argument("insert_meshline: line outside domain");
  if (!endpoint_supported(line.normal, line.fixed, line.start) ||
      !endpoint_supported(line.normal, line.fixed, line.end))
    throw std::invalid_argument("insert_meshline: endpoint does not rest on a transversal meshline");

  const Axis n = line.normal;
  const Axis t = other(n);
  std::vector<int> crossed;
  if (line.fixed > 0 && line.fixed < total) {
    TickBox probe;
    if (n == Axis::x)
      probe = {line.fixed, line.fixed, line.start, line.end};
    else
      probe = {line.start, line.end, line.fixed, line.fixed};
    index_.visit(probe, [&](int id, const TickBox& b) {
      if (!(b.lo(n) < line.fixed && line.fixed < b.hi(n))) return;
      if (!(b.lo(t) < line.end && line.start < b.hi(t))) return;
      if (b.lo(t) < line.start || b.hi(t) > line.end)
        throw std::invalid_argument("insert_meshline: line ends inside an element");
      crossed.push_back(id);
    });
  }

  merge(line);

  std::sort(crossed.begin(), crossed.end());
  for (int id : crossed) {
    const TickBox b = index_.box(id);
    index_.erase(id);
    free_ids_.push_back(id);
    --element_count_;
    TickBox lo = b, hi = b;
    if (n == Axis::x) {
      lo.x1 = line.fixed;
      hi.x0 = line.fixed;
    } else {
      lo.y1 = line.fixed;
      hi.y0 = line.fixed;
    }
    add_element(lo);
    add_element(hi);
  }
}

std::vector<int> LRMesh::elements_overlapping(const TickBox& box) const {
  std::vector<int> out;
  index_.visit(box, [&](int id, const TickBox& b) {
    if (b.overlaps_interior(box)) out.push_back(id);
  });
  std::sort(out.begin(), out.end());
  return out;
}

TickBox LRMesh::grow_by_ring(const TickBox& box) const {
  TickBox out = box;
  index_.visit(box, [&](int, const TickBox& b) {
    if (b.x0 <= box.x1 && box.x0 <= b.x1 && b.y0 <= box.y1 && box.y0 <= b.y1) {
      out.x0 = std::min(out.x0, b.x0);
      out.x1 = std::max(out.x1, b.x1);
      out.y0 = std::min(out.y0, b.y0);
      out.y1 = std::max(out.y1, b.y1);
    }
  });
  return out;
}

std::vector<Element> LRMesh::elements() const {
  std::vector<Element> out;
  out.reserve(element_count_);
  const Tick total = grid_.total();
  index_.visit({0, total, 0, total}, [&](int, const TickBox& b) { out.push_back(make_element(b)); });
  std::sort(out.begin(), out.end(), [](const Element& a, const Element& b) {
    return std::tie(a.ticks.y0, a.ticks.x0) < std::tie(b.ticks.y0, b.ticks.x0);
  });
  return out;
}

Element LRMesh::find_element(double x, double y) const {
  if (!domain().contains(x, y)) throw std::invalid_argument("find_element: point outside domain");
  const double tx = grid_.to_ticks(Axis::x, x);
  const double ty = grid_.to_ticks(Axis::y, y);
  const auto fx = static_cast<Tick>(std::floor(tx));
  const auto fy = static_cast<Tick>(std::floor(ty));
  const TickBox probe{fx, std::min<Tick>(fx + 1, grid_.total()), fy, std::min<Tick>(fy + 1, grid_.total())};
  const auto inside = [](double v, Tick lo, Tick hi) {
    return (static_cast<double>(lo) < v || (lo == 0 && v == 0.0)) && v <= static_cast<double>(hi);
  };
  int found = -1;
  index_.visit(probe, [&](int id, const TickBox& b) {
    if (found < 0 && inside(tx, b.x0, b.x1) && inside(ty, b.y0, b.y1)) found = id;
  });
  if (found < 0) throw std::logic_error("find_element: no element contains the point");
  return element(found);
}

std::vector<MeshLine> LRMesh::lines() const {
  std::vector<MeshLine> out;
  for (Axis a : {Axis::x, Axis::y})
    for (const auto& [fixed, set] : lines_[idx(a)])
      for (const auto& [s, seg] : set) out.push_back({a, fixed, s, seg.end, seg.mult});
  return out;
}

void LRMesh::write(std::ostream& os) const {
  os << "# orientation fixed start end multiplicity\n";
  char buf[160];
  for (const auto& l : lines()) {
    const Axis t = other(l.normal);
    std::snprintf(buf, sizeof buf, "%s %.17g %.17g %.17g %d\n", l.normal == Axis::x ? "vertical" : "horizontal",
                  grid_.to_domain(l.normal, l.fixed), grid_.to_domain(t, l.start), grid_.to_domain(t, l.end),
                  l.multiplicity);
    os << buf;
  }
}

LRMesh insert_meshline(const LRMesh& mesh, const MeshLine& line) {
  LRMesh out = mesh;
  out.insert(line);
  return out;
}

}  // namespace lrqi
