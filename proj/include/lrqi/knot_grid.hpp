#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lrqi/point_cloud.hpp"

namespace lrqi {

/// Integer knot coordinate. Each initial tensor cell spans kTicksPerCell ticks so that
/// dyadic bisections stay exact down to depth kMaxDepth.
using Tick = std::int64_t;

inline constexpr int kMaxDepth = 24;
inline constexpr Tick kTicksPerCell = Tick{1} << kMaxDepth;

enum class Axis : int { x = 0, y = 1 };

inline Axis other(Axis a) { return a == Axis::x ? Axis::y : Axis::x; }

/// Closed box in tick coordinates.
struct TickBox {
  Tick x0 = 0, x1 = 0, y0 = 0, y1 = 0;

  Tick lo(Axis a) const { return a == Axis::x ? x0 : y0; }
  Tick hi(Axis a) const { return a == Axis::x ? x1 : y1; }
  Tick extent(Axis a) const { return hi(a) - lo(a); }

  /// Overlap of open interiors.
  bool overlaps_interior(const TickBox& o) const {
    return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
  }
  bool contains(const TickBox& o) const {
    return x0 <= o.x0 && o.x1 <= x1 && y0 <= o.y0 && o.y1 <= y1;
  }
  friend bool operator==(const TickBox&, const TickBox&) = default;
};

/// Maps ticks to domain coordinates for a domain split into cells x cells initial elements.
class KnotGrid {
 public:
  KnotGrid() = default;
  KnotGrid(const Rect& domain, int cells) : domain_(domain), cells_(cells) {
    if (domain.degenerate()) throw std::invalid_argument("KnotGrid: degenerate domain");
    if (cells < 1) throw std::invalid_argument("KnotGrid: cells_per_dir must be >= 1");
  }

  const Rect& domain() const { return domain_; }
  int cells() const { return cells_; }
  Tick total() const { return kTicksPerCell * cells_; }

  double to_domain(Axis a, Tick t) const {
    const double lo = a == Axis::x ? domain_.x0 : domain_.y0;
    const double hi = a == Axis::x ? domain_.x1 : domain_.y1;
    if (t == total()) return hi;
    return lo + (hi - lo) * (static_cast<double>(t) / static_cast<double>(total()));
  }

  /// Continuous tick coordinate of a domain value (not rounded).
  double to_ticks(Axis a, double v) const {
    const double lo = a == Axis::x ? domain_.x0 : domain_.y0;
    const double hi = a == Axis::x ? domain_.x1 : domain_.y1;
    if (v == hi) return static_cast<double>(total());
    return (v - lo) / (hi - lo) * static_cast<double>(total());
  }

  /// Exact tick for a domain value that lies on the dyadic knot lattice.
  Tick exact_tick(Axis a, double v) const {
    const double t = to_ticks(a, v);
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-6 || r < 0 || r > static_cast<double>(total()))
      throw std::invalid_argument("KnotGrid: value is not on the dyadic knot lattice of the domain");
    return static_cast<Tick>(r);
  }

  Rect to_domain(const TickBox& b) const {
    return {to_domain(Axis::x, b.x0), to_domain(Axis::x, b.x1), to_domain(Axis::y, b.y0),
            to_domain(Axis::y, b.y1)};
  }

 private:
  Rect domain_{};
  int cells_ = 1;
};

/// Uniform bucket grid over [0,W] x [0,H] tick space indexing closed boxes by integer id.
/// Ids are dense and chosen by the caller.
class BoxIndex {
 public:
  BoxIndex() = default;
  BoxIndex(Tick width, Tick height, int resolution)
      : width_(width), height_(height), res_(resolution),
        buckets_(static_cast<std::size_t>(resolution) * resolution) {}

  void insert(int id, const TickBox& box) {
    if (static_cast<std::size_t>(id) >= boxes_.size()) {
      boxes_.resize(id + 1);
      alive_.resize(id + 1, 0);
    }
    boxes_[id] = box;
    alive_[id] = 1;
    const auto [i0, i1, j0, j1] = range(box);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[j * res_ + i].push_back(id);
  }

  void erase(int id) {
    const auto [i0, i1, j0, j1] = range(boxes_[id]);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        auto& b = buckets_[j * res_ + i];
        auto it = std::find(b.begin(), b.end(), id);
        *it = b.back();
        b.pop_back();
      }
    alive_[id] = 0;
  }

  const TickBox& box(int id) const { return boxes_[id]; }

  /// Calls f(id, box) once for every indexed box whose bucket range meets the closed query
  /// box. Callers filter for the exact geometric predicate they need.
  template <class F>
  void visit(const TickBox& query, F&& f) const {
    const auto [qi0, qi1, qj0, qj1] = range(query);
    if (qi0 == qi1 && qj0 == qj1) {
      for (int id : buckets_[qj0 * res_ + qi0]) f(id, boxes_[id]);
      return;
    }
    for (int j = qj0; j <= qj1; ++j)
      for (int i = qi0; i <= qi1; ++i)
        for (int id : buckets_[j * res_ + i]) {
          const auto [bi0, bi1, bj0, bj1] = range(boxes_[id]);
          // Report each box only from its first bucket inside the query range.
          if (i == std::max(bi0, qi0) && j == std::max(bj0, qj0)) f(id, boxes_[id]);
        }
  }

 private:
  struct Range {
    int i0, i1, j0, j1;
  };
  int bucket(Tick t, Tick extent) const {
    const auto b = static_cast<int>((static_cast<__int128>(std::clamp<Tick>(t, 0, extent)) * res_) / extent);
    return std::min(b, res_ - 1);
  }
  Range range(const TickBox& b) const {
    return {bucket(b.x0, width_), bucket(b.x1, width_), bucket(b.y0, height_), bucket(b.y1, height_)};
  }

  Tick width_ = 1, height_ = 1;
  int res_ = 1;
  std::vector<std::vector<int>> buckets_;
  std::vector<TickBox> boxes_;
  std::vector<char> alive_;
};

}  // namespace lrqi
