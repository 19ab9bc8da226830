#pragma once

#include <iosfwd>
#include <map>
#include <vector>

#include "lrqi/knot_grid.hpp"

namespace lrqi {

struct Bidegree {
  int p1 = 3;
  int p2 = 3;
  int along(Axis a) const { return a == Axis::x ? p1 : p2; }
  friend bool operator==(const Bidegree&, const Bidegree&) = default;
};

/// Axis-aligned meshline in tick coordinates. `normal` is the axis the line is constant in:
/// Axis::x means a vertical line x = fixed spanning [start, end] in y.
struct MeshLine {
  Axis normal = Axis::x;
  Tick fixed = 0;
  Tick start = 0;
  Tick end = 0;
  int multiplicity = 1;
  friend bool operator==(const MeshLine&, const MeshLine&) = default;
};

struct Element {
  TickBox ticks;
  Rect box;
  int level_x = 0;
  int level_y = 0;
  int level(Axis a) const { return a == Axis::x ? level_x : level_y; }
};

/// Box partition of a rectangle by meshlines with multiplicities. Collinear overlapping
/// lines are kept merged (multiplicity = max over the shared extent) and elements are
/// maintained incrementally.
class LRMesh {
 public:
  LRMesh() = default;

  static LRMesh tensor(const Rect& domain, int cells_per_dir, Bidegree degree);

  const KnotGrid& grid() const { return grid_; }
  const Rect& domain() const { return grid_.domain(); }
  Bidegree bidegree() const { return degree_; }

  /// Builds a MeshLine from domain coordinates; values must lie on the dyadic lattice.
  MeshLine line(Axis normal, double fixed, double start, double end, int multiplicity = 1) const;

  /// Merges a meshline and splits the elements it crosses. Throws std::invalid_argument on a
  /// multiplicity overflow, a line outside the domain, or an endpoint that does not rest on
  /// a transversal line or the boundary.
  void insert(const MeshLine& line);

  std::vector<Element> elements() const;
  std::size_t element_count() const { return element_count_; }
  Element element(int id) const;

  /// Element whose closure contains (x, y); ties on shared edges go to the lower-left element.
  Element find_element(double x, double y) const;

  /// Ids of elements whose interior meets the interior of `box`.
  std::vector<int> elements_overlapping(const TickBox& box) const;

  /// Bounding box of all elements meeting the closed box (one ring of growth).
  TickBox grow_by_ring(const TickBox& box) const;

  /// Minimum multiplicity of the lines with the given normal at `fixed` over [start, end];
  /// zero if any part of the interval is uncovered.
  int multiplicity_over(Axis normal, Tick fixed, Tick start, Tick end) const;

  /// Fixed coordinates of lines with the given normal strictly inside (lo, hi).
  std::vector<Tick> line_positions(Axis normal, Tick lo, Tick hi) const;

  /// Canonical merged line set.
  std::vector<MeshLine> lines() const;

  int level_of_extent(Tick extent) const;

  void write(std::ostream& os) const;

 private:
  struct Segment {
    Tick end;
    int mult;
  };
  using SegmentSet = std::map<Tick, Segment>;  // start -> (end, multiplicity), disjoint

  void merge(const MeshLine& line);
  bool endpoint_supported(Axis normal, Tick fixed, Tick at) const;
  void add_element(const TickBox& b);
  Element make_element(const TickBox& b) const;

  KnotGrid grid_;
  Bidegree degree_;
  std::map<Tick, SegmentSet> lines_[2];
  BoxIndex index_;
  std::vector<int> free_ids_;
  std::size_t element_count_ = 0;
  int id_capacity_ = 0;
};

/// Value-semantics insertion: returns the refined copy.
LRMesh insert_meshline(const LRMesh& mesh, const MeshLine& line);

}  // namespace lrqi
