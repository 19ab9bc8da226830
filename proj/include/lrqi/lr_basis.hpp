#pragma once

#include <iosfwd>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lrqi/bspline.hpp"
#include "lrqi/lr_mesh.hpp"

namespace lrqi {

struct LocalKnots {
  std::vector<Tick> u;  // p1 + 2 values
  std::vector<Tick> v;  // p2 + 2 values

  const std::vector<Tick>& along(Axis a) const { return a == Axis::x ? u : v; }
  std::vector<Tick>& along(Axis a) { return a == Axis::x ? u : v; }
  TickBox support() const { return {u.front(), u.back(), v.front(), v.back()}; }
  friend bool operator==(const LocalKnots&, const LocalKnots&) = default;
};

struct LRBSpline {
  LocalKnots knots;
  double gamma = 1.0;
  double coefficient = 0.0;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Scaled value gamma_B * B(x, y) of one basis function at a point.
struct BasisValue {
  int id;
  double value;
};

/// Result of splitting an LR B-spline with one knot: B = alpha_first * first + alpha_second * second.
struct SplineSplit {
  LocalKnots first;
  double alpha_first;
  LocalKnots second;
  double alpha_second;
};

SplineSplit split_by_knot_insertion(const LocalKnots& knots, Bidegree degree, Axis direction, Tick knot);

/// Collection of LR B-splines living on an LRMesh. Splines are addressed by stable integer
/// ids; ids of removed splines may be reused.
class LRBasis {
 public:
  LRBasis() = default;

  /// Tensor-product basis of a mesh whose lines all span the full domain.
  static LRBasis tensor(const LRMesh& mesh);

  Bidegree bidegree() const { return degree_; }
  const KnotGrid& grid() const { return grid_; }
  std::size_t size() const { return count_; }

  /// Live ids in increasing order.
  std::vector<int> ids() const;
  bool alive(int id) const { return id >= 0 && static_cast<std::size_t>(id) < alive_.size() && alive_[id]; }
  const LRBSpline& spline(int id) const { return slots_[id]; }
  void set_coefficient(int id, double c) { slots_[id].coefficient = c; }
  int find(const LocalKnots& knots) const;

  /// Splits every spline the merged line traverses, then cascades until every spline has
  /// minimal support on `mesh`. Scaling weights and coefficients are handed down so the
  /// represented spline is unchanged.
  void update(const LRMesh& mesh, const MeshLine& inserted);

  /// Nonzero scaled basis values at a domain point.
  std::vector<BasisValue> eval(double x, double y) const;
  /// Sum of coefficient * gamma * B at a domain point.
  double evaluate(double x, double y) const;
  /// gamma_B * B(x, y) for one spline.
  double scaled_value(int id, double x, double y) const;

  /// Ids whose support interior meets the interior of `box`.
  std::vector<int> overlapping(const TickBox& box) const;

  Point2 greville(int id) const;
  Rect support(int id) const { return grid_.to_domain(slots_[id].knots.support()); }

  void write(std::ostream& os) const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<Tick>& k) const noexcept;
  };
  static std::vector<Tick> key(const LocalKnots& k);

  int add(LocalKnots knots, double gamma, double coefficient);
  void remove(int id);
  bool split_if_traversed(const LRMesh& mesh, int id, Axis normal, Tick fixed, std::vector<int>& work);
  bool split_against_mesh(const LRMesh& mesh, int id, std::vector<int>& work);
  void split(int id, Axis direction, Tick knot, std::vector<int>& work);
  double value_ticks(const LRBSpline& s, double tx, double ty) const;

  KnotGrid grid_;
  Bidegree degree_;
  std::vector<LRBSpline> slots_;
  std::vector<char> alive_;
  std::vector<int> free_ids_;
  std::size_t count_ = 0;
  std::unordered_map<std::vector<Tick>, int, KeyHash> by_knots_;
  BoxIndex index_;
};

/// Mesh and basis kept in sync.
struct LRSpline {
  LRMesh mesh;
  LRBasis basis;

  static LRSpline tensor(const Rect& domain, int cells_per_dir, Bidegree degree);
  void insert(const MeshLine& line);
};

}  // namespace lrqi
