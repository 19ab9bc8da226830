#pragma once

#include <Eigen/Core>
#include <span>
#include <unordered_map>
#include <vector>

#include "lrqi/fault_detection.hpp"
#include "lrqi/lr_basis.hpp"

namespace lrqi {

struct QIConfig {
  Bidegree degree{3, 3};
  double mu = 1e-6;
  int m = 5;
  double kappa_max = 1e5;
};

void validate(const QIConfig& cfg);

/// Tensor polynomial sum c(i,j) xi^i eta^j in coordinates normalized to [-1,1]^2 over `box`.
struct LocalPolynomial {
  Rect box;
  Eigen::MatrixXd coef;  // (d1 + 1) x (d2 + 1)
  double condition = 1.0;

  int degree_x() const { return static_cast<int>(coef.rows()) - 1; }
  int degree_y() const { return static_cast<int>(coef.cols()) - 1; }
  double value(double x, double y) const { return derivative(0, 0, x, y); }
  /// d^kx/dx^kx d^ky/dy^ky in domain coordinates.
  double derivative(int kx, int ky, double x, double y) const;
};

struct SupportPoints {
  std::vector<int> indices;
  TickBox ticks;
  Rect box;
  bool enlarged = false;
};

/// Cloud points inside supp(B), taken half-open and closed at the upper domain edge so that
/// cells of the knot lattice partition the cloud. Grows the box ring by ring (elements of `mesh`) until it holds
/// at least m points or covers the domain.
SupportPoints collect_support_points(const LRBasis& basis, int id, const LRMesh& mesh, const PointCloud& cloud,
                                     const DetectionGrid& index, int m);

/// Ridge least-squares fit of the full bidegree; degrees drop by one per direction while the
/// condition number of the regularized normal matrix exceeds kappa_max.
LocalPolynomial local_ls_fit(std::span<const ScatterPoint> points, const Rect& box, const QIConfig& cfg);

/// Same fit from precomputed moments in coordinates normalized to `box`:
/// mom(a,b) = sum xi^a eta^b for a <= 2 p1, b <= 2 p2 and zmom(a,b) = sum z xi^a eta^b for a <= p1, b <= p2.
LocalPolynomial fit_moments(const Eigen::MatrixXd& mom, const Eigen::MatrixXd& zmom, const Rect& box,
                            const QIConfig& cfg);

/// Moment tables of a cloud on the dyadic cells of the knot lattice, for every pair of x and y
/// levels up to `depth`. Moments over a lattice-aligned box are assembled from a few cells
/// instead of the points. Cells are half-open and closed at the upper domain edge.
class MomentPyramid {
 public:
  MomentPyramid() = default;
  MomentPyramid(const PointCloud& cloud, const KnotGrid& grid, Bidegree degree, int depth);

  int depth() const { return depth_; }
  /// Moments of the points in `box`, normalized to the box. False if the box edges are not on
  /// the finest cell lattice.
  bool moments(const TickBox& box, Eigen::MatrixXd& mom, Eigen::MatrixXd& zmom) const;

 private:
  struct Segment {
    int level;
    Tick index, lo, size;
  };
  bool decompose(Tick lo, Tick hi, std::vector<Segment>& out) const;
  const double* cell(int a, int b, Tick i, Tick j) const;

  int cells_ = 0, depth_ = -1, m1_ = 0, m2_ = 0, n1_ = 0, n2_ = 0, stride_ = 0;
  std::vector<std::vector<double>> levels_;  // index a * (depth + 1) + b
};

/// Tensor de Boor-Fix functional of B applied to q at the Greville point of B.
double dual_coefficient(const LRBasis& basis, int id, const LocalPolynomial& q);

struct Surface {
  LRSpline spline;
  QIConfig config;
};

/// Computes quasi-interpolation coefficients in place. Coefficients of splines whose support
/// needed no enlargement are memoized by knot vector across calls.
class QIAssembler {
 public:
  QIAssembler(const PointCloud& cloud, const QIConfig& cfg);

  void assemble(LRSpline& spline);
  const DetectionGrid& index() const { return index_; }
  std::size_t fits_computed() const { return fits_; }

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<Tick>& k) const noexcept;
  };

  void prepare(const KnotGrid& grid);
  bool direct_moments(const TickBox& box, const KnotGrid& grid, Eigen::MatrixXd& mom, Eigen::MatrixXd& zmom) const;

  const PointCloud* cloud_;
  QIConfig cfg_;
  DetectionGrid index_;
  KnotGrid grid_;
  std::vector<double> tx_, ty_;  // point tick coordinates
  MomentPyramid pyramid_;
  std::unordered_map<std::vector<Tick>, double, KeyHash> cache_;
  std::size_t fits_ = 0;
};

Surface assemble_qi(const LRSpline& spline, const PointCloud& cloud, const QIConfig& cfg);

double eval_surface(const Surface& s, double x, double y);
double rmse(const Surface& s, const PointCloud& cloud);
double rmse(const LRBasis& basis, const PointCloud& cloud);

}  // namespace lrqi
