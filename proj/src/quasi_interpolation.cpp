#include "lrqi/quasi_interpolation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace lrqi {

void validate(const QIConfig& cfg) {
  if (cfg.degree.p1 < 1 || cfg.degree.p2 < 1 || cfg.degree.p1 > kMaxDegree || cfg.degree.p2 > kMaxDegree)
    throw std::invalid_argument("QIConfig: unsupported bidegree");
  if (!(cfg.mu >= 0)) throw std::invalid_argument("QIConfig: mu must be >= 0");
  if (cfg.m < 1) throw std::invalid_argument("QIConfig: m must be >= 1");
  if (!(cfg.kappa_max > 1)) throw std::invalid_argument("QIConfig: kappa_max must be > 1");
}

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double half_extent(double lo, double hi) {
  const double h = 0.5 * (hi - lo);
  return h > 0 ? h : 1.0;
}

// Coefficients a_r of prod_j (s - r_j) in increasing powers of s.
std::vector<double> monic_product(std::span<const double> roots) {
  std::vector<double> a{1.0};
  for (double r : roots) {
    std::vector<double> next(a.size() + 1, 0.0);
    for (std::size_t k = 0; k < a.size(); ++k) {
      next[k + 1] += a[k];
      next[k] -= r * a[k];
    }
    a = std::move(next);
  }
  return a;
}

bool in_span(double t, Tick lo, Tick hi, Tick total) {
  return t >= static_cast<double>(lo) && (t < static_cast<double>(hi) || (hi == total && t == static_cast<double>(hi)));
}

// Adds the moments of one point given in box-normalized coordinates.
void accumulate(Eigen::MatrixXd& mom, Eigen::MatrixXd& zmom, double xi, double eta, double z) {
  const int m1 = static_cast<int>(mom.rows()), m2 = static_cast<int>(mom.cols());
  const int n1 = static_cast<int>(zmom.rows()), n2 = static_cast<int>(zmom.cols());
  double px[2 * kMaxDegree + 1], py[2 * kMaxDegree + 1];
  px[0] = py[0] = 1.0;
  for (int i = 1; i < m1; ++i) px[i] = px[i - 1] * xi;
  for (int j = 1; j < m2; ++j) py[j] = py[j - 1] * eta;
  for (int b = 0; b < m2; ++b) {
    double* col = mom.col(b).data();
    for (int a = 0; a < m1; ++a) col[a] += px[a] * py[b];
  }
  for (int b = 0; b < n2; ++b) {
    const double zy = z * py[b];
    double* col = zmom.col(b).data();
    for (int a = 0; a < n1; ++a) col[a] += px[a] * zy;
  }
}

// T(k,i) = coefficient of s^i in (alpha s + beta)^k.
Eigen::MatrixXd shift_matrix(int n, double alpha, double beta) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  t(0, 0) = 1.0;
  for (int k = 1; k < n; ++k) {
    t(k, 0) = beta * t(k - 1, 0);
    for (int i = 1; i <= k; ++i) t(k, i) = alpha * t(k - 1, i - 1) + beta * t(k - 1, i);
  }
  return t;
}

}  // namespace

double LocalPolynomial::derivative(int kx, int ky, double x, double y) const {
  const double hx = half_extent(box.x0, box.x1), hy = half_extent(box.y0, box.y1);
  const double xi = (x - 0.5 * (box.x0 + box.x1)) / hx;
  const double eta = (y - 0.5 * (box.y0 + box.y1)) / hy;
  const int d1 = degree_x(), d2 = degree_y();
  if (kx > d1 || ky > d2) return 0.0;

  // Falling-factorial weighted powers: i!/(i-k)! t^(i-k).
  const auto dpow = [](int i, int k, double t) {
    double c = 1.0;
    for (int r = 0; r < k; ++r) c *= (i - r);
    return c * std::pow(t, i - k);
  };
  double sum = 0.0;
  for (int j = ky; j <= d2; ++j) {
    const double fy = dpow(j, ky, eta);
    for (int i = kx; i <= d1; ++i) sum += coef(i, j) * dpow(i, kx, xi) * fy;
  }
  return sum / (std::pow(hx, kx) * std::pow(hy, ky));
}

SupportPoints collect_support_points(const LRBasis& basis, int id, const LRMesh& mesh, const PointCloud& cloud,
                                     const DetectionGrid& index, int m) {
  if (cloud.empty()) throw std::invalid_argument("collect_support_points: empty cloud");
  SupportPoints out;
  out.ticks = basis.spline(id).knots.support();
  const KnotGrid& grid = mesh.grid();
  const Tick total = grid.total();
  while (true) {
    out.box = grid.to_domain(out.ticks);
    out.indices = index.points_in(cloud, out.box);
    std::erase_if(out.indices, [&](int i) {
      const auto& p = cloud.points[i];
      return !in_span(grid.to_ticks(Axis::x, p.x), out.ticks.x0, out.ticks.x1, total) ||
             !in_span(grid.to_ticks(Axis::y, p.y), out.ticks.y0, out.ticks.y1, total);
    });
    if (static_cast<int>(out.indices.size()) >= m) break;
    if (out.ticks == TickBox{0, total, 0, total}) break;
    out.ticks = mesh.grow_by_ring(out.ticks);
    out.enlarged = true;
  }
  return out;
}

LocalPolynomial local_ls_fit(std::span<const ScatterPoint> points, const Rect& box, const QIConfig& cfg) {
  if (points.empty()) throw std::invalid_argument("local_ls_fit: no points");
  const int p1 = cfg.degree.p1, p2 = cfg.degree.p2;
  const double hx = half_extent(box.x0, box.x1), hy = half_extent(box.y0, box.y1);
  const double cx = 0.5 * (box.x0 + box.x1), cy = 0.5 * (box.y0 + box.y1);
  Eigen::MatrixXd mom = Eigen::MatrixXd::Zero(2 * p1 + 1, 2 * p2 + 1);
  Eigen::MatrixXd zmom = Eigen::MatrixXd::Zero(p1 + 1, p2 + 1);
  for (const auto& p : points) accumulate(mom, zmom, (p.x - cx) / hx, (p.y - cy) / hy, p.z);
  return fit_moments(mom, zmom, box, cfg);
}

LocalPolynomial fit_moments(const Eigen::MatrixXd& mom, const Eigen::MatrixXd& zmom, const Rect& box,
                            const QIConfig& cfg) {
  const int p1 = cfg.degree.p1, p2 = cfg.degree.p2;
  const int n1 = p1 + 1, n2 = p2 + 1, nfull = n1 * n2;
  if (mom.rows() != 2 * p1 + 1 || mom.cols() != 2 * p2 + 1 || zmom.rows() != n1 || zmom.cols() != n2)
    throw std::invalid_argument("fit_moments: moment tables do not match the bidegree");
  if (!(mom(0, 0) > 0)) throw std::invalid_argument("fit_moments: no points");
  // The normal matrix of a tensor monomial basis is a Hankel arrangement of the moments.
  Eigen::MatrixXd g(nfull, nfull);
  Eigen::VectorXd rhs(nfull);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      rhs[i + n1 * j] = zmom(i, j);
      for (int l = 0; l < n2; ++l)
        for (int k = 0; k < n1; ++k) g(i + n1 * j, k + n1 * l) = mom(i + k, j + l);
    }

  int d1 = p1, d2 = p2;
  while (true) {
    std::vector<int> sub;
    for (int j = 0; j <= d2; ++j)
      for (int i = 0; i <= d1; ++i) sub.push_back(i + n1 * j);
    const int ns = static_cast<int>(sub.size());
    Eigen::MatrixXd gs(ns, ns);
    Eigen::VectorXd bs(ns);
    for (int a = 0; a < ns; ++a) {
      bs[a] = rhs[sub[a]];
      for (int b = 0; b < ns; ++b) gs(a, b) = g(sub[a], sub[b]);
    }
    gs.diagonal().array() += cfg.mu;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gs);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    const double kappa = lmin > 0 ? lmax / lmin : std::numeric_limits<double>::infinity();
    if (kappa <= cfg.kappa_max || (d1 == 0 && d2 == 0)) {
      Eigen::VectorXd inv = eig.eigenvalues();
      for (int k = 0; k < ns; ++k) inv[k] = inv[k] > 0 ? 1.0 / inv[k] : 0.0;
      const Eigen::VectorXd c =
          eig.eigenvectors() * (inv.asDiagonal() * (eig.eigenvectors().transpose() * bs));
      LocalPolynomial q;
      q.box = box;
      q.condition = kappa;
      q.coef.resize(d1 + 1, d2 + 1);
      for (int j = 0; j <= d2; ++j)
        for (int i = 0; i <= d1; ++i) q.coef(i, j) = c[i + (d1 + 1) * j];
      return q;
    }
    d1 = std::max(d1 - 1, 0);
    d2 = std::max(d2 - 1, 0);
  }
}

double dual_coefficient(const LRBasis& basis, int id, const LocalPolynomial& q) {
  const Bidegree deg = basis.bidegree();
  const LocalKnots& k = basis.spline(id).knots;
  const Point2 tau = basis.greville(id);
  const KnotGrid& grid = basis.grid();

  const auto psi = [&](const std::vector<Tick>& knots, int p, Axis a, double t) {
    std::vector<double> roots;
    for (int j = 1; j <= p; ++j) roots.push_back(grid.to_domain(a, knots[j]) - t);
    std::vector<double> c = monic_product(roots);
    // psi^(r)(tau) = r! c_r
    for (int r = 0; r <= p; ++r) c[r] *= factorial(r);
    return c;
  };
  const auto du = psi(k.u, deg.p1, Axis::x, tau.x);
  const auto dv = psi(k.v, deg.p2, Axis::y, tau.y);

  double sum = 0.0;
  for (int l = 0; l <= std::min(deg.p2, q.degree_y()); ++l)
    for (int kx = 0; kx <= std::min(deg.p1, q.degree_x()); ++kx) {
      const double sign = ((kx + l) % 2 == 0) ? 1.0 : -1.0;
      sum += sign * du[deg.p1 - kx] * dv[deg.p2 - l] * q.derivative(kx, l, tau.x, tau.y);
    }
  return sum / (factorial(deg.p1) * factorial(deg.p2));
}

std::size_t QIAssembler::KeyHash::operator()(const std::vector<Tick>& k) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (Tick t : k) h ^= static_cast<std::size_t>(t) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

namespace {

int index_resolution(std::size_t n) {
  return std::clamp(static_cast<int>(std::sqrt(static_cast<double>(n) / 8.0)), 2, 1024);
}

}  // namespace

MomentPyramid::MomentPyramid(const PointCloud& cloud, const KnotGrid& grid, Bidegree degree, int depth)
    : cells_(grid.cells()),
      depth_(depth),
      m1_(2 * degree.p1 + 1),
      m2_(2 * degree.p2 + 1),
      n1_(degree.p1 + 1),
      n2_(degree.p2 + 1),
      stride_(m1_ * m2_ + n1_ * n2_) {
  if (depth < 0 || (kTicksPerCell >> depth) < 2) throw std::invalid_argument("MomentPyramid: bad depth");
  const int nl = depth + 1;
  levels_.resize(static_cast<std::size_t>(nl) * nl);
  const auto count = [&](int a) { return static_cast<std::size_t>(cells_) << a; };
  const auto at = [&](int a, int b, std::size_t i, std::size_t j) {
    return levels_[a * nl + b].data() + (j * count(a) + i) * stride_;
  };
  for (int a = depth; a >= 0; --a)
    for (int b = depth; b >= 0; --b) levels_[a * nl + b].assign(count(a) * count(b) * stride_, 0.0);

  // Finest cells straight from the points, in cell-normalized coordinates.
  const double unit = static_cast<double>(kTicksPerCell >> depth);
  const std::size_t nf = count(depth);
  Eigen::MatrixXd mom(m1_, m2_), zmom(n1_, n2_);
  for (const auto& p : cloud.points) {
    const double tx = grid.to_ticks(Axis::x, p.x) / unit, ty = grid.to_ticks(Axis::y, p.y) / unit;
    const std::size_t i = std::min(static_cast<std::size_t>(std::max(tx, 0.0)), nf - 1);
    const std::size_t j = std::min(static_cast<std::size_t>(std::max(ty, 0.0)), nf - 1);
    double* c = at(depth, depth, i, j);
    Eigen::Map<Eigen::MatrixXd> cm(c, m1_, m2_), cz(c + m1_ * m2_, n1_, n2_);
    mom = cm;
    zmom = cz;
    accumulate(mom, zmom, 2.0 * (tx - i) - 1.0, 2.0 * (ty - j) - 1.0, p.z);
    cm = mom;
    cz = zmom;
  }

  // Coarser cells merge two children: along y while b < depth, else along x.
  const Eigen::MatrixXd lx[2] = {shift_matrix(m1_, 0.5, -0.5), shift_matrix(m1_, 0.5, 0.5)};
  const Eigen::MatrixXd ly[2] = {shift_matrix(m2_, 0.5, -0.5), shift_matrix(m2_, 0.5, 0.5)};
  for (int a = depth; a >= 0; --a)
    for (int b = depth; b >= 0; --b) {
      if (a == depth && b == depth) continue;
      const bool along_y = b < depth;
      for (std::size_t j = 0; j < count(b); ++j)
        for (std::size_t i = 0; i < count(a); ++i) {
          double* c = at(a, b, i, j);
          Eigen::Map<Eigen::MatrixXd> pm(c, m1_, m2_), pz(c + m1_ * m2_, n1_, n2_);
          for (int h = 0; h < 2; ++h) {
            const double* d = along_y ? at(a, b + 1, i, 2 * j + h) : at(a + 1, b, 2 * i + h, j);
            Eigen::Map<const Eigen::MatrixXd> cm(d, m1_, m2_), cz(d + m1_ * m2_, n1_, n2_);
            if (along_y) {
              pm.noalias() += cm * ly[h].transpose();
              pz.noalias() += cz * ly[h].topLeftCorner(n2_, n2_).transpose();
            } else {
              pm.noalias() += lx[h] * cm;
              pz.noalias() += lx[h].topLeftCorner(n1_, n1_) * cz;
            }
          }
        }
    }
}

const double* MomentPyramid::cell(int a, int b, Tick i, Tick j) const {
  const std::size_t nx = static_cast<std::size_t>(cells_) << a;
  return levels_[a * (depth_ + 1) + b].data() + (static_cast<std::size_t>(j) * nx + i) * stride_;
}

bool MomentPyramid::decompose(Tick lo, Tick hi, std::vector<Segment>& out) const {
  const Tick unit = kTicksPerCell >> depth_;
  if (lo % unit != 0 || hi % unit != 0) return false;
  out.clear();
  for (Tick pos = lo; pos < hi;) {
    int level = 0;
    Tick size = kTicksPerCell;
    while (pos % size != 0 || pos + size > hi) {
      ++level;
      size >>= 1;
    }
    out.push_back({level, pos / size, pos, size});
    pos += size;
  }
  return true;
}

bool MomentPyramid::moments(const TickBox& box, Eigen::MatrixXd& mom, Eigen::MatrixXd& zmom) const {
  if (depth_ < 0) return false;
  std::vector<Segment> sx, sy;
  if (!decompose(box.x0, box.x1, sx) || !decompose(box.y0, box.y1, sy)) return false;
  mom.setZero(m1_, m2_);
  zmom.setZero(n1_, n2_);
  const double hbx = 0.5 * static_cast<double>(box.x1 - box.x0), hby = 0.5 * static_cast<double>(box.y1 - box.y0);
  const double cbx = 0.5 * static_cast<double>(box.x0 + box.x1), cby = 0.5 * static_cast<double>(box.y0 + box.y1);
  const auto shift = [](int n, const Segment& s, double c, double h) {
    const double hs = 0.5 * static_cast<double>(s.size);
    return shift_matrix(n, hs / h, (static_cast<double>(s.lo) + hs - c) / h);
  };
  std::vector<Eigen::MatrixXd> ty;
  for (const auto& s : sy) ty.push_back(shift(m2_, s, cby, hby).transpose());
  Eigen::MatrixXd tmp(m1_, m2_), tz(n1_, n2_);
  for (const auto& u : sx) {
    const Eigen::MatrixXd tx = shift(m1_, u, cbx, hbx);
    for (std::size_t k = 0; k < sy.size(); ++k) {
      const double* d = cell(u.level, sy[k].level, u.index, sy[k].index);
      Eigen::Map<const Eigen::MatrixXd> cm(d, m1_, m2_), cz(d + m1_ * m2_, n1_, n2_);
      if (cm(0, 0) == 0) continue;
      tmp.noalias() = tx * cm;
      mom.noalias() += tmp * ty[k];
      tz.noalias() = tx.topLeftCorner(n1_, n1_) * cz;
      zmom.noalias() += tz * ty[k].topLeftCorner(n2_, n2_);
    }
  }
  return true;
}

QIAssembler::QIAssembler(const PointCloud& cloud, const QIConfig& cfg)
    : cloud_(&cloud), cfg_(cfg), index_(cloud, index_resolution(cloud.size()), index_resolution(cloud.size())) {
  validate(cfg);
}

void QIAssembler::prepare(const KnotGrid& grid) {
  if (!tx_.empty() && grid.cells() == grid_.cells() && grid.domain().x0 == grid_.domain().x0 &&
      grid.domain().x1 == grid_.domain().x1 && grid.domain().y0 == grid_.domain().y0 &&
      grid.domain().y1 == grid_.domain().y1)
    return;
  grid_ = grid;
  tx_.resize(cloud_->size());
  ty_.resize(cloud_->size());
  for (std::size_t i = 0; i < cloud_->size(); ++i) {
    tx_[i] = grid.to_ticks(Axis::x, cloud_->points[i].x);
    ty_[i] = grid.to_ticks(Axis::y, cloud_->points[i].y);
  }
  // Deepest level whose finest cells still hold about 16 points each.
  const double per_axis = std::sqrt(static_cast<double>(cloud_->size()) / 16.0) / grid.cells();
  const int depth = per_axis >= 1 ? std::min(6, static_cast<int>(std::floor(std::log2(per_axis)))) : -1;
  pyramid_ = depth >= 0 ? MomentPyramid(*cloud_, grid, cfg_.degree, depth) : MomentPyramid();
}

bool QIAssembler::direct_moments(const TickBox& box, const KnotGrid& grid, Eigen::MatrixXd& mom,
                                 Eigen::MatrixXd& zmom) const {
  const int p1 = cfg_.degree.p1, p2 = cfg_.degree.p2;
  mom.setZero(2 * p1 + 1, 2 * p2 + 1);
  zmom.setZero(p1 + 1, p2 + 1);
  const Tick total = grid.total();
  const double hx = 0.5 * static_cast<double>(box.x1 - box.x0), hy = 0.5 * static_cast<double>(box.y1 - box.y0);
  const double cx = 0.5 * static_cast<double>(box.x0 + box.x1), cy = 0.5 * static_cast<double>(box.y0 + box.y1);
  for (int i : index_.points_in(*cloud_, grid.to_domain(box))) {
    if (!in_span(tx_[i], box.x0, box.x1, total) || !in_span(ty_[i], box.y0, box.y1, total)) continue;
    accumulate(mom, zmom, (tx_[i] - cx) / hx, (ty_[i] - cy) / hy, cloud_->points[i].z);
  }
  return mom(0, 0) > 0;
}

void QIAssembler::assemble(LRSpline& spline) {
  LRBasis& basis = spline.basis;
  if (!(basis.bidegree() == cfg_.degree)) throw std::invalid_argument("assemble_qi: basis and config bidegree differ");
  if (cloud_->empty()) throw std::invalid_argument("assemble_qi: empty cloud");
  const KnotGrid& grid = spline.mesh.grid();
  prepare(grid);
  const TickBox whole{0, grid.total(), 0, grid.total()};
  Eigen::MatrixXd mom, zmom;
  for (int id : basis.ids()) {
    const LocalKnots& k = basis.spline(id).knots;
    std::vector<Tick> key(k.u);
    key.insert(key.end(), k.v.begin(), k.v.end());
    if (const auto it = cache_.find(key); it != cache_.end()) {
      basis.set_coefficient(id, it->second);
      continue;
    }
    TickBox box = k.support();
    bool enlarged = false;
    while (true) {
      if (!pyramid_.moments(box, mom, zmom)) direct_moments(box, grid, mom, zmom);
      if (mom(0, 0) >= cfg_.m || box == whole) break;
      box = spline.mesh.grow_by_ring(box);
      enlarged = true;
    }
    const LocalPolynomial q = fit_moments(mom, zmom, grid.to_domain(box), cfg_);
    const double c = dual_coefficient(basis, id, q);
    ++fits_;
    basis.set_coefficient(id, c);
    if (!enlarged) cache_.emplace(std::move(key), c);
  }
}

Surface assemble_qi(const LRSpline& spline, const PointCloud& cloud, const QIConfig& cfg) {
  Surface s{spline, cfg};
  QIAssembler(cloud, cfg).assemble(s.spline);
  return s;
}

double eval_surface(const Surface& s, double x, double y) { return s.spline.basis.evaluate(x, y); }

double rmse(const LRBasis& basis, const PointCloud& cloud) {
  if (cloud.empty()) throw std::invalid_argument("rmse: empty cloud");
  double sum = 0.0;
  for (const auto& p : cloud.points) {
    const double r = basis.evaluate(p.x, p.y) - p.z;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(cloud.size()));
}

double rmse(const Surface& s, const PointCloud& cloud) { return rmse(s.spline.basis, cloud); }

}  // namespace lrqi
