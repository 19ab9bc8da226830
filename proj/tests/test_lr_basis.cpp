#include <doctest.h>

#include <array>
#include <random>
#include <vector>

#include "lrqi/lr_basis.hpp"

using namespace lrqi;

namespace {

// Independent oracle: the truncated-power/divided-difference definition of a B-spline,
// valid for simple knots.
double bspline_divided_difference(const std::vector<double>& t, double x) {
  const int p = static_cast<int>(t.size()) - 2;
  std::vector<double> f(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) f[i] = std::pow(std::max(t[i] - x, 0.0), p);
  for (int k = 1; k < static_cast<int>(t.size()); ++k)
    for (int i = static_cast<int>(t.size()) - 1; i >= k; --i) f[i] = (f[i] - f[i - 1]) / (t[i] - t[i - k]);
  return (t.back() - t.front()) * f.back();
}

double sum_gamma(const LRBasis& b, double x, double y) {
  double s = 0;
  for (const auto& v : b.eval(x, y)) s += v.value;
  return s;
}

void random_refinement(LRSpline& s, std::mt19937& rng, int count) {
  for (int k = 0; k < count; ++k) {
    const auto els = s.mesh.elements();
    const auto& e = els[std::uniform_int_distribution<std::size_t>(0, els.size() - 1)(rng)];
    const Axis a = rng() % 2 ? Axis::x : Axis::y;
    if (e.ticks.extent(a) < 4) continue;
    const Tick mid = (e.ticks.lo(a) + e.ticks.hi(a)) / 2;
    // Extend over the transversal support of the overlapping splines so the line splits one.
    Tick lo = e.ticks.lo(other(a)), hi = e.ticks.hi(other(a));
    for (int id : s.basis.overlapping(e.ticks)) {
      lo = std::min(lo, s.basis.spline(id).knots.support().lo(other(a)));
      hi = std::max(hi, s.basis.spline(id).knots.support().hi(other(a)));
    }
    s.insert({a, mid, lo, hi, 1});
  }
}

}  // namespace

TEST_CASE("univariate B-spline values") {
  const std::array<double, 4> k1{0, 0, 0, 1};
  CHECK(bspline_eval_1d<double>(k1, 2, 0.5) == doctest::Approx(0.25));
  const std::array<double, 4> k2{0, 1, 2, 3};
  CHECK(bspline_eval_1d<double>(k2, 2, 1.5) == doctest::Approx(0.75));
  CHECK(bspline_eval_1d<double>(k2, 2, 3.0) == 0.0);
  const std::array<double, 4> k3{0, 1, 1, 1};
  CHECK(bspline_eval_1d<double>(k3, 2, 1.0) == 0.0);
  CHECK(bspline_eval_1d<double>(k3, 2, 1.0, true) == doctest::Approx(1.0));
  const std::array<double, 3> bad{1, 0, 2};
  CHECK_THROWS_AS(bspline_eval_1d<double>(bad, 1, 0.5), std::invalid_argument);
}

TEST_CASE("Cox-de Boor agrees with divided differences on simple knots") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> t(5);
    for (auto& v : t) v = u(rng);
    std::sort(t.begin(), t.end());
    for (int j = 0; j < 20; ++j) {
      const double x = t.front() + (t.back() - t.front()) * u(rng);
      CHECK(bspline_value<double>(t, 3, x) == doctest::Approx(bspline_divided_difference(t, x)).epsilon(1e-8));
    }
  }
}

TEST_CASE("knot insertion weights") {
  const std::array<double, 3> k{0, 1, 2};
  const auto s = split_knots<double>(k, 1, 1.5);
  CHECK(s.alpha_left == doctest::Approx(1.0));
  CHECK(s.alpha_right == doctest::Approx(0.5));
  CHECK(s.left == std::vector<double>{0, 1, 1.5});
  CHECK(s.right == std::vector<double>{1, 1.5, 2});
  CHECK_THROWS_AS(split_knots<double>(k, 1, 2.5), std::invalid_argument);
  const std::array<double, 3> dbl{0, 1, 1};
  CHECK_THROWS_AS(split_knots<double>(dbl, 1, 1.0), std::invalid_argument);
}

TEST_CASE("knot insertion reproduces the parent") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> t(5);
    for (auto& v : t) v = u(rng);
    std::sort(t.begin(), t.end());
    const double h = t.front() + (t.back() - t.front()) * (0.05 + 0.9 * u(rng));
    const auto s = split_knots<double>(t, 3, h);
    for (int j = 0; j < 10; ++j) {
      const double x = t.front() + (t.back() - t.front()) * u(rng);
      const double parent = bspline_value<double>(t, 3, x);
      const double kids = s.alpha_left * bspline_value<double>(s.left, 3, x) +
                          s.alpha_right * bspline_value<double>(s.right, 3, x);
      CHECK(kids == doctest::Approx(parent).epsilon(1e-12));
    }
  }
}

TEST_CASE("tensor basis dimension") {
  const auto s = LRSpline::tensor(Rect{0, 1, 0, 1}, 2, {3, 3});
  CHECK(s.basis.size() == 25);
  CHECK(LRSpline::tensor(Rect{0, 1, 0, 1}, 2, {2, 2}).basis.size() == 16);
  CHECK(LRSpline::tensor(Rect{0, 1, 0, 1}, 8, {3, 3}).basis.size() == 121);
}

TEST_CASE("a full-span line adds one column of splines") {
  auto s = LRSpline::tensor(Rect{0, 1, 0, 1}, 2, {3, 3});
  s.insert(s.mesh.line(Axis::x, 0.25, 0.0, 1.0));
  CHECK(s.basis.size() == 30);
}

TEST_CASE("partition of unity after random insertions") {
  std::mt19937 rng(11);
  for (Bidegree d : {Bidegree{2, 2}, Bidegree{3, 3}, Bidegree{2, 3}}) {
    auto s = LRSpline::tensor(Rect{-4, 4, -4, 4}, 2, d);
    random_refinement(s, rng, 60);
    std::uniform_real_distribution<double> u(-4, 4);
    for (int k = 0; k < 500; ++k) {
      const double x = u(rng), y = u(rng);
      CHECK(sum_gamma(s.basis, x, y) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(sum_gamma(s.basis, 4.0, 4.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sum_gamma(s.basis, -4.0, 4.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("refinement preserves the represented function") {
  std::mt19937 rng(13);
  auto s = LRSpline::tensor(Rect{0, 1, 0, 1}, 2, {3, 3});
  random_refinement(s, rng, 20);
  std::normal_distribution<double> g;
  for (int id : s.basis.ids()) s.basis.set_coefficient(id, g(rng));
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::pair<double, double>> probes(300);
  for (auto& p : probes) p = {u(rng), u(rng)};
  std::vector<double> before;
  for (auto [x, y] : probes) before.push_back(s.basis.evaluate(x, y));
  random_refinement(s, rng, 40);
  for (std::size_t k = 0; k < probes.size(); ++k)
    CHECK(s.basis.evaluate(probes[k].first, probes[k].second) == doctest::Approx(before[k]).epsilon(1e-11));
}

TEST_CASE("every spline has minimal support after refinement") {
  std::mt19937 rng(17);
  auto s = LRSpline::tensor(Rect{0, 1, 0, 1}, 2, {2, 2});
  random_refinement(s, rng, 50);
  for (int id : s.basis.ids()) {
    const auto& k = s.basis.spline(id).knots;
    for (Axis a : {Axis::x, Axis::y}) {
      // No mesh line crosses the support strictly between consecutive local knots.
      const auto& kv = k.along(a);
      const Axis t = other(a);
      for (Tick pos : s.mesh.line_positions(a, kv.front(), kv.back())) {
        if (std::find(kv.begin(), kv.end(), pos) != kv.end()) continue;
        CHECK(s.mesh.multiplicity_over(a, pos, k.support().lo(t), k.support().hi(t)) == 0);
      }
    }
  }
}

TEST_CASE("scaled values and evaluation agree") {
  auto s = LRSpline::tensor(Rect{0, 1, 0, 1}, 2, {3, 3});
  s.insert(s.mesh.line(Axis::x, 0.25, 0.0, 1.0));
  for (int id : s.basis.ids()) s.basis.set_coefficient(id, id * 0.1);
  double sum = 0;
  for (int id : s.basis.ids()) sum += s.basis.spline(id).coefficient * s.basis.scaled_value(id, 0.3, 0.7);
  CHECK(s.basis.evaluate(0.3, 0.7) == doctest::Approx(sum));
  CHECK_THROWS(s.basis.evaluate(1.1, 0.5));
}

TEST_CASE("greville points of the tensor basis") {
  const auto s = LRSpline::tensor(Rect{0, 1, 0, 1}, 2, {2, 2});
  std::vector<double> xs;
  for (int id : s.basis.ids()) xs.push_back(s.basis.greville(id).x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  // Knots 0 0 0 .5 1 1 1 give averages 0, .25, .75, 1.
  REQUIRE(xs.size() == 4);
  CHECK(xs[0] == doctest::Approx(0.0));
  CHECK(xs[1] == doctest::Approx(0.25));
  CHECK(xs[2] == doctest::Approx(0.75));
  CHECK(xs[3] == doctest::Approx(1.0));
}
