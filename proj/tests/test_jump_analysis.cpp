#include <doctest.h>

#include <random>

#include "lrqi/jump_analysis.hpp"

using namespace lrqi;

namespace {

FaultPoint vertical_point(double x, double y, FaultKind kind) {
  FaultPoint p;
  p.location = {x, y};
  p.direction = {0.0, 1.0};
  p.kind = kind;
  return p;
}

JumpConfig small_grid() {
  JumpConfig c;
  c.grid_nx = c.grid_ny = 32;
  return c;
}

}  // namespace

TEST_CASE("value jump of a planar step") {
  const auto cloud = generate_halton_cloud(50000, Rect{0, 1, 0, 1},
                                           [](double x, double y) { return 0.3 * y + (x > 0.5 ? 1.2 : 0.0) + x; });
  const auto e = estimate_jump(vertical_point(0.5, 0.5, FaultKind::ordinary), cloud, small_grid());
  CHECK(e.reliable);
  CHECK(e.magnitude == doctest::Approx(1.2).epsilon(1e-9));
  CHECK_THROWS_AS(estimate_gradient_jump(vertical_point(0.5, 0.5, FaultKind::ordinary), cloud, small_grid()),
                  std::invalid_argument);
}

TEST_CASE("gradient jump of a planar kink") {
  // Slopes (1, 0.5) and (-2, 0.5): the gradient difference has norm 3.
  const auto cloud = generate_halton_cloud(
      50000, Rect{0, 1, 0, 1}, [](double x, double y) { return 0.5 * y + (x > 0.4 ? -2 * (x - 0.4) : x - 0.4); });
  const auto e = estimate_gradient_jump(vertical_point(0.4, 0.3, FaultKind::gradient), cloud, small_grid());
  CHECK(e.reliable);
  CHECK(e.magnitude == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("sparse neighbourhoods are unreliable") {
  PointCloud cloud;
  cloud.domain = Rect{0, 1, 0, 1};
  cloud.points = {{0.1, 0.1, 0}, {0.9, 0.9, 1}, {0.45, 0.5, 0}, {0.55, 0.5, 1}};
  const auto e = estimate_jump(vertical_point(0.5, 0.5, FaultKind::ordinary), cloud, small_grid());
  CHECK_FALSE(e.reliable);
}

TEST_CASE("classification binning") {
  CHECK(classify_values({0.0, 0.5, 1.0}, 1, 10) == std::vector<int>{1, 6, 10});  // 5.5 rounds up
  CHECK(classify_values({2.0, 2.0}, 3, 10) == std::vector<int>{10, 10});
  CHECK(classify_values({}, 1, 10).empty());
  CHECK(classify_values({0.1, 0.3}, 9, 10) == std::vector<int>{9, 10});
}

TEST_CASE("classification invariants on random populations") {
  std::mt19937 rng(123);
  std::uniform_int_distribution<int> size(1, 60), lbar(1, 10);
  std::lognormal_distribution<double> mag(0.0, 1.5);
  std::uniform_real_distribution<double> scale(0.1, 10.0), shift(-5.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int L = 10, Lb = lbar(rng);
    std::vector<double> j(size(rng));
    for (auto& v : j) v = mag(rng);
    const auto c = classify_values(j, Lb, L);
    const double a = scale(rng), b = shift(rng);
    std::vector<double> ja(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) ja[k] = a * j[k] + b;
    const auto ca = classify_values(ja, Lb, L);
    for (std::size_t k = 0; k < j.size(); ++k) {
      CHECK(c[k] >= Lb);
      CHECK(c[k] <= L);
      CHECK(ca[k] == c[k]);
      for (std::size_t l = 0; l < j.size(); ++l)
        if (j[k] < j[l]) CHECK(c[k] <= c[l]);
    }
  }
}

TEST_CASE("kinds are classified separately and unreliable points get class L") {
  JumpConfig cfg;
  cfg.L_bar = 2;
  std::vector<FaultPoint> pts(5);
  pts[0].kind = pts[1].kind = FaultKind::ordinary;
  pts[0].jump = 0.1;
  pts[1].jump = 0.2;
  pts[2].kind = pts[3].kind = pts[4].kind = FaultKind::gradient;
  pts[2].jump = 100;
  pts[3].jump = 200;
  pts[4].jump = 0;
  pts[4].reliable = false;
  const auto c = classify_jumps(pts, cfg);
  CHECK(*c[0].jump_class == 2);
  CHECK(*c[1].jump_class == 10);
  CHECK(*c[2].jump_class == 2);
  CHECK(*c[3].jump_class == 10);
  CHECK(*c[4].jump_class == 10);
}

TEST_CASE("config validation") {
  JumpConfig c;
  c.L_bar = 0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c.L_bar = 11;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
}
