#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lrqi/fault_detection.hpp"

using namespace lrqi;

namespace {

DetectionConfig coarse() {
  DetectionConfig c;
  c.nx = c.ny = 32;
  return c;
}

}  // namespace

TEST_CASE("detection grid buckets every point once") {
  const auto cloud = generate_halton_cloud(5000, Rect{-1, 1, 0, 2}, eval_f1);
  const DetectionGrid g(cloud, 8, 4);
  std::size_t total = 0;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 8; ++i) {
      const Rect b = g.cell_box(i, j);
      for (int k : g.cell(i, j)) {
        CHECK(b.contains(cloud.points[k].x, cloud.points[k].y));
        ++total;
      }
    }
  CHECK(total == cloud.size());
  CHECK(g.cell_of(1.0, 2.0) == g.cell_index(7, 3));
  const Rect q{-0.3, 0.2, 0.5, 0.9};
  std::size_t brute = 0;
  for (const auto& p : cloud.points) brute += q.contains(p.x, p.y);
  CHECK(g.points_in(cloud, q).size() == brute);
  CHECK_THROWS_AS(DetectionGrid(cloud, 1, 4), std::invalid_argument);
}

TEST_CASE("smooth data yields no fault points") {
  const auto cloud = generate_halton_cloud(
      100000, Rect{0, 1, 0, 1}, [](double x, double y) { return std::sin(3 * x) * std::cos(2 * y) + x * y; });
  DetectionStats st;
  CHECK(detect_fault_points(cloud, coarse(), &st).empty());
  const auto flat = generate_halton_cloud(20000, Rect{0, 1, 0, 1}, [](double x, double) { return 2 * x; });
  CHECK(detect_fault_points(flat, coarse()).empty());
}

TEST_CASE("a straight step is found along its whole length") {
  // Step of height 0.5 along x = 0.3 + 0.4 y.
  const auto cloud = generate_halton_cloud(100000, Rect{0, 1, 0, 1}, [](double x, double y) {
    return x + 0.2 * y + (x > 0.3 + 0.4 * y ? 0.5 : 0.0);
  });
  const auto pts = detect_fault_points(cloud, coarse());
  REQUIRE(pts.size() >= 25);
  const double nrm = std::hypot(1.0, 0.4);
  const double dir_angle = std::atan2(1.0, 0.4);
  for (const auto& p : pts) {
    CHECK(p.kind == FaultKind::ordinary);
    CHECK(std::abs(p.location.x - 0.3 - 0.4 * p.location.y) / nrm < 1.0 / 32);
    const double a = std::atan2(p.direction.y, p.direction.x);
    CHECK(std::abs(a - dir_angle) < 0.1);
    CHECK(p.direction.y >= 0);
  }
}

TEST_CASE("a kink is a gradient fault") {
  const auto cloud =
      generate_halton_cloud(100000, Rect{0, 1, 0, 1}, [](double x, double y) { return std::abs(y - 0.55) + 0.1 * x; });
  const auto pts = detect_fault_points(cloud, coarse());
  REQUIRE(pts.size() >= 25);
  for (const auto& p : pts) {
    CHECK(p.kind == FaultKind::gradient);
    CHECK(std::abs(p.location.y - 0.55) < 1.0 / 32);
    CHECK(p.alignment == Alignment::x_aligned);
  }
}

TEST_CASE("a fault on a cell boundary is still detected") {
  const auto cloud =
      generate_halton_cloud(100000, Rect{0, 1, 0, 1}, [](double x, double y) { return y + (x > 0.5 ? 1.0 : 0.0); });
  const auto pts = detect_fault_points(cloud, coarse());
  CHECK(pts.size() >= 28);
  for (const auto& p : pts) {
    CHECK(std::abs(p.location.x - 0.5) < 1.0 / 32);
    CHECK(p.alignment == Alignment::y_aligned);
  }
}

TEST_CASE("alignment labels") {
  std::vector<FaultPoint> pts(3);
  pts[0].direction = {1, 0};
  pts[1].direction = {std::cos(1.5), std::sin(1.5)};
  pts[2].direction = {std::cos(0.7), std::sin(0.7)};
  const auto l = label_alignment(pts, 10);
  CHECK(l[0].alignment == Alignment::x_aligned);
  CHECK(l[1].alignment == Alignment::y_aligned);
  CHECK(l[2].alignment == Alignment::none);
}

TEST_CASE("noisy data: pure noise yields nothing, a step well above the noise is found") {
  const auto smooth = generate_halton_cloud(60000, Rect{0, 1, 0, 1}, [](double x, double y) { return x + 0.5 * y * y; });
  CHECK(detect_fault_points(add_gaussian_noise(smooth, 0.1, 7), coarse()).empty());

  const auto step = generate_halton_cloud(60000, Rect{0, 1, 0, 1},
                                          [](double x, double y) { return 0.3 * y + (x > 0.43 ? 1.0 : 0.0); });
  const auto found = detect_fault_points(add_gaussian_noise(step, 0.1, 7), coarse());
  REQUIRE(found.size() >= 24);
  for (const auto& p : found) {
    CHECK(std::abs(p.location.x - 0.43) < 2.0 / 32);
    CHECK(p.kind == FaultKind::ordinary);
    CHECK(p.alignment == Alignment::y_aligned);
  }
}
