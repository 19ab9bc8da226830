#include <doctest.h>

#include <sstream>

#include "lrqi/reporting.hpp"

using namespace lrqi;

TEST_CASE("identical reports give unit speedups") {
  FitReport r;
  r.t_detect = 0.5;
  r.iterations.push_back({0, 25, 0.1, std::nullopt, 0.0, 1.0, 0.2});
  r.iterations.push_back({1, 49, 0.05, std::nullopt, 0.3, 0.7, 0.2});
  const auto s = compute_speedup(r, r);
  CHECK(s.mark_refine == 1.0);
  CHECK(s.solve == 1.0);
  CHECK(s.eval == 1.0);
  CHECK(s.total == 1.0);
  FitReport fast = r;
  for (auto& it : fast.iterations) it.t_solve /= 2;
  CHECK(compute_speedup(r, fast).solve == doctest::Approx(2.0));
}

TEST_CASE("speedup table has one row per jump-driven run") {
  FitResult a, b;
  for (auto* r : {&a, &b}) r->report.iterations.push_back({0, 25, 0.1, std::nullopt, 0.1, 0.1, 0.1});
  std::ostringstream os;
  write_speedup_csv({{"JB", 1, RefinementMode::isotropic, &a}, {"AJB", 1, RefinementMode::anisotropic, &a}}, b, os);
  const std::string s = os.str();
  CHECK(s.rfind("label,lbar,mark_refine,solve,eval,total\n", 0) == 0);
  CHECK(s.find("JB,1,1,1,1,1") != std::string::npos);
  CHECK(std::count(s.begin(), s.end(), '\n') == 3);
}

TEST_CASE("svg has one line element per meshline") {
  auto s = LRSpline::tensor(Rect{0, 1, 0, 1}, 2, {3, 3});
  s.insert(s.mesh.line(Axis::x, 0.25, 0.0, 1.0));
  s.insert(s.mesh.line(Axis::y, 0.25, 0.0, 0.5));
  std::vector<FaultPoint> pts(2);
  pts[0].jump_class = 1;
  pts[1].jump_class = 10;
  std::ostringstream os;
  write_mesh_svg(s.mesh, pts, 10, os);
  const std::string svg = os.str();
  std::size_t lines = 0, circles = 0;
  for (std::size_t i = svg.find("<line"); i != std::string::npos; i = svg.find("<line", i + 1)) ++lines;
  for (std::size_t i = svg.find("<circle"); i != std::string::npos; i = svg.find("<circle", i + 1)) ++circles;
  CHECK(lines == s.mesh.lines().size());
  CHECK(circles == 2);
  CHECK(svg.find("version=\"1.1\"") != std::string::npos);
}

TEST_CASE("report and fault csv schemas") {
  FitReport r;
  r.iterations.push_back({0, 25, 0.1, 0.05, 0.0, 1.0, 0.2});
  std::ostringstream os;
  write_report_csv(r, os);
  CHECK(os.str().rfind("iteration,ndofs,rmse,rmse_reference,t_mark_refine,t_solve,t_eval\n0,25,", 0) == 0);
  std::ostringstream fs;
  FaultPoint p;
  p.jump_class = 3;
  write_faults_csv({p}, fs);
  CHECK(fs.str().rfind("x,y,kind,dir_x,dir_y,alignment,jump,class\n", 0) == 0);
  CHECK(fs.str().find("ordinary") != std::string::npos);
}
