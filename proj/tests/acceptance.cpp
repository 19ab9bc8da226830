// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero if
// any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "lrqi/reporting.hpp"

using namespace lrqi;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int id, bool pass, const std::string& what) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... v) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, v...);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const Rect kF1{0, 1, 0, 1};
const Rect kF2{-4, 4, -4, 4};
constexpr std::size_t kPoints = 1000000;

FitResult timed_fit(const char* name, const PointCloud& cloud, const AdaptiveConfig& cfg,
                    const PointCloud* ref = nullptr) {
  const auto t0 = Clock::now();
  FitResult r = run_fit(cloud, cfg, ref);
  const auto& f = r.report.final();
  std::printf("  [%s] ndofs=%zu rmse=%.3e%s faults=%zu iterations=%zu wall=%.1fs\n", name, f.ndofs, f.rmse,
              f.rmse_reference ? fmt(" rmse_clean=%.3e", *f.rmse_reference).c_str() : "", r.faults.size(),
              r.report.iterations.size() - 1, since(t0));
  std::fflush(stdout);
  return r;
}

// Random dyadic bisection line through an element, extended over the overlapping supports.
void random_insertions(LRSpline& s, std::mt19937& rng, int count) {
  int done = 0;
  while (done < count) {
    const auto els = s.mesh.elements();
    const auto& e = els[std::uniform_int_distribution<std::size_t>(0, els.size() - 1)(rng)];
    const Axis a = rng() % 2 ? Axis::x : Axis::y;
    if (e.ticks.extent(a) < 4) continue;
    const Tick mid = (e.ticks.lo(a) + e.ticks.hi(a)) / 2;
    Tick lo = e.ticks.lo(other(a)), hi = e.ticks.hi(other(a));
    for (int id : s.basis.overlapping(e.ticks)) {
      lo = std::min(lo, s.basis.spline(id).knots.support().lo(other(a)));
      hi = std::max(hi, s.basis.spline(id).knots.support().hi(other(a)));
    }
    s.insert({a, mid, lo, hi, 1});
    ++done;
  }
}

// Distance from p to the curve x = c0 + c1 sin(2 pi y) over y in [0, 1].
double curve_distance(Point2 p, double c0, double c1) {
  constexpr int n = 20000;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= n; ++k) {
    const double y = static_cast<double>(k) / n;
    const double x = c0 + c1 * std::sin(2 * std::numbers::pi * y);
    best = std::min(best, std::hypot(p.x - x, p.y - y));
  }
  return best;
}

void print_table(const std::vector<LabeledRun>& runs, const FitResult& fd) {
  write_results_csv(runs, fd, std::cout);
  write_speedup_csv(runs, fd, std::cout);
  std::cout.flush();
}

// ---------------------------------------------------------------------------------------------

void criterion_2() {
  const auto t0 = Clock::now();
  std::mt19937 rng(2024);
  auto s = LRSpline::tensor(Rect{-1, 3, 0, 2}, 2, {3, 3});
  random_insertions(s, rng, 30);
  std::normal_distribution<double> g;
  for (int id : s.basis.ids()) s.basis.set_coefficient(id, g(rng));
  std::uniform_real_distribution<double> ux(-1, 3), uy(0, 2);
  std::vector<Point2> probes(1000);
  for (auto& p : probes) p = {ux(rng), uy(rng)};
  std::vector<double> before;
  for (const auto& p : probes) before.push_back(s.basis.evaluate(p.x, p.y));
  random_insertions(s, rng, 100);
  double drift = 0;
  for (std::size_t k = 0; k < probes.size(); ++k)
    drift = std::max(drift, std::abs(s.basis.evaluate(probes[k].x, probes[k].y) - before[k]));
  const double t = since(t0);
  verdict(2, drift <= 1e-10 && t < 30,
          fmt("nested spaces: max drift %.2e after 100 insertions (ndofs %zu), %.2fs", drift, s.basis.size(), t));
}

void criterion_3() {
  const auto t0 = Clock::now();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  double c[4][4];
  for (auto& row : c)
    for (auto& v : row) v = u(rng);
  const auto f = [&](double x, double y) {
    double s = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) s += c[i][j] * std::pow(x, i) * std::pow(y, j);
    return s;
  };
  const auto cloud = generate_halton_cloud(5000, kF1, f);
  QIConfig cfg;
  cfg.mu = 0;
  const auto surf = assemble_qi(LRSpline::tensor(kF1, 8, {3, 3}), cloud, cfg);
  double scale = 0;
  for (const auto& p : cloud.points) scale += p.z * p.z;
  scale = std::sqrt(scale / cloud.size());
  const double rel = rmse(surf, cloud) / scale;
  const double t = since(t0);
  verdict(3, rel <= 1e-9 && t < 10, fmt("polynomial reproduction: relative RMSE %.2e, %.2fs", rel, t));
}

void criterion_9() {
  const auto t0 = Clock::now();
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> size(1, 200), lbar(1, 10);
  std::lognormal_distribution<double> mag(0.0, 1.5);
  std::uniform_real_distribution<double> scale(0.01, 100.0), shift(-10.0, 10.0);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int L = 10, Lb = lbar(rng);
    std::vector<double> j(size(rng));
    for (auto& v : j) v = mag(rng);
    const auto cls = classify_values(j, Lb, L);
    const double a = scale(rng), b = shift(rng);
    std::vector<double> ja(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) ja[k] = a * j[k] + b;
    const auto clsa = classify_values(ja, Lb, L);
    std::vector<std::size_t> order(j.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return j[x] < j[y]; });
    for (std::size_t k = 0; k < j.size(); ++k) {
      if (cls[k] < Lb || cls[k] > L) ++violations;
      if (clsa[k] != cls[k]) ++violations;
      if (k > 0 && cls[order[k]] < cls[order[k - 1]]) ++violations;
    }
  }
  const double t = since(t0);
  verdict(9, violations == 0 && t < 5,
          fmt("classification invariants: %d violations over 1000 populations, %.2fs", violations, t));
}

void f1_criteria() {
  std::puts("f1 experiments (10^6 Halton points, L = 10, bidegree (3,3), minimal class 9)");
  const auto cloud = generate_halton_cloud(kPoints, kF1, eval_f1);

  // Criteria 4 and 5 use the detection/estimation stage alone.
  const auto t0 = Clock::now();
  const AdaptiveConfig base = default_config(RefinementMode::isotropic, 9);
  const auto faults = analyze_faults(cloud, base);
  const double t_detect = since(t0);
  const double tol = 2.0 / 128;
  int near = 0, near_correct = 0;
  std::vector<double> ord, grad;
  for (const auto& p : faults) {
    const double dg = curve_distance(p.location, 0.4, 0.1);
    const double dord = curve_distance(p.location, 0.7, 0.2);
    if (std::min(dg, dord) <= tol) {
      ++near;
      const FaultKind expected = dg < dord ? FaultKind::gradient : FaultKind::ordinary;
      if (p.kind == expected) ++near_correct;
    }
    if (p.reliable) (p.kind == FaultKind::ordinary ? ord : grad).push_back(p.jump);
  }
  const double frac_near = faults.empty() ? 0.0 : static_cast<double>(near) / faults.size();
  const double frac_kind = near == 0 ? 0.0 : static_cast<double>(near_correct) / near;
  verdict(4, frac_near >= 0.95 && frac_kind >= 0.90 && t_detect < 120,
          fmt("fault localization: %zu points, %.1f%% within 2/128, kinds correct for %.1f%%, %.1fs", faults.size(),
              100 * frac_near, 100 * frac_kind, t_detect));
  const double mo = median(ord), mg = median(grad);
  verdict(5, mo >= 0.18 && mo <= 0.22 && mg >= 1.8 && mg <= 2.2,
          fmt("jump accuracy: median ordinary %.4f (%zu pts), median gradient %.4f (%zu pts)", mo, ord.size(), mg,
              grad.size()));

  const auto t6 = Clock::now();
  const auto iso = timed_fit("JB  L=9", cloud, default_config(RefinementMode::isotropic, 9));
  const auto aniso = timed_fit("AJB L=9", cloud, default_config(RefinementMode::anisotropic, 9));
  const auto fd = timed_fit("FD", cloud, default_config(RefinementMode::fault_driven, 9));
  const double t = since(t6);
  print_table({{"JB", 9, RefinementMode::isotropic, &iso}, {"AJB", 9, RefinementMode::anisotropic, &aniso}}, fd);
  const auto ni = iso.report.final().ndofs, na = aniso.report.final().ndofs, nf = fd.report.final().ndofs;
  const double ri = iso.report.final().rmse, ra = aniso.report.final().rmse, rf = fd.report.final().rmse;
  const double rmax = std::max({ri, ra, rf}), rmin = std::min({ri, ra, rf});
  verdict(6, ni < nf && na < nf && na <= ni && rmax <= 1.15 * rmin && t < 900,
          fmt("f1 comparison: ndofs iso %zu, aniso %zu, fault %zu; RMSE spread %.1f%%, %.0fs", ni, na, nf,
              100 * (rmax / rmin - 1), t));
}

struct F2Runs {
  FitResult aniso1, aniso8, fd;
};

F2Runs f2_comparison(const PointCloud& cloud, int degree) {
  F2Runs r;
  r.aniso1 = timed_fit("AJB L=1", cloud, default_config(RefinementMode::anisotropic, 1, degree));
  r.aniso8 = timed_fit("AJB L=8", cloud, default_config(RefinementMode::anisotropic, 8, degree));
  r.fd = timed_fit("FD", cloud, default_config(RefinementMode::fault_driven, 1, degree));
  return r;
}

bool collapse_ok(const F2Runs& r, std::string& what) {
  const double n1 = r.aniso1.report.final().ndofs, nf = r.fd.report.final().ndofs;
  const double r1 = r.aniso1.report.final().rmse, r8 = r.aniso8.report.final().rmse, rf = r.fd.report.final().rmse;
  what = fmt("ndofs ratio %.3f (<= 0.15), RMSE ratio L=1 %.2f (<= 1.6), L=8 %.2f (<= 1.3)", n1 / nf, r1 / rf, r8 / rf);
  return n1 <= 0.15 * nf && r1 <= 1.6 * rf && r8 <= 1.3 * rf;
}

void f2_criteria() {
  std::puts("f2 experiments (10^6 Halton points on [-4,4]^2, L = 10)");
  const auto cloud = generate_halton_cloud(kPoints, kF2, eval_f2);

  const auto t1 = Clock::now();
  const auto r = f2_comparison(cloud, 3);
  const double t_aniso = r.aniso1.report.total_time();

  // Criterion 1 on the anisotropic L=1 run.
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-4, 4);
  double dev = 0;
  const LRBasis& basis = r.aniso1.surface.spline.basis;
  for (int k = 0; k < 2000; ++k) {
    double sum = 0;
    for (const auto& v : basis.eval(u(rng), u(rng))) sum += v.value;
    dev = std::max(dev, std::abs(sum - 1));
  }
  verdict(1, dev <= 1e-9 && t_aniso < 600,
          fmt("partition of unity: max |sum - 1| = %.2e at 2000 probes (ndofs %zu), fit %.1fs", dev, basis.size(),
              t_aniso));

  std::string what;
  const bool ok7 = collapse_ok(r, what);
  verdict(7, ok7, "f2 dof collapse, bidegree (3,3): " + what);

  std::set<int> classes;
  for (const auto& p : r.aniso1.faults)
    if (p.jump_class) classes.insert(*p.jump_class);
  verdict(8, classes.size() >= 4, fmt("classification spread: %zu distinct classes with minimal class 1", classes.size()));

  const auto iso = timed_fit("JB  L=1", cloud, default_config(RefinementMode::isotropic, 1));
  const std::vector<LabeledRun> runs{{"JB", 1, RefinementMode::isotropic, &iso},
                                     {"AJB", 1, RefinementMode::anisotropic, &r.aniso1}};
  print_table(runs, r.fd);
  const double tf = r.fd.report.total_time(), tj = iso.report.total_time(), ta = r.aniso1.report.total_time();
  verdict(11, tj <= tf && ta <= tf,
          fmt("speed ordering: total time JB %.1fs, AJB %.1fs, fault-driven %.1fs (speedups %.2f, %.2f)", tj, ta, tf,
              tf / tj, tf / ta));
  std::printf("  f2 (3,3) block wall time %.0fs\n", since(t1));

  std::puts("f2 noise experiment (sigma = 0.25, minimal class 4)");
  const auto noisy = add_gaussian_noise(cloud, 0.25, 2024);
  const auto nz = timed_fit("AJB L=4 noisy", noisy, default_config(RefinementMode::anisotropic, 4), &cloud);
  const auto nzf = timed_fit("FD noisy", noisy, default_config(RefinementMode::fault_driven, 4), &cloud);
  const double clean_err = *nz.report.final().rmse_reference;
  verdict(10, clean_err <= 0.15 && nz.report.final().ndofs < nzf.report.final().ndofs,
          fmt("noise robustness: RMSE to noise-free values %.3e (to noisy data %.3e), ndofs %zu vs fault-driven %zu",
              clean_err, nz.report.final().rmse, nz.report.final().ndofs, nzf.report.final().ndofs));

  std::puts("f2 at bidegree (2,2)");
  const auto q = f2_comparison(cloud, 2);
  const bool ok12 = collapse_ok(q, what);
  verdict(12, ok12, "bidegree (2,2) parity: " + what);
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  criterion_2();
  criterion_3();
  criterion_9();
  f1_criteria();
  f2_criteria();
  std::printf("acceptance: %d criteria failed, total %.0fs\n", failures, since(t0));
  return failures == 0 ? 0 : 1;
}
