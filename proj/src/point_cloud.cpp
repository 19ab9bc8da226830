#include "lrqi/point_cloud.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>

namespace lrqi {

namespace {

// SplitMix64 finalizer; used as a counter-based generator keyed by (seed, counter).
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform in (0, 1), never exactly zero.
double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

std::complex<double> asin_upper(std::complex<double> w) {
  // Pin a zero imaginary part to +0 so the cut value is the limit from Im(w) > 0.
  if (w.imag() == 0.0) w = {w.real(), 0.0};
  return std::asin(w);
}

}  // namespace

double halton(std::uint64_t index, unsigned base) {
  if (base < 2) throw std::invalid_argument("halton: base must be >= 2");
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

double eval_f1(double x, double y) {
  const double s = std::sin(2.0 * std::numbers::pi * y);
  if (x <= 0.7 + 0.2 * s) return std::abs(x - 0.4 - 0.1 * s);
  return std::abs(x - 0.4 - 0.1 * s - 0.2);
}

double eval_f2(double x, double y) {
  const std::complex<double> z{x, y};
  const std::complex<double> w = std::complex<double>{0.0, 1.0} * std::conj(z);
  return (asin_upper(z) + asin_upper(w)).imag();
}

Rect bounding_box(const std::vector<ScatterPoint>& points) {
  Rect r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
         std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : points) {
    r.x0 = std::min(r.x0, p.x);
    r.x1 = std::max(r.x1, p.x);
    r.y0 = std::min(r.y0, p.y);
    r.y1 = std::max(r.y1, p.y);
  }
  return r;
}

PointCloud generate_halton_cloud(std::size_t n, const Rect& domain, const SampledFunction& f) {
  if (domain.degenerate()) throw std::invalid_argument("generate_halton_cloud: degenerate domain");
  PointCloud cloud;
  cloud.domain = domain;
  cloud.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = domain.x0 + domain.width() * halton(i + 1, 2);
    const double y = domain.y0 + domain.height() * halton(i + 1, 3);
    cloud.points[i] = {x, y, f(x, y)};
  }
  return cloud;
}

PointCloud add_gaussian_noise(const PointCloud& cloud, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("add_gaussian_noise: sigma must be >= 0");
  PointCloud out = cloud;
  if (sigma == 0.0) return out;
  const std::uint64_t key = mix64(seed);
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const double u1 = unit_open(mix64(key ^ (2 * static_cast<std::uint64_t>(i))));
    const double u2 = unit_open(mix64(key ^ (2 * static_cast<std::uint64_t>(i) + 1)));
    const double g = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    out.points[i].z += sigma * g;
  }
  return out;
}

PointCloud load_xyz(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_xyz: cannot open " + path.string());
  PointCloud cloud;
  std::optional<Rect> declared;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      Rect r;
      if (std::sscanf(line.c_str() + first, "# domain %lf %lf %lf %lf", &r.x0, &r.x1, &r.y0, &r.y1) == 4 &&
          !r.degenerate())
        declared = r;
      continue;
    }

    double v[3];
    int count = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p == end) break;
      if (count == 3) throw ParseError("load_xyz: too many fields at line " + std::to_string(lineno), lineno);
      if (*p == '+') ++p;
      auto [next, ec] = std::from_chars(p, end, v[count]);
      if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t' && *next != '\r'))
        throw ParseError("load_xyz: unparsable field at line " + std::to_string(lineno), lineno);
      if (!std::isfinite(v[count]))
        throw ParseError("load_xyz: non-finite value at line " + std::to_string(lineno), lineno);
      ++count;
      p = next;
    }
    if (count != 3)
      throw ParseError("load_xyz: expected 3 fields at line " + std::to_string(lineno), lineno);
    cloud.points.push_back({v[0], v[1], v[2]});
  }
  if (cloud.points.empty()) throw std::invalid_argument("load_xyz: invalid input, no points in " + path.string());
  cloud.domain = bounding_box(cloud.points);
  // A "# domain x0 x1 y0 y1" comment written by write_xyz restores the sampling domain.
  if (declared && declared->contains(cloud.domain.x0, cloud.domain.y0) &&
      declared->contains(cloud.domain.x1, cloud.domain.y1))
    cloud.domain = *declared;
  return cloud;
}

void write_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw std::runtime_error("write_xyz: cannot open " + path.string());
  const Rect& d = cloud.domain;
  std::fprintf(f, "# domain %.17g %.17g %.17g %.17g\n", d.x0, d.x1, d.y0, d.y1);
  for (const auto& p : cloud.points) std::fprintf(f, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
  if (std::fclose(f) != 0) throw std::runtime_error("write_xyz: write failed for " + path.string());
}

PointCloud rescale_values(const PointCloud& cloud, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("rescale_values: empty target interval");
  PointCloud out = cloud;
  if (out.points.empty()) return out;
  double zmin = out.points.front().z, zmax = zmin;
  for (const auto& p : out.points) {
    zmin = std::min(zmin, p.z);
    zmax = std::max(zmax, p.z);
  }
  if (zmin == lo && zmax == hi) return out;
  if (zmax == zmin) {
    for (auto& p : out.points) p.z = 0.5 * (lo + hi);
    return out;
  }
  const double scale = (hi - lo) / (zmax - zmin);
  for (auto& p : out.points) {
    p.z = p.z == zmax ? hi : lo + (p.z - zmin) * scale;
  }
  return out;
}

}  // namespace lrqi
