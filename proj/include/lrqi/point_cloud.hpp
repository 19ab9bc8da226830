#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrqi {

/// Axis-aligned rectangle [x0,x1] x [y0,y1] in domain units.
struct Rect {
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  bool degenerate() const { return !(x1 > x0) || !(y1 > y0); }
};

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct PointCloud {
  std::vector<ScatterPoint> points;
  Rect domain;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Thrown by load_xyz when a line cannot be read as a point.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

using SampledFunction = std::function<double(double, double)>;

/// Radical inverse of `index` in `base`.
double halton(std::uint64_t index, unsigned base);

/// Two sinusoidal faults: a gradient fault along x = 2/5 + sin(2 pi y)/10 and an
/// ordinary fault with jump 1/5 along x = 7/10 + sin(2 pi y)/5.
double eval_f1(double x, double y);

/// Im(asin(z) + asin(i conj(z))), z = x + iy, principal branch. Points on a cut take
/// the limit from the side where the arcsin argument has positive imaginary part.
double eval_f2(double x, double y);

/// Points are affine images of (halton(i,2), halton(i,3)), i = 1..n.
PointCloud generate_halton_cloud(std::size_t n, const Rect& domain, const SampledFunction& f);

/// Adds N(0, sigma^2) to every z. Deviates are a pure function of (seed, index).
PointCloud add_gaussian_noise(const PointCloud& cloud, double sigma, std::uint64_t seed);

PointCloud load_xyz(const std::filesystem::path& path);
void write_xyz(const PointCloud& cloud, const std::filesystem::path& path);

/// Affine map of z onto [lo, hi]; constant data goes to the midpoint.
PointCloud rescale_values(const PointCloud& cloud, double lo, double hi);

/// Tight bounding box of the (x, y) coordinates.
Rect bounding_box(const std::vector<ScatterPoint>& points);

}  // namespace lrqi
