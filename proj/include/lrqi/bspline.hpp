#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <stdexcept>
#include <vector>

namespace lrqi {

inline constexpr int kMaxDegree = 7;

/// Value of the single B-spline of degree p = knots.size() - 2 at t, without validation.
/// Right-continuous; with `right_closed` the value at t == knots.back() is the left limit.
template <typename Scalar>
Scalar bspline_value(std::span<const Scalar> knots, int p, Scalar t, bool right_closed = false) {
  const Scalar first = knots.front(), last = knots[p + 1];
  if (t < first || t > last) return Scalar(0);
  if (t == last && !right_closed) return Scalar(0);

  std::array<Scalar, kMaxDegree + 1> n{};
  for (int i = 0; i <= p; ++i) {
    const Scalar a = knots[i], b = knots[i + 1];
    if (a < b && ((a <= t && t < b) || (t == last && b == last))) n[i] = Scalar(1);
  }
  for (int r = 1; r <= p; ++r) {
    for (int i = 0; i + r <= p; ++i) {
      Scalar v(0);
      const Scalar dl = knots[i + r] - knots[i];
      const Scalar dr = knots[i + r + 1] - knots[i + 1];
      if (dl > Scalar(0)) v += (t - knots[i]) / dl * n[i];
      if (dr > Scalar(0)) v += (knots[i + r + 1] - t) / dr * n[i + 1];
      n[i] = v;
    }
  }
  return n[0];
}

template <typename Scalar>
void check_local_knots(std::span<const Scalar> knots, int p) {
  if (p < 0 || p > kMaxDegree) throw std::invalid_argument("bspline: unsupported degree");
  if (knots.size() != static_cast<std::size_t>(p + 2)) throw std::invalid_argument("bspline: need p+2 knots");
  if (!std::is_sorted(knots.begin(), knots.end())) throw std::invalid_argument("bspline: knots must be nondecreasing");
  if (!(knots.front() < knots.back())) throw std::invalid_argument("bspline: empty support");
}

/// Checked single B-spline evaluation.
template <typename Scalar>
Scalar bspline_eval_1d(std::span<const Scalar> knots, int p, Scalar t, bool right_closed = false) {
  check_local_knots(knots, p);
  return bspline_value(knots, p, t, right_closed);
}

template <typename Scalar>
struct KnotSplit {
  std::vector<Scalar> left;   // t inserted, last knot dropped
  Scalar alpha_left;
  std::vector<Scalar> right;  // t inserted, first knot dropped
  Scalar alpha_right;
};

/// Refinement relation B = alpha_left * B_left + alpha_right * B_right after inserting t into
/// the local knot vector. t must lie in the open support and the result must keep every
/// multiplicity <= p + 1.
template <typename Scalar>
KnotSplit<Scalar> split_knots(std::span<const Scalar> knots, int p, Scalar t) {
  check_local_knots(knots, p);
  if (!(knots.front() < t && t < knots.back()))
    throw std::invalid_argument("split_by_knot_insertion: knot outside the open support");
  if (std::count(knots.begin(), knots.end(), t) + 1 > p + 1)
    throw std::invalid_argument("split_by_knot_insertion: multiplicity would exceed p + 1");

  std::vector<Scalar> all(knots.begin(), knots.end());
  all.insert(std::upper_bound(all.begin(), all.end(), t), t);

  KnotSplit<Scalar> s;
  s.left.assign(all.begin(), all.end() - 1);
  s.right.assign(all.begin() + 1, all.end());
  const Scalar t0 = knots[0], t1 = knots[1], tp = knots[p], tq = knots[p + 1];
  s.alpha_left = tp > t0 ? std::min(Scalar(1), (t - t0) / (tp - t0)) : Scalar(1);
  s.alpha_right = tq > t1 ? std::min(Scalar(1), (tq - t) / (tq - t1)) : Scalar(1);
  return s;
}

}  // namespace lrqi
