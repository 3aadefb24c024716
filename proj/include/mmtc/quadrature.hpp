/*
 * Copyright (c) 2026
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmtc {

/// Raised when an adaptive integration exhausts its subdivision budget.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureSpec {
  double abs_tol = 1e-9;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;
  // Upper limit used in place of infinity; <= 0 lets the caller pick one.
  double tail_cutoff = 0.0;

  void check() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions < 1) {
      throw std::invalid_argument("QuadratureSpec: tolerances must be > 0 and max_subdivisions >= 1");
    }
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod_15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over the
/// partition given by `breakpoints` (sorted, at least two entries).
/// The panel with the largest error estimate is bisected until the summed
/// error meets max(abs_tol, rel_tol * |I|).
template <class F>
QuadratureResult integrate(F&& f, const std::vector<double>& breakpoints, const QuadratureSpec& spec = {}) {
  spec.check();
  if (breakpoints.size() < 2) throw std::invalid_argument("integrate: need at least two breakpoints");
  std::priority_queue<detail::Panel> heap;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i + 1] > breakpoints[i])) continue;
    auto p = detail::gauss_kronrod_15(f, breakpoints[i], breakpoints[i + 1]);
    value += p.value;
    error += p.error;
    heap.push(p);
  }
  int intervals = static_cast<int>(heap.size());
  while (!heap.empty() && error > std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) {
    if (intervals >= spec.max_subdivisions) {
      throw QuadratureError("integrate: subdivision limit reached (error estimate " + std::to_string(error) + ")");
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw QuadratureError("integrate: interval collapsed below machine resolution");
    }
    const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Re-sum to shed accumulated rounding from the running updates.
  double resum = 0.0;
  double err = 0.0;
  while (!heap.empty()) {
    resum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {resum, err, intervals};
}

template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  return integrate(std::forward<F>(f), std::vector<double>{a, b}, spec);
}

/// Breakpoints {lo, lo + (hi-lo)*2^-levels, ..., hi}: resolves features that
/// sit close to `lo` at any scale down to 2^-levels of the interval.
inline std::vector<double> geometric_breakpoints(double lo, double hi, int levels = 30) {
  std::vector<double> pts{lo};
  for (int j = levels; j >= 0; --j) pts.push_back(lo + (hi - lo) * std::ldexp(1.0, -j));
  return pts;
}

}  // namespace mmtc
