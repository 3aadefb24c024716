/*
 * Copyright (c) 2026
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmtc/quadrature.hpp"

// Special functions and transform inversion used by the coverage formulas.
// Everything here is a pure function of its arguments.

namespace mmtc::specfun {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxSeriesTerms = 10000;

inline double log_gamma(double a) { return std::lgamma(a); }

/// Γ(a) for a > 0; integer arguments up to 170 are returned as exact factorials.
inline double gamma_fn(double a) {
  if (!(a > 0.0)) throw std::domain_error("gamma_fn: a must be > 0");
  if (a == std::floor(a) && a <= 171.0) {
    double f = 1.0;
    for (int k = 2; k < static_cast<int>(a); ++k) f *= k;
    return f;
  }
  return std::tgamma(a);
}

/// 1/Γ(x) for any real x, zero at the poles.
inline double reciprocal_gamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  return 1.0 / std::tgamma(x);
}

/// Regularized incomplete gamma pair (P, Q). The smaller-regime member is
/// computed directly (series for x < a+1, Lentz continued fraction above),
/// so whichever of P or Q is tiny keeps full relative accuracy.
struct IncompleteGamma {
  double p;
  double q;
};

inline IncompleteGamma incomplete_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw std::domain_error("incomplete_gamma: need a > 0, x >= 0");
  if (x == 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double log_prefactor = -x + a * std::log(x) - log_gamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < kMaxSeriesTerms; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * eps) {
        const double p = sum * std::exp(log_prefactor);
        return {p, 1.0 - p};
      }
    }
    throw ConvergenceError("incomplete_gamma: series did not converge");
  }
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxSeriesTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) {
      const double q = std::exp(log_prefactor) * h;
      return {1.0 - q, q};
    }
  }
  throw ConvergenceError("incomplete_gamma: continued fraction did not converge");
}

inline double gamma_p(double a, double x) { return incomplete_gamma(a, x).p; }
inline double gamma_q(double a, double x) { return incomplete_gamma(a, x).q; }

/// Γ(a, x) = ∫ₓ^∞ t^{a−1} e^{−t} dt.
inline double gamma_upper(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw std::domain_error("gamma_upper: need a > 0, x >= 0");
  return gamma_q(a, x) * gamma_fn(a);
}

/// ∫_{x0}^{x1} t^{a−1} e^{−t} dt for 0 <= x0 <= x1 (x1 may be +inf).
inline double gamma_generalized(double a, double x0, double x1) {
  if (!(a > 0.0) || !(x0 >= 0.0) || !(x1 >= x0)) {
    throw std::domain_error("gamma_generalized: need a > 0 and 0 <= x0 <= x1");
  }
  const auto lo = incomplete_gamma(a, x0);
  const auto hi = incomplete_gamma(a, x1);
  // Difference taken on the side where both members are small.
  const double reg = (x1 < a + 1.0) ? hi.p - lo.p : lo.q - hi.q;
  return reg * gamma_fn(a);
}

namespace detail {

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// Σ_k (a)_k (b)_k / (c)_k · z^k / k!, |z| < 1, compensated summation.
inline double hyp2f1_series(double a, double b, double c, double z) {
  long double sum = 1.0L;
  long double comp = 0.0L;
  long double term = 1.0L;
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    term *= static_cast<long double>(a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    const long double y = term - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (std::abs(term) <= 1e-17L * std::abs(sum)) return static_cast<double>(sum);
  }
  throw ConvergenceError("hyp2f1: series did not converge within term limit");
}

// Pfaff: ₂F₁(a,b;c;z) = (1−z)^{−b} ₂F₁(c−a, b; c; z/(z−1)).
inline double hyp2f1_pfaff(double a, double b, double c, double z) {
  return std::pow(1.0 - z, -b) * hyp2f1_series(c - a, b, c, z / (z - 1.0));
}

// Connection formula to 1/z, valid for z < -1 when a − b is not an integer.
inline double hyp2f1_inverse(double a, double b, double c, double z) {
  const double w = 1.0 / z;
  const double mz = -z;
  const double gc = std::tgamma(c);
  const double t1 = gc * std::tgamma(b - a) * reciprocal_gamma(b) * reciprocal_gamma(c - a) * std::pow(mz, -a);
  const double t2 = gc * std::tgamma(a - b) * reciprocal_gamma(a) * reciprocal_gamma(c - b) * std::pow(mz, -b);
  double v = 0.0;
  if (t1 != 0.0) v += t1 * hyp2f1_series(a, a - c + 1.0, a - b + 1.0, w);
  if (t2 != 0.0) v += t2 * hyp2f1_series(b, b - c + 1.0, b - a + 1.0, w);
  return v;
}

}  // namespace detail

/// Gauss hypergeometric function for real z <= 0.
inline double hyp2f1(double a, double b, double c, double z) {
  if (detail::is_nonpositive_integer(c)) throw std::domain_error("hyp2f1: c is a non-positive integer");
  if (z > 0.0) throw std::domain_error("hyp2f1: only z <= 0 is supported");
  if (z == 0.0) return 1.0;
  if (z >= -0.5) return detail::hyp2f1_series(a, b, c, z);
  const double ab = a - b;
  if (z < -20.0 && ab != std::floor(ab)) return detail::hyp2f1_inverse(a, b, c, z);
  return detail::hyp2f1_pfaff(a, b, c, z);
}

/// ₂F₂(a1, a2; b1, b2; z) by direct series. The stop test only applies once
/// terms are shrinking, since for large z they first grow by many orders.
inline double hyp2f2(double a1, double a2, double b1, double b2, double z, double tol = 1e-17) {
  if (detail::is_nonpositive_integer(b1) || detail::is_nonpositive_integer(b2)) {
    throw std::domain_error("hyp2f2: lower parameter is a non-positive integer");
  }
  long double sum = 1.0L;
  long double comp = 0.0L;
  long double term = 1.0L;
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    const long double ratio =
        static_cast<long double>(a1 + k) * (a2 + k) / ((b1 + k) * (b2 + k) * (k + 1.0)) * z;
    term *= ratio;
    const long double y = term - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (std::abs(ratio) < 1.0L && std::abs(term) <= tol * std::abs(sum)) return static_cast<double>(sum);
    if (term == 0.0L) return static_cast<double>(sum);
  }
  throw ConvergenceError("hyp2f2: series did not converge within term limit");
}

/// log(z^{m+1} E_{−m}(z)) for m >= 0, z >= 0, via the finite sum
/// z^{m+1} E_{−m}(z) = e^{−z} Σ_{j=0}^{m} m!/(m−j)! z^{m−j}. Finite at z = 0.
inline double log_scaled_expint_neg(int m, double z) {
  if (m < 0 || !(z >= 0.0)) throw std::domain_error("log_scaled_expint_neg: need m >= 0, z >= 0");
  const double lz = (z > 0.0) ? std::log(z) : -std::numeric_limits<double>::infinity();
  const double lm = log_gamma(m + 1.0);
  double peak = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(static_cast<std::size_t>(m) + 1);
  for (int j = 0; j <= m; ++j) {
    const int power = m - j;
    const double v = lm - log_gamma(power + 1.0) + (power == 0 ? 0.0 : power * lz);
    logs[j] = v;
    peak = std::max(peak, v);
  }
  double acc = 0.0;
  for (double v : logs) acc += std::exp(v - peak);
  return -z + peak + std::log(acc);
}

/// Exponential integral E_n(z) = ∫₁^∞ e^{−zt} t^{−n} dt, z > 0, any integer n.
inline double expint_en(int n, double z) {
  if (!(z > 0.0)) throw std::domain_error("expint_en: z must be > 0");
  if (n <= 0) {
    const int m = -n;
    return std::exp(log_scaled_expint_neg(m, z) - (m + 1.0) * std::log(z));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double tiny = 1e-300;
  const int nm1 = n - 1;
  if (z > 1.0) {
    double b = z + n;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxSeriesTerms; ++i) {
      const double an = -static_cast<double>(i) * (nm1 + i);
      b += 2.0;
      d = 1.0 / (an * d + b);
      c = b + an / c;
      const double del = c * d;
      h *= del;
      if (std::abs(del - 1.0) < eps) return h * std::exp(-z);
    }
    throw ConvergenceError("expint_en: continued fraction did not converge");
  }
  constexpr double euler = 0.577215664901532860606512090082402431;
  double ans = (nm1 != 0) ? 1.0 / nm1 : -std::log(z) - euler;
  double fact = 1.0;
  for (int i = 1; i <= kMaxSeriesTerms; ++i) {
    fact *= -z / i;
    double del;
    if (i != nm1) {
      del = -fact / (i - nm1);
    } else {
      double psi = -euler;
      for (int ii = 1; ii <= nm1; ++ii) psi += 1.0 / ii;
      del = fact * (-std::log(z) + psi);
    }
    ans += del;
    if (std::abs(del) < std::abs(ans) * eps) return ans;
  }
  throw ConvergenceError("expint_en: series did not converge");
}

/// Derivatives f^{(0..T)}(s) of f = exp(g) given g(s) and g^{(1..T)}(s),
/// via f^{(t)} = Σ_{j<t} C(t−1, j) f^{(j)} g^{(t−j)}.
inline std::vector<double> exp_derivatives(double g0, std::span<const double> g_derivs) {
  const std::size_t order = g_derivs.size();
  std::vector<double> f(order + 1, 0.0);
  f[0] = std::exp(g0);
  for (std::size_t t = 1; t <= order; ++t) {
    double binom = 1.0;  // C(t-1, j)
    double acc = 0.0;
    for (std::size_t j = 0; j < t; ++j) {
      acc += binom * f[j] * g_derivs[t - j - 1];
      binom = binom * static_cast<double>(t - 1 - j) / static_cast<double>(j + 1);
    }
    f[t] = acc;
  }
  return f;
}

/// g^{(1..order)}(s) for g(s) = −C s^p.
inline std::vector<double> power_exponent_derivatives(double coeff, double power, double s, int order) {
  std::vector<double> g(static_cast<std::size_t>(std::max(order, 0)));
  double falling = 1.0;
  for (int k = 1; k <= order; ++k) {
    falling *= power - (k - 1);
    g[k - 1] = -coeff * falling * std::pow(s, power - k);
  }
  return g;
}

/// d^t/ds^t exp(−C s^p) at s > 0.
inline double mgf_exp_derivatives(double coeff, double power, double s, int order) {
  if (order < 0) throw std::domain_error("mgf_exp_derivatives: order must be >= 0");
  if (!(s > 0.0)) throw std::domain_error("mgf_exp_derivatives: s must be > 0");
  const auto g = power_exponent_derivatives(coeff, power, s, order);
  return exp_derivatives(-coeff * std::pow(s, power), g).back();
}

/// Σ_{t=0}^{m−1} (−s)^t / t! · f^{(t)}(s): the Nakagami-m success probability
/// P(h >= θ I) written through the interference MGF f, with s = mθ.
inline double nakagami_success_sum(std::span<const double> f_derivs, double s) {
  double acc = 0.0;
  double coef = 1.0;
  for (std::size_t t = 0; t < f_derivs.size(); ++t) {
    acc += coef * f_derivs[t];
    coef *= -s / static_cast<double>(t + 1);
  }
  return acc;
}

namespace detail {

// Wynn epsilon extrapolation of a sequence of partial sums.
inline double wynn_epsilon(std::span<const double> s) {
  const std::size_t n = s.size();
  if (n < 3) return s.back();
  std::vector<double> prev(n + 1, 0.0);
  std::vector<double> cur(s.begin(), s.end());
  double best = s.back();
  for (std::size_t r = 1; r < n; ++r) {
    std::vector<double> next(n - r);
    for (std::size_t k = 0; k + 1 < cur.size(); ++k) {
      const double diff = cur[k + 1] - cur[k];
      if (diff == 0.0) return cur[k + 1];
      next[k] = prev[k + 1] + 1.0 / diff;
      if (!std::isfinite(next[k])) return best;
    }
    prev.assign(cur.begin(), cur.end());
    cur = std::move(next);
    if (r % 2 == 0 && !cur.empty()) best = cur.back();
  }
  return best;
}

}  // namespace detail

/// CDF P(X <= point) from the characteristic function φ(w) = E[e^{iwX}]:
/// 1/2 − (1/π) ∫₀^∞ Im{φ(w) e^{−iw·point}} / w dw.
///
/// The half-line is cut into half-periods of e^{−iw·point}; the first panel
/// uses w = h t³ so an integrable w^{−β} (β < 2/3) endpoint singularity is
/// smoothed, and the oscillating tail of panel sums is summed by Wynn's
/// epsilon algorithm. A positive quad.tail_cutoff caps the range.
template <class CharFn>
double gil_pelaez_cdf(CharFn&& char_fn, double point, const QuadratureSpec& quad = {}) {
  quad.check();
  if (!std::isfinite(point)) throw std::domain_error("gil_pelaez_cdf: point must be finite");
  const double half = (std::abs(point) > 1e-12) ? std::numbers::pi / std::abs(point) : std::numbers::pi;
  auto integrand = [&](double w) {
    if (w <= 0.0) return 0.0;
    const std::complex<double> v = char_fn(w) * std::exp(std::complex<double>(0.0, -w * point));
    return v.imag() / w;
  };
  QuadratureSpec panel_spec = quad;
  panel_spec.abs_tol = 0.1 * quad.abs_tol;

  auto first = integrate([&](double t) { return integrand(half * t * t * t) * 3.0 * half * t * t; },
                         geometric_breakpoints(0.0, 1.0, 12), panel_spec);
  std::vector<double> partial{first.value};
  double sum = first.value;
  double last_est = sum;
  int stable = 0;
  int quiet = 0;
  constexpr std::size_t kWindow = 24;
  for (int j = 1; j <= quad.max_subdivisions; ++j) {
    const double a = half * j;
    const double b = a + half;
    const double piece = integrate(integrand, a, b, panel_spec).value;
    sum += piece;
    partial.push_back(sum);
    const double tol = std::max(quad.abs_tol, quad.rel_tol * std::abs(sum));
    if (quad.tail_cutoff > 0.0 && b >= quad.tail_cutoff) {
      last_est = sum;
      break;
    }
    quiet = (std::abs(piece) < 1e-3 * tol) ? quiet + 1 : 0;
    if (quiet >= 3) {
      last_est = sum;
      break;
    }
    const std::size_t lo = partial.size() > kWindow ? partial.size() - kWindow : 0;
    const double est = detail::wynn_epsilon(std::span<const double>(partial).subspan(lo));
    stable = (j >= 4 && std::abs(est - last_est) <= tol) ? stable + 1 : 0;
    last_est = est;
    if (stable >= 3) break;
    if (j == quad.max_subdivisions) {
      throw QuadratureError("gil_pelaez_cdf: panel limit reached before the tail converged");
    }
  }
  const double cdf = 0.5 - last_est / std::numbers::pi;
  return std::clamp(cdf, 0.0, 1.0);
}

}  // namespace mmtc::specfun
