/*
 * Copyright (c) 2026
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <list>
#include <mutex>
#include <numbers>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "mmtc/domain.hpp"
#include "mmtc/parallel.hpp"
#include "mmtc/quadrature.hpp"
#include "mmtc/specfun.hpp"

// Aggregation phase: MTDs -> aggregator over N orthogonal channels.

namespace mmtc {

inline double log_poisson(int k, double mean) {
  if (mean == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return -mean + k * std::log(mean) - std::lgamma(k + 1.0);
}

inline double poisson_pmf(int k, double mean) { return k < 0 ? 0.0 : std::exp(log_poisson(k, mean)); }

/// Last k kept when summing a Poisson(mean) tail that starts above n.
inline int poisson_truncation(double mean, int n, int terms = 120) {
  const double span = std::max(120.0, 12.0 * std::sqrt(mean));
  return std::max(n + terms, static_cast<int>(std::ceil(mean + span)));
}

/// P(K > k) for K ~ Poisson(mean).
inline double poisson_tail(int k, double mean) {
  if (k < 0) return 1.0;
  if (mean == 0.0) return 0.0;
  return specfun::gamma_p(k + 1.0, mean);
}

/// Fraction of the N channels that carry a transmission: E[min(K,N)]/N.
inline double p_occupy(const NetworkParams& p) {
  const double n = p.n_channels;
  const double q = specfun::gamma_q(n + 1.0, p.m_bar);  // P(K <= N)
  return 1.0 - q + (p.m_bar / n) * (q - poisson_pmf(p.n_channels, p.m_bar));
}

/// Probability that an MTD is granted a channel, E[N / max(K, N)].
inline double p_nondrop(const NetworkParams& p) {
  const double n = p.n_channels;
  const double m = p.m_bar;
  const double q = specfun::gamma_q(n + 1.0, m);
  const double log_pref = -m + (1.0 + n) * std::log(m) + std::log(n) - std::log(n + 1.0) - std::lgamma(n + 2.0);
  const double f = specfun::hyp2f2(1.0, 1.0 + n, 2.0 + n, 2.0 + n, m);
  return q + std::exp(log_pref + std::log(f));
}

/// Coefficient C in M_I1(s) = exp(-C s^{2/α}).
inline double interference1_coefficient(const NetworkParams& p) {
  const double d = p.delta();
  return p_occupy(p) * p.lambda_a * std::numbers::pi * (p.r_s * p.r_s / 2.0) * std::tgamma(1.0 + d) *
         std::tgamma(1.0 - d);
}

/// Laplace transform of the inter-cluster interference at an aggregator.
inline double mgf_i1(const NetworkParams& p, double s) {
  if (!(s >= 0.0)) throw std::domain_error("mgf_i1: s must be >= 0");
  return std::exp(-interference1_coefficient(p) * std::pow(s, p.delta()));
}

/// Per-channel success probability at a typical aggregator under random scheduling.
inline double p_suc1_rrs(const NetworkParams& p) {
  const double s = p.m1 * p.gamma1;
  const double c = interference1_coefficient(p);
  const auto g = specfun::power_exponent_derivatives(c, p.delta(), s, p.m1 - 1);
  const auto f = specfun::exp_derivatives(-c * std::pow(s, p.delta()), g);
  return std::clamp(specfun::nakagami_success_sum(f, s), 0.0, 1.0);
}

namespace detail {

class OrderStatCache {
 public:
  explicit OrderStatCache(std::size_t capacity) : capacity_(capacity) {}

  bool get(const std::tuple<int, int, int>& key, double& out) {
    std::lock_guard lock(mutex_);
    auto it = index_.find(key);
    if (it == index_.end()) return false;
    order_.splice(order_.begin(), order_, it->second);
    out = it->second->second;
    return true;
  }

  void put(const std::tuple<int, int, int>& key, double value) {
    std::lock_guard lock(mutex_);
    if (auto it = index_.find(key); it != index_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      return;
    }
    order_.emplace_front(key, value);
    index_[key] = order_.begin();
    if (index_.size() > capacity_) {
      index_.erase(order_.back().first);
      order_.pop_back();
    }
  }

 private:
  struct KeyHash {
    std::size_t operator()(const std::tuple<int, int, int>& k) const {
      auto [a, b, c] = k;
      return (static_cast<std::size_t>(a) * 1000003u ^ static_cast<std::size_t>(b)) * 1000003u ^
             static_cast<std::size_t>(c);
    }
  };
  std::size_t capacity_;
  std::mutex mutex_;
  std::list<std::pair<std::tuple<int, int, int>, double>> order_;
  std::unordered_map<std::tuple<int, int, int>, decltype(order_)::iterator, KeyHash> index_;
};

inline OrderStatCache& order_stat_cache() {
  static OrderStatCache cache(1u << 16);
  return cache;
}

inline double order_stat_mean_uncached(int m1, int k, int i) {
  const double shape = m1;
  const double log_coef = std::lgamma(k + 1.0) - std::lgamma(static_cast<double>(i)) - std::lgamma(k - i + 1.0);
  const double log_norm = shape * std::log(shape) - std::lgamma(shape);
  // h · density of the i-th largest of k draws.
  auto integrand = [&](double h) {
    if (h <= 0.0) return 0.0;
    const auto g = specfun::incomplete_gamma(shape, shape * h);
    double lv = log_coef + log_norm + (shape - 1.0) * std::log(h) - shape * h + std::log(h);
    if (i > 1) lv += (i - 1) * std::log(g.q);
    if (k > i) lv += (k - i) * std::log(g.p);
    return std::exp(lv);
  };
  double hmax = 1.0;
  while (std::log(static_cast<double>(k)) + std::log(specfun::gamma_q(shape, shape * hmax)) > -40.0) hmax *= 1.5;
  std::vector<double> pts = geometric_breakpoints(0.0, hmax, 20);
  for (int j = 1; j < 32; ++j) pts.push_back(hmax * j / 32.0);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  QuadratureSpec spec;
  spec.abs_tol = 1e-13;
  spec.rel_tol = 1e-12;
  spec.max_subdivisions = 4000;
  return integrate(integrand, pts, spec).value;
}

}  // namespace detail

/// Mean of the i-th largest of k i.i.d. unit-mean Gamma(m1) fading gains.
inline double order_stat_mean(int m1, int k, int i) {
  if (m1 < 1 || k < 1 || i < 1 || i > k) throw std::domain_error("order_stat_mean: need m1 >= 1 and 1 <= i <= k");
  const auto key = std::make_tuple(m1, k, i);
  double v;
  if (detail::order_stat_cache().get(key, v)) return v;
  v = detail::order_stat_mean_uncached(m1, k, i);
  detail::order_stat_cache().put(key, v);
  return v;
}

/// Per-channel success probability under channel-aware scheduling given
/// k > N contending MTDs. The fading gain on the i-th best channel is
/// replaced by its mean, and the interference CDF is recovered by
/// characteristic-function inversion.
inline double p_suc1_crs_conditional(const NetworkParams& p, int k, const QuadratureSpec& quad = {}) {
  if (k <= p.n_channels) throw std::domain_error("p_suc1_crs_conditional: requires k > n_channels");
  const double c = interference1_coefficient(p);
  const double d = p.delta();
  const std::complex<double> rot = std::polar(1.0, -std::numbers::pi * d / 2.0);
  auto phi = [&](double w) { return std::exp(-c * std::pow(w, d) * rot); };
  double acc = 0.0;
  for (int i = 1; i <= p.n_channels; ++i) {
    acc += specfun::gil_pelaez_cdf(phi, order_stat_mean(p.m1, k, i) / p.gamma1, quad);
  }
  return acc / p.n_channels;
}

/// Conditional CRS success values for k = N+1 .. last_k(); the range
/// covers the Poisson(m̄) tail down to ~1e-15.
struct CrsConditionalTable {
  int first_k = 0;
  std::vector<double> values;
  double residual_mass = 0.0;

  int last_k() const { return first_k + static_cast<int>(values.size()) - 1; }
  double at(int k) const { return values.at(static_cast<std::size_t>(k - first_k)); }
};

inline CrsConditionalTable crs_conditional_table(const NetworkParams& p, int truncation_terms = 120,
                                                 unsigned threads = 1) {
  CrsConditionalTable t;
  t.first_k = p.n_channels + 1;
  int last = poisson_truncation(p.m_bar, p.n_channels, truncation_terms);
  for (int k = t.first_k; k <= last; ++k) {
    if (k > p.m_bar && poisson_tail(k, p.m_bar) < 1e-15) {
      last = k;
      break;
    }
  }
  t.residual_mass = poisson_tail(last, p.m_bar);
  t.values.assign(static_cast<std::size_t>(last - t.first_k + 1), 0.0);
  parallel_for(
      t.values.size(), [&](std::size_t j) { t.values[j] = p_suc1_crs_conditional(p, t.first_k + static_cast<int>(j)); },
      threads);
  return t;
}

/// Per-channel success probability under channel-aware scheduling, from a
/// precomputed conditional table.
inline double p_suc1_crs(const NetworkParams& p, double rrs_value, const CrsConditionalTable& table) {
  const double m = p.m_bar;
  const double nonempty = -std::expm1(-m);
  const double weight_rrs = (specfun::gamma_q(p.n_channels + 1.0, m) - std::exp(-m)) / nonempty;
  double acc = weight_rrs * rrs_value;
  for (int k = table.first_k; k <= table.last_k(); ++k) acc += table.at(k) * poisson_pmf(k, m) / nonempty;
  return std::clamp(acc, 0.0, 1.0);
}

inline double p_suc1_crs(const NetworkParams& p, int truncation_terms = 120) {
  return p_suc1_crs(p, p_suc1_rrs(p), crs_conditional_table(p, truncation_terms));
}

}  // namespace mmtc
