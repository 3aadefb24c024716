/*
 * Copyright (c) 2026
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "mmtc/aggregation.hpp"
#include "mmtc/domain.hpp"
#include "mmtc/quadrature.hpp"
#include "mmtc/specfun.hpp"

// Relaying phase: active aggregators -> nearest BS, sharing T·W per cell.

namespace mmtc {

inline double binomial_pmf(int k, int n, double p) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(lc + k * std::log(p) + (n - k) * std::log1p(-p));
}

namespace detail {

// Σ_{k=k1}^{N} Binom(k1; k, p)·Poisson(k; m̄) written with the scaled
// exponential integral: Poisson(k1; m̄p) · z^{n+1}E_{-n}(z)/n!, z = m̄(1-p).
inline double k1_mass_within_capacity(int k1, int n_channels, double m_bar, double p) {
  const int n = n_channels - k1;
  const double mp = m_bar * p;
  if (mp == 0.0) return k1 == 0 ? specfun::gamma_q(n_channels + 1.0, m_bar) : 0.0;
  const double z = m_bar * (1.0 - p);
  const double lv = -mp + k1 * std::log(mp) - std::lgamma(k1 + 1.0) - std::lgamma(n + 1.0) +
                    specfun::log_scaled_expint_neg(n, z);
  return std::exp(lv);
}

}  // namespace detail

/// Number of channels decoded at a typical aggregator under random scheduling.
inline Pmf pmf_k1_rrs(const NetworkParams& p, double p_suc1) {
  if (!(p_suc1 >= 0.0 && p_suc1 <= 1.0)) throw std::domain_error("pmf_k1_rrs: p_suc1 must lie in [0,1]");
  const int n = p.n_channels;
  const double overflow = specfun::gamma_p(n + 1.0, p.m_bar);  // P(K > N)
  Pmf out;
  for (int k1 = 0; k1 <= n; ++k1) {
    out.support.push_back(k1);
    out.probs.push_back(detail::k1_mass_within_capacity(k1, n, p.m_bar, p_suc1) +
                        binomial_pmf(k1, n, p_suc1) * overflow);
  }
  return out;
}

/// Channel-aware counterpart: above capacity the per-channel success
/// depends on the number of contenders k through `cond_success(k)`.
inline Pmf pmf_k1_crs(const NetworkParams& p, double p_suc1_rrs_value, const CrsConditionalTable& table) {
  if (!(p_suc1_rrs_value >= 0.0 && p_suc1_rrs_value <= 1.0)) {
    throw std::domain_error("pmf_k1_crs: p_suc1_rrs must lie in [0,1]");
  }
  const int n = p.n_channels;
  Pmf out;
  out.truncation_residual = table.residual_mass;
  std::vector<double> weights;
  for (int k = table.first_k; k <= table.last_k(); ++k) weights.push_back(poisson_pmf(k, p.m_bar));
  for (int k1 = 0; k1 <= n; ++k1) {
    double mass = detail::k1_mass_within_capacity(k1, n, p.m_bar, p_suc1_rrs_value);
    for (int k = table.first_k; k <= table.last_k(); ++k) {
      mass += binomial_pmf(k1, n, table.at(k)) * weights[static_cast<std::size_t>(k - table.first_k)];
    }
    out.support.push_back(k1);
    out.probs.push_back(mass);
  }
  return out;
}

inline Pmf pmf_k1_crs(const NetworkParams& p, double p_suc1_rrs_value, const std::function<double(int)>& cond_success,
                      int truncation_terms = 120) {
  CrsConditionalTable t;
  t.first_k = p.n_channels + 1;
  const int last = poisson_truncation(p.m_bar, p.n_channels, truncation_terms);
  for (int k = t.first_k; k <= last; ++k) t.values.push_back(cond_success(k));
  t.residual_mass = poisson_tail(last, p.m_bar);
  return pmf_k1_crs(p, p_suc1_rrs_value, t);
}

/// Active aggregators per cell: negative binomial with shape 3.5 and mean
/// λ'_a/λ_B (gamma-approximated Voronoi cell area).
inline Pmf pmf_na(const NetworkParams& p, double lambda_a_active) {
  if (!(lambda_a_active >= 0.0)) throw std::domain_error("pmf_na: lambda_a_active must be >= 0");
  constexpr double shape = 3.5;
  const double mu = lambda_a_active / p.lambda_b;
  Pmf out;
  if (mu == 0.0) {
    out.support = {0};
    out.probs = {1.0};
    return out;
  }
  const double log_q = std::log(shape / (shape + mu));
  const double log_r = std::log(mu / (shape + mu));
  const double r = mu / (shape + mu);
  for (int n = 0;; ++n) {
    const double lp = std::lgamma(n + shape) - std::lgamma(shape) - std::lgamma(n + 1.0) + shape * log_q + n * log_r;
    const double v = std::exp(lp);
    out.support.push_back(n);
    out.probs.push_back(v);
    if (n > mu) {
      // Successive ratios r(j+3.5)/(j+1) decrease, so a geometric bound holds.
      const double first = r * (n + shape) / (n + 1.0);
      const double ratio = r * (n + 1.0 + shape) / (n + 2.0);
      const double tail = v * first / (1.0 - ratio);
      if (ratio < 1.0 && tail < 1e-16) {
        out.truncation_residual = tail;
        break;
      }
    }
    if (n > 1000000) throw specfun::ConvergenceError("pmf_na: support did not truncate");
  }
  return out;
}

/// Probability that a cell holds no active aggregator.
inline double void_probability(const NetworkParams& p, double lambda_a_active) {
  if (!(lambda_a_active >= 0.0)) throw std::domain_error("void_probability: lambda_a_active must be >= 0");
  return std::pow(1.0 + lambda_a_active / (3.5 * p.lambda_b), -3.5);
}

/// Exponent g(s) of the inter-cell interference transform M_I2(s) = exp(g(s)).
inline double interference2_exponent(double alpha, double p_void, double s) {
  if (!(s >= 0.0)) throw std::domain_error("interference2_exponent: s must be >= 0");
  if (s == 0.0) return 0.0;
  const double d = 2.0 / alpha;
  return -2.0 * (1.0 - p_void) * s * specfun::hyp2f1(1.0, 1.0 - d, 2.0 - d, -s) / (alpha - 2.0);
}

inline double mgf_i2(double alpha, double p_void, double s) {
  return std::exp(interference2_exponent(alpha, p_void, s));
}

/// g^{(k)}(s), k >= 1, by differentiating ∫₁^∞ s·u/(s + u^α) du under the
/// integral sign and mapping u onto a smooth integrand on [0, 1].
inline double interference2_exponent_derivative(double alpha, double p_void, double s, int k) {
  if (k < 1) throw std::domain_error("interference2_exponent_derivative: k must be >= 1");
  const double d = 2.0 / alpha;
  const double q = 1.0 / (1.0 - d);
  const double expo = (k - 1.0) * q;
  auto f = [&](double v) {
    if (v <= 0.0) return k == 1 ? 1.0 : 0.0;
    return std::pow(v, expo) * std::pow(1.0 + s * std::pow(v, q), -(k + 1.0));
  };
  std::vector<double> pts{0.0, 1.0};
  if (s > 0.0) {
    const double v0 = std::pow(s, -(1.0 - d));
    for (int j = -6; j <= 2; ++j) {
      const double b = v0 * std::pow(10.0, j);
      if (b > 0.0 && b < 1.0) pts.push_back(b);
    }
  }
  std::sort(pts.begin(), pts.end());
  QuadratureSpec spec;
  spec.abs_tol = 1e-300;
  spec.rel_tol = 1e-12;
  spec.max_subdivisions = 4000;
  const double integral = integrate(f, pts, spec).value / (alpha * (1.0 - d));
  const double sign = (k % 2 == 1) ? 1.0 : -1.0;  // (-1)^{k+1}
  return -2.0 * (1.0 - p_void) * sign * std::tgamma(k + 1.0) * integral;
}

/// P(h' >= γ I₂) for h' ~ Gamma(m2, 1/m2): Σ_{t<m2} (-s)^t/t! · M^{(t)}(s), s = m2·γ.
inline double relay_link_success(double alpha, int m2, double p_void, double gamma) {
  const double s = m2 * gamma;
  if (!std::isfinite(s)) return 0.0;
  const double g0 = interference2_exponent(alpha, p_void, s);
  if (g0 < -745.0) return 0.0;
  std::vector<double> g;
  for (int k = 1; k < m2; ++k) g.push_back(interference2_exponent_derivative(alpha, p_void, s, k));
  const auto f = specfun::exp_derivatives(g0, g);
  return std::clamp(specfun::nakagami_success_sum(f, s), 0.0, 1.0);
}

struct RelayContext {
  double lambda_a_active = 0.0;
  double p_void = 1.0;
  Pmf pmf_k1;
  Pmf pmf_na;
  double payload_d = 1.0;
  double resource_tw = 1.0;

  /// Relaying SIR threshold when k1 channels' data shares the cell's
  /// T·W resource among na active aggregators.
  double gamma2(int k1, int na) const { return std::exp2(payload_d * k1 * na / resource_tw) - 1.0; }
};

inline RelayContext make_relay_context(const NetworkParams& p, const Pmf& pmf_k1) {
  RelayContext ctx;
  ctx.pmf_k1 = pmf_k1;
  ctx.lambda_a_active = std::clamp(1.0 - pmf_k1.at(0), 0.0, 1.0) * p.lambda_a;
  ctx.p_void = void_probability(p, ctx.lambda_a_active);
  ctx.pmf_na = pmf_na(p, ctx.lambda_a_active);
  ctx.payload_d = p.payload_d;
  ctx.resource_tw = p.resource_tw;
  return ctx;
}

namespace detail {

// Link success depends on (k1, na) only through the load k1·na; memoized per call site.
class LinkSuccessMemo {
 public:
  double operator()(const NetworkParams& p, const RelayContext& ctx, int k1, int na) {
    const std::size_t load = static_cast<std::size_t>(k1) * static_cast<std::size_t>(na);
    if (load >= values_.size()) values_.resize(load + 1, std::numeric_limits<double>::quiet_NaN());
    double& v = values_[load];
    if (std::isnan(v)) v = relay_link_success(p.alpha, p.m2, ctx.p_void, ctx.gamma2(k1, na));
    return v;
  }

 private:
  std::vector<double> values_;
};

inline double p_suc2_conditional_memo(const NetworkParams& p, const RelayContext& ctx, int k1, LinkSuccessMemo& memo) {
  if (k1 < 1 || k1 > p.n_channels) throw std::domain_error("p_suc2_conditional: k1 must lie in [1, N]");
  const double nonvoid = 1.0 - ctx.pmf_na.at(0);
  if (!(nonvoid > 0.0)) return memo(p, ctx, k1, 1);
  double acc = 0.0;
  for (std::size_t j = 0; j < ctx.pmf_na.size(); ++j) {
    const int na = ctx.pmf_na.support[j];
    if (na < 1) continue;
    const double w = ctx.pmf_na.probs[j] / nonvoid;
    const double link = memo(p, ctx, k1, na);
    // The threshold grows with na, so once the link is dead it stays dead.
    if (link == 0.0) break;
    acc += w * link;
  }
  return std::clamp(acc, 0.0, 1.0);
}

}  // namespace detail

/// Relaying success of an aggregator that decoded k1 channels, averaged
/// over the load of its cell.
inline double p_suc2_conditional(const NetworkParams& p, const RelayContext& ctx, int k1) {
  detail::LinkSuccessMemo memo;
  return detail::p_suc2_conditional_memo(p, ctx, k1, memo);
}

/// Rayleigh relaying link: the success bracket collapses to M_I2(γ₂).
inline double p_suc2_conditional_rayleigh(const NetworkParams& p, const RelayContext& ctx, int k1) {
  if (k1 < 1 || k1 > p.n_channels) throw std::domain_error("p_suc2_conditional_rayleigh: k1 must lie in [1, N]");
  const double nonvoid = 1.0 - ctx.pmf_na.at(0);
  double acc = 0.0;
  for (std::size_t j = 0; j < ctx.pmf_na.size(); ++j) {
    const int na = ctx.pmf_na.support[j];
    if (na < 1) continue;
    const double s = ctx.gamma2(k1, na);
    if (std::isfinite(s)) acc += ctx.pmf_na.probs[j] / nonvoid * mgf_i2(p.alpha, ctx.p_void, s);
  }
  return acc;
}

/// p_suc2_conditional for k1 = 1..N (index k1-1).
inline std::vector<double> p_suc2_table(const NetworkParams& p, const RelayContext& ctx) {
  std::vector<double> out(static_cast<std::size_t>(p.n_channels));
  detail::LinkSuccessMemo memo;
  for (int k1 = 1; k1 <= p.n_channels; ++k1) out[k1 - 1] = detail::p_suc2_conditional_memo(p, ctx, k1, memo);
  return out;
}

/// Relaying success at a typical BS, averaged over active aggregators' K₁.
inline double p_suc2_avg(const NetworkParams& p, const RelayContext& ctx, const std::vector<double>& table) {
  const double active = 1.0 - ctx.pmf_k1.at(0);
  if (!(active > 0.0)) return 0.0;
  double acc = 0.0;
  for (int k1 = 1; k1 <= p.n_channels; ++k1) acc += table[k1 - 1] * ctx.pmf_k1.at(k1) / active;
  return std::clamp(acc, 0.0, 1.0);
}

inline double p_suc2_avg(const NetworkParams& p, const RelayContext& ctx) {
  return p_suc2_avg(p, ctx, p_suc2_table(p, ctx));
}

}  // namespace mmtc
