/*
 * Copyright (c) 2026
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmtc/aggregation.hpp"
#include "mmtc/domain.hpp"
#include "mmtc/parallel.hpp"
#include "mmtc/relaying.hpp"

namespace mmtc {

namespace detail {

inline MetricsReport assemble(const NetworkParams& p, double p_suc1, const Pmf& pmf_k1) {
  MetricsReport r;
  r.p_occupy = p_occupy(p);
  r.p_nondrop = p_nondrop(p);
  r.p_suc1 = p_suc1;
  r.pmf_k1 = pmf_k1;
  const auto ctx = make_relay_context(p, pmf_k1);
  const auto table = p_suc2_table(p, ctx);
  r.p_suc2 = p_suc2_avg(p, ctx, table);
  double k_suc = 0.0;
  for (int k1 = 1; k1 <= p.n_channels; ++k1) k_suc += k1 * pmf_k1.at(k1) * table[k1 - 1];
  r.avg_successful_mtds = k_suc;
  r.successful_mtds_per_km2 = p.lambda_a * k_suc * 1e6;
  return r;
}

}  // namespace detail

/// Headline metrics for one parameter set at several TW values. The
/// aggregation phase does not depend on TW, so it is evaluated once.
///
/// Under random scheduling the two phases are treated as independent. Under
/// channel-aware scheduling non-drop and phase-one success are coupled
/// through the number of contenders, so both sums run over K jointly.
inline std::vector<MetricsReport> evaluate_tw_grid(const NetworkParams& p, SchedulingScheme scheme,
                                                   const std::vector<double>& tws, unsigned threads = 1) {
  require_valid(p);
  std::vector<NetworkParams> at;
  for (double tw : tws) {
    at.push_back(p);
    at.back().resource_tw = tw;
    require_valid(at.back());
  }
  const double p1r = p_suc1_rrs(p);
  double p1 = p1r;
  Pmf pmf;
  // p_mtd_success and p_channel_util before the relaying factor.
  double mtd_factor = 0.0;
  double util_factor = 0.0;
  if (scheme == SchedulingScheme::RRS) {
    pmf = pmf_k1_rrs(p, p1r);
    mtd_factor = p_nondrop(p) * p1r;
    util_factor = p_occupy(p) * p1r;
  } else {
    const auto table = crs_conditional_table(p, 120, threads);
    p1 = p_suc1_crs(p, p1r, table);
    pmf = pmf_k1_crs(p, p1r, table);
    const double n = p.n_channels;
    const double m = p.m_bar;
    double drop_sum = 0.0;
    double util_sum = 0.0;
    for (int k = table.first_k; k <= table.last_k(); ++k) {
      const double w = table.at(k) * poisson_pmf(k, m);
      drop_sum += n / k * w;
      util_sum += w;
    }
    mtd_factor = specfun::gamma_q(n + 1.0, m) * p1r + drop_sum;
    util_factor = (m / n) * specfun::gamma_q(n, m) * p1r + util_sum;
  }
  std::vector<MetricsReport> out;
  for (const auto& q : at) {
    auto r = detail::assemble(q, p1, pmf);
    r.p_mtd_success = mtd_factor * r.p_suc2;
    r.p_channel_util = util_factor * r.p_suc2;
    out.push_back(std::move(r));
  }
  return out;
}

inline MetricsReport evaluate_rrs(const NetworkParams& p) {
  return evaluate_tw_grid(p, SchedulingScheme::RRS, {p.resource_tw}).front();
}

inline MetricsReport evaluate_crs(const NetworkParams& p, unsigned threads = 1) {
  return evaluate_tw_grid(p, SchedulingScheme::CRS, {p.resource_tw}, threads).front();
}

inline MetricsReport evaluate(const NetworkParams& p, SchedulingScheme scheme, unsigned threads = 1) {
  return evaluate_tw_grid(p, scheme, {p.resource_tw}, threads).front();
}

enum class SweepAxis { ResourceTw, NChannels, LambdaA, Alpha, MBar, Gamma1 };

inline std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::ResourceTw: return "resource_tw";
    case SweepAxis::NChannels: return "n_channels";
    case SweepAxis::LambdaA: return "lambda_a";
    case SweepAxis::Alpha: return "alpha";
    case SweepAxis::MBar: return "m_bar";
    case SweepAxis::Gamma1: return "gamma1";
  }
  return "?";
}

inline SweepAxis parse_axis(std::string_view s) {
  for (auto a : {SweepAxis::ResourceTw, SweepAxis::NChannels, SweepAxis::LambdaA, SweepAxis::Alpha, SweepAxis::MBar,
                 SweepAxis::Gamma1}) {
    if (to_string(a) == s) return a;
  }
  throw std::invalid_argument("unknown sweep axis '" + std::string(s) + "'");
}

inline NetworkParams with_axis(NetworkParams p, SweepAxis axis, double x) {
  switch (axis) {
    case SweepAxis::ResourceTw: p.resource_tw = x; break;
    case SweepAxis::NChannels: p.n_channels = static_cast<int>(std::lround(x)); break;
    case SweepAxis::LambdaA: p.lambda_a = x; break;
    case SweepAxis::Alpha: p.alpha = x; break;
    case SweepAxis::MBar: p.m_bar = x; break;
    case SweepAxis::Gamma1: p.gamma1 = x; break;
  }
  return p;
}

struct SweepPoint {
  double x = 0.0;
  std::optional<MetricsReport> report;
  std::string error;
};

/// Evaluates every grid point independently (in parallel); a failing point
/// records its error and the rest of the sweep continues.
inline std::vector<SweepPoint> sweep(const NetworkParams& base, SweepAxis axis, const std::vector<double>& grid,
                                     SchedulingScheme scheme, unsigned threads = worker_count()) {
  if (grid.empty()) throw std::invalid_argument("sweep: grid must be non-empty");
  std::vector<SweepPoint> out(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t i) {
        out[i].x = grid[i];
        try {
          out[i].report = evaluate(with_axis(base, axis, grid[i]), scheme);
        } catch (const std::exception& e) {
          out[i].error = e.what();
        }
      },
      threads);
  return out;
}

}  // namespace mmtc
