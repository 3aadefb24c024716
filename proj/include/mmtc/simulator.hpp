/*
 * Copyright (c) 2026
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmtc/domain.hpp"
#include "mmtc/geometry.hpp"
#include "mmtc/parallel.hpp"
#include "mmtc/rng.hpp"

namespace mmtc {

struct SimConfig {
  long n_runs = 50000;
  std::uint64_t master_seed = 1;
  double r_bs_sim = 3000.0;
  double r_agg_sim = 6000.0;
  double measurement_radius = 2000.0;
  SchedulingScheme scheme = SchedulingScheme::RRS;
  /// Topology redraws allowed per realization before giving up.
  int max_attempts = 100;
  /// 0 selects worker_count().
  unsigned threads = 0;

  static SimConfig table1() { return {}; }

  static SimConfig desk() {
    SimConfig c;
    c.n_runs = 10000;
    c.r_bs_sim = 2000.0;
    c.r_agg_sim = 4000.0;
    c.measurement_radius = 1000.0;
    return c;
  }

  bool operator==(const SimConfig&) const = default;
};

inline void require_valid(const SimConfig& c) {
  if (c.n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
  if (!(c.r_bs_sim > 0.0) || !(c.r_agg_sim > 0.0)) throw std::invalid_argument("simulation disks must be positive");
  if (!(c.measurement_radius > 0.0) || c.measurement_radius > c.r_bs_sim)
    throw std::invalid_argument("measurement_radius must lie in (0, r_bs_sim]");
  if (c.r_agg_sim < c.r_bs_sim) throw std::invalid_argument("r_agg_sim must be >= r_bs_sim");
  if (c.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
}

class DegenerateTopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SimMetric : std::size_t {
  POccupy,
  PNonDrop,
  PSuc1,
  PSuc2,
  PMtdSuccess,
  AvgSuccessfulMtds,
  PChannelUtil,
  SuccessfulMtdsPerKm2,
  PMtdSuccessPooled,
  VoidCellFraction,
};

inline constexpr std::size_t kSimMetricCount = 10;

inline constexpr std::array<std::string_view, kSimMetricCount> kSimMetricNames = {
    "p_occupy",      "p_nondrop",           "p_suc1",         "p_suc2",
    "p_mtd_success", "avg_successful_mtds", "p_channel_util", "successful_mtds_per_km2",
    "p_mtd_success_pooled", "void_cell_fraction"};

inline std::string_view to_string(SimMetric m) { return kSimMetricNames[static_cast<std::size_t>(m)]; }

struct MetricEstimate {
  double mean = std::numeric_limits<double>::quiet_NaN();
  /// NaN when fewer than two realizations contributed.
  double standard_error = std::numeric_limits<double>::quiet_NaN();
  long sample_count = 0;
};

struct SimEstimate {
  double resource_tw = 0.0;
  long realizations = 0;
  long resamples = 0;
  std::array<MetricEstimate, kSimMetricCount> metrics{};
  /// Window aggregators by K1, pooled over realizations.
  std::vector<long> k1_histogram;

  const MetricEstimate& operator[](SimMetric m) const { return metrics[static_cast<std::size_t>(m)]; }
  MetricEstimate& operator[](SimMetric m) { return metrics[static_cast<std::size_t>(m)]; }

  Pmf k1_pmf() const {
    Pmf pmf;
    long total = 0;
    for (long c : k1_histogram) total += c;
    for (std::size_t k = 0; k < k1_histogram.size(); ++k) {
      pmf.support.push_back(static_cast<int>(k));
      pmf.probs.push_back(total > 0 ? static_cast<double>(k1_histogram[k]) / total : 0.0);
    }
    return pmf;
  }
};

/// Numerator and denominator of one metric within one realization. The
/// estimate is the pooled ratio over realizations, so every aggregator
/// (or BS) in every window carries equal weight.
struct RatioTally {
  double num = 0.0;
  double den = 0.0;
};

/// Per-realization tallies, one row of metrics per requested TW.
struct RealizationTally {
  long index = 0;
  int resamples = 0;
  std::vector<std::array<RatioTally, kSimMetricCount>> values;
  std::vector<int> k1_counts;
};

namespace detail {

struct Occupant {
  Point2 pos;
  double link2 = 0.0;  // squared MTD-aggregator distance, sets transmit power
  int agg = 0;
};

class RealizationEngine {
 public:
  RealizationEngine(const NetworkParams& p, const SimConfig& c, long index, std::optional<int> fixed_k)
      : p_(p), c_(c), index_(static_cast<std::uint64_t>(index)), fixed_k_(fixed_k) {}

  /// Samples topology and schedules; returns false when the window holds no BS.
  bool sample(std::uint32_t attempt, bool need_bs) {
    attempt_ = attempt;
    auto topo = stream(StreamTag::Topology, 0);
    bs_ = sample_hppp(p_.lambda_b, c_.r_bs_sim, topo);
    const double rw2 = c_.measurement_radius * c_.measurement_radius;
    if (need_bs) {
      const bool any = std::any_of(bs_.begin(), bs_.end(), [&](const Point2& b) { return b.norm2() <= rw2; });
      if (!any) return false;
    }
    aggs_ = sample_hppp(p_.lambda_a, c_.r_agg_sim, topo);
    const std::size_t na = aggs_.size();
    const int n = p_.n_channels;
    channels_.assign(na, {});
    gains_.assign(na, {});
    k_.assign(na, 0);
    occupants_.assign(static_cast<std::size_t>(n), {});
    for (std::size_t j = 0; j < na; ++j) schedule(j);

    agg_to_bs_.assign(na, -1);
    cells_.assign(bs_.size(), {});
    if (!bs_.empty()) {
      const auto nearest = associate_nearest(aggs_, bs_);
      const double rb2 = c_.r_bs_sim * c_.r_bs_sim;
      for (std::size_t j = 0; j < na; ++j) {
        if (aggs_[j].norm2() <= rb2) {
          agg_to_bs_[j] = nearest[j];
          cells_[static_cast<std::size_t>(nearest[j])].push_back(static_cast<int>(j));
        }
      }
    }
    k1_.assign(na, -1);
    sir2_.assign(na, std::numeric_limits<double>::quiet_NaN());
    n_active_.assign(bs_.size(), -1);
    interferer_.assign(bs_.size(), -2);
    return true;
  }

  std::size_t aggregator_count() const { return aggs_.size(); }
  const Point2& aggregator(std::size_t j) const { return aggs_[j]; }
  const Point2& base_station(std::size_t b) const { return bs_[b]; }
  std::size_t bs_count() const { return bs_.size(); }
  int cluster_size(std::size_t j) const { return k_[j]; }
  int scheduled(std::size_t j) const { return static_cast<int>(channels_[j].size()); }
  int serving_bs(std::size_t j) const { return agg_to_bs_[j]; }

  /// Number of scheduled channels of aggregator j that pass phase one.
  int k1(std::size_t j) {
    if (k1_[j] >= 0) return k1_[j];
    auto rng = stream(StreamTag::Phase1, j);
    std::exponential_distribution<double> fade(1.0);
    const double half_alpha = 0.5 * p_.alpha;
    int ok = 0;
    for (std::size_t s = 0; s < channels_[j].size(); ++s) {
      double interference = 0.0;
      for (const auto& o : occupants_[static_cast<std::size_t>(channels_[j][s])]) {
        if (o.agg == static_cast<int>(j)) continue;
        interference += fade(rng) * path_ratio(o.link2, distance2(o.pos, aggs_[j]), half_alpha);
      }
      if (gains_[j][s] >= p_.gamma1 * interference) ++ok;
    }
    k1_[j] = ok;
    return ok;
  }

  int active_count(std::size_t b) {
    if (n_active_[b] >= 0) return n_active_[b];
    int count = 0;
    for (int j : cells_[b]) count += k1(static_cast<std::size_t>(j)) > 0;
    n_active_[b] = count;
    return count;
  }

  /// Aggregator of cell b colliding with the observed relay block, or -1 for a void cell.
  int interferer(std::size_t b) {
    if (interferer_[b] != -2) return interferer_[b];
    auto order = cells_[b];
    auto rng = stream(StreamTag::Permutation, b);
    std::shuffle(order.begin(), order.end(), rng);
    int pick = -1;
    for (int j : order) {
      if (k1(static_cast<std::size_t>(j)) > 0) {
        pick = j;
        break;
      }
    }
    interferer_[b] = pick;
    return pick;
  }

  /// Relaying SIR of an active associated aggregator (independent of TW).
  double sir2(std::size_t a) {
    if (!std::isnan(sir2_[a])) return sir2_[a];
    const int b = agg_to_bs_[a];
    auto rng = stream(StreamTag::Relay, a);
    std::gamma_distribution<double> desired(p_.m2, 1.0 / p_.m2);
    std::exponential_distribution<double> fade(1.0);
    const double h = desired(rng);
    const double half_alpha = 0.5 * p_.alpha;
    double interference = 0.0;
    for (std::size_t other = 0; other < bs_.size(); ++other) {
      if (static_cast<int>(other) == b) continue;
      const int i = interferer(other);
      if (i < 0) continue;
      const auto& ai = aggs_[static_cast<std::size_t>(i)];
      interference += fade(rng) * path_ratio(distance2(ai, bs_[other]), distance2(ai, bs_[static_cast<std::size_t>(b)]),
                                             half_alpha);
    }
    sir2_[a] = interference > 0.0 ? h / interference : std::numeric_limits<double>::infinity();
    return sir2_[a];
  }

  bool relays(std::size_t a, double tw) {
    const int k1v = k1(a);
    const int b = agg_to_bs_[a];
    if (k1v == 0 || b < 0) return false;
    const double na = active_count(static_cast<std::size_t>(b));
    const double gamma2 = std::exp2(p_.payload_d * k1v * na / tw) - 1.0;
    return sir2(a) >= gamma2;
  }

 private:
  Xoshiro256 stream(StreamTag tag, std::size_t entity) const {
    return make_stream(c_.master_seed, index_, attempt_, tag, entity);
  }

  static double path_ratio(double num2, double den2, double half_alpha) {
    const double r = num2 / den2;
    return half_alpha == 2.0 ? r * r : std::pow(r, half_alpha);
  }

  void schedule(std::size_t j) {
    auto rng = stream(StreamTag::Cluster, j);
    int k = 0;
    if (fixed_k_) {
      k = *fixed_k_;
    } else if (p_.m_bar > 0.0) {
      k = std::poisson_distribution<int>(p_.m_bar)(rng);
    }
    k_[j] = k;
    if (k == 0) return;
    std::vector<Point2> mtds(static_cast<std::size_t>(k));
    for (auto& m : mtds) m = uniform_in_disk(aggs_[j], p_.r_s, rng);
    std::gamma_distribution<double> fading(p_.m1, 1.0 / p_.m1);
    std::vector<double> h(static_cast<std::size_t>(k));
    for (auto& v : h) v = fading(rng);

    const int n = p_.n_channels;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    const int s = std::min(k, n);
    if (k > n) {
      if (c_.scheme == SchedulingScheme::CRS) {
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return h[a] > h[b]; });
      } else {
        partial_shuffle(idx, s, rng);
      }
    }
    std::vector<int> chans(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) chans[static_cast<std::size_t>(c)] = c;
    partial_shuffle(chans, s, rng);

    channels_[j].resize(static_cast<std::size_t>(s));
    gains_[j].resize(static_cast<std::size_t>(s));
    for (int t = 0; t < s; ++t) {
      const auto mtd = static_cast<std::size_t>(idx[static_cast<std::size_t>(t)]);
      const int c = chans[static_cast<std::size_t>(t)];
      channels_[j][static_cast<std::size_t>(t)] = c;
      gains_[j][static_cast<std::size_t>(t)] = h[mtd];
      occupants_[static_cast<std::size_t>(c)].push_back({mtds[mtd], distance2(mtds[mtd], aggs_[j]), static_cast<int>(j)});
    }
  }

  /// Uniform random choice of the first `count` entries (Fisher-Yates prefix).
  static void partial_shuffle(std::vector<int>& v, int count, Xoshiro256& rng) {
    const auto n = v.size();
    for (std::size_t i = 0; i < static_cast<std::size_t>(count) && i + 1 < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(v[i], v[pick(rng)]);
    }
  }

  const NetworkParams& p_;
  const SimConfig& c_;
  std::uint64_t index_;
  std::optional<int> fixed_k_;
  std::uint32_t attempt_ = 0;

  std::vector<Point2> bs_;
  std::vector<Point2> aggs_;
  std::vector<std::vector<int>> channels_;
  std::vector<std::vector<double>> gains_;
  std::vector<int> k_;
  std::vector<std::vector<Occupant>> occupants_;
  std::vector<int> agg_to_bs_;
  std::vector<std::vector<int>> cells_;
  std::vector<int> k1_;
  std::vector<double> sir2_;
  std::vector<int> n_active_;
  std::vector<int> interferer_;
};

inline int sample_until_valid(RealizationEngine& eng, const SimConfig& c, long index, bool need_bs) {
  for (int attempt = 0; attempt < c.max_attempts; ++attempt) {
    if (eng.sample(static_cast<std::uint32_t>(attempt), need_bs)) return attempt;
  }
  throw DegenerateTopologyError("realization " + std::to_string(index) + ": no base station in the window after " +
                                std::to_string(c.max_attempts) + " attempts");
}


}  // namespace detail

/// One Monte-Carlo realization evaluated at every TW in `tws`. Topology,
/// scheduling and fading are shared across the TW values; only the relay
/// threshold changes.
inline RealizationTally run_realization(const NetworkParams& p, const SimConfig& c, long index,
                                        const std::vector<double>& tws) {
  detail::RealizationEngine eng(p, c, index, std::nullopt);
  RealizationTally t;
  t.index = index;
  t.resamples = detail::sample_until_valid(eng, c, index, true);
  const double rw2 = c.measurement_radius * c.measurement_radius;
  const double window_km2 = std::numbers::pi * rw2 * 1e-6;
  const double n = p.n_channels;

  std::vector<std::size_t> window;
  for (std::size_t j = 0; j < eng.aggregator_count(); ++j) {
    if (eng.aggregator(j).norm2() <= rw2) window.push_back(j);
  }
  std::vector<std::size_t> window_bs;
  for (std::size_t b = 0; b < eng.bs_count(); ++b) {
    if (eng.base_station(b).norm2() <= rw2) window_bs.push_back(b);
  }

  t.k1_counts.assign(static_cast<std::size_t>(p.n_channels) + 1, 0);
  double occupied = 0.0, nondrop_sum = 0.0, p1_sum = 0.0;
  long with_mtds = 0;
  for (auto j : window) {
    const int k = eng.cluster_size(j);
    const int s = eng.scheduled(j);
    const int k1 = eng.k1(j);
    ++t.k1_counts[static_cast<std::size_t>(k1)];
    occupied += s;
    if (k > 0) {
      ++with_mtds;
      nondrop_sum += static_cast<double>(s) / k;
      p1_sum += static_cast<double>(k1) / s;
    }
  }
  long void_cells = 0;
  for (auto b : window_bs) void_cells += eng.active_count(b) == 0;

  const auto nw = static_cast<double>(window.size());
  for (double tw : tws) {
    std::array<RatioTally, kSimMetricCount> row{};
    using M = SimMetric;
    auto set = [&](M m, double num, double den) { row[static_cast<std::size_t>(m)] = {num, den}; };
    set(M::POccupy, occupied, n * nw);
    set(M::PNonDrop, nondrop_sum, static_cast<double>(with_mtds));
    set(M::PSuc1, p1_sum, static_cast<double>(with_mtds));
    set(M::VoidCellFraction, static_cast<double>(void_cells), static_cast<double>(window_bs.size()));

    double delivered = 0.0, suc_sum = 0.0, mtds = 0.0;
    for (auto j : window) {
      const int k = eng.cluster_size(j);
      mtds += k;
      if (k == 0) continue;
      const int ok = eng.relays(j, tw) ? eng.k1(j) : 0;
      delivered += ok;
      suc_sum += static_cast<double>(ok) / k;
    }
    set(M::PMtdSuccess, suc_sum, static_cast<double>(with_mtds));
    set(M::PMtdSuccessPooled, delivered, mtds);
    set(M::AvgSuccessfulMtds, delivered, nw);
    set(M::PChannelUtil, delivered, nw * n);
    set(M::SuccessfulMtdsPerKm2, delivered, window_km2);

    double p2_sum = 0.0;
    long live_cells = 0;
    for (auto b : window_bs) {
      const int na = eng.active_count(b);
      if (na == 0) continue;
      int ok = 0;
      for (std::size_t j = 0; j < eng.aggregator_count(); ++j) {
        if (eng.serving_bs(j) == static_cast<int>(b) && eng.k1(j) > 0) ok += eng.relays(j, tw);
      }
      p2_sum += static_cast<double>(ok) / na;
      ++live_cells;
    }
    set(M::PSuc2, p2_sum, static_cast<double>(live_cells));
    t.values.push_back(row);
  }
  return t;
}

namespace detail {

inline MetricEstimate summarize(const std::vector<RealizationTally>& tallies, std::size_t tw_index, std::size_t metric) {
  double num = 0.0, den = 0.0;
  for (const auto& t : tallies) {
    num += t.values[tw_index][metric].num;
    den += t.values[tw_index][metric].den;
  }
  MetricEstimate e;
  if (!(den > 0.0)) return e;
  const auto n = static_cast<double>(tallies.size());
  e.sample_count = static_cast<long>(tallies.size());
  e.mean = num / den;
  if (tallies.size() > 1) {
    // Delta-method (linearized) standard error of a ratio estimator.
    double ss = 0.0;
    for (const auto& t : tallies) {
      const auto& v = t.values[tw_index][metric];
      const double r = v.num - e.mean * v.den;
      ss += r * r;
    }
    e.standard_error = std::sqrt(ss / (n - 1.0) / n) / (den / n);
  }
  return e;
}

inline std::vector<SimEstimate> reduce(const std::vector<RealizationTally>& tallies, const std::vector<double>& tws,
                                       int n_channels) {
  std::vector<SimEstimate> out(tws.size());
  long resamples = 0;
  std::vector<long> hist(static_cast<std::size_t>(n_channels) + 1, 0);
  for (const auto& t : tallies) {
    resamples += t.resamples;
    for (std::size_t k = 0; k < t.k1_counts.size() && k < hist.size(); ++k) hist[k] += t.k1_counts[k];
  }
  for (std::size_t w = 0; w < tws.size(); ++w) {
    auto& e = out[w];
    e.resource_tw = tws[w];
    e.realizations = static_cast<long>(tallies.size());
    e.resamples = resamples;
    e.k1_histogram = hist;
    for (std::size_t m = 0; m < kSimMetricCount; ++m) e.metrics[m] = summarize(tallies, w, m);
  }
  return out;
}

}  // namespace detail

/// All realizations for one parameter set, evaluated at each TW in `tws`
/// from the same draws. Runs in parallel; output does not depend on the
/// thread count.
inline std::vector<RealizationTally> run_realizations(const NetworkParams& p, const SimConfig& c,
                                                      const std::vector<double>& tws) {
  require_valid(p);
  require_valid(c);
  if (tws.empty()) throw std::invalid_argument("at least one TW value is required");
  for (double tw : tws) {
    if (!(tw > 0.0)) throw std::invalid_argument("resource_tw must be > 0");
  }
  std::vector<RealizationTally> tallies(static_cast<std::size_t>(c.n_runs));
  parallel_for(
      tallies.size(),
      [&](std::size_t i) { tallies[i] = run_realization(p, c, static_cast<long>(i), tws); },
      c.threads == 0 ? worker_count() : c.threads);
  return tallies;
}

inline std::vector<SimEstimate> estimate_tw_grid(const NetworkParams& p, const SimConfig& c,
                                                 const std::vector<double>& tws) {
  return detail::reduce(run_realizations(p, c, tws), tws, p.n_channels);
}

inline SimEstimate estimate(const NetworkParams& p, const SimConfig& c) {
  return estimate_tw_grid(p, c, {p.resource_tw}).front();
}

/// Phase-one success per scheduled channel with every cluster holding
/// exactly `fixed_k` MTDs. Only p_suc1 is populated.
inline SimEstimate conditional_phase1_estimate(const NetworkParams& p, const SimConfig& c, int fixed_k) {
  require_valid(p);
  require_valid(c);
  if (fixed_k < 1) throw std::invalid_argument("fixed_k must be >= 1");
  std::vector<RealizationTally> tallies(static_cast<std::size_t>(c.n_runs));
  const double rw2 = c.measurement_radius * c.measurement_radius;
  parallel_for(
      tallies.size(),
      [&](std::size_t i) {
        detail::RealizationEngine eng(p, c, static_cast<long>(i), fixed_k);
        auto& t = tallies[i];
        t.index = static_cast<long>(i);
        t.resamples = detail::sample_until_valid(eng, c, t.index, false);
        t.k1_counts.assign(static_cast<std::size_t>(p.n_channels) + 1, 0);
        double sum = 0.0;
        long count = 0;
        for (std::size_t j = 0; j < eng.aggregator_count(); ++j) {
          if (eng.aggregator(j).norm2() > rw2) continue;
          const int k1 = eng.k1(j);
          ++t.k1_counts[static_cast<std::size_t>(k1)];
          sum += static_cast<double>(k1) / eng.scheduled(j);
          ++count;
        }
        std::array<RatioTally, kSimMetricCount> row{};
        row[static_cast<std::size_t>(SimMetric::PSuc1)] = {sum, static_cast<double>(count)};
        t.values.push_back(row);
      },
      c.threads == 0 ? worker_count() : c.threads);
  return detail::reduce(tallies, {p.resource_tw}, p.n_channels).front();
}

/// Raw tallies, one row per realization and TW value.
inline void write_tallies_csv(std::ostream& os, const std::vector<RealizationTally>& tallies,
                              const std::vector<double>& tws) {
  os << "realization,resamples,resource_tw";
  for (auto name : kSimMetricNames) os << ',' << name << "_num," << name << "_den";
  os << '\n';
  char buf[64];
  for (const auto& t : tallies) {
    for (std::size_t w = 0; w < t.values.size(); ++w) {
      os << t.index << ',' << t.resamples << ',';
      std::snprintf(buf, sizeof buf, "%.17g", tws[w]);
      os << buf;
      for (const auto& v : t.values[w]) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g", v.num, v.den);
        os << buf;
      }
      os << '\n';
    }
  }
}

}  // namespace mmtc
