/*
 * Copyright (c) 2026
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

namespace mmtc {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
};

inline double distance2(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double distance(const Point2& a, const Point2& b) { return std::sqrt(distance2(a, b)); }

/// Uniform point in a disk of the given radius about `center`.
template <class Rng>
Point2 uniform_in_disk(Point2 center, double radius, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * std::sqrt(u(rng));
  const double th = 2.0 * std::numbers::pi * u(rng);
  return {center.x + r * std::cos(th), center.y + r * std::sin(th)};
}

/// Homogeneous Poisson process of the given density on a disk about the origin.
template <class Rng>
std::vector<Point2> sample_hppp(double density, double radius, Rng& rng) {
  if (!(density >= 0.0) || !(radius > 0.0)) throw std::domain_error("sample_hppp: need density >= 0, radius > 0");
  if (density == 0.0) return {};
  std::poisson_distribution<long> count(density * std::numbers::pi * radius * radius);
  const long n = count(rng);
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) pts.push_back(uniform_in_disk({0.0, 0.0}, radius, rng));
  return pts;
}

/// Offspring of one cluster: Poisson(m_bar) points uniform on a disk of radius r_s.
template <class Rng>
std::vector<Point2> sample_cluster(Point2 center, double m_bar, double r_s, Rng& rng) {
  if (!(m_bar >= 0.0)) throw std::domain_error("sample_cluster: m_bar must be >= 0");
  if (m_bar == 0.0) return {};
  std::poisson_distribution<int> count(m_bar);
  const int n = count(rng);
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pts.push_back(uniform_in_disk(center, r_s, rng));
  return pts;
}

/// Index of the closest BS for each aggregator (lowest index on ties).
inline std::vector<int> associate_nearest(const std::vector<Point2>& agg_points, const std::vector<Point2>& bs_points) {
  if (bs_points.empty()) throw std::invalid_argument("associate_nearest: no base stations");
  std::vector<int> out(agg_points.size());
  for (std::size_t i = 0; i < agg_points.size(); ++i) {
    int best = 0;
    double best_d = distance2(agg_points[i], bs_points[0]);
    for (std::size_t b = 1; b < bs_points.size(); ++b) {
      const double d = distance2(agg_points[i], bs_points[b]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(b);
      }
    }
    out[i] = best;
  }
  return out;
}

/// One draw of the two-tier deployment. Aggregators outside the BS disk
/// are kept as interferers but not associated (agg_to_bs = -1).
struct NetworkRealization {
  std::vector<Point2> bs_points;
  std::vector<Point2> agg_points;
  std::vector<std::vector<Point2>> mtd_clusters;
  std::vector<int> agg_to_bs;
};

template <class Rng>
NetworkRealization sample_network(double lambda_b, double lambda_a, double m_bar, double r_s, double r_bs_sim,
                                  double r_agg_sim, Rng& rng) {
  NetworkRealization net;
  net.bs_points = sample_hppp(lambda_b, r_bs_sim, rng);
  net.agg_points = sample_hppp(lambda_a, r_agg_sim, rng);
  for (const auto& a : net.agg_points) net.mtd_clusters.push_back(sample_cluster(a, m_bar, r_s, rng));
  net.agg_to_bs.assign(net.agg_points.size(), -1);
  if (!net.bs_points.empty()) {
    const auto nearest = associate_nearest(net.agg_points, net.bs_points);
    for (std::size_t i = 0; i < net.agg_points.size(); ++i) {
      if (net.agg_points[i].norm() <= r_bs_sim) net.agg_to_bs[i] = nearest[i];
    }
  }
  return net;
}

/// CSV dump with columns entity_type,id,x_m,y_m,parent_id.
inline void write_realization_csv(std::ostream& os, const NetworkRealization& net) {
  os << "entity_type,id,x_m,y_m,parent_id\n";
  char buf[160];
  for (std::size_t i = 0; i < net.bs_points.size(); ++i) {
    std::snprintf(buf, sizeof buf, "bs,%zu,%.6f,%.6f,\n", i, net.bs_points[i].x, net.bs_points[i].y);
    os << buf;
  }
  for (std::size_t i = 0; i < net.agg_points.size(); ++i) {
    std::snprintf(buf, sizeof buf, "aggregator,%zu,%.6f,%.6f,%d\n", i, net.agg_points[i].x, net.agg_points[i].y,
                  net.agg_to_bs[i]);
    os << buf;
  }
  std::size_t id = 0;
  for (std::size_t i = 0; i < net.mtd_clusters.size(); ++i) {
    for (const auto& m : net.mtd_clusters[i]) {
      std::snprintf(buf, sizeof buf, "mtd,%zu,%.6f,%.6f,%zu\n", id++, m.x, m.y, i);
      os << buf;
    }
  }
}

}  // namespace mmtc
