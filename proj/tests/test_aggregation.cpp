/*
 * Copyright (c) 2026
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <thread>
#include <vector>

#include "mmtc/aggregation.hpp"

using namespace mmtc;

namespace {

NetworkParams with(int n, double m_bar) {
  auto p = default_params();
  p.n_channels = n;
  p.m_bar = m_bar;
  return p;
}

double poisson_sum(double m_bar, const std::function<double(int)>& f) {
  double acc = 0.0;
  double log_p = -m_bar;
  for (int k = 0; k <= 400; ++k) {
    if (k > 0) log_p += std::log(m_bar) - std::log(static_cast<double>(k));
    acc += f(k) * std::exp(log_p);
  }
  return acc;
}

double occupy_oracle(int n, double m_bar) {
  return poisson_sum(m_bar, [n](int k) { return std::min(k, n) / static_cast<double>(n); });
}

double nondrop_oracle(int n, double m_bar) {
  return poisson_sum(m_bar, [n](int k) { return k <= n ? 1.0 : static_cast<double>(n) / k; });
}

// P(h >= γ I) for α = 4, where I is Levy with CDF erfc(C / (2 sqrt x)).
double levy_success_oracle(double c, double gamma, int m1) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  auto density = [&](double x) {
    return c / (2.0 * std::sqrt(std::numbers::pi)) * std::exp(-1.5 * std::log(x) - c * c / (4.0 * x));
  };
  // x = u / (1 - u) maps [0, 1) onto the half-line.
  return integrator.integrate(
      [&](double u) {
        if (u <= 0.0 || u >= 1.0) return 0.0;
        const double x = u / (1.0 - u);
        return boost::math::gamma_q(static_cast<double>(m1), m1 * gamma * x) * density(x) / ((1.0 - u) * (1.0 - u));
      },
      0.0, 1.0);
}

}  // namespace

TEST(Occupy, GoldenValues) {
  EXPECT_NEAR(p_occupy(with(1, 1.0)), 1.0 - std::exp(-1.0), 1e-12);
  EXPECT_NEAR(p_occupy(with(2, 1.0)), (2.0 - 3.0 * std::exp(-1.0)) / 2.0, 1e-12);
  EXPECT_NEAR(p_occupy(with(70, 70.0)), occupy_oracle(70, 70.0), 1e-10);
}

TEST(Occupy, MatchesAlgebraicIncompleteGammaForm) {
  for (int n : {1, 2, 5, 30, 70, 120}) {
    for (double m : {0.5, 1.0, 10.0, 70.0}) {
      const double nn = n;
      const double g1 = boost::math::tgamma(1.0 + nn, m);
      const double alt = 1.0 - g1 / boost::math::tgamma(1.0 + nn) +
                         (m * g1 - std::exp(-m) * std::pow(m, nn + 1.0)) / (nn * nn * boost::math::tgamma(nn));
      EXPECT_NEAR(p_occupy(with(n, m)), alt, 1e-10) << n << " " << m;
    }
  }
}

TEST(Occupy, MatchesPoissonSumOracleOnGrid) {
  for (int n : {1, 2, 5, 30, 70, 120}) {
    for (double m : {0.5, 1.0, 10.0, 70.0}) {
      EXPECT_NEAR(p_occupy(with(n, m)), occupy_oracle(n, m), 1e-8) << n << " " << m;
    }
  }
}

TEST(NonDrop, GoldenValuesAndOracle) {
  const double tail = poisson_sum(1.0, [](int k) { return k >= 2 ? 1.0 / k : 0.0; });
  EXPECT_NEAR(p_nondrop(with(1, 1.0)), 2.0 * std::exp(-1.0) + tail, 1e-10);
  EXPECT_NEAR(p_nondrop(with(1, 1.0)), 0.8527, 1e-4);
  EXPECT_NEAR(p_nondrop(with(200, 70.0)), 1.0, 1e-9);
  EXPECT_NEAR(p_nondrop(with(3, 1e-9)), 1.0, 1e-12);
  for (int n : {1, 2, 5, 30, 70, 120}) {
    for (double m : {0.5, 1.0, 10.0, 70.0}) {
      EXPECT_NEAR(p_nondrop(with(n, m)), nondrop_oracle(n, m), 1e-8) << n << " " << m;
    }
  }
}

TEST(ChannelUsage, IndependentOfDensitiesAndPathLoss) {
  auto base = with(10, 20.0);
  auto other = base;
  other.lambda_a *= 7.0;
  other.lambda_b *= 0.3;
  other.alpha = 3.1;
  other.gamma1 = 5.0;
  EXPECT_EQ(p_occupy(base), p_occupy(other));
  EXPECT_EQ(p_nondrop(base), p_nondrop(other));
}

TEST(ChannelUsage, MonotoneInChannelsAndLoad) {
  for (double m : {1.0, 10.0, 70.0}) {
    for (int n = 1; n < 150; ++n) {
      EXPECT_LE(p_occupy(with(n + 1, m)), p_occupy(with(n, m)) + 1e-15);
      EXPECT_GE(p_nondrop(with(n + 1, m)), p_nondrop(with(n, m)) - 1e-15);
    }
  }
  for (int n : {1, 10, 70}) {
    for (double m = 0.5; m < 100.0; m += 0.5) {
      EXPECT_GE(p_occupy(with(n, m + 0.5)), p_occupy(with(n, m)) - 1e-15);
      EXPECT_LE(p_nondrop(with(n, m + 0.5)), p_nondrop(with(n, m)) + 1e-15);
    }
  }
}

TEST(InterferenceMgf, DirectSubstitution) {
  const auto p = with(70, 70.0);
  EXPECT_EQ(mgf_i1(p, 0.0), 1.0);
  const double po = occupy_oracle(70, 70.0);
  const double want = std::exp(-po * std::pow(10.0, -4.5) * std::numbers::pi * 1250.0 * std::tgamma(1.5) * std::tgamma(0.5));
  EXPECT_NEAR(mgf_i1(p, 1.0), want, 1e-12);
  auto sparse = p;
  sparse.lambda_a = 1e-300;
  EXPECT_NEAR(mgf_i1(sparse, 50.0), 1.0, 1e-15);
}

TEST(SuccessRrs, RayleighReducesToMgf) {
  auto p = with(30, 70.0);
  p.m1 = 1;
  for (double g : {0.1, 1.0, 3.0}) {
    p.gamma1 = g;
    EXPECT_NEAR(p_suc1_rrs(p), mgf_i1(p, g), 1e-15);
  }
}

TEST(SuccessRrs, MatchesLevyMixtureOracleAtAlphaFour) {
  for (int m1 : {1, 2, 4}) {
    for (double g : {0.5, 1.0, 4.0}) {
      auto p = with(10, 70.0);
      p.m1 = m1;
      p.gamma1 = g;
      p.lambda_a = 3e-4;
      const double c = interference1_coefficient(p);
      EXPECT_NEAR(p_suc1_rrs(p), levy_success_oracle(c, g, m1), 1e-9) << m1 << " " << g;
    }
  }
}

TEST(SuccessRrs, VanishingThresholdAndMonotonicity) {
  auto p = default_params();
  p.gamma1 = 1e-12;
  EXPECT_NEAR(p_suc1_rrs(p), 1.0, 1e-6);
  const auto base = default_params();
  const double v = p_suc1_rrs(base);
  auto q = base;
  q.lambda_a *= 2;
  EXPECT_LT(p_suc1_rrs(q), v);
  q = base;
  q.r_s *= 1.5;
  EXPECT_LT(p_suc1_rrs(q), v);
  q = base;
  q.m_bar *= 1.5;
  EXPECT_LE(p_suc1_rrs(q), v);
  q = base;
  q.n_channels += 20;
  EXPECT_GE(p_suc1_rrs(q), v);
}

TEST(OrderStats, ExponentialHarmonicIdentity) {
  EXPECT_NEAR(order_stat_mean(1, 1, 1), 1.0, 1e-12);
  EXPECT_NEAR(order_stat_mean(1, 2, 1), 1.5, 1e-12);
  EXPECT_NEAR(order_stat_mean(1, 2, 2), 0.5, 1e-12);
  for (int k : {5, 30, 150}) {
    for (int i = 1; i <= k; i += std::max(1, k / 7)) {
      double h = 0.0;
      for (int j = i; j <= k; ++j) h += 1.0 / j;
      EXPECT_LT(std::abs(order_stat_mean(1, k, i) - h) / h, 1e-9) << k << " " << i;
    }
  }
}

TEST(OrderStats, MonotoneAndSumToSampleTotal) {
  for (int m1 : {1, 2, 4}) {
    for (int k : {3, 20, 90}) {
      double sum = 0.0;
      double prev = INFINITY;
      for (int i = 1; i <= k; ++i) {
        const double v = order_stat_mean(m1, k, i);
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, prev);
        prev = v;
        sum += v;
      }
      EXPECT_NEAR(sum, k, 1e-6) << m1 << " " << k;
    }
  }
  EXPECT_THROW(order_stat_mean(1, 3, 4), std::domain_error);
}

TEST(OrderStats, MatchesSortedGammaSamples) {
  std::mt19937_64 rng(12345);
  std::gamma_distribution<double> gamma(4.0, 0.25);
  constexpr int kDraws = 1000000;
  double sum = 0.0, sum2 = 0.0;
  std::array<double, 5> xs{};
  for (int r = 0; r < kDraws; ++r) {
    for (auto& x : xs) x = gamma(rng);
    std::nth_element(xs.begin(), xs.begin() + 2, xs.end(), std::greater<>());
    sum += xs[2];
    sum2 += xs[2] * xs[2];
  }
  const double mean = sum / kDraws;
  const double se = std::sqrt((sum2 / kDraws - mean * mean) / kDraws);
  EXPECT_NEAR(order_stat_mean(4, 5, 3), mean, 3.0 * se);
}

TEST(OrderStats, ConcurrentCallsAgreeWithSerial) {
  std::vector<double> serial;
  for (int i = 1; i <= 40; ++i) serial.push_back(detail::order_stat_mean_uncached(3, 40, i));
  std::vector<double> got(40 * 8);
  std::vector<std::thread> pool;
  for (int t = 0; t < 8; ++t) {
    pool.emplace_back([&, t] {
      for (int i = 1; i <= 40; ++i) got[t * 40 + i - 1] = order_stat_mean(3, 40, ((i + 5 * t) % 40) + 1);
    });
  }
  for (auto& th : pool) th.join();
  for (int t = 0; t < 8; ++t) {
    for (int i = 1; i <= 40; ++i) EXPECT_EQ(got[t * 40 + i - 1], serial[(i + 5 * t) % 40]);
  }
}

TEST(SuccessCrs, ConditionalMatchesLevyClosedForm) {
  auto p = with(30, 70.0);
  const double c = interference1_coefficient(p);
  for (int k : {31, 70, 120}) {
    double want = 0.0;
    for (int i = 1; i <= 30; ++i) want += std::erfc(c / (2.0 * std::sqrt(order_stat_mean(4, k, i) / p.gamma1)));
    want /= 30.0;
    EXPECT_NEAR(p_suc1_crs_conditional(p, k), want, 1e-7) << k;
  }
}

TEST(SuccessCrs, ConditionalStructure) {
  auto p = with(1, 70.0);
  const double c = interference1_coefficient(p);
  EXPECT_NEAR(p_suc1_crs_conditional(p, 2), std::erfc(c / (2.0 * std::sqrt(order_stat_mean(4, 2, 1)))), 1e-7);
  p.gamma1 = 1e-9;
  EXPECT_NEAR(p_suc1_crs_conditional(p, 5), 1.0, 1e-3);
  EXPECT_THROW(p_suc1_crs_conditional(p, 1), std::domain_error);
}

TEST(SuccessCrs, ConvergesToRrsForManyChannels) {
  const auto p = with(static_cast<int>(70 + 10 * std::sqrt(70.0)) + 1, 70.0);
  EXPECT_NEAR(p_suc1_crs(p), p_suc1_rrs(p), 1e-4);
}

TEST(SuccessCrs, BeatsRrsForFewChannels) {
  const auto p = with(10, 70.0);
  EXPECT_GT(p_suc1_crs(p), p_suc1_rrs(p));
}
