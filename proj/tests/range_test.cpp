/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/range.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "pdm2/error.hpp"

namespace pdm2 {
namespace {

TEST(FitRangeModel, RecoversExactQuadratic) {
  const double b2 = -4.0e6, b1 = 3.43e5, b0 = -16.4;  // mm/s^2, mm/s, mm
  std::vector<RangeSample> samples;
  for (int i = 0; i <= 10; ++i) {
    const double t = 60e-6 + 2e-6 * i;
    samples.push_back({t, b2 * t * t + b1 * t + b0, 1.0});
  }
  const RangeModel m = FitRangeModel(samples, Modality::kOptoacoustic);
  EXPECT_NEAR(m.beta2 / b2, 1.0, 1e-7);
  EXPECT_NEAR(m.beta1 / b1, 1.0, 1e-7);
  EXPECT_NEAR(m.beta0, b0, 1e-6);
  EXPECT_LT(m.residual_max_mm, 1e-9);
  EXPECT_DOUBLE_EQ(m.tof_min, 60e-6);
  EXPECT_DOUBLE_EQ(m.tof_max, 80e-6);
  EXPECT_EQ(m.sample_count, samples.size());
}

// Oracle: weighted normal equations in microseconds.
Eigen::Vector3d NormalEquations(const std::vector<RangeSample>& s) {
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (const RangeSample& r : s) {
    const double u = r.tof_s * 1e6;
    const Eigen::Vector3d x(u * u, u, 1.0);
    a += x * x.transpose() / r.sigma;
    b += x * r.true_mm / r.sigma;
  }
  const Eigen::Vector3d c = a.ldlt().solve(b);
  return {c(0) * 1e12, c(1) * 1e6, c(2)};
}

TEST(FitRangeModel, MatchesNormalEquations) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 0.05);
  std::uniform_real_distribution<double> var(0.001, 0.05);
  std::vector<RangeSample> s;
  for (int i = 0; i < 40; ++i) {
    const double t = 55e-6 + 0.8e-6 * i;
    s.push_back({t, 0.343e6 * t - 16.0 + 0.3 * std::sin(i * 0.4) + g(rng), var(rng)});
  }
  const RangeModel m = FitRangeModel(s, Modality::kUltrasound);
  const Eigen::Vector3d oracle = NormalEquations(s);
  EXPECT_NEAR(m.beta2, oracle(0), 1e-6 * std::abs(oracle(0)));
  EXPECT_NEAR(m.beta1, oracle(1), 1e-6 * std::abs(oracle(1)));
  EXPECT_NEAR(m.beta0, oracle(2), 1e-6 * (1.0 + std::abs(oracle(2))));
}

TEST(FitRangeModel, DuplicateEqualsHalfVariance) {
  std::vector<RangeSample> a{{60e-6, 4.0, 0.01}, {70e-6, 7.5, 0.01}, {80e-6, 10.8, 0.01},
                             {90e-6, 14.9, 0.01}};
  std::vector<RangeSample> b = a;
  b.push_back(a[1]);
  std::vector<RangeSample> c = a;
  c[1].sigma = 0.005;
  const RangeModel mb = FitRangeModel(b, Modality::kOptoacoustic);
  const RangeModel mc = FitRangeModel(c, Modality::kOptoacoustic);
  EXPECT_NEAR(mb.beta2, mc.beta2, 1e-6 * std::abs(mc.beta2));
  EXPECT_NEAR(mb.beta1, mc.beta1, 1e-6 * std::abs(mc.beta1));
  EXPECT_NEAR(mb.beta0, mc.beta0, 1e-8);
}

TEST(FitRangeModel, Degenerate) {
  std::vector<RangeSample> s{{60e-6, 4.0, 1.0}, {60e-6, 4.1, 1.0}, {70e-6, 7.0, 1.0}};
  try {
    FitRangeModel(s, Modality::kOptoacoustic);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateDesign);
  }
  s.push_back({-1.0, 1.0, 1.0});
  EXPECT_THROW(FitRangeModel(s, Modality::kOptoacoustic), Error);
}

TEST(Rectify, MonotoneInsideAndFlagsOutside) {
  std::vector<RangeSample> s;
  for (int i = 0; i <= 20; ++i) {
    const double t = 60e-6 + 1e-6 * i;
    s.push_back({t, 0.343e6 * t - 16.4 + 0.01 * std::sin(i), 0.01});
  }
  const RangeModel m = FitRangeModel(s, Modality::kOptoacoustic);
  double last = -1e300;
  for (double t = m.tof_min; t <= m.tof_max; t += 0.05e-6) {
    const RectifiedDistance d = Rectify(m, t);
    EXPECT_FALSE(d.out_of_range);
    EXPECT_GT(d.distance_mm, last);
    last = d.distance_mm;
  }
  EXPECT_TRUE(Rectify(m, m.tof_max + 1e-6).out_of_range);
  EXPECT_TRUE(Rectify(m, m.tof_min - 1e-6).out_of_range);
}

TEST(PoolReadings, VarianceFromSpread) {
  const std::vector<double> tofs{60e-6, 62e-6, 64e-6};
  const double k = 0.343e6;
  const std::vector<RangeSample> s = PoolReadings(tofs, 5.0, k, 1e-6);
  ASSERT_EQ(s.size(), 3u);
  // Sample variance of {60, 62, 64} us is 4 us^2.
  const double expect = 4e-12 * k * k;
  for (const RangeSample& r : s) {
    EXPECT_NEAR(r.sigma, expect, 1e-9 * expect);
    EXPECT_DOUBLE_EQ(r.true_mm, 5.0);
  }
  const std::vector<double> one{60e-6};
  EXPECT_DOUBLE_EQ(PoolReadings(one, 5.0, k, 0.02).front().sigma, 0.02);
  const std::vector<double> same{60e-6, 60e-6};
  EXPECT_DOUBLE_EQ(PoolReadings(same, 5.0, k, 0.02).front().sigma, 0.02);
}

std::vector<RangeSample> NoisySamples(std::mt19937_64& rng, int n, bool equal_sigma) {
  std::normal_distribution<double> g(0.0, 0.05);
  std::uniform_real_distribution<double> var(0.001, 0.05), t0(40e-6, 70e-6);
  std::vector<RangeSample> s;
  const double start = t0(rng);
  for (int i = 0; i < n; ++i) {
    const double t = start + 1.5e-6 * i;
    s.push_back({t, 0.343e6 * t - 16.4 + 0.6 * std::sin(i * 0.3) + g(rng), equal_sigma ? 0.01 : var(rng)});
  }
  return s;
}

TEST(FitRangeModel, WeightedResidualsOrthogonal) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = NoisySamples(rng, 25, false);
    const RangeModel m = FitRangeModel(s, Modality::kOptoacoustic);
    Eigen::Vector3d g = Eigen::Vector3d::Zero(), scale = Eigen::Vector3d::Zero();
    for (const RangeSample& r : s) {
      const double u = r.tof_s * 1e6;  // microseconds keep the columns comparable
      const double res = r.true_mm - (m.beta2 * r.tof_s * r.tof_s + m.beta1 * r.tof_s + m.beta0);
      const Eigen::Vector3d x(u * u, u, 1.0);
      g += x * res / r.sigma;
      scale += x.cwiseAbs() / r.sigma;
    }
    for (int k = 0; k < 3; ++k) EXPECT_LT(std::abs(g(k)), 1e-8 * scale(k)) << "trial " << trial;
  }
}

TEST(FitRangeModel, CommonSigmaScaleInvariant) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> f(0.01, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = NoisySamples(rng, 25, false);
    auto scaled = s;
    const double k = f(rng);
    for (RangeSample& r : scaled) r.sigma *= k;
    const RangeModel a = FitRangeModel(s, Modality::kUltrasound);
    const RangeModel b = FitRangeModel(scaled, Modality::kUltrasound);
    EXPECT_NEAR(a.beta2, b.beta2, 1e-9 * std::abs(a.beta2));
    EXPECT_NEAR(a.beta1, b.beta1, 1e-9 * std::abs(a.beta1));
    EXPECT_NEAR(a.beta0, b.beta0, 1e-9 * (1.0 + std::abs(a.beta0)));
  }
}

TEST(FitRangeModel, EqualSigmasMatchOrdinaryLeastSquares) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = NoisySamples(rng, 25, true);
    // Oracle: QR on the centred, scaled design.
    double mean = 0.0;
    for (const RangeSample& r : s) mean += r.tof_s / s.size();
    Eigen::MatrixXd x(s.size(), 3);
    Eigen::VectorXd y(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double u = (s[i].tof_s - mean) * 1e6;
      x.row(i) << u * u, u, 1.0;
      y(i) = s[i].true_mm;
    }
    const Eigen::Vector3d c = x.colPivHouseholderQr().solve(y);
    // Expand c2 u^2 + c1 u + c0 with u = (t - mean) 1e6 back to powers of t.
    const double a2 = c(0) * 1e12;
    const double a1 = c(1) * 1e6 - 2.0 * a2 * mean;
    const double a0 = c(2) - c(1) * 1e6 * mean + a2 * mean * mean;
    const RangeModel m = FitRangeModel(s, Modality::kOptoacoustic);
    EXPECT_NEAR(m.beta2, a2, 1e-6 * std::abs(a2));
    EXPECT_NEAR(m.beta1, a1, 1e-6 * std::abs(a1));
    EXPECT_NEAR(m.beta0, a0, 1e-6 * (1.0 + std::abs(a0)));
  }
}

}  // namespace
}  // namespace pdm2
