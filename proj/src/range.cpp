/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/range.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

#include "pdm2/error.hpp"

namespace pdm2 {

RangeModel FitRangeModel(std::span<const RangeSample> samples, Modality modality) {
  std::set<double> distinct;
  for (const RangeSample& s : samples) {
    if (!(s.sigma > 0.0) || !(s.tof_s > 0.0) || !std::isfinite(s.true_mm)) {
      throw Error(ErrorCode::kInvalidArgument, "range samples need tof > 0 and sigma > 0");
    }
    distinct.insert(s.tof_s);
  }
  if (samples.size() < 3 || distinct.size() < 3) {
    throw Error(ErrorCode::kDegenerateDesign, "need at least three distinct ToFs");
  }

  // Work in a centred, scaled time variable so the design stays well
  // conditioned for microsecond-scale ToFs.
  const double t_lo = *distinct.begin();
  const double t_hi = *distinct.rbegin();
  const double mid = 0.5 * (t_lo + t_hi);
  const double scale = 0.5 * (t_hi - t_lo);

  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const RangeSample& s = samples[static_cast<std::size_t>(i)];
    const double w = 1.0 / std::sqrt(s.sigma);
    const double tau = (s.tof_s - mid) / scale;
    a(i, 0) = w * tau * tau;
    a(i, 1) = w * tau;
    a(i, 2) = w;
    b(i) = w * s.true_mm;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-12);
  if (qr.rank() < 3) throw Error(ErrorCode::kDegenerateDesign, "range design is rank deficient");
  const Eigen::Vector3d c = qr.solve(b);

  RangeModel m;
  m.modality = modality;
  m.beta2 = c(0) / (scale * scale);
  m.beta1 = c(1) / scale - 2.0 * c(0) * mid / (scale * scale);
  m.beta0 = c(2) - c(1) * mid / scale + c(0) * mid * mid / (scale * scale);
  m.tof_min = t_lo;
  m.tof_max = t_hi;
  m.sample_count = samples.size();

  double sum_sq = 0.0;
  for (const RangeSample& s : samples) {
    const double tau = (s.tof_s - mid) / scale;
    const double r = c(0) * tau * tau + c(1) * tau + c(2) - s.true_mm;
    m.residual_max_mm = std::max(m.residual_max_mm, std::abs(r));
    sum_sq += r * r;
  }
  m.residual_rms_mm = std::sqrt(sum_sq / static_cast<double>(samples.size()));
  return m;
}

RectifiedDistance Rectify(const RangeModel& model, double tof_s) {
  RectifiedDistance out;
  out.distance_mm = (model.beta2 * tof_s + model.beta1) * tof_s + model.beta0;
  out.out_of_range = tof_s < model.tof_min || tof_s > model.tof_max;
  return out;
}

std::vector<RangeSample> PoolReadings(std::span<const double> tofs_s, double true_mm,
                                      double mm_per_second, double default_variance) {
  if (tofs_s.empty()) throw Error(ErrorCode::kEmptyInput, "no readings for station");
  double variance = default_variance;
  if (tofs_s.size() > 1) {
    double mean = 0.0;
    for (double t : tofs_s) mean += t;
    mean /= static_cast<double>(tofs_s.size());
    double ss = 0.0;
    for (double t : tofs_s) ss += (t - mean) * (t - mean);
    const double var_t = ss / static_cast<double>(tofs_s.size() - 1);
    variance = std::max(var_t * mm_per_second * mm_per_second, default_variance);
  }
  std::vector<RangeSample> out;
  out.reserve(tofs_s.size());
  for (double t : tofs_s) out.push_back({t, true_mm, variance});
  return out;
}

}  // namespace pdm2
