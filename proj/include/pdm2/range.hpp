/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pdm2/tof.hpp"

namespace pdm2 {

// Quadratic time-of-flight to distance map, d = beta2 t^2 + beta1 t + beta0,
// with t in seconds and d in millimetres.
struct RangeModel {
  Modality modality = Modality::kOptoacoustic;
  double beta2 = 0.0;
  double beta1 = 0.0;
  double beta0 = 0.0;
  double tof_min = 0.0;
  double tof_max = 0.0;

  // Fit metadata.
  std::size_t sample_count = 0;
  double residual_max_mm = 0.0;
  double residual_rms_mm = 0.0;
};

struct RangeSample {
  double tof_s = 0.0;
  double true_mm = 0.0;
  double sigma = 1.0;  // variance, mm^2
};

struct RectifiedDistance {
  double distance_mm = 0.0;
  bool out_of_range = false;  // extrapolated beyond the training ToFs
};

// Weighted least squares over the samples. Throws DegenerateDesign when fewer
// than three distinct ToFs are present.
RangeModel FitRangeModel(std::span<const RangeSample> samples, Modality modality);

RectifiedDistance Rectify(const RangeModel& model, double tof_s);

// One sample per repeated reading at a station. Each carries the station's
// reading variance converted to mm^2 with mm_per_second, floored at
// default_variance (also used when there is a single reading).
std::vector<RangeSample> PoolReadings(std::span<const double> tofs_s, double true_mm,
                                      double mm_per_second, double default_variance);

}  // namespace pdm2
