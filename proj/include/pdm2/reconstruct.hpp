/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pdm2/calibration.hpp"
#include "pdm2/geometry.hpp"
#include "pdm2/range.hpp"
#include "pdm2/tof.hpp"

namespace pdm2 {

struct ScanStation {
  Point3 S = Point3::Zero();
  double theta = 0.0;
  std::optional<double> d_us;  // rectified mm; empty when the echo is absent
  std::optional<double> d_oa;
};

struct CloudPoint {
  Point3 p = Point3::Zero();  // turntable frame
  Modality modality = Modality::kOptoacoustic;
  std::size_t station = 0;
};

struct PointCloud {
  std::vector<CloudPoint> points;

  std::vector<CloudPoint> Of(Modality m) const;
};

// X = S + d v per present modality, then rotated by -theta about (n, X_R).
std::vector<CloudPoint> StationToPoints(const ScanStation& st, const CalibrationState& calib,
                                        std::size_t station_id);

// Throws EmptySession when there are no stations.
PointCloud Reconstruct(std::span<const ScanStation> stations, const CalibrationState& calib);

struct ErrorStats {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

struct ContourReport {
  std::vector<Edge> edges;
  std::vector<double> errors;         // per cloud point
  std::vector<std::size_t> assigned;  // nearest edge per cloud point
  ErrorStats us, oa;
  std::vector<ErrorStats> per_edge_us, per_edge_oa;
  // Line fitted to the points assigned to each truth edge; empty below two
  // distinct points.
  std::vector<std::optional<Edge>> fitted_us, fitted_oa;
};

// Each point is scored by its distance to the nearest truth edge.
ContourReport ContourError(const PointCloud& cloud, std::span<const Edge> truth_edges);

// Points of one modality joined in station order.
std::vector<Point3> ContourPolyline(const PointCloud& cloud, Modality m);

// Turns a raw station waveform into rectified distances. A modality whose
// echo is missing (LowConfidence) or whose model is absent stays empty.
struct StationModels {
  const ReferencePattern* us_pattern = nullptr;
  const ReferencePattern* oa_pattern = nullptr;
  const RangeModel* us_model = nullptr;
  const RangeModel* oa_model = nullptr;
  double us_window_begin = kUsWindowBegin, us_window_end = kUsWindowEnd;
  double oa_window_begin = kOaWindowBegin, oa_window_end = kOaWindowEnd;
  TofOptions tof;
};

ScanStation MeasureStation(const Waveform& raw, const Point3& S, double theta, const StationModels& models);

}  // namespace pdm2
