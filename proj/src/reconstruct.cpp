/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/reconstruct.hpp"

#include <cmath>
#include <limits>

#include "pdm2/error.hpp"

namespace pdm2 {

namespace {

ErrorStats Stats(const std::vector<double>& e) {
  ErrorStats s;
  s.count = e.size();
  if (e.empty()) return s;
  double sum = 0.0;
  for (double x : e) sum += x;
  s.mean = sum / static_cast<double>(e.size());
  double ss = 0.0;
  for (double x : e) ss += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(e.size()));
  return s;
}

std::optional<Edge> FitOrEmpty(const std::vector<Point3>& pts) {
  if (pts.size() < 2) return std::nullopt;
  try {
    return MakeEdge(pts);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDegeneratePoints) return std::nullopt;
    throw;
  }
}

}  // namespace

std::vector<CloudPoint> PointCloud::Of(Modality m) const {
  std::vector<CloudPoint> out;
  for (const CloudPoint& c : points) {
    if (c.modality == m) out.push_back(c);
  }
  return out;
}

std::vector<CloudPoint> StationToPoints(const ScanStation& st, const CalibrationState& calib,
                                        std::size_t station_id) {
  std::vector<CloudPoint> out;
  const Rotation back(calib.n, -st.theta);
  auto emit = [&](const std::optional<double>& d, Modality m) {
    if (!d) return;
    const Point3 world = st.S + *d * calib.v.vec();
    out.push_back({RotateAbout(back, calib.x_r, world), m, station_id});
  };
  emit(st.d_us, Modality::kUltrasound);
  emit(st.d_oa, Modality::kOptoacoustic);
  return out;
}

PointCloud Reconstruct(std::span<const ScanStation> stations, const CalibrationState& calib) {
  if (stations.empty()) throw Error(ErrorCode::kEmptySession, "scan session has no stations");
  PointCloud cloud;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    for (const CloudPoint& c : StationToPoints(stations[i], calib, i)) cloud.points.push_back(c);
  }
  return cloud;
}

ContourReport ContourError(const PointCloud& cloud, std::span<const Edge> truth_edges) {
  if (truth_edges.empty()) throw Error(ErrorCode::kInvalidArgument, "no truth edges");
  ContourReport r;
  r.edges.assign(truth_edges.begin(), truth_edges.end());
  std::vector<double> us, oa;
  std::vector<std::vector<double>> edge_us(truth_edges.size()), edge_oa(truth_edges.size());
  std::vector<std::vector<Point3>> pts_us(truth_edges.size()), pts_oa(truth_edges.size());
  for (const CloudPoint& c : cloud.points) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t k = 0; k < truth_edges.size(); ++k) {
      const double e = PointToEdgeDistance(truth_edges[k], c.p);
      if (e < best) {
        best = e;
        arg = k;
      }
    }
    r.errors.push_back(best);
    r.assigned.push_back(arg);
    if (c.modality == Modality::kUltrasound) {
      us.push_back(best);
      edge_us[arg].push_back(best);
      pts_us[arg].push_back(c.p);
    } else {
      oa.push_back(best);
      edge_oa[arg].push_back(best);
      pts_oa[arg].push_back(c.p);
    }
  }
  r.us = Stats(us);
  r.oa = Stats(oa);
  for (std::size_t k = 0; k < truth_edges.size(); ++k) {
    r.per_edge_us.push_back(Stats(edge_us[k]));
    r.per_edge_oa.push_back(Stats(edge_oa[k]));
    r.fitted_us.push_back(FitOrEmpty(pts_us[k]));
    r.fitted_oa.push_back(FitOrEmpty(pts_oa[k]));
  }
  return r;
}

std::vector<Point3> ContourPolyline(const PointCloud& cloud, Modality m) {
  std::vector<Point3> line;
  for (const CloudPoint& c : cloud.points) {
    if (c.modality == m) line.push_back(c.p);
  }
  return line;
}

ScanStation MeasureStation(const Waveform& raw, const Point3& S, double theta, const StationModels& models) {
  ScanStation st;
  st.S = S;
  st.theta = theta;
  const Waveform o = PreprocessForTof(raw);
  auto measure = [&](const ReferencePattern* pattern, const RangeModel* model, double t0, double t1,
                     bool round_trip) -> std::optional<double> {
    if (!pattern || !model) return std::nullopt;
    const SearchWindow win = SearchWindow::FromTimes(o, t0, t1);
    try {
      const TofEstimate e = round_trip ? EstimateTofUs(o, *pattern, win, models.tof)
                                       : EstimateTofOa(o, *pattern, win, models.tof);
      return Rectify(*model, e.tof_s).distance_mm;
    } catch (const Error& err) {
      if (err.code() == ErrorCode::kLowConfidence) return std::nullopt;
      throw;
    }
  };
  st.d_us = measure(models.us_pattern, models.us_model, models.us_window_begin, models.us_window_end, true);
  st.d_oa = measure(models.oa_pattern, models.oa_model, models.oa_window_begin, models.oa_window_end, false);
  return st;
}

}  // namespace pdm2
