/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <Eigen/Core>

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pdm2/geometry.hpp"
#include "pdm2/lm.hpp"

namespace pdm2 {

struct RawPoint {
  Point3 S = Point3::Zero();  // stage reading, mm
  double d = 0.0;             // depth reading, mm
  double amplitude = 0.0;     // envelope peak
};

struct CenterPoint {
  Point3 S = Point3::Zero();
  double d = 0.0;
  Mat3 sigma_s = Mat3::Zero();  // covariance of the mean, mm^2
  double sigma_d = 0.0;         // variance of the mean, mm^2
  std::size_t n_raw = 0;
};

enum class FrameKind { kTip, kEdge };

struct FrameScan {
  int frame_id = 0;
  FrameKind kind = FrameKind::kTip;
  std::vector<CenterPoint> centers;
  double turntable_angle = 0.0;  // radians
};

struct RotationReading {
  int frame_i = 0;
  int frame_k = 0;
  double theta = 0.0;        // radians, frame_i to frame_k
  double sigma_theta = 0.0;  // variance, rad^2
};

struct CenterOptions {
  double threshold_frac = 0.5;
  double variance_floor = 1e-4;  // mm^2
};

// Ordered [v tangent (2), n tangent (2), X_R (3)]; the X_R z row and column
// are zero because that component is fixed by the gauge.
using CalibrationCovariance = Eigen::Matrix<double, 7, 7>;

struct CalibrationState {
  UnitDir v{0.0, 1.0, 0.0};
  UnitDir n{0.0, 0.0, 1.0};
  Point3 x_r = Point3::Zero();
  CalibrationCovariance covariance = CalibrationCovariance::Zero();
  double residual_rms = 0.0;  // unweighted point residuals, mm
  int iterations = 0;
  LmStatus status = LmStatus::kConverged;
  std::vector<double> cost_history;
};

// Mean over the raws at or above threshold_frac * max amplitude. The sample
// covariance is floored eigenvalue-wise at variance_floor and divided by the
// count. Throws NoSignal when nothing passes the threshold.
CenterPoint ExtractCenter(std::span<const RawPoint> raws, const CenterOptions& options = {});

// Direction of the line through the tip frames' stage readings, oriented so
// that depth shrinks when the stage moves along it.
UnitDir CalibrateBeam(std::span<const FrameScan> tip_frames);

struct TurntableEstimate {
  UnitDir n;
  Point3 x_r = Point3::Zero();  // z fixed to 0
};

// Closed-form axis and centre from edge frames related by rotation readings.
TurntableEstimate CalibrateTurntable(std::span<const FrameScan> edge_frames,
                                     std::span<const RotationReading> rotations, const UnitDir& v);

// Joint Mahalanobis objective over tips, edges and rotation readings. The
// tip point, each filament line and each frame's turntable angle are carried
// as latent parameters; v, n and X_R are the calibration outputs.
class CalibrationProblem : public LmProblem {
 public:
  CalibrationProblem(const CalibrationState& init, std::span<const FrameScan> tip_frames,
                     std::span<const FrameScan> edge_frames,
                     std::span<const RotationReading> rotations, bool refine_turntable = true);
  ~CalibrationProblem() override;

  Eigen::Index NumParams() const override;
  Eigen::Index NumResiduals() const override;
  void Evaluate(const Eigen::VectorXd& delta, Eigen::VectorXd* residuals,
                Eigen::MatrixXd* jacobian) const override;
  void Accept(const Eigen::VectorXd& delta) override;

  CalibrationState State() const;
  // RMS of the unweighted point residuals at the current base, mm.
  double PointResidualRms() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

CalibrationState RefineMle(const CalibrationState& init, std::span<const FrameScan> tip_frames,
                           std::span<const FrameScan> edge_frames,
                           std::span<const RotationReading> rotations,
                           const LmOptions& options = {});

UnitDir RefineSensorOnly(const UnitDir& v0, std::span<const FrameScan> tip_frames,
                         const LmOptions& options = {});

// Session as recorded on the rig: raw points grouped by frame and center.
struct SessionRaw {
  int frame = 0;
  FrameKind kind = FrameKind::kTip;
  int center = 0;
  RawPoint raw;
};

struct CalibrationSession {
  std::vector<SessionRaw> raws;
  std::vector<RotationReading> angles;
  CenterOptions center_options;
  double sigma_theta = 0.0;  // default angle variance, rad^2
};

struct CalibrationResult {
  CalibrationState closed_form;
  CalibrationState refined;
  std::vector<FrameScan> tip_frames;
  std::vector<FrameScan> edge_frames;
};

// Extracts centers per (frame, center) group.
void BuildFrames(const CalibrationSession& session, std::vector<FrameScan>* tips,
                 std::vector<FrameScan>* edges);

CalibrationResult Calibrate(const CalibrationSession& session, const LmOptions& options = {});

}  // namespace pdm2
