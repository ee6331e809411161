/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdm2/calibration.hpp"
#include "pdm2/geometry.hpp"
#include "pdm2/seed.hpp"
#include "pdm2/signal.hpp"
#include "pdm2/tof.hpp"

// Synthetic sensor rig. Objects live in the turntable frame at angle zero;
// a station at turntable angle theta sees them rotated by (n, theta) about
// X_R. Distances are millimetres, times seconds.
namespace pdm2::bench {

inline constexpr std::array<double, 3> kEmissionBands{80e3, 532e3, 728e3};

struct MaterialSpec {
  std::string name;
  double oa_strength = 1.0;
  double us_reflectivity = 1.0;
  std::array<double, 3> band_weights{0.2, 0.4, 0.4};
};

enum class ShapeKind { kBlock, kCylinder, kFilament };

struct SceneObject {
  ShapeKind shape = ShapeKind::kBlock;
  Point3 center = Point3::Zero();  // block / cylinder centre
  Vec3 extents = Vec3::Ones();     // block full edge lengths
  double yaw = 0.0;                // block / cylinder rotation about z
  double radius = 0.0;             // cylinder, filament
  double height = 0.0;             // cylinder
  Point3 end_a = Point3::Zero();   // filament endpoints; end_b is the tip
  Point3 end_b = Point3::Zero();
  MaterialSpec material;
};

struct NoiseSpec {
  double sigma_sample = 0.0;   // additive waveform noise
  double sigma_s = 0.0;        // stage reading, mm
  double sigma_d = 0.0;        // depth reading, mm
  double sigma_theta = 0.0;    // turntable reading, rad
  double range_jitter_us = 0.0;  // per-reading acoustic path jitter, mm
  double range_jitter_oa = 0.0;
};

struct WaveformSpec {
  double sample_rate = kDefaultSampleRate;
  std::size_t length = 3200;
  double t0 = 0.0;
  double acoustic_offset_mm = 16.411;  // fixed path inside the sensor
  double burst_cycles = 10.0;          // counted at the 728 kHz band
  double second_echo_ratio = 0.4;
  // Range nonlinearity A sin^2(pi (d - lo) / (2 (hi - lo))) per modality.
  double nonlinearity_us_mm = 0.6;
  double nonlinearity_oa_mm = 0.6;
  double nonlinearity_lo_mm = 6.0;
  double nonlinearity_hi_mm = 18.0;
};

struct BeamProfile {
  double fwhm_us = 0.75;   // mm at focus
  double fwhm_oa = 0.392;  // mm at focus
  double focus_mm = 10.0;
  double widening = 0.1;   // relative FWHM growth per mm away from focus
};

struct Scene {
  UnitDir v_true{0.0656, 0.9955, -0.0678};
  UnitDir n_true{-0.0007, 0.0022, 0.9999};
  Point3 xr_true{235.21, 288.17, 0.0};
  double sound_speed = 343.0;  // m/s
  std::vector<SceneObject> objects;
  NoiseSpec noise;
  WaveformSpec wave;
  BeamProfile beam;
  std::uint64_t seed = 1;
};

// Throws InvalidArgument on a malformed scene.
void Validate(const Scene& scene);

struct Hit {
  double distance = 0.0;  // along the ray
  std::size_t object = 0;
  Point3 point_object = Point3::Zero();  // hit point in the turntable frame
};

std::optional<Hit> CastRay(const Scene& scene, const Point3& origin, const UnitDir& dir,
                           double turntable_angle);

using pdm2::DeriveSeed;

// Acoustic arrival times (burst onsets) for a target at distance d.
struct Arrivals {
  double oa = 0.0;
  double us = 0.0;   // round trip
  double oa2 = 0.0;  // second optoacoustic echo
};
Arrivals ArrivalTimes(const Scene& scene, double d_mm, double jitter_us_mm = 0.0,
                      double jitter_oa_mm = 0.0);
double Nonlinearity(const WaveformSpec& spec, Modality m, double d_mm);

// Unit-amplitude burst shape sampled at times relative to its onset.
double BurstValue(const Scene& scene, const std::array<double, 3>& weights, double t);
double BurstDuration(const Scene& scene);
// RMS of a unit burst over its duration.
double BurstRms(const Scene& scene, const std::array<double, 3>& weights);
// Additive noise level for the given SNR against a unit burst at focus.
double NoiseForSnr(const Scene& scene, const std::array<double, 3>& weights, double snr_db);

struct StationTruth {
  bool hit = false;
  double distance = 0.0;
  Arrivals arrivals;  // including the drawn jitter
  Point3 point_object = Point3::Zero();
  std::size_t object = 0;
};

// Waveform seen at a station; `stream` selects the noise stream.
Waveform SynthWaveform(const Scene& scene, const Point3& sensor_pos, double turntable_angle,
                       std::uint64_t stream, StationTruth* truth = nullptr);

// Waveform for a target at distance d straight along the beam, made of the
// given material.
Waveform SynthEcho(const Scene& scene, const MaterialSpec& material, double d_mm,
                   std::uint64_t stream, StationTruth* truth = nullptr, double gain = 1.0);

// Reference pattern cut from a noise-free preprocessed echo, starting at the
// echo onset.
ReferencePattern MakeReference(const Scene& scene, Modality modality, const MaterialSpec& material);

// ---------------------------------------------------------------------------
// Calibration sessions

struct CalibrationPlan {
  std::size_t filament = 0;  // scene object used as target
  std::vector<double> tip_depths{8.0, 10.0, 12.0, 14.0};
  std::vector<std::array<int, 2>> tip_grids{{5, 3}, {5, 3}, {5, 4}, {5, 4}};
  double raster_step = 0.1;
  std::vector<double> edge_angles{0.0, 3.141592653589793};
  std::vector<int> row_raws{7, 7, 6, 6, 6, 6, 6};
  double row_spacing = 1.0;   // along the filament
  double row_start = 2.0;     // first row distance below the tip
  double edge_depth = 9.0;    // nominal depth of the first row
  double edge_depth_step = 0.3;
};

struct CalibrationTruth {
  UnitDir v, n;
  Point3 x_r = Point3::Zero();
  Point3 tip = Point3::Zero();
  Point3 filament_a = Point3::Zero();
  Point3 filament_b = Point3::Zero();
  std::vector<double> frame_angles;  // true turntable angle per edge frame
};

CalibrationSession SynthCalibrationSession(const Scene& scene, const CalibrationPlan& plan,
                                           CalibrationTruth* truth = nullptr);

// A scene holding the calibration filament, with rig-scale reading noise.
Scene CalibrationScene(std::uint64_t seed);

// ---------------------------------------------------------------------------
// Object scans

struct ScanPose {
  Point3 S = Point3::Zero();
  double theta = 0.0;
};

struct ScanSession {
  std::vector<ScanPose> poses;
  std::vector<Waveform> waveforms;
};

ScanSession SynthObjectScan(const Scene& scene, const std::vector<ScanPose>& path,
                            std::vector<StationTruth>* truth = nullptr);

// Horizontal passes across each side face of a block at turntable angles
// k * pi / 2, at the given standoff.
std::vector<ScanPose> BlockFacePath(const Scene& scene, std::size_t block, int stations_per_face,
                                    double spacing, double standoff);

// Aluminium block centred on the turntable, with rig-scale noise.
Scene BlockScene(std::uint64_t seed);

// Fixed sensor aimed at the side of a turntable-centred object; the
// turntable steps through a full turn.
std::vector<ScanPose> TurntablePath(const Scene& scene, std::size_t object, int stations, double standoff);

// Upright cylinder of the given material centred on the turntable.
Scene BottleScene(std::uint64_t seed, const MaterialSpec& material);

// ---------------------------------------------------------------------------
// Datasets

struct RangingReading {
  double true_mm = 0.0;
  Waveform waveform;
  StationTruth truth;
};

// `repeats` readings at each distance against a flat plate.
std::vector<RangingReading> SynthRangingDataset(const Scene& scene, const std::vector<double>& distances,
                                                int repeats, std::uint64_t stream);

struct LabeledWaveform {
  std::string label;
  Waveform waveform;
};

// Random standoff in [d_lo, d_hi] and gain in [1 - gain_spread, 1 + gain_spread].
std::vector<LabeledWaveform> SynthClassDataset(const Scene& scene,
                                               const std::vector<MaterialSpec>& classes,
                                               int per_class, double d_lo, double d_hi,
                                               double gain_spread, std::uint64_t stream);

// Empty scene carrying the block scene's noise, for material datasets.
Scene MaterialScene(std::uint64_t seed);

std::vector<MaterialSpec> DailyMaterials();
std::vector<MaterialSpec> OactClasses();

}  // namespace pdm2::bench
