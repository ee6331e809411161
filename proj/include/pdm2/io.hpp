/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pdm2/bench.hpp"
#include "pdm2/boss.hpp"
#include "pdm2/calibration.hpp"
#include "pdm2/range.hpp"
#include "pdm2/reconstruct.hpp"
#include "pdm2/signal.hpp"
#include "pdm2/tof.hpp"

// File formats. Readers throw Io when a file cannot be opened and Parse when
// its content is malformed. Every writer/reader pair round-trips exactly.
namespace pdm2::io {

using Path = std::filesystem::path;

// Waveforms: CSV with a `time_s,amplitude` header, or the binary container
// (magic PDM2WAVE, version, sample rate, t0, count, samples; little-endian).
void WriteWaveformCsv(const Path& path, const Waveform& w);
Waveform ReadWaveformCsv(const Path& path);
void WriteWaveformBinary(const Path& path, const Waveform& w);
Waveform ReadWaveformBinary(const Path& path);

// Picks the format from the extension (.csv) or the magic bytes.
void WriteWaveform(const Path& path, const Waveform& w);
Waveform ReadWaveform(const Path& path);

// Binary container, version 2: the header also carries the modality and the
// source id.
void WriteReference(const Path& path, const ReferencePattern& r, double sample_rate = kDefaultSampleRate);
ReferencePattern ReadReference(const Path& path);

void WriteRangeModel(const Path& path, const RangeModel& m);
RangeModel ReadRangeModel(const Path& path);

// One record per line: RAW frame kind center Sx Sy Sz d amp and
// ANGLE frame_i frame_k theta sigma_theta, after a header with units and floors.
void WriteCalibrationSession(const Path& path, const CalibrationSession& s);
CalibrationSession ReadCalibrationSession(const Path& path);

// v, n, X_R, residual RMS and iterations for both estimates.
void WriteCalibrationReport(const Path& path, const CalibrationResult& r);
CalibrationResult ReadCalibrationReport(const Path& path);  // frames are not stored
std::string FormatCalibrationTable(const CalibrationResult& r);

void WriteScene(const Path& path, const bench::Scene& s);
bench::Scene ReadScene(const Path& path);

void WriteCalibrationTruth(const Path& path, const bench::CalibrationTruth& t);
bench::CalibrationTruth ReadCalibrationTruth(const Path& path);

// Per-station ground truth of a scan plus the truth edges of its faces.
struct ScanTruth {
  std::vector<bench::StationTruth> stations;
  std::vector<Edge> edges;
};
void WriteScanTruth(const Path& path, const ScanTruth& t);
ScanTruth ReadScanTruth(const Path& path);

// A directory holding poses.txt and one binary waveform per station.
void WriteScanSession(const Path& dir, const bench::ScanSession& s);
bench::ScanSession ReadScanSession(const Path& dir);

// Measured stations: S, theta and the two distances ("-" when absent).
void WriteStations(const Path& path, const std::vector<ScanStation>& st);
std::vector<ScanStation> ReadStations(const Path& path);

// `x y z modality station_id` rows.
void WritePointCloud(const Path& path, const PointCloud& c);
PointCloud ReadPointCloud(const Path& path);

void WriteContourReport(const Path& path, const ContourReport& r);
ContourReport ReadContourReport(const Path& path);

// `path,label` rows after a header; relative paths resolve against the
// manifest's directory on read.
struct ManifestEntry {
  std::string path;
  std::string label;
};
void WriteManifest(const Path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> ReadManifest(const Path& path);

// Label header row and column, counts, then a mean-accuracy footer.
void WriteConfusion(const Path& path, const ConfusionMatrix& m);
ConfusionMatrix ReadConfusion(const Path& path);

// Shortest text that parses back to the same double.
std::string FormatDouble(double x);
double ParseDouble(const std::string& s);

}  // namespace pdm2::io
