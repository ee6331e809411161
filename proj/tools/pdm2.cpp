/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include <CLI11.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pdm2/bench.hpp"
#include "pdm2/boss.hpp"
#include "pdm2/calibration.hpp"
#include "pdm2/error.hpp"
#include "pdm2/io.hpp"
#include "pdm2/range.hpp"
#include "pdm2/reconstruct.hpp"
#include "pdm2/tof.hpp"

namespace fs = std::filesystem;
using namespace pdm2;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

bool g_quiet = false;

std::ostream& Out() {
  static std::ostringstream sink;
  if (g_quiet) {
    sink.str({});
    return sink;
  }
  return std::cout;
}

// Exit status, error code name and message; printed on one line.
struct Failure {
  int status;
  std::string code;
  std::string message;
};

int Report(const Failure& f) {
  std::string msg = f.message;
  for (char& c : msg) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::cerr << "pdm2: error code=" << f.code << " status=" << f.status << " message=" << msg << '\n';
  return f.status;
}

std::string Csv(double x) { return io::FormatDouble(x); }

void MakeDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
}

std::ofstream OpenCsv(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

struct Windows {
  double us_begin_us = kUsWindowBegin * 1e6, us_end_us = kUsWindowEnd * 1e6;
  double oa_begin_us = kOaWindowBegin * 1e6, oa_end_us = kOaWindowEnd * 1e6;

  void Add(CLI::App* app) {
    app->add_option("--us-window-begin", us_begin_us, "US search window start, us")->capture_default_str();
    app->add_option("--us-window-end", us_end_us, "US search window end, us")->capture_default_str();
    app->add_option("--oa-window-begin", oa_begin_us, "OA search window start, us")->capture_default_str();
    app->add_option("--oa-window-end", oa_end_us, "OA search window end, us")->capture_default_str();
  }
  SearchWindow For(const Waveform& o, Modality m) const {
    return m == Modality::kUltrasound ? SearchWindow::FromTimes(o, us_begin_us * 1e-6, us_end_us * 1e-6)
                                      : SearchWindow::FromTimes(o, oa_begin_us * 1e-6, oa_end_us * 1e-6);
  }
};

// --- bench -----------------------------------------------------------------

struct BenchArgs {
  std::uint64_t seed = 0;
  std::string kind;
  std::string out;
  std::string scene;
  bool noise_free = false;
  // ranging
  double d_min = 6.5, d_max = 16.5;
  int stations = 25, repeats = 3;
  // calibration
  std::optional<double> stage_noise, angle_noise_deg;
  // scans
  int per_face = 11;
  double spacing = 2.0, standoff = 10.0;
  std::string material = "steel";
  int turn_stations = 24;
  // classes
  std::string set = "daily";
  int per_class = 20;
  double c_lo = 8.0, c_hi = 12.0, gain_spread = 0.2;
};

bench::MaterialSpec FindMaterial(const std::string& name) {
  for (const auto& list : {bench::DailyMaterials(), bench::OactClasses()}) {
    for (const bench::MaterialSpec& m : list) {
      if (m.name == name) return m;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown material '" + name + "'");
}

bench::Scene DefaultScene(const BenchArgs& a) {
  if (a.kind == "calibration") return bench::CalibrationScene(a.seed);
  if (a.kind == "bottle") return bench::BottleScene(a.seed, FindMaterial(a.material));
  if (a.kind == "classes") return bench::MaterialScene(a.seed);
  return bench::BlockScene(a.seed);
}

// Noise-free echo of the scene's first material at focus, for reference cuts.
void WriteEcho(const bench::Scene& scene, const fs::path& dir) {
  bench::Scene clean = scene;
  clean.noise = {};
  const bench::MaterialSpec mat = scene.objects.empty() ? bench::MaterialSpec{"plate"} : scene.objects[0].material;
  bench::StationTruth truth;
  io::WriteWaveformBinary(dir / "echo.bin", bench::SynthEcho(clean, mat, scene.beam.focus_mm, 0, &truth));
  Out() << "echo.bin: " << mat.name << " at " << scene.beam.focus_mm << " mm, onsets OA " << truth.arrivals.oa * 1e6
        << " us, US " << truth.arrivals.us * 1e6 << " us\n";
}

void RunBench(const BenchArgs& a) {
  const fs::path dir(a.out);
  MakeDir(dir);
  bench::Scene scene = a.scene.empty() ? DefaultScene(a) : io::ReadScene(a.scene);
  scene.seed = a.seed;
  if (a.stage_noise) scene.noise.sigma_s = scene.noise.sigma_d = *a.stage_noise;
  if (a.angle_noise_deg) scene.noise.sigma_theta = *a.angle_noise_deg * kDeg;
  if (a.noise_free) scene.noise = {};
  bench::Validate(scene);
  io::WriteScene(dir / "scene.json", scene);

  if (a.kind == "ranging") {
    if (a.stations < 3 || a.repeats < 1) throw Error(ErrorCode::kInvalidArgument, "need at least 3 stations and 1 repeat");
    std::vector<double> ds;
    for (int i = 0; i < a.stations; ++i) ds.push_back(a.d_min + (a.d_max - a.d_min) * i / (a.stations - 1));
    const auto data = bench::SynthRangingDataset(scene, ds, a.repeats, a.seed);
    MakeDir(dir / "waves");
    std::vector<io::ManifestEntry> manifest;
    for (std::size_t i = 0; i < data.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "waves/r_%04zu.bin", i);
      io::WriteWaveformBinary(dir / name, data[i].waveform);
      manifest.push_back({name, Csv(data[i].true_mm)});
    }
    io::WriteManifest(dir / "manifest.csv", manifest);
    WriteEcho(scene, dir);
    Out() << "ranging: " << data.size() << " waveforms over " << ds.size() << " stations\n";
  } else if (a.kind == "calibration") {
    bench::CalibrationTruth truth;
    const CalibrationSession s = bench::SynthCalibrationSession(scene, {}, &truth);
    io::WriteCalibrationSession(dir / "session.txt", s);
    io::WriteCalibrationTruth(dir / "truth.json", truth);
    Out() << "calibration: " << s.raws.size() << " raws, " << s.angles.size() << " angle readings\n";
  } else if (a.kind == "block" || a.kind == "bottle") {
    const auto path = a.kind == "block" ? bench::BlockFacePath(scene, 0, a.per_face, a.spacing, a.standoff)
                                        : bench::TurntablePath(scene, 0, a.turn_stations, a.standoff);
    io::ScanTruth truth;
    const bench::ScanSession scan = bench::SynthObjectScan(scene, path, &truth.stations);
    if (a.kind == "block") {
      for (int f = 0; f < 4; ++f) {
        std::vector<Point3> pts;
        for (int k = 0; k < a.per_face; ++k) pts.push_back(truth.stations[f * a.per_face + k].point_object);
        if (pts.size() >= 2) truth.edges.push_back(MakeEdge(pts));
      }
    }
    io::WriteScanSession(dir / "scan", scan);
    io::WriteScanTruth(dir / "truth.json", truth);
    WriteEcho(scene, dir);
    Out() << a.kind << ": " << path.size() << " stations\n";
  } else if (a.kind == "classes") {
    std::vector<bench::MaterialSpec> classes;
    if (a.set == "daily") {
      classes = bench::DailyMaterials();
    } else if (a.set == "oact") {
      classes = bench::OactClasses();
    } else {
      throw Error(ErrorCode::kInvalidArgument, "class set must be daily or oact");
    }
    const auto data = bench::SynthClassDataset(scene, classes, a.per_class, a.c_lo, a.c_hi, a.gain_spread, a.seed);
    MakeDir(dir / "waves");
    std::vector<io::ManifestEntry> manifest;
    for (std::size_t i = 0; i < data.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "waves/c_%04zu.bin", i);
      io::WriteWaveformBinary(dir / name, data[i].waveform);
      manifest.push_back({name, data[i].label});
    }
    io::WriteManifest(dir / "manifest.csv", manifest);
    Out() << "classes: " << classes.size() << " x " << a.per_class << " waveforms\n";
  }
}

// --- extract-ref -----------------------------------------------------------

struct ExtractArgs {
  std::string in, out, modality, source_id;
  std::optional<double> start_us;
  double length_us = 15.5;
  double fraction = 0.05;
  Windows windows;
};

void RunExtract(const ExtractArgs& a) {
  const Modality m = ParseModality(a.modality);
  const Waveform o = PreprocessForTof(io::ReadWaveform(a.in));
  std::size_t start = 0;
  if (a.start_us) {
    const double j = std::round((*a.start_us * 1e-6 - o.t0()) * o.sample_rate());
    if (j < 0.0) throw Error(ErrorCode::kWindowOutOfRange, "reference start precedes the waveform");
    start = static_cast<std::size_t>(j);
  } else {
    start = DetectOnset(o, a.windows.For(o, m), a.fraction);
  }
  const auto length = static_cast<std::size_t>(std::llround(a.length_us * 1e-6 * o.sample_rate()));
  if (length < 2) throw Error(ErrorCode::kInvalidArgument, "reference length must cover at least two samples");
  const std::string id = a.source_id.empty() ? fs::path(a.in).filename().string() + ":" + std::string(ModalityName(m))
                                             : a.source_id;
  io::WriteReference(a.out, ExtractReference(o, start, length, m, id), o.sample_rate());
  Out() << "reference " << ModalityName(m) << ": start " << start << " (" << o.TimeAt(start) * 1e6 << " us), "
        << length << " samples\n";
}

// --- tof -------------------------------------------------------------------

struct TofArgs {
  std::vector<std::string> in;
  std::string us_ref, oa_ref, out;
  double min_confidence = TofOptions{}.min_confidence;
  Windows windows;
};

void RunTof(const TofArgs& a) {
  if (a.us_ref.empty() && a.oa_ref.empty()) throw Error(ErrorCode::kInvalidArgument, "give --us-ref and/or --oa-ref");
  std::optional<ReferencePattern> us, oa;
  if (!a.us_ref.empty()) us = io::ReadReference(a.us_ref);
  if (!a.oa_ref.empty()) oa = io::ReadReference(a.oa_ref);
  const TofOptions opt{a.min_confidence};
  std::ostringstream csv;
  csv << "file,modality,status,tof_s,peak_index,confidence\n";
  int total = 0, low = 0;
  for (const std::string& f : a.in) {
    const Waveform o = PreprocessForTof(io::ReadWaveform(f));
    for (Modality m : {Modality::kUltrasound, Modality::kOptoacoustic}) {
      const std::optional<ReferencePattern>& r = m == Modality::kUltrasound ? us : oa;
      if (!r) continue;
      ++total;
      csv << f << ',' << ModalityName(m) << ',';
      try {
        const SearchWindow win = a.windows.For(o, m);
        const TofEstimate e = m == Modality::kUltrasound ? EstimateTofUs(o, *r, win, opt) : EstimateTofOa(o, *r, win, opt);
        csv << "ok," << Csv(e.tof_s) << ',' << e.peak_index << ',' << Csv(e.confidence) << '\n';
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kLowConfidence) throw;
        ++low;
        csv << "LowConfidence,,," << '\n';
      }
    }
  }
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out = OpenCsv(a.out);
    out << csv.str();
  }
  if (low > 0) {
    throw Error(ErrorCode::kLowConfidence, std::to_string(low) + " of " + std::to_string(total) +
                                               " estimates below confidence " + Csv(a.min_confidence));
  }
}

// --- fit-range -------------------------------------------------------------

struct FitArgs {
  std::string manifest, us_ref, oa_ref, out_us, out_oa, plot;
  double sound_speed = 343.0;
  double default_variance = 1e-4;
  double min_confidence = TofOptions{}.min_confidence;
  Windows windows;
};

void RunFit(const FitArgs& a) {
  const auto entries = io::ReadManifest(a.manifest);
  // Readings grouped by true distance, in manifest order.
  std::vector<double> distances;
  std::vector<std::vector<std::string>> files;
  for (const io::ManifestEntry& e : entries) {
    const double d = io::ParseDouble(e.label);
    std::size_t k = 0;
    while (k < distances.size() && distances[k] != d) ++k;
    if (k == distances.size()) {
      distances.push_back(d);
      files.emplace_back();
    }
    files[k].push_back(e.path);
  }
  std::vector<std::vector<Waveform>> waves(files.size());
  for (std::size_t k = 0; k < files.size(); ++k) {
    for (const std::string& f : files[k]) waves[k].push_back(PreprocessForTof(io::ReadWaveform(f)));
  }
  std::ofstream plot;
  if (!a.plot.empty()) {
    plot = OpenCsv(a.plot);
    plot << "modality,true_mm,tof_s,linear_mm,rectified_mm,linear_dev_mm,rectified_dev_mm\n";
  }
  const TofOptions opt{a.min_confidence};
  auto fit = [&](const std::string& ref_path, const std::string& out_path, Modality m) {
    if (ref_path.empty()) return;
    if (out_path.empty()) throw Error(ErrorCode::kInvalidArgument, "missing output path for the " + std::string(ModalityName(m)) + " model");
    const ReferencePattern r = io::ReadReference(ref_path);
    std::vector<RangeSample> samples;
    for (std::size_t k = 0; k < waves.size(); ++k) {
      std::vector<double> tofs;
      for (const Waveform& o : waves[k]) {
        const SearchWindow win = a.windows.For(o, m);
        tofs.push_back((m == Modality::kUltrasound ? EstimateTofUs(o, r, win, opt) : EstimateTofOa(o, r, win, opt)).tof_s);
      }
      for (const RangeSample& s : PoolReadings(tofs, distances[k], a.sound_speed * 1e3, a.default_variance)) {
        samples.push_back(s);
      }
    }
    const RangeModel model = FitRangeModel(samples, m);
    io::WriteRangeModel(out_path, model);
    Out() << ModalityName(m) << " model: " << samples.size() << " readings, max residual " << model.residual_max_mm
          << " mm, rms " << model.residual_rms_mm << " mm\n";
    if (!plot.is_open()) return;
    // Straight-line map for comparison: what the readings look like before
    // the quadratic correction.
    Eigen::MatrixXd x(samples.size(), 2);
    Eigen::VectorXd y(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      x.row(i) << samples[i].tof_s * 1e6, 1.0;
      y(i) = samples[i].true_mm;
    }
    const Eigen::Vector2d line = x.colPivHouseholderQr().solve(y);
    for (const RangeSample& s : samples) {
      const double lin = line(0) * s.tof_s * 1e6 + line(1);
      const double rect = Rectify(model, s.tof_s).distance_mm;
      plot << ModalityName(m) << ',' << Csv(s.true_mm) << ',' << Csv(s.tof_s) << ',' << Csv(lin) << ',' << Csv(rect)
           << ',' << Csv(lin - s.true_mm) << ',' << Csv(rect - s.true_mm) << '\n';
    }
  };
  if (a.us_ref.empty() && a.oa_ref.empty()) throw Error(ErrorCode::kInvalidArgument, "give --us-ref and/or --oa-ref");
  fit(a.us_ref, a.out_us, Modality::kUltrasound);
  fit(a.oa_ref, a.out_oa, Modality::kOptoacoustic);
}

// --- calibrate -------------------------------------------------------------

struct CalibrateArgs {
  std::string session, out, truth;
  int max_iterations = LmOptions{}.max_iterations;
};

void PrintTruthErrors(const CalibrationResult& r, const bench::CalibrationTruth& t) {
  auto row = [&](const char* name, const CalibrationState& c) {
    Out() << name << ": v " << AngleBetween(c.v, t.v) / kDeg << " deg, n " << AngleBetween(c.n, t.n) / kDeg
          << " deg, X_R " << (c.x_r - t.x_r).head<2>().norm() << " mm\n";
  };
  Out() << "errors against truth\n";
  row("closed form", r.closed_form);
  row("refined", r.refined);
}

void RunCalibrate(const CalibrateArgs& a) {
  const CalibrationSession s = io::ReadCalibrationSession(a.session);
  LmOptions lm;
  lm.max_iterations = a.max_iterations;
  const CalibrationResult r = Calibrate(s, lm);
  io::WriteCalibrationReport(a.out, r);
  Out() << io::FormatCalibrationTable(r);
  if (!a.truth.empty()) PrintTruthErrors(r, io::ReadCalibrationTruth(a.truth));
  if (r.refined.status == LmStatus::kNonConvergence) {
    throw Error(ErrorCode::kNonConvergence, "refinement stopped after " + std::to_string(r.refined.iterations) +
                                                " iterations; report written with the last iterate");
  }
}

// --- classify --------------------------------------------------------------

struct ClassifyArgs {
  std::string manifest, out, segment = "both";
  std::size_t window_len = 64, word_len = 8, segment_len = 800;
  int alphabet = 4;
  bool no_normalize = false;
  int trials = 50;
  double train_fraction = 0.75;
  std::uint64_t seed = 1;
};

void RunClassify(const ClassifyArgs& a) {
  const Segment seg = ParseSegment(a.segment);
  const auto entries = io::ReadManifest(a.manifest);
  std::vector<std::vector<double>> series;
  std::vector<std::string> labels;
  for (const io::ManifestEntry& e : entries) {
    series.push_back(ClassifierInput(io::ReadWaveform(e.path), seg));
    labels.push_back(e.label);
  }
  SfaParams p;
  p.window_len = a.window_len;
  p.word_len = a.word_len;
  p.alphabet = a.alphabet;
  p.normalize_windows = !a.no_normalize;
  p.segment_len = a.segment_len;
  const ConfusionMatrix cm = Evaluate(series, labels, p, a.trials, a.train_fraction, a.seed);
  if (!a.out.empty()) io::WriteConfusion(a.out, cm);
  for (std::size_t i = 0; i < cm.labels.size(); ++i) {
    long row = 0;
    for (long c : cm.counts[i]) row += c;
    Out() << std::left << std::setw(12) << cm.labels[i] << std::right << std::fixed << std::setprecision(4)
          << (row ? static_cast<double>(cm.counts[i][i]) / row : 0.0) << '\n';
  }
  Out() << "mean accuracy " << std::fixed << std::setprecision(4) << cm.MeanAccuracy() << " over " << cm.trial_count
        << " trials\n";
}

// --- scan ------------------------------------------------------------------

struct ScanArgs {
  std::string session, us_ref, oa_ref, us_model, oa_model, out;
  double min_confidence = TofOptions{}.min_confidence;
  Windows windows;
};

void RunScan(const ScanArgs& a) {
  const bench::ScanSession s = io::ReadScanSession(a.session);
  std::optional<ReferencePattern> us_ref, oa_ref;
  std::optional<RangeModel> us_model, oa_model;
  if (!a.us_ref.empty() != !a.us_model.empty() || !a.oa_ref.empty() != !a.oa_model.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "each modality needs both a reference and a range model");
  }
  if (!a.us_ref.empty()) {
    us_ref = io::ReadReference(a.us_ref);
    us_model = io::ReadRangeModel(a.us_model);
  }
  if (!a.oa_ref.empty()) {
    oa_ref = io::ReadReference(a.oa_ref);
    oa_model = io::ReadRangeModel(a.oa_model);
  }
  StationModels models;
  models.us_pattern = us_ref ? &*us_ref : nullptr;
  models.oa_pattern = oa_ref ? &*oa_ref : nullptr;
  models.us_model = us_model ? &*us_model : nullptr;
  models.oa_model = oa_model ? &*oa_model : nullptr;
  models.us_window_begin = a.windows.us_begin_us * 1e-6;
  models.us_window_end = a.windows.us_end_us * 1e-6;
  models.oa_window_begin = a.windows.oa_begin_us * 1e-6;
  models.oa_window_end = a.windows.oa_end_us * 1e-6;
  models.tof.min_confidence = a.min_confidence;
  std::vector<ScanStation> stations;
  std::size_t n_us = 0, n_oa = 0;
  for (std::size_t i = 0; i < s.poses.size(); ++i) {
    stations.push_back(MeasureStation(s.waveforms[i], s.poses[i].S, s.poses[i].theta, models));
    n_us += stations.back().d_us.has_value();
    n_oa += stations.back().d_oa.has_value();
  }
  io::WriteStations(a.out, stations);
  Out() << "stations " << stations.size() << ": US " << n_us << ", OA " << n_oa << '\n';
}

// --- reconstruct -----------------------------------------------------------

struct ReconstructArgs {
  std::string stations, calibration, out, truth, report, polyline;
  std::string estimate = "refined";
};

void RunReconstruct(const ReconstructArgs& a) {
  const auto stations = io::ReadStations(a.stations);
  const CalibrationResult cal = io::ReadCalibrationReport(a.calibration);
  if (a.estimate != "refined" && a.estimate != "closed-form") {
    throw Error(ErrorCode::kInvalidArgument, "estimate must be refined or closed-form");
  }
  const PointCloud cloud = Reconstruct(stations, a.estimate == "refined" ? cal.refined : cal.closed_form);
  io::WritePointCloud(a.out, cloud);
  Out() << "points " << cloud.points.size() << ": US " << cloud.Of(Modality::kUltrasound).size() << ", OA "
        << cloud.Of(Modality::kOptoacoustic).size() << '\n';
  if (!a.polyline.empty()) {
    std::ofstream out = OpenCsv(a.polyline);
    out << "modality,x,y,z\n";
    for (Modality m : {Modality::kUltrasound, Modality::kOptoacoustic}) {
      for (const Point3& p : ContourPolyline(cloud, m)) {
        out << ModalityName(m) << ',' << Csv(p.x()) << ',' << Csv(p.y()) << ',' << Csv(p.z()) << '\n';
      }
    }
  }
  if (a.truth.empty()) return;
  const io::ScanTruth truth = io::ReadScanTruth(a.truth);
  if (truth.edges.empty()) throw Error(ErrorCode::kInvalidArgument, "truth file carries no edges to score against");
  const ContourReport r = ContourError(cloud, truth.edges);
  if (!a.report.empty()) io::WriteContourReport(a.report, r);
  Out() << std::fixed << std::setprecision(3) << "contour error US " << r.us.mean << " +- " << r.us.stddev
        << " mm, OA " << r.oa.mean << " +- " << r.oa.stddev << " mm\n";
}

// --- report ----------------------------------------------------------------

struct ReportArgs {
  std::string calibration, contour, confusion, range_model;
};

void RunReport(const ReportArgs& a) {
  if (a.calibration.empty() && a.contour.empty() && a.confusion.empty() && a.range_model.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "nothing to report");
  }
  if (!a.calibration.empty()) Out() << io::FormatCalibrationTable(io::ReadCalibrationReport(a.calibration));
  if (!a.range_model.empty()) {
    const RangeModel m = io::ReadRangeModel(a.range_model);
    Out() << ModalityName(m.modality) << " d = " << m.beta2 << " t^2 + " << m.beta1 << " t + " << m.beta0
          << "  (t in s, d in mm), ToF " << m.tof_min * 1e6 << ".." << m.tof_max * 1e6 << " us, " << m.sample_count
          << " samples, residual max " << m.residual_max_mm << " rms " << m.residual_rms_mm << " mm\n";
  }
  if (!a.contour.empty()) {
    const ContourReport r = io::ReadContourReport(a.contour);
    Out() << std::fixed << std::setprecision(3);
    Out() << "face      US mean   US std  n     OA mean   OA std  n\n";
    for (std::size_t k = 0; k < r.edges.size(); ++k) {
      Out() << std::setw(4) << k << "  " << std::setw(10) << r.per_edge_us[k].mean << std::setw(9)
            << r.per_edge_us[k].stddev << std::setw(4) << r.per_edge_us[k].count << "  " << std::setw(10)
            << r.per_edge_oa[k].mean << std::setw(9) << r.per_edge_oa[k].stddev << std::setw(4)
            << r.per_edge_oa[k].count << '\n';
    }
    Out() << " all  " << std::setw(10) << r.us.mean << std::setw(9) << r.us.stddev << std::setw(4) << r.us.count
          << "  " << std::setw(10) << r.oa.mean << std::setw(9) << r.oa.stddev << std::setw(4) << r.oa.count << '\n';
  }
  if (!a.confusion.empty()) {
    const ConfusionMatrix m = io::ReadConfusion(a.confusion);
    Out() << std::setw(12) << "";
    for (const std::string& l : m.labels) Out() << std::setw(10) << l.substr(0, 9);
    Out() << '\n';
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
      Out() << std::setw(12) << m.labels[i].substr(0, 11);
      for (long c : m.counts[i]) Out() << std::setw(10) << c;
      Out() << '\n';
    }
    Out() << "mean accuracy " << std::fixed << std::setprecision(4) << m.MeanAccuracy() << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pdm2: dual-modality ranging, calibration, classification and reconstruction"};
  app.require_subcommand(0, 1);
  const char* env = std::getenv("PDM2_CONFIG");
  const std::string env_config = env ? env : "";
  app.set_config("--config", env_config, "Defaults file, TOML or INI with one section per command (env PDM2_CONFIG)",
                 !env_config.empty());
  bool dump_config = false;
  app.add_flag("--dump-config", dump_config, "Print every setting with its default in config-file form and exit")
      ->configurable(false);
  app.add_flag("-q,--quiet", g_quiet, "Suppress human-readable summaries");

  BenchArgs bench_a;
  CLI::App* bench = app.add_subcommand("bench", "Generate synthetic sessions, scans and datasets");
  bench->add_option("--seed", bench_a.seed, "Random seed")->required();
  bench->add_option("--kind", bench_a.kind, "What to generate")
      ->required()
      ->check(CLI::IsMember({"ranging", "calibration", "block", "bottle", "classes"}));
  bench->add_option("--out", bench_a.out, "Output directory")->required();
  bench->add_option("--scene", bench_a.scene, "Scene JSON replacing the default scene for the kind")->check(CLI::ExistingFile);
  bench->add_flag("--noise-free", bench_a.noise_free, "Zero every noise source");
  bench->add_option("--d-min", bench_a.d_min, "ranging: nearest distance, mm")->capture_default_str();
  bench->add_option("--d-max", bench_a.d_max, "ranging: farthest distance, mm")->capture_default_str();
  bench->add_option("--stations", bench_a.stations, "ranging: number of distances")->capture_default_str();
  bench->add_option("--repeats", bench_a.repeats, "ranging: readings per distance")->capture_default_str();
  bench->add_option("--stage-noise", bench_a.stage_noise, "calibration: stage and depth reading sigma, mm");
  bench->add_option("--angle-noise-deg", bench_a.angle_noise_deg, "calibration: turntable reading sigma, deg");
  bench->add_option("--per-face", bench_a.per_face, "block: stations per face")->capture_default_str();
  bench->add_option("--spacing", bench_a.spacing, "block: station spacing, mm")->capture_default_str();
  bench->add_option("--standoff", bench_a.standoff, "block, bottle: sensor standoff, mm")->capture_default_str();
  bench->add_option("--material", bench_a.material, "bottle: material name")->capture_default_str();
  bench->add_option("--turn-stations", bench_a.turn_stations, "bottle: stations per turn")->capture_default_str();
  bench->add_option("--set", bench_a.set, "classes: daily or oact")->capture_default_str();
  bench->add_option("--per-class", bench_a.per_class, "classes: waveforms per class")->capture_default_str();
  bench->add_option("--class-d-lo", bench_a.c_lo, "classes: nearest standoff, mm")->capture_default_str();
  bench->add_option("--class-d-hi", bench_a.c_hi, "classes: farthest standoff, mm")->capture_default_str();
  bench->add_option("--gain-spread", bench_a.gain_spread, "classes: relative gain spread")->capture_default_str();

  ExtractArgs ext_a;
  CLI::App* ext = app.add_subcommand("extract-ref", "Cut a reference pattern from a waveform");
  ext->add_option("--in", ext_a.in, "Waveform file")->required()->check(CLI::ExistingFile);
  ext->add_option("--modality", ext_a.modality, "US or OA")->required()->check(CLI::IsMember({"US", "OA", "us", "oa"}));
  ext->add_option("--out", ext_a.out, "Reference file")->required();
  ext->add_option("--start-us", ext_a.start_us, "Pattern start, us; detected in the modality window when absent");
  ext->add_option("--length-us", ext_a.length_us, "Pattern length, us")->capture_default_str();
  ext->add_option("--onset-fraction", ext_a.fraction, "Onset threshold relative to the window peak")->capture_default_str();
  ext->add_option("--source-id", ext_a.source_id, "Identifier stored with the pattern");
  ext_a.windows.Add(ext);

  TofArgs tof_a;
  CLI::App* tof = app.add_subcommand("tof", "Estimate times of flight");
  tof->add_option("--in", tof_a.in, "Waveform files")->required()->check(CLI::ExistingFile);
  tof->add_option("--us-ref", tof_a.us_ref, "US reference")->check(CLI::ExistingFile);
  tof->add_option("--oa-ref", tof_a.oa_ref, "OA reference")->check(CLI::ExistingFile);
  tof->add_option("--out", tof_a.out, "CSV output; stdout when absent");
  tof->add_option("--min-confidence", tof_a.min_confidence, "Confidence threshold")->capture_default_str();
  tof_a.windows.Add(tof);

  FitArgs fit_a;
  CLI::App* fit = app.add_subcommand("fit-range", "Fit the ToF to distance rectification");
  fit->add_option("--manifest", fit_a.manifest, "path,label manifest; labels are true distances in mm")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--us-ref", fit_a.us_ref, "US reference")->check(CLI::ExistingFile);
  fit->add_option("--oa-ref", fit_a.oa_ref, "OA reference")->check(CLI::ExistingFile);
  fit->add_option("--out-us", fit_a.out_us, "US model output");
  fit->add_option("--out-oa", fit_a.out_oa, "OA model output");
  fit->add_option("--plot", fit_a.plot, "Deviation-vs-distance CSV");
  fit->add_option("--sound-speed", fit_a.sound_speed, "m/s, converts ToF spread to a variance")->capture_default_str();
  fit->add_option("--default-variance", fit_a.default_variance, "Variance floor, mm^2")->capture_default_str();
  fit->add_option("--min-confidence", fit_a.min_confidence, "Confidence threshold")->capture_default_str();
  fit_a.windows.Add(fit);

  CalibrateArgs cal_a;
  CLI::App* cal = app.add_subcommand("calibrate", "Recover beam direction and turntable axis");
  cal->add_option("--session", cal_a.session, "Calibration session file")->required()->check(CLI::ExistingFile);
  cal->add_option("--out", cal_a.out, "Calibration report")->required();
  cal->add_option("--truth", cal_a.truth, "Bench truth sidecar; prints the recovery errors")->check(CLI::ExistingFile);
  cal->add_option("--max-iterations", cal_a.max_iterations, "Refinement iteration limit")->capture_default_str();

  ClassifyArgs cls_a;
  CLI::App* cls = app.add_subcommand("classify", "Repeated-split BOSS evaluation over a labelled manifest");
  cls->add_option("--manifest", cls_a.manifest, "path,label manifest")->required()->check(CLI::ExistingFile);
  cls->add_option("--out", cls_a.out, "Confusion matrix CSV");
  cls->add_option("--segment", cls_a.segment, "oa, us, both or full")
      ->check(CLI::IsMember({"oa", "us", "both", "full"}))
      ->capture_default_str();
  cls->add_option("--window-len", cls_a.window_len, "SFA window; 0 picks one from the length")->capture_default_str();
  cls->add_option("--word-len", cls_a.word_len, "SFA word length")->capture_default_str();
  cls->add_option("--alphabet", cls_a.alphabet, "SFA alphabet size")->capture_default_str();
  cls->add_option("--segment-len", cls_a.segment_len, "Word segment length; 0 keeps the series whole")
      ->capture_default_str();
  cls->add_flag("--no-normalize", cls_a.no_normalize, "Keep window amplitudes");
  cls->add_option("--trials", cls_a.trials, "Random splits")->capture_default_str();
  cls->add_option("--train-fraction", cls_a.train_fraction, "Training share per class")->capture_default_str();
  cls->add_option("--seed", cls_a.seed, "Split seed")->capture_default_str();

  ScanArgs scan_a;
  CLI::App* scan = app.add_subcommand("scan", "Turn a scan session into rectified station distances");
  scan->add_option("--session", scan_a.session, "Scan session directory")->required()->check(CLI::ExistingDirectory);
  scan->add_option("--us-ref", scan_a.us_ref, "US reference")->check(CLI::ExistingFile);
  scan->add_option("--oa-ref", scan_a.oa_ref, "OA reference")->check(CLI::ExistingFile);
  scan->add_option("--us-model", scan_a.us_model, "US range model")->check(CLI::ExistingFile);
  scan->add_option("--oa-model", scan_a.oa_model, "OA range model")->check(CLI::ExistingFile);
  scan->add_option("--out", scan_a.out, "Stations file")->required();
  scan->add_option("--min-confidence", scan_a.min_confidence, "Confidence threshold")->capture_default_str();
  scan_a.windows.Add(scan);

  ReconstructArgs rec_a;
  CLI::App* rec = app.add_subcommand("reconstruct", "Point clouds, contours and contour error");
  rec->add_option("--stations", rec_a.stations, "Stations file")->required()->check(CLI::ExistingFile);
  rec->add_option("--calibration", rec_a.calibration, "Calibration report")->required()->check(CLI::ExistingFile);
  rec->add_option("--estimate", rec_a.estimate, "refined or closed-form")
      ->check(CLI::IsMember({"refined", "closed-form"}))
      ->capture_default_str();
  rec->add_option("--out", rec_a.out, "Point cloud file")->required();
  rec->add_option("--truth", rec_a.truth, "Scan truth sidecar with edges")->check(CLI::ExistingFile);
  rec->add_option("--report", rec_a.report, "Contour report output");
  rec->add_option("--polyline", rec_a.polyline, "Contour polylines CSV");

  ReportArgs rep_a;
  CLI::App* rep = app.add_subcommand("report", "Human-readable summaries of artifacts");
  rep->add_option("--calibration", rep_a.calibration, "Calibration report")->check(CLI::ExistingFile);
  rep->add_option("--contour", rep_a.contour, "Contour report")->check(CLI::ExistingFile);
  rep->add_option("--confusion", rep_a.confusion, "Confusion matrix CSV")->check(CLI::ExistingFile);
  rep->add_option("--range-model", rep_a.range_model, "Range model")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    return Report({3, "Io", e.what()});
  } catch (const CLI::ParseError& e) {
    return Report({2, "BadArgs", e.what()});
  }

  if (dump_config) {
    std::cout << app.config_to_str(true, true);
    return 0;
  }
  try {
    if (bench->parsed()) {
      RunBench(bench_a);
    } else if (ext->parsed()) {
      RunExtract(ext_a);
    } else if (tof->parsed()) {
      RunTof(tof_a);
    } else if (fit->parsed()) {
      RunFit(fit_a);
    } else if (cal->parsed()) {
      RunCalibrate(cal_a);
    } else if (cls->parsed()) {
      RunClassify(cls_a);
    } else if (scan->parsed()) {
      RunScan(scan_a);
    } else if (rec->parsed()) {
      RunReconstruct(rec_a);
    } else if (rep->parsed()) {
      RunReport(rep_a);
    } else {
      std::cerr << app.help();
      return Report({2, "BadArgs", "a command is required"});
    }
  } catch (const Error& e) {
    return Report({ExitStatus(e.code()), std::string(ToString(e.code())), e.what()});
  } catch (const std::exception& e) {
    return Report({3, "Io", e.what()});
  }
  return 0;
}
