/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "pdm2/error.hpp"

namespace pdm2::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

using nlohmann::json;

namespace {

constexpr char kWaveMagic[8] = {'P', 'D', 'M', '2', 'W', 'A', 'V', 'E'};
constexpr std::uint32_t kWaveVersion = 1;
constexpr std::uint32_t kReferenceVersion = 2;

[[noreturn]] void ParseFail(const Path& path, const std::string& what) {
  throw Error(ErrorCode::kParse, path.string() + ": " + what);
}

std::ifstream OpenIn(const Path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream OpenOut(const Path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

void Finish(std::ofstream& out, const Path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

template <typename T>
void Put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T Get(std::istream& in, const Path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) ParseFail(path, "truncated binary header");
  return v;
}

std::vector<std::string> SplitWs(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

std::vector<std::string> SplitComma(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double Num(const std::string& s, const Path& path) {
  try {
    return ParseDouble(s);
  } catch (const Error&) {
    ParseFail(path, "bad number '" + s + "'");
  }
}

long Int(const std::string& s, const Path& path) {
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) ParseFail(path, "bad integer '" + s + "'");
  return v;
}

json ReadJson(const Path& path) {
  std::ifstream in = OpenIn(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    ParseFail(path, e.what());
  }
}

void WriteJson(const Path& path, const json& j) {
  std::ofstream out = OpenOut(path);
  out << j.dump(2) << '\n';
  Finish(out, path);
}

// Runs a reader body, turning JSON access errors into Parse.
template <typename F>
auto FromJson(const Path& path, F&& body) {
  const json j = ReadJson(path);
  try {
    return body(j);
  } catch (const json::exception& e) {
    ParseFail(path, e.what());
  }
}

json Vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 Vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

std::string StatusName(LmStatus s) {
  switch (s) {
    case LmStatus::kConverged: return "converged";
    case LmStatus::kNonConvergence: return "non_convergence";
    case LmStatus::kSingularNormalEquations: return "singular_normal_equations";
  }
  return "converged";
}

LmStatus ParseStatus(const std::string& s) {
  if (s == "converged") return LmStatus::kConverged;
  if (s == "non_convergence") return LmStatus::kNonConvergence;
  if (s == "singular_normal_equations") return LmStatus::kSingularNormalEquations;
  throw Error(ErrorCode::kParse, "unknown solver status '" + s + "'");
}

json StateJson(const CalibrationState& c) {
  json cov = json::array();
  for (int i = 0; i < 7; ++i) {
    json row = json::array();
    for (int k = 0; k < 7; ++k) row.push_back(c.covariance(i, k));
    cov.push_back(row);
  }
  return {{"v", Vec(c.v.vec())},
          {"n", Vec(c.n.vec())},
          {"x_r", Vec(c.x_r)},
          {"residual_rms_mm", c.residual_rms},
          {"iterations", c.iterations},
          {"status", StatusName(c.status)},
          {"covariance", cov},
          {"cost_history", c.cost_history}};
}

CalibrationState StateFrom(const json& j) {
  CalibrationState c;
  c.v = UnitDir(Vec(j.at("v")));
  c.n = UnitDir(Vec(j.at("n")));
  c.x_r = Vec(j.at("x_r"));
  c.residual_rms = j.at("residual_rms_mm").get<double>();
  c.iterations = j.at("iterations").get<int>();
  c.status = ParseStatus(j.at("status").get<std::string>());
  const json& cov = j.at("covariance");
  for (int i = 0; i < 7; ++i) {
    for (int k = 0; k < 7; ++k) c.covariance(i, k) = cov.at(i).at(k).get<double>();
  }
  c.cost_history = j.at("cost_history").get<std::vector<double>>();
  return c;
}

const char* ShapeName(bench::ShapeKind s) {
  switch (s) {
    case bench::ShapeKind::kBlock: return "block";
    case bench::ShapeKind::kCylinder: return "cylinder";
    case bench::ShapeKind::kFilament: return "filament";
  }
  return "block";
}

bench::ShapeKind ParseShape(const std::string& s) {
  if (s == "block") return bench::ShapeKind::kBlock;
  if (s == "cylinder") return bench::ShapeKind::kCylinder;
  if (s == "filament") return bench::ShapeKind::kFilament;
  throw Error(ErrorCode::kParse, "unknown shape '" + s + "'");
}

json MaterialJson(const bench::MaterialSpec& m) {
  return {{"name", m.name},
          {"oa_strength", m.oa_strength},
          {"us_reflectivity", m.us_reflectivity},
          {"band_weights", m.band_weights}};
}

bench::MaterialSpec MaterialFrom(const json& j) {
  bench::MaterialSpec m;
  m.name = j.at("name").get<std::string>();
  m.oa_strength = j.at("oa_strength").get<double>();
  m.us_reflectivity = j.at("us_reflectivity").get<double>();
  m.band_weights = j.at("band_weights").get<std::array<double, 3>>();
  return m;
}

json ArrivalsJson(const bench::Arrivals& a) { return {{"oa", a.oa}, {"us", a.us}, {"oa2", a.oa2}}; }

bench::Arrivals ArrivalsFrom(const json& j) {
  return {j.at("oa").get<double>(), j.at("us").get<double>(), j.at("oa2").get<double>()};
}

json StatsJson(const ErrorStats& s) { return {{"count", s.count}, {"mean_mm", s.mean}, {"std_mm", s.stddev}}; }

ErrorStats StatsFrom(const json& j) {
  return {j.at("count").get<std::size_t>(), j.at("mean_mm").get<double>(), j.at("std_mm").get<double>()};
}

json EdgeJson(const Edge& e) { return {{"q", Vec(e.q.vec())}, {"m", Vec(e.m)}}; }

Edge EdgeFrom(const json& j) { return Edge{UnitDir(Vec(j.at("q"))), Vec(j.at("m"))}; }

std::string Opt(const std::optional<double>& d) { return d ? FormatDouble(*d) : "-"; }

}  // namespace

std::string FormatDouble(double x) {
  std::array<char, 32> buf{};
  const auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw Error(ErrorCode::kInvalidArgument, "cannot format number");
  return std::string(buf.data(), p);
}

double ParseDouble(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  if (!s.empty() && s.front() == '+') ++begin;
  const auto [p, ec] = std::from_chars(begin, s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::kParse, "bad number '" + s + "'");
  }
  return v;
}

// --- waveforms -------------------------------------------------------------

void WriteWaveformCsv(const Path& path, const Waveform& w) {
  std::ofstream out = OpenOut(path);
  out << "time_s,amplitude\n";
  for (std::size_t k = 0; k < w.size(); ++k) out << FormatDouble(w.TimeAt(k)) << ',' << FormatDouble(w[k]) << '\n';
  Finish(out, path);
}

Waveform ReadWaveformCsv(const Path& path) {
  std::ifstream in = OpenIn(path);
  std::string line;
  if (!std::getline(in, line) || SplitComma(line) != std::vector<std::string>{"time_s", "amplitude"}) {
    ParseFail(path, "expected header time_s,amplitude");
  }
  std::vector<double> t, a;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = SplitComma(line);
    if (f.size() != 2) ParseFail(path, "expected two columns");
    t.push_back(Num(f[0], path));
    a.push_back(Num(f[1], path));
  }
  if (a.size() < 2) ParseFail(path, "need at least two samples");
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  if (!(dt > 0.0)) ParseFail(path, "time column must increase");
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (std::abs((t[k] - t[k - 1]) - dt) > 1e-6 * dt) ParseFail(path, "time step is not uniform");
  }
  // The rate is rounded to a whole number of hertz so the grid survives a
  // round trip through decimal time stamps.
  const double rate = std::round(1.0 / dt);
  return Waveform(std::move(a), rate, t.front());
}

void WriteWaveformBinary(const Path& path, const Waveform& w) {
  std::ofstream out = OpenOut(path, std::ios::binary);
  out.write(kWaveMagic, sizeof kWaveMagic);
  Put(out, kWaveVersion);
  Put(out, w.sample_rate());
  Put(out, w.t0());
  Put(out, static_cast<std::uint64_t>(w.size()));
  out.write(reinterpret_cast<const char*>(w.samples().data()), static_cast<std::streamsize>(w.size() * sizeof(double)));
  Finish(out, path);
}

namespace {

struct Container {
  std::uint32_t version = 0;
  double sample_rate = 0.0;
  double t0 = 0.0;
  std::uint32_t modality = 0;
  std::string source_id;
  std::vector<double> samples;
};

Container ReadContainer(const Path& path) {
  std::ifstream in = OpenIn(path, std::ios::binary);
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kWaveMagic, sizeof magic) != 0) {
    ParseFail(path, "missing PDM2WAVE magic");
  }
  Container c;
  c.version = Get<std::uint32_t>(in, path);
  if (c.version != kWaveVersion && c.version != kReferenceVersion) {
    ParseFail(path, "unsupported container version " + std::to_string(c.version));
  }
  c.sample_rate = Get<double>(in, path);
  c.t0 = Get<double>(in, path);
  const auto count = Get<std::uint64_t>(in, path);
  if (c.version == kReferenceVersion) {
    c.modality = Get<std::uint32_t>(in, path);
    const auto len = Get<std::uint32_t>(in, path);
    c.source_id.resize(len);
    if (len && !in.read(c.source_id.data(), len)) ParseFail(path, "truncated source id");
  }
  if (count > (std::uint64_t{1} << 32)) ParseFail(path, "implausible sample count");
  c.samples.resize(count);
  if (count && !in.read(reinterpret_cast<char*>(c.samples.data()), static_cast<std::streamsize>(count * sizeof(double)))) {
    ParseFail(path, "truncated samples");
  }
  if (in.peek() != std::char_traits<char>::eof()) ParseFail(path, "trailing bytes");
  return c;
}

}  // namespace

Waveform ReadWaveformBinary(const Path& path) {
  Container c = ReadContainer(path);
  if (c.version != kWaveVersion) ParseFail(path, "not a waveform container");
  try {
    return Waveform(std::move(c.samples), c.sample_rate, c.t0);
  } catch (const Error& e) {
    ParseFail(path, e.what());
  }
}

void WriteWaveform(const Path& path, const Waveform& w) {
  if (path.extension() == ".csv") {
    WriteWaveformCsv(path, w);
  } else {
    WriteWaveformBinary(path, w);
  }
}

Waveform ReadWaveform(const Path& path) {
  std::ifstream in = OpenIn(path, std::ios::binary);
  char magic[8] = {};
  in.read(magic, sizeof magic);
  if (in.gcount() == sizeof magic && std::memcmp(magic, kWaveMagic, sizeof magic) == 0) return ReadWaveformBinary(path);
  return ReadWaveformCsv(path);
}

void WriteReference(const Path& path, const ReferencePattern& r, double sample_rate) {
  std::ofstream out = OpenOut(path, std::ios::binary);
  out.write(kWaveMagic, sizeof kWaveMagic);
  Put(out, kReferenceVersion);
  Put(out, sample_rate);
  Put(out, 0.0);
  Put(out, static_cast<std::uint64_t>(r.size()));
  Put(out, static_cast<std::uint32_t>(r.modality() == Modality::kUltrasound ? 0 : 1));
  Put(out, static_cast<std::uint32_t>(r.source_id().size()));
  out.write(r.source_id().data(), static_cast<std::streamsize>(r.source_id().size()));
  out.write(reinterpret_cast<const char*>(r.samples().data()), static_cast<std::streamsize>(r.size() * sizeof(double)));
  Finish(out, path);
}

ReferencePattern ReadReference(const Path& path) {
  Container c = ReadContainer(path);
  if (c.version != kReferenceVersion) ParseFail(path, "not a reference container");
  if (c.modality > 1) ParseFail(path, "bad modality tag");
  try {
    return ReferencePattern(std::move(c.samples), c.modality == 0 ? Modality::kUltrasound : Modality::kOptoacoustic,
                            std::move(c.source_id));
  } catch (const Error& e) {
    ParseFail(path, e.what());
  }
}

// --- range model -----------------------------------------------------------

void WriteRangeModel(const Path& path, const RangeModel& m) {
  WriteJson(path, {{"modality", std::string(ModalityName(m.modality))},
                   {"beta2", m.beta2},
                   {"beta1", m.beta1},
                   {"beta0", m.beta0},
                   {"tof_min_s", m.tof_min},
                   {"tof_max_s", m.tof_max},
                   {"sample_count", m.sample_count},
                   {"residual_max_mm", m.residual_max_mm},
                   {"residual_rms_mm", m.residual_rms_mm}});
}

RangeModel ReadRangeModel(const Path& path) {
  return FromJson(path, [&](const json& j) {
    RangeModel m;
    try {
      m.modality = ParseModality(j.at("modality").get<std::string>());
    } catch (const Error& e) {
      ParseFail(path, e.what());
    }
    m.beta2 = j.at("beta2").get<double>();
    m.beta1 = j.at("beta1").get<double>();
    m.beta0 = j.at("beta0").get<double>();
    m.tof_min = j.at("tof_min_s").get<double>();
    m.tof_max = j.at("tof_max_s").get<double>();
    m.sample_count = j.at("sample_count").get<std::size_t>();
    m.residual_max_mm = j.at("residual_max_mm").get<double>();
    m.residual_rms_mm = j.at("residual_rms_mm").get<double>();
    return m;
  });
}

// --- calibration -----------------------------------------------------------

void WriteCalibrationSession(const Path& path, const CalibrationSession& s) {
  std::ofstream out = OpenOut(path);
  out << "# pdm2 calibration session\n";
  out << "UNITS length=mm angle=rad\n";
  out << "FLOORS threshold_frac=" << FormatDouble(s.center_options.threshold_frac)
      << " variance_floor=" << FormatDouble(s.center_options.variance_floor)
      << " sigma_theta=" << FormatDouble(s.sigma_theta) << '\n';
  for (const SessionRaw& r : s.raws) {
    out << "RAW " << r.frame << ' ' << (r.kind == FrameKind::kTip ? "tip" : "edge") << ' ' << r.center << ' '
        << FormatDouble(r.raw.S.x()) << ' ' << FormatDouble(r.raw.S.y()) << ' ' << FormatDouble(r.raw.S.z()) << ' '
        << FormatDouble(r.raw.d) << ' ' << FormatDouble(r.raw.amplitude) << '\n';
  }
  for (const RotationReading& a : s.angles) {
    out << "ANGLE " << a.frame_i << ' ' << a.frame_k << ' ' << FormatDouble(a.theta) << ' '
        << FormatDouble(a.sigma_theta) << '\n';
  }
  Finish(out, path);
}

CalibrationSession ReadCalibrationSession(const Path& path) {
  std::ifstream in = OpenIn(path);
  CalibrationSession s;
  std::string line;
  bool units = false;
  while (std::getline(in, line)) {
    const auto f = SplitWs(line);
    if (f.empty() || f[0].starts_with('#')) continue;
    if (f[0] == "UNITS") {
      if (f.size() != 3 || f[1] != "length=mm" || f[2] != "angle=rad") ParseFail(path, "unsupported units");
      units = true;
    } else if (f[0] == "FLOORS") {
      for (std::size_t k = 1; k < f.size(); ++k) {
        const auto eq = f[k].find('=');
        if (eq == std::string::npos) ParseFail(path, "bad FLOORS field '" + f[k] + "'");
        const std::string key = f[k].substr(0, eq);
        const double v = Num(f[k].substr(eq + 1), path);
        if (key == "threshold_frac") {
          s.center_options.threshold_frac = v;
        } else if (key == "variance_floor") {
          s.center_options.variance_floor = v;
        } else if (key == "sigma_theta") {
          s.sigma_theta = v;
        } else {
          ParseFail(path, "unknown FLOORS key '" + key + "'");
        }
      }
    } else if (f[0] == "RAW") {
      if (f.size() != 9) ParseFail(path, "RAW needs 8 fields");
      SessionRaw r;
      r.frame = static_cast<int>(Int(f[1], path));
      if (f[2] == "tip") {
        r.kind = FrameKind::kTip;
      } else if (f[2] == "edge") {
        r.kind = FrameKind::kEdge;
      } else {
        ParseFail(path, "frame kind must be tip or edge");
      }
      r.center = static_cast<int>(Int(f[3], path));
      r.raw.S = Point3(Num(f[4], path), Num(f[5], path), Num(f[6], path));
      r.raw.d = Num(f[7], path);
      r.raw.amplitude = Num(f[8], path);
      s.raws.push_back(r);
    } else if (f[0] == "ANGLE") {
      if (f.size() != 5) ParseFail(path, "ANGLE needs 4 fields");
      s.angles.push_back({static_cast<int>(Int(f[1], path)), static_cast<int>(Int(f[2], path)), Num(f[3], path),
                          Num(f[4], path)});
    } else {
      ParseFail(path, "unknown record '" + f[0] + "'");
    }
  }
  if (!units) ParseFail(path, "missing UNITS header");
  return s;
}

void WriteCalibrationReport(const Path& path, const CalibrationResult& r) {
  WriteJson(path, {{"units", {{"length", "mm"}, {"angle", "rad"}}},
                   {"closed_form", StateJson(r.closed_form)},
                   {"refined", StateJson(r.refined)},
                   {"tip_frames", r.tip_frames.size()},
                   {"edge_frames", r.edge_frames.size()}});
}

CalibrationResult ReadCalibrationReport(const Path& path) {
  return FromJson(path, [&](const json& j) {
    CalibrationResult r;
    try {
      r.closed_form = StateFrom(j.at("closed_form"));
      r.refined = StateFrom(j.at("refined"));
    } catch (const Error& e) {
      ParseFail(path, e.what());
    }
    return r;
  });
}

std::string FormatCalibrationTable(const CalibrationResult& r) {
  std::ostringstream out;
  out << std::fixed;
  auto row = [&](const char* name, const Vec3& a, const Vec3& b, int prec) {
    out << std::left << std::setw(6) << name << std::right;
    for (int i = 0; i < 3; ++i) out << ' ' << std::setw(10) << std::setprecision(prec) << a[i];
    out << "   ";
    for (int i = 0; i < 3; ++i) out << ' ' << std::setw(10) << std::setprecision(prec) << b[i];
    out << '\n';
  };
  out << std::left << std::setw(6) << "" << std::right << std::setw(33) << "closed form" << "   " << std::setw(33)
      << "refined" << '\n';
  row("v", r.closed_form.v.vec(), r.refined.v.vec(), 4);
  row("n", r.closed_form.n.vec(), r.refined.n.vec(), 4);
  row("X_R", r.closed_form.x_r, r.refined.x_r, 2);
  out << std::left << std::setw(6) << "rms" << std::right << std::setprecision(4) << std::setw(33)
      << r.closed_form.residual_rms << "   " << std::setw(33) << r.refined.residual_rms << '\n';
  out << std::left << std::setw(6) << "iter" << std::right << std::setw(33) << r.closed_form.iterations << "   "
      << std::setw(33) << r.refined.iterations << '\n';
  return out.str();
}

// --- bench -----------------------------------------------------------------

void WriteScene(const Path& path, const bench::Scene& s) {
  json objects = json::array();
  for (const bench::SceneObject& o : s.objects) {
    objects.push_back({{"shape", ShapeName(o.shape)},
                       {"center", Vec(o.center)},
                       {"extents", Vec(o.extents)},
                       {"yaw", o.yaw},
                       {"radius", o.radius},
                       {"height", o.height},
                       {"end_a", Vec(o.end_a)},
                       {"end_b", Vec(o.end_b)},
                       {"material", MaterialJson(o.material)}});
  }
  const bench::NoiseSpec& n = s.noise;
  const bench::WaveformSpec& w = s.wave;
  const bench::BeamProfile& b = s.beam;
  WriteJson(path, {{"seed", s.seed},
                   {"v_true", Vec(s.v_true.vec())},
                   {"n_true", Vec(s.n_true.vec())},
                   {"xr_true", Vec(s.xr_true)},
                   {"sound_speed", s.sound_speed},
                   {"objects", objects},
                   {"noise",
                    {{"sigma_sample", n.sigma_sample},
                     {"sigma_s", n.sigma_s},
                     {"sigma_d", n.sigma_d},
                     {"sigma_theta", n.sigma_theta},
                     {"range_jitter_us", n.range_jitter_us},
                     {"range_jitter_oa", n.range_jitter_oa}}},
                   {"wave",
                    {{"sample_rate", w.sample_rate},
                     {"length", w.length},
                     {"t0", w.t0},
                     {"acoustic_offset_mm", w.acoustic_offset_mm},
                     {"burst_cycles", w.burst_cycles},
                     {"second_echo_ratio", w.second_echo_ratio},
                     {"nonlinearity_us_mm", w.nonlinearity_us_mm},
                     {"nonlinearity_oa_mm", w.nonlinearity_oa_mm},
                     {"nonlinearity_lo_mm", w.nonlinearity_lo_mm},
                     {"nonlinearity_hi_mm", w.nonlinearity_hi_mm}}},
                   {"beam",
                    {{"fwhm_us", b.fwhm_us},
                     {"fwhm_oa", b.fwhm_oa},
                     {"focus_mm", b.focus_mm},
                     {"widening", b.widening}}}});
}

bench::Scene ReadScene(const Path& path) {
  bench::Scene s = FromJson(path, [&](const json& j) {
    bench::Scene s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.v_true = UnitDir(Vec(j.at("v_true")));
    s.n_true = UnitDir(Vec(j.at("n_true")));
    s.xr_true = Vec(j.at("xr_true"));
    s.sound_speed = j.at("sound_speed").get<double>();
    for (const json& o : j.at("objects")) {
      bench::SceneObject x;
      x.shape = ParseShape(o.at("shape").get<std::string>());
      x.center = Vec(o.at("center"));
      x.extents = Vec(o.at("extents"));
      x.yaw = o.at("yaw").get<double>();
      x.radius = o.at("radius").get<double>();
      x.height = o.at("height").get<double>();
      x.end_a = Vec(o.at("end_a"));
      x.end_b = Vec(o.at("end_b"));
      x.material = MaterialFrom(o.at("material"));
      s.objects.push_back(x);
    }
    const json& n = j.at("noise");
    s.noise = {n.at("sigma_sample").get<double>(),   n.at("sigma_s").get<double>(),
               n.at("sigma_d").get<double>(),        n.at("sigma_theta").get<double>(),
               n.at("range_jitter_us").get<double>(), n.at("range_jitter_oa").get<double>()};
    const json& w = j.at("wave");
    s.wave.sample_rate = w.at("sample_rate").get<double>();
    s.wave.length = w.at("length").get<std::size_t>();
    s.wave.t0 = w.at("t0").get<double>();
    s.wave.acoustic_offset_mm = w.at("acoustic_offset_mm").get<double>();
    s.wave.burst_cycles = w.at("burst_cycles").get<double>();
    s.wave.second_echo_ratio = w.at("second_echo_ratio").get<double>();
    s.wave.nonlinearity_us_mm = w.at("nonlinearity_us_mm").get<double>();
    s.wave.nonlinearity_oa_mm = w.at("nonlinearity_oa_mm").get<double>();
    s.wave.nonlinearity_lo_mm = w.at("nonlinearity_lo_mm").get<double>();
    s.wave.nonlinearity_hi_mm = w.at("nonlinearity_hi_mm").get<double>();
    const json& b = j.at("beam");
    s.beam = {b.at("fwhm_us").get<double>(), b.at("fwhm_oa").get<double>(), b.at("focus_mm").get<double>(),
              b.at("widening").get<double>()};
    return s;
  });
  try {
    bench::Validate(s);
  } catch (const Error& e) {
    ParseFail(path, e.what());
  }
  return s;
}

void WriteCalibrationTruth(const Path& path, const bench::CalibrationTruth& t) {
  WriteJson(path, {{"v", Vec(t.v.vec())},
                   {"n", Vec(t.n.vec())},
                   {"x_r", Vec(t.x_r)},
                   {"tip", Vec(t.tip)},
                   {"filament_a", Vec(t.filament_a)},
                   {"filament_b", Vec(t.filament_b)},
                   {"frame_angles", t.frame_angles}});
}

bench::CalibrationTruth ReadCalibrationTruth(const Path& path) {
  return FromJson(path, [&](const json& j) {
    bench::CalibrationTruth t;
    t.v = UnitDir(Vec(j.at("v")));
    t.n = UnitDir(Vec(j.at("n")));
    t.x_r = Vec(j.at("x_r"));
    t.tip = Vec(j.at("tip"));
    t.filament_a = Vec(j.at("filament_a"));
    t.filament_b = Vec(j.at("filament_b"));
    t.frame_angles = j.at("frame_angles").get<std::vector<double>>();
    return t;
  });
}

void WriteScanTruth(const Path& path, const ScanTruth& t) {
  json stations = json::array();
  for (const bench::StationTruth& s : t.stations) {
    stations.push_back({{"hit", s.hit},
                        {"distance", s.distance},
                        {"arrivals", ArrivalsJson(s.arrivals)},
                        {"point_object", Vec(s.point_object)},
                        {"object", s.object}});
  }
  json edges = json::array();
  for (const Edge& e : t.edges) edges.push_back(EdgeJson(e));
  WriteJson(path, {{"stations", stations}, {"edges", edges}});
}

ScanTruth ReadScanTruth(const Path& path) {
  return FromJson(path, [&](const json& j) {
    ScanTruth t;
    for (const json& s : j.at("stations")) {
      bench::StationTruth x;
      x.hit = s.at("hit").get<bool>();
      x.distance = s.at("distance").get<double>();
      x.arrivals = ArrivalsFrom(s.at("arrivals"));
      x.point_object = Vec(s.at("point_object"));
      x.object = s.at("object").get<std::size_t>();
      t.stations.push_back(x);
    }
    for (const json& e : j.at("edges")) t.edges.push_back(EdgeFrom(e));
    return t;
  });
}

// --- scans -----------------------------------------------------------------

void WriteScanSession(const Path& dir, const bench::ScanSession& s) {
  if (s.poses.size() != s.waveforms.size()) throw Error(ErrorCode::kInvalidArgument, "poses and waveforms differ in count");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
  const Path index = dir / "poses.txt";
  std::ofstream out = OpenOut(index);
  out << "# station Sx Sy Sz theta waveform\n";
  for (std::size_t i = 0; i < s.poses.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "station_%04zu.bin", i);
    const bench::ScanPose& p = s.poses[i];
    out << i << ' ' << FormatDouble(p.S.x()) << ' ' << FormatDouble(p.S.y()) << ' ' << FormatDouble(p.S.z()) << ' '
        << FormatDouble(p.theta) << ' ' << name << '\n';
    WriteWaveformBinary(dir / name, s.waveforms[i]);
  }
  Finish(out, index);
}

bench::ScanSession ReadScanSession(const Path& dir) {
  const Path index = dir / "poses.txt";
  std::ifstream in = OpenIn(index);
  bench::ScanSession s;
  std::string line;
  while (std::getline(in, line)) {
    const auto f = SplitWs(line);
    if (f.empty() || f[0].starts_with('#')) continue;
    if (f.size() != 6) ParseFail(index, "expected 6 fields per station");
    if (Int(f[0], index) != static_cast<long>(s.poses.size())) ParseFail(index, "stations out of order");
    s.poses.push_back({Point3(Num(f[1], index), Num(f[2], index), Num(f[3], index)), Num(f[4], index)});
    s.waveforms.push_back(ReadWaveform(dir / f[5]));
  }
  return s;
}

void WriteStations(const Path& path, const std::vector<ScanStation>& st) {
  std::ofstream out = OpenOut(path);
  out << "# Sx Sy Sz theta d_us d_oa\n";
  for (const ScanStation& s : st) {
    out << FormatDouble(s.S.x()) << ' ' << FormatDouble(s.S.y()) << ' ' << FormatDouble(s.S.z()) << ' '
        << FormatDouble(s.theta) << ' ' << Opt(s.d_us) << ' ' << Opt(s.d_oa) << '\n';
  }
  Finish(out, path);
}

std::vector<ScanStation> ReadStations(const Path& path) {
  std::ifstream in = OpenIn(path);
  std::vector<ScanStation> st;
  std::string line;
  auto opt = [&](const std::string& s) -> std::optional<double> {
    if (s == "-") return std::nullopt;
    return Num(s, path);
  };
  while (std::getline(in, line)) {
    const auto f = SplitWs(line);
    if (f.empty() || f[0].starts_with('#')) continue;
    if (f.size() != 6) ParseFail(path, "expected 6 fields per station");
    st.push_back({Point3(Num(f[0], path), Num(f[1], path), Num(f[2], path)), Num(f[3], path), opt(f[4]), opt(f[5])});
  }
  return st;
}

void WritePointCloud(const Path& path, const PointCloud& c) {
  std::ofstream out = OpenOut(path);
  for (const CloudPoint& p : c.points) {
    out << FormatDouble(p.p.x()) << ' ' << FormatDouble(p.p.y()) << ' ' << FormatDouble(p.p.z()) << ' '
        << ModalityName(p.modality) << ' ' << p.station << '\n';
  }
  Finish(out, path);
}

PointCloud ReadPointCloud(const Path& path) {
  std::ifstream in = OpenIn(path);
  PointCloud c;
  std::string line;
  while (std::getline(in, line)) {
    const auto f = SplitWs(line);
    if (f.empty() || f[0].starts_with('#')) continue;
    if (f.size() != 5) ParseFail(path, "expected x y z modality station_id");
    CloudPoint p;
    p.p = Point3(Num(f[0], path), Num(f[1], path), Num(f[2], path));
    if (!p.p.allFinite()) ParseFail(path, "non-finite coordinate");
    try {
      p.modality = ParseModality(f[3]);
    } catch (const Error& e) {
      ParseFail(path, e.what());
    }
    const long id = Int(f[4], path);
    if (id < 0) ParseFail(path, "negative station id");
    p.station = static_cast<std::size_t>(id);
    c.points.push_back(p);
  }
  return c;
}

void WriteContourReport(const Path& path, const ContourReport& r) {
  json faces = json::array();
  for (std::size_t k = 0; k < r.edges.size(); ++k) {
    json face = {{"truth", EdgeJson(r.edges[k])}, {"us", StatsJson(r.per_edge_us[k])}, {"oa", StatsJson(r.per_edge_oa[k])}};
    face["fitted_us"] = r.fitted_us[k] ? EdgeJson(*r.fitted_us[k]) : json(nullptr);
    face["fitted_oa"] = r.fitted_oa[k] ? EdgeJson(*r.fitted_oa[k]) : json(nullptr);
    faces.push_back(face);
  }
  WriteJson(path, {{"us", StatsJson(r.us)},
                   {"oa", StatsJson(r.oa)},
                   {"faces", faces},
                   {"errors_mm", r.errors},
                   {"assigned", r.assigned}});
}

ContourReport ReadContourReport(const Path& path) {
  return FromJson(path, [&](const json& j) {
    ContourReport r;
    r.us = StatsFrom(j.at("us"));
    r.oa = StatsFrom(j.at("oa"));
    for (const json& f : j.at("faces")) {
      r.edges.push_back(EdgeFrom(f.at("truth")));
      r.per_edge_us.push_back(StatsFrom(f.at("us")));
      r.per_edge_oa.push_back(StatsFrom(f.at("oa")));
      const json& fu = f.at("fitted_us");
      const json& fo = f.at("fitted_oa");
      r.fitted_us.push_back(fu.is_null() ? std::nullopt : std::optional<Edge>(EdgeFrom(fu)));
      r.fitted_oa.push_back(fo.is_null() ? std::nullopt : std::optional<Edge>(EdgeFrom(fo)));
    }
    r.errors = j.at("errors_mm").get<std::vector<double>>();
    r.assigned = j.at("assigned").get<std::vector<std::size_t>>();
    if (r.errors.size() != r.assigned.size()) ParseFail(path, "errors and assignments differ in length");
    return r;
  });
}

// --- classification --------------------------------------------------------

void WriteManifest(const Path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out = OpenOut(path);
  out << "path,label\n";
  for (const ManifestEntry& e : entries) {
    if (e.path.find(',') != std::string::npos || e.label.find(',') != std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "manifest fields may not contain commas");
    }
    out << e.path << ',' << e.label << '\n';
  }
  Finish(out, path);
}

std::vector<ManifestEntry> ReadManifest(const Path& path) {
  std::ifstream in = OpenIn(path);
  std::string line;
  if (!std::getline(in, line) || SplitComma(line) != std::vector<std::string>{"path", "label"}) {
    ParseFail(path, "expected header path,label");
  }
  std::vector<ManifestEntry> out;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = SplitComma(line);
    if (f.size() != 2 || f[0].empty() || f[1].empty()) ParseFail(path, "expected path,label");
    Path p(f[0]);
    if (p.is_relative()) p = path.parent_path() / p;
    out.push_back({p.string(), f[1]});
  }
  return out;
}

void WriteConfusion(const Path& path, const ConfusionMatrix& m) {
  std::ofstream out = OpenOut(path);
  out << "truth\\predicted";
  for (const std::string& l : m.labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    out << m.labels[i];
    for (long c : m.counts[i]) out << ',' << c;
    out << '\n';
  }
  out << "trials," << m.trial_count << '\n';
  out << "trial_accuracy";
  for (double a : m.trial_accuracy) out << ',' << FormatDouble(a);
  out << '\n';
  out << "mean_accuracy," << FormatDouble(m.MeanAccuracy()) << '\n';
  Finish(out, path);
}

ConfusionMatrix ReadConfusion(const Path& path) {
  std::ifstream in = OpenIn(path);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) rows.push_back(SplitComma(line));
  }
  if (rows.size() < 4 || rows[0].empty() || rows[0][0] != "truth\\predicted") ParseFail(path, "not a confusion matrix");
  ConfusionMatrix m;
  m.labels.assign(rows[0].begin() + 1, rows[0].end());
  const std::size_t n = m.labels.size();
  if (rows.size() != n + 4) ParseFail(path, "row count does not match labels");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows[i + 1];
    if (r.size() != n + 1 || r[0] != m.labels[i]) ParseFail(path, "bad matrix row");
    std::vector<long> counts;
    for (std::size_t k = 1; k <= n; ++k) counts.push_back(Int(r[k], path));
    m.counts.push_back(counts);
  }
  const auto& trials = rows[n + 1];
  if (trials.size() != 2 || trials[0] != "trials") ParseFail(path, "missing trials row");
  m.trial_count = static_cast<int>(Int(trials[1], path));
  const auto& acc = rows[n + 2];
  if (acc.empty() || acc[0] != "trial_accuracy") ParseFail(path, "missing trial_accuracy row");
  for (std::size_t k = 1; k < acc.size(); ++k) m.trial_accuracy.push_back(Num(acc[k], path));
  const auto& footer = rows[n + 3];
  if (footer.size() != 2 || footer[0] != "mean_accuracy") ParseFail(path, "missing mean_accuracy footer");
  if (Num(footer[1], path) != m.MeanAccuracy()) ParseFail(path, "mean_accuracy footer disagrees with trials");
  return m;
}

}  // namespace pdm2::io
