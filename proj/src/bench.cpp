/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "pdm2/error.hpp"

namespace pdm2::bench {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFwhmToSigma = 2.0 * 1.1774100225154747;  // 2 sqrt(2 ln 2)

double MmPerSecond(const Scene& scene) { return scene.sound_speed * 1e3; }

struct Box {
  Vec3 lo, hi;
  bool Overlaps(const Box& o) const {
    return (lo.array() < o.hi.array()).all() && (o.lo.array() < hi.array()).all();
  }
};

Box Bounds(const SceneObject& o) {
  switch (o.shape) {
    case ShapeKind::kBlock: {
      const double c = std::abs(std::cos(o.yaw)), s = std::abs(std::sin(o.yaw));
      const Vec3 h(0.5 * (c * o.extents.x() + s * o.extents.y()),
                   0.5 * (s * o.extents.x() + c * o.extents.y()), 0.5 * o.extents.z());
      return {o.center - h, o.center + h};
    }
    case ShapeKind::kCylinder: {
      const Vec3 h(o.radius, o.radius, 0.5 * o.height);
      return {o.center - h, o.center + h};
    }
    case ShapeKind::kFilament: {
      const Vec3 r = Vec3::Constant(o.radius);
      return {o.end_a.cwiseMin(o.end_b) - r, o.end_a.cwiseMax(o.end_b) + r};
    }
  }
  return {};
}

Mat3 Yaw(double a) {
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
  return r;
}

constexpr double kEps = 1e-9;
constexpr double kNone = std::numeric_limits<double>::infinity();

double IntersectBlock(const SceneObject& b, const Point3& o, const Vec3& d) {
  const Mat3 rt = Yaw(b.yaw).transpose();
  const Vec3 lo = rt * (o - b.center), ld = rt * d;
  const Vec3 h = 0.5 * b.extents;
  double t0 = -kNone, t1 = kNone;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(ld(i)) < 1e-15) {
      if (std::abs(lo(i)) > h(i)) return kNone;
      continue;
    }
    double a = (-h(i) - lo(i)) / ld(i), c = (h(i) - lo(i)) / ld(i);
    if (a > c) std::swap(a, c);
    t0 = std::max(t0, a);
    t1 = std::min(t1, c);
  }
  if (t0 > t1 || t0 <= kEps) return kNone;
  return t0;
}

double IntersectCylinder(const SceneObject& c, const Point3& o, const Vec3& d) {
  const Vec3 lo = o - c.center;
  const double hh = 0.5 * c.height;
  double best = kNone;
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > 1e-15) {
    const double b = lo.x() * d.x() + lo.y() * d.y();
    const double k = lo.x() * lo.x() + lo.y() * lo.y() - c.radius * c.radius;
    const double disc = b * b - a * k;
    if (disc >= 0.0) {
      const double t = (-b - std::sqrt(disc)) / a;
      if (t > kEps && std::abs(lo.z() + t * d.z()) <= hh) best = t;
    }
  }
  if (std::abs(d.z()) > 1e-15) {
    for (double zc : {-hh, hh}) {
      const double t = (zc - lo.z()) / d.z();
      const Vec3 p = lo + t * d;
      if (t > kEps && p.x() * p.x() + p.y() * p.y() <= c.radius * c.radius) best = std::min(best, t);
    }
  }
  return best;
}

double IntersectFilament(const SceneObject& f, const Point3& o, const Vec3& d) {
  const Vec3 axis = f.end_b - f.end_a;
  const double len = axis.norm();
  const Vec3 u = axis / len;
  const Vec3 w = o - f.end_a;
  const Vec3 dp = d - d.dot(u) * u, wp = w - w.dot(u) * u;
  const double a = dp.squaredNorm();
  if (a < 1e-15) return kNone;
  const double b = dp.dot(wp), k = wp.squaredNorm() - f.radius * f.radius;
  const double disc = b * b - a * k;
  if (disc < 0.0) return kNone;
  const double t = (-b - std::sqrt(disc)) / a;
  const double along = (w + t * d).dot(u);
  if (t <= kEps || along < 0.0 || along > len) return kNone;
  return t;
}

double FocusGain(const Scene& scene, double d) {
  return 1.0 / (1.0 + scene.beam.widening * std::abs(d - scene.beam.focus_mm));
}

double Fwhm(const Scene& scene, Modality m, double d) {
  const double base = m == Modality::kUltrasound ? scene.beam.fwhm_us : scene.beam.fwhm_oa;
  return base * (1.0 + scene.beam.widening * std::abs(d - scene.beam.focus_mm));
}

void AddBurst(const Scene& scene, const std::array<double, 3>& weights, double onset, double amp,
              std::vector<double>& s) {
  if (amp == 0.0) return;
  const double fs = scene.wave.sample_rate;
  const double dur = BurstDuration(scene);
  const auto k0 = static_cast<long>(std::max(0.0, std::ceil((onset - scene.wave.t0) * fs)));
  const auto k1 = static_cast<long>(std::floor((onset + dur - scene.wave.t0) * fs));
  for (long k = k0; k <= k1 && k < static_cast<long>(s.size()); ++k) {
    s[k] += amp * BurstValue(scene, weights, scene.wave.t0 + static_cast<double>(k) / fs - onset);
  }
}

}  // namespace

void Validate(const Scene& scene) {
  if (!(scene.sound_speed > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sound speed must be positive");
  const NoiseSpec& n = scene.noise;
  for (double x : {n.sigma_sample, n.sigma_s, n.sigma_d, n.sigma_theta, n.range_jitter_us, n.range_jitter_oa}) {
    if (!(x >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise levels must be non-negative");
  }
  if (!(scene.wave.sample_rate > 0.0) || scene.wave.length == 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid waveform spec");
  }
  std::vector<Box> boxes;
  for (const SceneObject& o : scene.objects) {
    const MaterialSpec& m = o.material;
    double sum = 0.0;
    for (double w : m.band_weights) {
      if (!(w >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "band weights must be non-negative");
      sum += w;
    }
    if (sum > 1.0 + 1e-9) throw Error(ErrorCode::kInvalidArgument, "band weights must sum to at most 1");
    if (!(m.oa_strength >= 0.0 && m.oa_strength <= 1.0 && m.us_reflectivity >= 0.0 && m.us_reflectivity <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "material strengths must lie in [0, 1]");
    }
    bool ok = true;
    switch (o.shape) {
      case ShapeKind::kBlock: ok = (o.extents.array() > 0.0).all(); break;
      case ShapeKind::kCylinder: ok = o.radius > 0.0 && o.height > 0.0; break;
      case ShapeKind::kFilament: ok = o.radius > 0.0 && (o.end_b - o.end_a).norm() > 0.0; break;
    }
    if (!ok) throw Error(ErrorCode::kInvalidArgument, "object dimensions must be positive");
    const Box b = Bounds(o);
    for (const Box& other : boxes) {
      if (b.Overlaps(other)) throw Error(ErrorCode::kInvalidArgument, "scene objects overlap");
    }
    boxes.push_back(b);
  }
}

std::optional<Hit> CastRay(const Scene& scene, const Point3& origin, const UnitDir& dir,
                           double turntable_angle) {
  const Rotation back(scene.n_true, -turntable_angle);
  const Point3 o = RotateAbout(back, scene.xr_true, origin);
  const Vec3 d = RotationMatrix(back) * dir.vec();
  std::optional<Hit> best;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const SceneObject& obj = scene.objects[i];
    double t = kNone;
    switch (obj.shape) {
      case ShapeKind::kBlock: t = IntersectBlock(obj, o, d); break;
      case ShapeKind::kCylinder: t = IntersectCylinder(obj, o, d); break;
      case ShapeKind::kFilament: t = IntersectFilament(obj, o, d); break;
    }
    if (t < kNone && (!best || t < best->distance)) best = Hit{t, i, o + t * d};
  }
  return best;
}

double Nonlinearity(const WaveformSpec& spec, Modality m, double d_mm) {
  const double a = m == Modality::kUltrasound ? spec.nonlinearity_us_mm : spec.nonlinearity_oa_mm;
  const double x = kPi * (d_mm - spec.nonlinearity_lo_mm) /
                   (2.0 * (spec.nonlinearity_hi_mm - spec.nonlinearity_lo_mm));
  return a * std::sin(x) * std::sin(x);
}

Arrivals ArrivalTimes(const Scene& scene, double d_mm, double jitter_us_mm, double jitter_oa_mm) {
  const double c = MmPerSecond(scene);
  const double l0 = scene.wave.acoustic_offset_mm;
  Arrivals a;
  a.oa = (d_mm + l0 + Nonlinearity(scene.wave, Modality::kOptoacoustic, d_mm) + jitter_oa_mm) / c;
  a.us = 2.0 * (d_mm + l0 + Nonlinearity(scene.wave, Modality::kUltrasound, d_mm) + jitter_us_mm) / c;
  a.oa2 = 3.0 * a.oa;
  return a;
}

double BurstDuration(const Scene& scene) { return scene.wave.burst_cycles / kEmissionBands[2]; }

double BurstValue(const Scene& scene, const std::array<double, 3>& weights, double t) {
  const double dur = BurstDuration(scene);
  if (t < 0.0 || t > dur) return 0.0;
  const double hann = 0.5 - 0.5 * std::cos(2.0 * kPi * t / dur);
  double s = 0.0;
  for (std::size_t b = 0; b < 3; ++b) s += std::sqrt(weights[b]) * std::sin(2.0 * kPi * kEmissionBands[b] * t);
  return hann * s;
}

double BurstRms(const Scene& scene, const std::array<double, 3>& weights) {
  const double fs = scene.wave.sample_rate;
  const auto n = static_cast<std::size_t>(std::floor(BurstDuration(scene) * fs)) + 1;
  double ss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = BurstValue(scene, weights, static_cast<double>(k) / fs);
    ss += v * v;
  }
  return std::sqrt(ss / static_cast<double>(n));
}

double NoiseForSnr(const Scene& scene, const std::array<double, 3>& weights, double snr_db) {
  return BurstRms(scene, weights) / std::pow(10.0, snr_db / 20.0);
}

Waveform SynthEcho(const Scene& scene, const MaterialSpec& material, double d_mm,
                   std::uint64_t stream, StationTruth* truth, double gain) {
  std::mt19937_64 rng(DeriveSeed(scene.seed, stream));
  std::normal_distribution<double> g;
  const double j_us = scene.noise.range_jitter_us * g(rng);
  const double j_oa = scene.noise.range_jitter_oa * g(rng);
  const Arrivals a = ArrivalTimes(scene, d_mm, j_us, j_oa);

  std::vector<double> s(scene.wave.length, 0.0);
  const double amp = gain * FocusGain(scene, d_mm);
  AddBurst(scene, material.band_weights, a.oa, amp * material.oa_strength, s);
  AddBurst(scene, material.band_weights, a.us, amp * material.us_reflectivity, s);
  AddBurst(scene, material.band_weights, a.oa2,
           amp * scene.wave.second_echo_ratio * material.oa_strength * material.us_reflectivity, s);
  if (scene.noise.sigma_sample > 0.0) {
    for (double& v : s) v += scene.noise.sigma_sample * g(rng);
  }
  if (truth) {
    truth->hit = true;
    truth->distance = d_mm;
    truth->arrivals = a;
  }
  return Waveform(std::move(s), scene.wave.sample_rate, scene.wave.t0);
}

Waveform SynthWaveform(const Scene& scene, const Point3& sensor_pos, double turntable_angle,
                       std::uint64_t stream, StationTruth* truth) {
  const std::optional<Hit> hit = CastRay(scene, sensor_pos, scene.v_true, turntable_angle);
  if (!hit) {
    std::mt19937_64 rng(DeriveSeed(scene.seed, stream));
    std::normal_distribution<double> g;
    std::vector<double> s(scene.wave.length);
    for (double& v : s) v = scene.noise.sigma_sample * g(rng);
    if (truth) *truth = StationTruth{};
    return Waveform(std::move(s), scene.wave.sample_rate, scene.wave.t0);
  }
  Waveform w = SynthEcho(scene, scene.objects[hit->object].material, hit->distance, stream, truth);
  if (truth) {
    truth->point_object = hit->point_object;
    truth->object = hit->object;
  }
  return w;
}

ReferencePattern MakeReference(const Scene& scene, Modality modality, const MaterialSpec& material) {
  const double fs = scene.wave.sample_rate;
  const std::size_t onset = 400;
  const auto burst = static_cast<std::size_t>(std::ceil(BurstDuration(scene) * fs));
  std::vector<double> s(onset + 2 * burst + 400, 0.0);
  Scene clean = scene;
  clean.wave.t0 = 0.0;
  AddBurst(clean, material.band_weights, static_cast<double>(onset) / fs, 1.0, s);
  const Waveform filtered = PreprocessForTof(Waveform(std::move(s), fs));
  return ExtractReference(filtered, onset, burst + 16, modality,
                          std::string("bench:") + std::string(ModalityName(modality)) + ":" + material.name);
}

// ---------------------------------------------------------------------------

CalibrationSession SynthCalibrationSession(const Scene& scene, const CalibrationPlan& plan,
                                           CalibrationTruth* truth) {
  Validate(scene);
  if (plan.filament >= scene.objects.size() || scene.objects[plan.filament].shape != ShapeKind::kFilament) {
    throw Error(ErrorCode::kInvalidArgument, "calibration plan must reference a filament");
  }
  if (plan.tip_grids.size() != plan.tip_depths.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one tip grid per tip depth is required");
  }
  const SceneObject& fil = scene.objects[plan.filament];
  const Vec3 v = scene.v_true.vec();
  std::mt19937_64 rng(DeriveSeed(scene.seed, 0xCA11B));
  std::normal_distribution<double> g;
  const NoiseSpec& noise = scene.noise;

  CalibrationSession session;
  session.sigma_theta = std::pow(noise.sigma_theta > 0.0 ? noise.sigma_theta : 0.1 * kPi / 180.0, 2);
  auto emit = [&](int frame, FrameKind kind, int center, const Point3& s, double depth, double amp) {
    SessionRaw r;
    r.frame = frame;
    r.kind = kind;
    r.center = center;
    r.raw.S = s + noise.sigma_s * Vec3(g(rng), g(rng), g(rng));
    r.raw.d = depth + noise.sigma_d * g(rng);
    r.raw.amplitude = amp;
    session.raws.push_back(r);
  };

  int frame = 0;
  const Point3 tip = fil.end_b;
  for (std::size_t f = 0; f < plan.tip_depths.size(); ++f, ++frame) {
    const double depth = plan.tip_depths[f];
    const Point3 aligned = tip - depth * v;
    const auto [nx, nz] = plan.tip_grids[f];
    double peak = 0.0;
    for (int i = 0; i < nx; ++i) {
      for (int k = 0; k < nz; ++k) {
        const Vec3 o((i - 0.5 * (nx - 1)) * plan.raster_step, 0.0, (k - 0.5 * (nz - 1)) * plan.raster_step);
        const Point3 s = aligned + o;
        const Vec3 rel = tip - s;
        const double dd = rel.dot(v);
        const double lateral = (rel - dd * v).norm();
        const double sig = Fwhm(scene, Modality::kOptoacoustic, dd) / kFwhmToSigma;
        const double amp = std::exp(-lateral * lateral / (2.0 * sig * sig));
        peak = std::max(peak, amp);
        emit(frame, FrameKind::kTip, 0, s, dd, amp);
      }
    }
    if (peak < 1e-3) throw Error(ErrorCode::kPlanInfeasible, "tip raster misses the filament");
  }

  const int first_edge = frame;
  std::vector<double> angles;
  for (double phi : plan.edge_angles) {
    const Rotation rot(scene.n_true, phi);
    const Point3 a = RotateAbout(rot, scene.xr_true, fil.end_a);
    const Point3 b = RotateAbout(rot, scene.xr_true, fil.end_b);
    const double len = (b - a).norm();
    const Vec3 u = (b - a) / len;
    for (std::size_t r = 0; r < plan.row_raws.size(); ++r) {
      const double below = plan.row_start + static_cast<double>(r) * plan.row_spacing;
      const Point3 on_axis = b - below * u;
      const double depth = plan.edge_depth + static_cast<double>(r) * plan.edge_depth_step;
      const Point3 aligned = on_axis - depth * v;
      const int m = plan.row_raws[r];
      double peak = 0.0;
      for (int j = 0; j < m; ++j) {
        const Point3 s = aligned + Vec3((j - 0.5 * (m - 1)) * plan.raster_step, 0.0, 0.0);
        // Closest approach between the beam and the filament axis.
        const Vec3 w0 = s - a;
        const double bb = v.dot(u), dd = v.dot(w0), ee = u.dot(w0);
        const double den = 1.0 - bb * bb;
        const double t = (bb * ee - dd) / den;
        const double along = (ee - bb * dd) / den;
        const double dist = (w0 + t * v - along * u).norm();
        const double sig = Fwhm(scene, Modality::kOptoacoustic, t) / kFwhmToSigma;
        const double amp = (along < 0.0 || along > len) ? 0.0 : std::exp(-dist * dist / (2.0 * sig * sig));
        peak = std::max(peak, amp);
        emit(frame, FrameKind::kEdge, static_cast<int>(r), s, t, amp);
      }
      if (peak < 1e-3) throw Error(ErrorCode::kPlanInfeasible, "edge row misses the filament");
    }
    angles.push_back(phi);
    ++frame;
  }
  for (std::size_t e = 1; e < angles.size(); ++e) {
    RotationReading rr;
    rr.frame_i = first_edge;
    rr.frame_k = first_edge + static_cast<int>(e);
    rr.theta = angles[e] - angles[0] + noise.sigma_theta * g(rng);
    rr.sigma_theta = session.sigma_theta;
    session.angles.push_back(rr);
  }
  if (truth) {
    truth->v = scene.v_true;
    truth->n = scene.n_true;
    truth->x_r = scene.xr_true;
    truth->tip = tip;
    truth->filament_a = fil.end_a;
    truth->filament_b = fil.end_b;
    truth->frame_angles = angles;
  }
  return session;
}

Scene CalibrationScene(std::uint64_t seed) {
  Scene s;
  s.seed = seed;
  SceneObject lead;
  lead.shape = ShapeKind::kFilament;
  lead.radius = 0.25;
  lead.end_a = s.xr_true + Vec3(4.0, 3.0, 2.0);
  lead.end_b = s.xr_true + Vec3(4.5, 3.3, 14.0);
  lead.material = {"graphite", 1.0, 0.3, {0.2, 0.4, 0.4}};
  s.objects.push_back(lead);
  s.noise.sigma_s = 0.05;
  s.noise.sigma_d = 0.05;
  s.noise.sigma_theta = 0.1 * kPi / 180.0;
  return s;
}

// ---------------------------------------------------------------------------

ScanSession SynthObjectScan(const Scene& scene, const std::vector<ScanPose>& path,
                            std::vector<StationTruth>* truth) {
  Validate(scene);
  std::mt19937_64 rng(DeriveSeed(scene.seed, 0x5CA9));
  std::normal_distribution<double> g;
  ScanSession session;
  if (truth) truth->assign(path.size(), StationTruth{});
  for (std::size_t i = 0; i < path.size(); ++i) {
    StationTruth t;
    session.waveforms.push_back(SynthWaveform(scene, path[i].S, path[i].theta, 0x10000 + i, &t));
    ScanPose reported = path[i];
    reported.S += scene.noise.sigma_s * Vec3(g(rng), g(rng), g(rng));
    reported.theta += scene.noise.sigma_theta * g(rng);
    session.poses.push_back(reported);
    if (truth) (*truth)[i] = t;
  }
  return session;
}

std::vector<ScanPose> BlockFacePath(const Scene& scene, std::size_t block, int stations_per_face,
                                    double spacing, double standoff) {
  if (block >= scene.objects.size() || scene.objects[block].shape != ShapeKind::kBlock) {
    throw Error(ErrorCode::kInvalidArgument, "scan path must reference a block");
  }
  const SceneObject& b = scene.objects[block];
  std::vector<ScanPose> path;
  for (int face = 0; face < 4; ++face) {
    const double theta = face * kPi / 2.0;
    const Point3 c = RotateAbout(Rotation(scene.n_true, theta), scene.xr_true, b.center);
    const double reach = b.extents.norm() + standoff;
    for (int k = 0; k < stations_per_face; ++k) {
      const double lateral = (k - 0.5 * (stations_per_face - 1)) * spacing;
      const Point3 far = c + Vec3(lateral, 0.0, 0.0) - reach * scene.v_true.vec();
      const std::optional<Hit> hit = CastRay(scene, far, scene.v_true, theta);
      if (!hit || hit->object != block) throw Error(ErrorCode::kPlanInfeasible, "scan station misses the block");
      path.push_back({far + (hit->distance - standoff) * scene.v_true.vec(), theta});
    }
  }
  return path;
}

Scene BlockScene(std::uint64_t seed) {
  Scene s;
  s.seed = seed;
  SceneObject block;
  block.shape = ShapeKind::kBlock;
  block.center = s.xr_true + Vec3(0.0, 0.0, 15.0);
  block.extents = Vec3(40.0, 40.0, 30.0);
  block.material = {"aluminium", 0.8, 1.0, {0.2, 0.4, 0.4}};
  s.objects.push_back(block);
  s.noise.sigma_sample = NoiseForSnr(s, block.material.band_weights, 20.0);
  s.noise.range_jitter_us = 0.08;
  s.noise.range_jitter_oa = 0.04;
  s.noise.sigma_s = 0.005;
  s.noise.sigma_theta = 0.01 * kPi / 180.0;
  return s;
}

std::vector<ScanPose> TurntablePath(const Scene& scene, std::size_t object, int stations, double standoff) {
  if (object >= scene.objects.size()) throw Error(ErrorCode::kInvalidArgument, "scan path object out of range");
  if (stations < 1) throw Error(ErrorCode::kInvalidArgument, "scan path needs stations");
  const SceneObject& o = scene.objects[object];
  const Vec3 half = o.shape == ShapeKind::kCylinder ? Vec3(o.radius, o.radius, 0.5 * o.height) : 0.5 * o.extents;
  const Point3 far = o.center - (half.norm() + standoff) * scene.v_true.vec();
  const std::optional<Hit> hit = CastRay(scene, far, scene.v_true, 0.0);
  if (!hit || hit->object != object) throw Error(ErrorCode::kPlanInfeasible, "scan station misses the object");
  const Point3 S = far + (hit->distance - standoff) * scene.v_true.vec();
  std::vector<ScanPose> path;
  for (int k = 0; k < stations; ++k) path.push_back({S, 2.0 * kPi * k / stations});
  return path;
}

Scene BottleScene(std::uint64_t seed, const MaterialSpec& material) {
  Scene s;
  s.seed = seed;
  SceneObject bottle;
  bottle.shape = ShapeKind::kCylinder;
  bottle.center = s.xr_true + Vec3(0.0, 0.0, 30.0);
  bottle.radius = 20.0;
  bottle.height = 60.0;
  bottle.material = material;
  s.objects.push_back(bottle);
  s.noise.sigma_sample = NoiseForSnr(s, material.band_weights, 20.0);
  s.noise.range_jitter_us = 0.08;
  s.noise.range_jitter_oa = 0.04;
  s.noise.sigma_s = 0.005;
  s.noise.sigma_theta = 0.01 * kPi / 180.0;
  return s;
}

// ---------------------------------------------------------------------------

std::vector<RangingReading> SynthRangingDataset(const Scene& scene, const std::vector<double>& distances,
                                                int repeats, std::uint64_t stream) {
  const MaterialSpec plate{"plate", 1.0, 1.0, {0.2, 0.4, 0.4}};
  std::vector<RangingReading> out;
  std::uint64_t k = 0;
  for (double d : distances) {
    for (int r = 0; r < repeats; ++r, ++k) {
      StationTruth truth;
      Waveform w = SynthEcho(scene, plate, d, DeriveSeed(stream, k), &truth);
      out.push_back({d, std::move(w), truth});
    }
  }
  return out;
}

std::vector<LabeledWaveform> SynthClassDataset(const Scene& scene,
                                               const std::vector<MaterialSpec>& classes,
                                               int per_class, double d_lo, double d_hi,
                                               double gain_spread, std::uint64_t stream) {
  std::vector<LabeledWaveform> out;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (int i = 0; i < per_class; ++i) {
      const std::uint64_t id = DeriveSeed(stream, c * 1000003ull + static_cast<std::uint64_t>(i));
      std::mt19937_64 rng(DeriveSeed(scene.seed, id ^ 0xD15Cull));
      std::uniform_real_distribution<double> ud(d_lo, d_hi), ug(1.0 - gain_spread, 1.0 + gain_spread);
      const double d = ud(rng);
      const double gain = ug(rng);
      out.push_back({classes[c].name, SynthEcho(scene, classes[c], d, id, nullptr, gain)});
    }
  }
  return out;
}

Scene MaterialScene(std::uint64_t seed) {
  Scene s = BlockScene(seed);
  s.objects.clear();
  return s;
}

std::vector<MaterialSpec> DailyMaterials() {
  return {
      {"steel", 0.8, 0.9, {0.10, 0.60, 0.30}},
      {"glass", 0.0, 1.0, {0.30, 0.30, 0.40}},
      {"foam", 0.9, 0.0, {0.60, 0.20, 0.20}},
      {"wood", 0.6, 0.5, {0.50, 0.30, 0.20}},
      {"plastic", 0.5, 0.7, {0.10, 0.20, 0.70}},
  };
}

std::vector<MaterialSpec> OactClasses() {
  return {
      {"us_low", 0.05, 1.0, {0.70, 0.20, 0.10}},
      {"us_mid", 0.05, 1.0, {0.10, 0.70, 0.20}},
      {"us_high", 0.05, 1.0, {0.10, 0.20, 0.70}},
      {"us_flat", 0.05, 1.0, {0.33, 0.33, 0.33}},
      {"oa_low", 1.0, 0.05, {0.70, 0.20, 0.10}},
      {"oa_mid", 1.0, 0.05, {0.10, 0.70, 0.20}},
      {"oa_high", 1.0, 0.05, {0.10, 0.20, 0.70}},
      {"oa_flat", 1.0, 0.05, {0.33, 0.33, 0.33}},
  };
}

}  // namespace pdm2::bench
