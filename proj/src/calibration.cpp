/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/calibration.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <string>

#include "pdm2/error.hpp"

namespace pdm2 {

CenterPoint ExtractCenter(std::span<const RawPoint> raws, const CenterOptions& options) {
  if (raws.empty()) throw Error(ErrorCode::kNoSignal, "no raw points");
  double max_amp = 0.0;
  for (const RawPoint& r : raws) {
    if (!(r.amplitude >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "negative amplitude");
    if (!(r.d > 0.0)) throw Error(ErrorCode::kInvalidArgument, "depth reading must be positive");
    max_amp = std::max(max_amp, r.amplitude);
  }
  if (!(max_amp > 0.0)) throw Error(ErrorCode::kNoSignal, "all amplitudes are zero");
  const double threshold = options.threshold_frac * max_amp;

  CenterPoint c;
  for (const RawPoint& r : raws) {
    if (r.amplitude < threshold) continue;
    c.S += r.S;
    c.d += r.d;
    ++c.n_raw;
  }
  if (c.n_raw == 0) throw Error(ErrorCode::kNoSignal, "no raw point above threshold");
  const double count = static_cast<double>(c.n_raw);
  c.S /= count;
  c.d /= count;

  Mat3 cov = Mat3::Zero();
  double var_d = 0.0;
  if (c.n_raw > 1) {
    for (const RawPoint& r : raws) {
      if (r.amplitude < threshold) continue;
      const Vec3 ds = r.S - c.S;
      cov += ds * ds.transpose();
      var_d += (r.d - c.d) * (r.d - c.d);
    }
    cov /= count - 1.0;
    var_d /= count - 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 lambda = eig.eigenvalues().cwiseMax(options.variance_floor);
  c.sigma_s = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose() / count;
  c.sigma_d = std::max(var_d, options.variance_floor) / count;
  return c;
}

UnitDir CalibrateBeam(std::span<const FrameScan> tip_frames) {
  if (tip_frames.size() < 2) throw Error(ErrorCode::kDegeneratePoints, "need two tip frames");
  std::vector<Point3> s;
  std::vector<double> d;
  for (const FrameScan& f : tip_frames) {
    if (f.kind != FrameKind::kTip || f.centers.size() != 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "frame " + std::to_string(f.frame_id) + " is not a single-center tip frame");
    }
    s.push_back(f.centers.front().S);
    d.push_back(f.centers.front().d);
  }
  const auto [dmin, dmax] = std::minmax_element(d.begin(), d.end());
  if (*dmax - *dmin < 1e-9) throw Error(ErrorCode::kDegeneratePoints, "tip depths coincide");

  UnitDir u = FitDirection(s);
  const Point3 s_mean = std::accumulate(s.begin(), s.end(), Point3(Point3::Zero())) / s.size();
  const double d_mean = std::accumulate(d.begin(), d.end(), 0.0) / d.size();
  double corr = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) corr += (s[i] - s_mean).dot(u.vec()) * (d_mean - d[i]);
  if (std::abs(corr) < 1e-12) throw Error(ErrorCode::kDegeneratePoints, "beam sign undetermined");
  return corr > 0.0 ? u : -u;
}

namespace {

constexpr double kMinMotion = 1e-6;

std::vector<Point3> EdgePoints(const FrameScan& f, const UnitDir& v) {
  std::vector<Point3> pts;
  for (const CenterPoint& c : f.centers) pts.push_back(c.S + c.d * v.vec());
  return pts;
}

struct EdgePair {
  Edge ei, ek;
  std::vector<Point3> xi, xk;
  double theta = 0.0;
};

// Sum of squared incidence residuals of both edges mapped onto each other.
double IncidenceCost(const std::vector<EdgePair>& pairs, const UnitDir& n, const Point3& xr) {
  double cost = 0.0;
  for (const EdgePair& p : pairs) {
    const Rotation fwd(n, p.theta), back(n, -p.theta);
    for (const Point3& x : p.xi) cost += PointOnEdgeResidual(p.ek, RotateAbout(fwd, xr, x)).squaredNorm();
    for (const Point3& x : p.xk) cost += PointOnEdgeResidual(p.ei, RotateAbout(back, xr, x)).squaredNorm();
  }
  return cost;
}

// Stacked -[q]x (I - R) X_R = m - (R X) x q with the X_R z column dropped.
Point3 SolveCentre(const std::vector<EdgePair>& pairs, const UnitDir& n) {
  std::vector<std::pair<Eigen::Matrix<double, 3, 2>, Vec3>> rows;
  for (const EdgePair& p : pairs) {
    for (int dir = 0; dir < 2; ++dir) {
      const Edge& target = dir == 0 ? p.ek : p.ei;
      const auto& pts = dir == 0 ? p.xi : p.xk;
      const Mat3 r = RotationMatrix(n, dir == 0 ? p.theta : -p.theta);
      const Mat3 a = -Skew(target.q.vec()) * (Mat3::Identity() - r);
      for (const Point3& x : pts) {
        rows.emplace_back(a.leftCols<2>(), target.m - (r * x).cross(target.q.vec()));
      }
    }
  }
  Eigen::MatrixXd a(3 * rows.size(), 2);
  Eigen::VectorXd b(3 * rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    a.block<3, 2>(3 * i, 0) = rows[i].first;
    b.segment<3>(3 * i) = rows[i].second;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto sv = svd.singularValues();
  if (!(sv(1) > 1e-9 * std::max(sv(0), 1e-300))) {
    throw Error(ErrorCode::kRankDeficient, "turntable centre is not observable from these edges");
  }
  const Eigen::Vector2d xy = svd.solve(b);
  return Point3(xy.x(), xy.y(), 0.0);
}

bool CanonicalSign(const Vec3& n) {
  Eigen::Index i = 0;
  n.cwiseAbs().maxCoeff(&i);
  return n(i) > 0.0;
}

}  // namespace

TurntableEstimate CalibrateTurntable(std::span<const FrameScan> edge_frames,
                                     std::span<const RotationReading> rotations, const UnitDir& v) {
  std::map<int, const FrameScan*> frames;
  for (const FrameScan& f : edge_frames) {
    if (f.kind != FrameKind::kEdge || f.centers.size() < 2) {
      throw Error(ErrorCode::kInvalidArgument,
                  "frame " + std::to_string(f.frame_id) + " is not an edge frame with two centers");
    }
    frames[f.frame_id] = &f;
  }

  std::vector<EdgePair> pairs;
  bool any_reading = false;
  for (const RotationReading& r : rotations) {
    const auto fi = frames.find(r.frame_i), fk = frames.find(r.frame_k);
    if (fi == frames.end() || fk == frames.end()) continue;
    any_reading = true;
    if (std::abs(WrapAngle(r.theta)) < kMinMotion) continue;
    EdgePair p;
    p.xi = EdgePoints(*fi->second, v);
    p.xk = EdgePoints(*fk->second, v);
    p.ei = MakeEdge(p.xi);
    p.ek = MakeEdge(p.xk);
    p.theta = r.theta;
    pairs.push_back(std::move(p));
  }
  if (!any_reading) throw Error(ErrorCode::kInvalidArgument, "no rotation reading links two edge frames");
  if (pairs.empty()) throw Error(ErrorCode::kInsufficientMotion, "all turntable rotations are zero");

  // Edge direction signs are arbitrary, so every sign pattern of the k-side
  // directions is tried (capped for large sessions).
  const std::size_t flips = pairs.size() <= 10 ? (std::size_t{1} << pairs.size()) : 1;
  bool found = false;
  bool rank_ok = false;
  TurntableEstimate best;
  double best_cost = 0.0;
  for (std::size_t mask = 0; mask < flips; ++mask) {
    Eigen::MatrixXd a(3 * pairs.size(), 3);
    Eigen::VectorXd b(3 * pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const Vec3 qi = pairs[i].ei.q.vec();
      const Vec3 qk = ((mask >> i) & 1u) ? Vec3(-pairs[i].ek.q.vec()) : pairs[i].ek.q.vec();
      const double half = 0.5 * pairs[i].theta;
      a.block<3, 3>(3 * i, 0) = std::sin(half) * Skew(qi + qk);
      b.segment<3>(3 * i) = std::cos(half) * (qi - qk);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec3 sv = svd.singularValues();
    if (!(sv(1) > 1e-9 * std::max(sv(0), 1e-300))) continue;
    rank_ok = true;

    std::vector<Vec3> candidates;
    if (sv(2) > 1e-9 * sv(0)) {
      candidates.push_back(svd.solve(b));
    } else {
      // One free direction w: n = n_p + alpha w with |n| = 1.
      svd.setThreshold(1e-9);
      const Vec3 np = svd.solve(b);
      const Vec3 w = svd.matrixV().col(2);
      const double alpha = std::sqrt(std::max(0.0, 1.0 - np.squaredNorm()));
      candidates.push_back(np + alpha * w);
      candidates.push_back(np - alpha * w);
    }
    for (const Vec3& c : candidates) {
      if (!(c.norm() > 1e-12)) continue;
      const UnitDir n(c);
      Point3 xr;
      try {
        xr = SolveCentre(pairs, n);
      } catch (const Error&) {
        continue;
      }
      const double cost = IncidenceCost(pairs, n, xr);
      const double tie = 1e-9 * (1.0 + best_cost);
      const bool better = !found || cost < best_cost - tie ||
                          (std::abs(cost - best_cost) <= tie && CanonicalSign(n.vec()) &&
                           !CanonicalSign(best.n.vec()));
      if (better) {
        best = {n, xr};
        best_cost = cost;
        found = true;
      }
    }
  }
  if (!rank_ok || !found) {
    throw Error(ErrorCode::kRankDeficient, "turntable axis is not observable from these edges");
  }
  return best;
}

// ---------------------------------------------------------------------------

namespace {

Mat3 Whitening(const Mat3& cov) {
  Mat3 c = 0.5 * (cov + cov.transpose());
  c.diagonal().array() += 1e-12;
  Eigen::LLT<Mat3> llt(c);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::kInvalidArgument, "covariance not positive definite");
  return llt.matrixL().solve(Mat3::Identity());
}

struct TipObs {
  Point3 s;
  double d;
  Mat3 w;
};

struct EdgeObs {
  Point3 s;
  double d;
  Mat3 w;
  double s_base;
  Eigen::Index s_index;
};

struct EdgeFrameData {
  int frame_id;
  std::size_t component;
  Eigen::Index phi_index;  // -1 for the component's reference frame
  double phi_base;
  std::vector<EdgeObs> obs;
};

struct Component {
  Point3 p_base;
  UnitDir q_base;
  Eigen::Index index;
};

struct AngleObs {
  std::size_t frame_a, frame_b;  // local edge-frame indices
  double theta;
  double inv_sigma;
};

}  // namespace

struct CalibrationProblem::Impl {
  bool turntable = true;
  UnitDir v, n;
  Eigen::Vector2d xr = Eigen::Vector2d::Zero();
  Point3 xc = Point3::Zero();

  std::vector<TipObs> tips;
  std::vector<EdgeFrameData> edges;
  std::vector<Component> components;
  std::vector<AngleObs> angles;

  Eigen::Index iv = 0, in = -1, ixr = -1, ixc = -1;
  Eigen::Index num_params = 0;
  Eigen::Index num_residuals = 0;

  Point3 XrAt(const Eigen::VectorXd& delta) const {
    const Eigen::Vector2d xy = ixr >= 0 ? Eigen::Vector2d(xr + delta.segment<2>(ixr)) : xr;
    return Point3(xy.x(), xy.y(), 0.0);
  }

  void Evaluate(const Eigen::VectorXd& delta, Eigen::VectorXd* res, Eigen::MatrixXd* jac,
                std::vector<Vec3>* raw) const {
    const UnitDir vt = Retract(v, delta.segment<2>(iv));
    const UnitDir nt = in >= 0 ? Retract(n, delta.segment<2>(in)) : n;
    const Point3 xrt = XrAt(delta);
    const Eigen::Matrix<double, 3, 2> bv = TangentBasis(v.vec());
    const Eigen::Matrix<double, 3, 2> bn = TangentBasis(n.vec());

    if (res) res->resize(num_residuals);
    if (jac) jac->setZero(num_residuals, num_params);
    Eigen::Index row = 0;

    if (!tips.empty()) {
      const Point3 xct = xc + delta.segment<3>(ixc);
      for (const TipObs& t : tips) {
        const Vec3 e = t.s + t.d * vt.vec() - xct;
        if (raw) raw->push_back(e);
        if (res) res->segment<3>(row) = t.w * e;
        if (jac) {
          jac->block<3, 2>(row, iv) = t.w * (t.d * bv);
          jac->block<3, 3>(row, ixc) = -t.w;
        }
        row += 3;
      }
    }

    std::vector<double> phis(edges.size());
    for (std::size_t f = 0; f < edges.size(); ++f) {
      const EdgeFrameData& ef = edges[f];
      const Component& comp = components[ef.component];
      const Eigen::Matrix<double, 3, 2> bq = TangentBasis(comp.q_base.vec());
      const Point3 p = comp.p_base + bq * delta.segment<2>(comp.index);
      const UnitDir q = Retract(comp.q_base, delta.segment<2>(comp.index + 2));
      const double phi = ef.phi_base + (ef.phi_index >= 0 ? delta(ef.phi_index) : 0.0);
      phis[f] = phi;
      const Mat3 r = RotationMatrix(nt, phi);
      const double sp = std::sin(phi), cp = std::cos(phi);
      for (const EdgeObs& o : ef.obs) {
        const double s = o.s_base + delta(o.s_index);
        const Vec3 w = p + s * q.vec() - xrt;
        const Vec3 rw = r * w;
        const Vec3 e = o.s + o.d * vt.vec() - (rw + xrt);
        if (raw) raw->push_back(e);
        if (res) res->segment<3>(row) = o.w * e;
        if (jac) {
          jac->block<3, 2>(row, iv) = o.w * (o.d * bv);
          if (in >= 0) {
            for (int c = 0; c < 2; ++c) {
              const Vec3 t = bn.col(c);
              const Vec3 dr = sp * t.cross(w) + (1.0 - cp) * (t.dot(w) * nt.vec() + nt.vec().dot(w) * t);
              jac->block<3, 1>(row, in + c) = -(o.w * dr);
            }
          }
          if (ixr >= 0) jac->block<3, 2>(row, ixr) = o.w * (r - Mat3::Identity()).leftCols<2>();
          jac->block<3, 2>(row, comp.index) = -(o.w * r * bq);
          jac->block<3, 2>(row, comp.index + 2) = -(o.w * (s * r * bq));
          if (ef.phi_index >= 0) jac->block<3, 1>(row, ef.phi_index) = -(o.w * (Skew(nt.vec()) * rw));
          jac->block<3, 1>(row, o.s_index) = -(o.w * (r * q.vec()));
        }
        row += 3;
      }
    }

    for (const AngleObs& a : angles) {
      const double e = WrapAngle(phis[a.frame_b] - phis[a.frame_a] - a.theta);
      if (res) (*res)(row) = e * a.inv_sigma;
      if (jac) {
        if (edges[a.frame_b].phi_index >= 0) (*jac)(row, edges[a.frame_b].phi_index) += a.inv_sigma;
        if (edges[a.frame_a].phi_index >= 0) (*jac)(row, edges[a.frame_a].phi_index) -= a.inv_sigma;
      }
      ++row;
    }
  }

  void Accept(const Eigen::VectorXd& delta) {
    v = Retract(v, delta.segment<2>(iv));
    if (in >= 0) n = Retract(n, delta.segment<2>(in));
    if (ixr >= 0) xr += delta.segment<2>(ixr);
    if (!tips.empty()) xc += delta.segment<3>(ixc);
    for (Component& c : components) {
      c.p_base += TangentBasis(c.q_base.vec()) * delta.segment<2>(c.index);
      c.q_base = Retract(c.q_base, delta.segment<2>(c.index + 2));
    }
    for (EdgeFrameData& ef : edges) {
      if (ef.phi_index >= 0) ef.phi_base += delta(ef.phi_index);
      for (EdgeObs& o : ef.obs) o.s_base += delta(o.s_index);
    }
  }
};

CalibrationProblem::CalibrationProblem(const CalibrationState& init,
                                       std::span<const FrameScan> tip_frames,
                                       std::span<const FrameScan> edge_frames,
                                       std::span<const RotationReading> rotations,
                                       bool refine_turntable)
    : impl_(std::make_unique<Impl>()) {
  Impl& m = *impl_;
  m.turntable = refine_turntable;
  m.v = init.v;
  m.n = init.n;
  m.xr = init.x_r.head<2>();
  const Vec3 v0 = init.v.vec();

  Eigen::Index next = 0;
  m.iv = next;
  next += 2;
  if (refine_turntable) {
    m.in = next;
    m.ixr = next + 2;
    next += 4;
  }

  for (const FrameScan& f : tip_frames) {
    for (const CenterPoint& c : f.centers) {
      m.tips.push_back({c.S, c.d, Whitening(c.sigma_s + c.sigma_d * v0 * v0.transpose())});
    }
  }
  if (!m.tips.empty()) {
    m.ixc = next;
    next += 3;
    for (const TipObs& t : m.tips) m.xc += t.s + t.d * v0;
    m.xc /= static_cast<double>(m.tips.size());
  }

  if (refine_turntable) {
    // Group edge frames linked by readings; each group observes one line.
    std::map<int, std::size_t> local;
    for (std::size_t i = 0; i < edge_frames.size(); ++i) local[edge_frames[i].frame_id] = i;
    std::vector<std::size_t> parent(edge_frames.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::vector<std::tuple<std::size_t, std::size_t, const RotationReading*>> links;
    for (const RotationReading& r : rotations) {
      const auto a = local.find(r.frame_i), b = local.find(r.frame_k);
      if (a == local.end() || b == local.end() || a->second == b->second) continue;
      links.emplace_back(a->second, b->second, &r);
      parent[find(a->second)] = find(b->second);
    }

    // Angle initialisation by breadth-first propagation from the reference.
    std::vector<double> phi(edge_frames.size(), 0.0);
    std::vector<bool> seen(edge_frames.size(), false);
    std::map<std::size_t, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < edge_frames.size(); ++i) members[find(i)].push_back(i);
    std::map<std::size_t, std::size_t> frame_to_edge;
    for (auto& [root, idx] : members) {
      if (idx.size() < 2) continue;
      std::vector<std::size_t> queue{idx.front()};
      seen[idx.front()] = true;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        for (const auto& [a, b, r] : links) {
          if (a == queue[head] && !seen[b]) {
            phi[b] = phi[a] + r->theta;
            seen[b] = true;
            queue.push_back(b);
          } else if (b == queue[head] && !seen[a]) {
            phi[a] = phi[b] - r->theta;
            seen[a] = true;
            queue.push_back(a);
          }
        }
      }

      // Line in the reference frame from every member's points.
      const Point3 xr3(m.xr.x(), m.xr.y(), 0.0);
      std::vector<Point3> pts;
      for (std::size_t i : idx) {
        const Rotation back(m.n, -phi[i]);
        for (const Point3& x : EdgePoints(edge_frames[i], m.v)) pts.push_back(RotateAbout(back, xr3, x));
      }
      const Edge line = MakeEdge(pts);
      Component comp{line.ClosestPointToOrigin(), line.q, next};
      next += 4;
      const std::size_t ci = m.components.size();
      m.components.push_back(comp);

      for (std::size_t i : idx) {
        EdgeFrameData ef;
        ef.frame_id = edge_frames[i].frame_id;
        ef.component = ci;
        ef.phi_base = phi[i];
        ef.phi_index = i == idx.front() ? -1 : next;
        if (ef.phi_index >= 0) ++next;
        frame_to_edge[i] = m.edges.size();
        m.edges.push_back(std::move(ef));
      }
    }

    for (EdgeFrameData& ef : m.edges) {
      const FrameScan& f = edge_frames[local[ef.frame_id]];
      const Component& comp = m.components[ef.component];
      const Rotation back(m.n, -ef.phi_base);
      const Point3 xr3(m.xr.x(), m.xr.y(), 0.0);
      for (const CenterPoint& c : f.centers) {
        const Point3 y = RotateAbout(back, xr3, c.S + c.d * v0);
        ef.obs.push_back({c.S, c.d, Whitening(c.sigma_s + c.sigma_d * v0 * v0.transpose()),
                          (y - comp.p_base).dot(comp.q_base.vec()), next++});
      }
    }

    for (const auto& [a, b, r] : links) {
      if (!frame_to_edge.count(a)) continue;
      if (!(r->sigma_theta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "angle variance must be positive");
      m.angles.push_back({frame_to_edge[a], frame_to_edge[b], r->theta, 1.0 / std::sqrt(r->sigma_theta)});
    }
    if (m.components.empty()) {
      throw Error(ErrorCode::kInsufficientMotion, "no pair of edge frames is linked by a rotation");
    }
  }

  m.num_params = next;
  m.num_residuals = 3 * static_cast<Eigen::Index>(m.tips.size()) + static_cast<Eigen::Index>(m.angles.size());
  for (const EdgeFrameData& ef : m.edges) m.num_residuals += 3 * static_cast<Eigen::Index>(ef.obs.size());
  if (m.num_residuals < m.num_params) {
    throw Error(ErrorCode::kInsufficientData, "fewer residuals than parameters");
  }
}

CalibrationProblem::~CalibrationProblem() = default;

Eigen::Index CalibrationProblem::NumParams() const { return impl_->num_params; }
Eigen::Index CalibrationProblem::NumResiduals() const { return impl_->num_residuals; }

void CalibrationProblem::Evaluate(const Eigen::VectorXd& delta, Eigen::VectorXd* residuals,
                                  Eigen::MatrixXd* jacobian) const {
  impl_->Evaluate(delta, residuals, jacobian, nullptr);
}

void CalibrationProblem::Accept(const Eigen::VectorXd& delta) { impl_->Accept(delta); }

double CalibrationProblem::PointResidualRms() const {
  std::vector<Vec3> raw;
  impl_->Evaluate(Eigen::VectorXd::Zero(impl_->num_params), nullptr, nullptr, &raw);
  if (raw.empty()) return 0.0;
  double ss = 0.0;
  for (const Vec3& e : raw) ss += e.squaredNorm();
  return std::sqrt(ss / static_cast<double>(raw.size()));
}

CalibrationState CalibrationProblem::State() const {
  const Impl& m = *impl_;
  CalibrationState s;
  s.v = m.v;
  s.n = m.n;
  s.x_r = Point3(m.xr.x(), m.xr.y(), 0.0);
  s.residual_rms = PointResidualRms();

  Eigen::MatrixXd jac;
  m.Evaluate(Eigen::VectorXd::Zero(m.num_params), nullptr, &jac, nullptr);
  const Eigen::MatrixXd info = jac.transpose() * jac;
  const Eigen::MatrixXd cov =
      info.completeOrthogonalDecomposition().pseudoInverse();
  s.covariance.block<2, 2>(0, 0) = cov.block(m.iv, m.iv, 2, 2);
  if (m.in >= 0) {
    const Eigen::Index idx[6] = {m.iv, m.iv + 1, m.in, m.in + 1, m.ixr, m.ixr + 1};
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) s.covariance(a, b) = cov(idx[a], idx[b]);
    }
  }
  return s;
}

CalibrationState RefineMle(const CalibrationState& init, std::span<const FrameScan> tip_frames,
                           std::span<const FrameScan> edge_frames,
                           std::span<const RotationReading> rotations, const LmOptions& options) {
  CalibrationProblem problem(init, tip_frames, edge_frames, rotations, true);
  const LmReport report = SolveLm(problem, options);
  CalibrationState s = problem.State();
  s.iterations = report.iterations;
  s.status = report.status;
  s.cost_history = report.cost_history;
  return s;
}

UnitDir RefineSensorOnly(const UnitDir& v0, std::span<const FrameScan> tip_frames,
                         const LmOptions& options) {
  CalibrationState init;
  init.v = v0;
  CalibrationProblem problem(init, tip_frames, {}, {}, false);
  const LmReport report = SolveLm(problem, options);
  if (report.status == LmStatus::kSingularNormalEquations) {
    throw Error(ErrorCode::kSingularNormalEquations, "sensor-only refinement is singular");
  }
  return problem.State().v;
}

void BuildFrames(const CalibrationSession& session, std::vector<FrameScan>* tips,
                 std::vector<FrameScan>* edges) {
  if (session.raws.empty()) throw Error(ErrorCode::kEmptySession, "calibration session has no raw points");
  std::map<int, FrameKind> kinds;
  std::map<int, std::map<int, std::vector<RawPoint>>> groups;
  for (const SessionRaw& r : session.raws) {
    const auto [it, inserted] = kinds.emplace(r.frame, r.kind);
    if (!inserted && it->second != r.kind) {
      throw Error(ErrorCode::kInvalidArgument, "frame " + std::to_string(r.frame) + " mixes tip and edge records");
    }
    groups[r.frame][r.center].push_back(r.raw);
  }
  tips->clear();
  edges->clear();
  for (const auto& [frame, centers] : groups) {
    FrameScan f;
    f.frame_id = frame;
    f.kind = kinds[frame];
    for (const auto& [idx, raws] : centers) f.centers.push_back(ExtractCenter(raws, session.center_options));
    (f.kind == FrameKind::kTip ? tips : edges)->push_back(std::move(f));
  }
}

CalibrationResult Calibrate(const CalibrationSession& session, const LmOptions& options) {
  CalibrationResult out;
  BuildFrames(session, &out.tip_frames, &out.edge_frames);
  std::vector<RotationReading> angles = session.angles;
  for (RotationReading& r : angles) {
    if (!(r.sigma_theta > 0.0)) r.sigma_theta = session.sigma_theta;
  }

  CalibrationState init;
  init.v = CalibrateBeam(out.tip_frames);
  if (out.edge_frames.empty()) {
    out.closed_form = CalibrationProblem(init, out.tip_frames, {}, {}, false).State();
    CalibrationProblem problem(init, out.tip_frames, {}, {}, false);
    const LmReport report = SolveLm(problem, options);
    out.refined = problem.State();
    out.refined.iterations = report.iterations;
    out.refined.status = report.status;
    out.refined.cost_history = report.cost_history;
    return out;
  }
  const TurntableEstimate tt = CalibrateTurntable(out.edge_frames, angles, init.v);
  init.n = tt.n;
  init.x_r = tt.x_r;
  out.closed_form = CalibrationProblem(init, out.tip_frames, out.edge_frames, angles).State();
  out.closed_form.v = init.v;
  out.closed_form.n = init.n;
  out.closed_form.x_r = init.x_r;
  out.refined = RefineMle(init, out.tip_frames, out.edge_frames, angles, options);
  return out;
}

}  // namespace pdm2
