/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/geometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>

#include "pdm2/error.hpp"

namespace pdm2 {

UnitDir::UnitDir(const Vec3& v) {
  const double norm = v.norm();
  if (!(norm > 1e-300) || !std::isfinite(norm)) {
    throw Error(ErrorCode::kInvalidArgument, "direction vector has zero length");
  }
  // Vectors already unit to rounding are kept bit for bit, so normalizing
  // twice changes nothing.
  v_ = std::abs(norm - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon() ? v : Vec3(v / norm);
}

Rotation::Rotation(UnitDir a, double theta) : axis(a), angle(WrapAngle(theta)) {}

Mat3 Skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

Eigen::Matrix<double, 3, 2> TangentBasis(const Vec3& u) {
  // Seed with the axis least aligned with u.
  Eigen::Index smallest = 0;
  u.cwiseAbs().minCoeff(&smallest);
  const Vec3 seed = Vec3::Unit(smallest);
  const Vec3 b1 = (seed - seed.dot(u) * u).normalized();
  const Vec3 b2 = u.cross(b1);
  Eigen::Matrix<double, 3, 2> basis;
  basis.col(0) = b1;
  basis.col(1) = b2;
  return basis;
}

UnitDir Retract(const UnitDir& u, const Eigen::Vector2d& delta) {
  return UnitDir(u.vec() + TangentBasis(u.vec()) * delta);
}

double AngleBetween(const UnitDir& a, const UnitDir& b) {
  // atan2 form stays accurate for nearly parallel vectors.
  return std::atan2(a.vec().cross(b.vec()).norm(), a.vec().dot(b.vec()));
}

double WrapAngle(double theta) {
  double t = std::remainder(theta, 2.0 * std::numbers::pi);
  if (t <= -std::numbers::pi) t += 2.0 * std::numbers::pi;
  return t;
}

Point3 RecoverPoint(const Point3& sensor, double distance_mm, const UnitDir& v) {
  if (!(distance_mm > 0.0)) throw Error(ErrorCode::kInvalidArgument, "distance must be positive");
  return sensor + distance_mm * v.vec();
}

UnitDir FitDirection(std::span<const Point3> points) {
  if (points.size() < 2) throw Error(ErrorCode::kDegeneratePoints, "need at least two points");
  Point3 mean = Point3::Zero();
  for (const Point3& p : points) mean += p;
  mean /= static_cast<double>(points.size());

  Eigen::MatrixXd centred(static_cast<Eigen::Index>(points.size()), 3);
  double spread = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 d = points[i] - mean;
    centred.row(static_cast<Eigen::Index>(i)) = d.transpose();
    spread = std::max(spread, d.norm());
  }
  if (spread < 1e-9) throw Error(ErrorCode::kDegeneratePoints, "points coincide");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeFullV);
  Vec3 u = svd.matrixV().col(0);
  Eigen::Index largest = 0;
  u.cwiseAbs().maxCoeff(&largest);
  if (u(largest) < 0.0) u = -u;
  return UnitDir(u);
}

Edge MakeEdge(std::span<const Point3> points) {
  const UnitDir q = FitDirection(points);
  Point3 mean = Point3::Zero();
  for (const Point3& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  return EdgeThrough(mean, q);
}

Edge EdgeThrough(const Point3& p, const UnitDir& q) { return Edge{q, p.cross(q.vec())}; }

Mat3 RotationMatrix(const UnitDir& axis, double angle) {
  const Mat3 k = Skew(axis.vec());
  return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

Mat3 RotationMatrix(const Rotation& rot) { return RotationMatrix(rot.axis, rot.angle); }

Point3 RotateAbout(const Rotation& rot, const Point3& center, const Point3& p) {
  return RotationMatrix(rot) * (p - center) + center;
}

Edge RotateEdge(const Rotation& rot, const Point3& center, const Edge& e) {
  const Mat3 r = RotationMatrix(rot);
  const Point3 p = r * (e.ClosestPointToOrigin() - center) + center;
  return EdgeThrough(p, UnitDir(r * e.q.vec()));
}

Vec3 PointOnEdgeResidual(const Edge& e, const Point3& p) { return p.cross(e.q.vec()) - e.m; }

double PointToEdgeDistance(const Edge& e, const Point3& p) {
  return PointOnEdgeResidual(e, p).norm();
}

}  // namespace pdm2
