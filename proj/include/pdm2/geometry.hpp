/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <span>

// Lines, directions and turntable rotations. Everything is expressed in the
// stage-aligned sensor frame; lengths are millimetres.
namespace pdm2 {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Point3 = Eigen::Vector3d;

// Direction on the unit sphere.
class UnitDir {
 public:
  UnitDir() : v_(0.0, 0.0, 1.0) {}

  // Normalizes; throws InvalidArgument for a (near) zero vector.
  explicit UnitDir(const Vec3& v);
  UnitDir(double x, double y, double z) : UnitDir(Vec3(x, y, z)) {}

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  UnitDir operator-() const { return UnitDir(-v_); }

 private:
  Vec3 v_;
};

// Line in Plucker coordinates: unit direction q and moment m = p x q for any
// point p on the line.
struct Edge {
  UnitDir q;
  Vec3 m = Vec3::Zero();

  // Point of the line closest to the origin.
  Point3 ClosestPointToOrigin() const { return q.vec().cross(m); }
};

struct Rotation {
  UnitDir axis;
  double angle = 0.0;  // radians, wrapped to (-pi, pi]
  Rotation() = default;
  Rotation(UnitDir a, double theta);
};

Mat3 Skew(const Vec3& v);

// 3x2 orthonormal basis of the tangent plane at u.
Eigen::Matrix<double, 3, 2> TangentBasis(const Vec3& u);

// Exponential-map style update: normalize(u + basis * delta).
UnitDir Retract(const UnitDir& u, const Eigen::Vector2d& delta);

double AngleBetween(const UnitDir& a, const UnitDir& b);  // radians, [0, pi]
double WrapAngle(double theta);                            // to (-pi, pi]

// X = S + d v. Requires d > 0.
Point3 RecoverPoint(const Point3& sensor, double distance_mm, const UnitDir& v);

// Least-squares line direction through the points: dominant right singular
// vector of the centred point matrix, sign fixed so the largest-magnitude
// component is positive. Throws DegeneratePoints when the points coincide.
UnitDir FitDirection(std::span<const Point3> points);

// Line through the centroid along FitDirection.
Edge MakeEdge(std::span<const Point3> points);

// Edge through p with direction q.
Edge EdgeThrough(const Point3& p, const UnitDir& q);

// Rodrigues: I + sin(t)[n]x + (1 - cos(t))[n]x^2.
Mat3 RotationMatrix(const UnitDir& axis, double angle);
Mat3 RotationMatrix(const Rotation& rot);

// Rotation by rot about the axis through center.
Point3 RotateAbout(const Rotation& rot, const Point3& center, const Point3& p);
Edge RotateEdge(const Rotation& rot, const Point3& center, const Edge& e);

// Plucker incidence residual p x q - m; zero iff p lies on e, and its norm is
// the point-to-line distance.
Vec3 PointOnEdgeResidual(const Edge& e, const Point3& p);
double PointToEdgeDistance(const Edge& e, const Point3& p);

}  // namespace pdm2
