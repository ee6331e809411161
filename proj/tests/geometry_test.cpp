/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/geometry.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "pdm2/error.hpp"

namespace pdm2 {
namespace {

constexpr double kPi = std::numbers::pi;

Vec3 RandomVec(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  return {g(rng), g(rng), g(rng)};
}

TEST(RecoverPoint, SensorAtOrigin) {
  const UnitDir v(0.0656, 0.9955, -0.0678);
  const Point3 x = RecoverPoint(Point3::Zero(), 10.0, v);
  EXPECT_NEAR(x.x(), 0.656, 1e-3);
  EXPECT_NEAR(x.y(), 9.955, 1e-3);
  EXPECT_NEAR(x.z(), -0.678, 1e-3);
  EXPECT_THROW(RecoverPoint(Point3::Zero(), 0.0, v), Error);
  EXPECT_THROW(RecoverPoint(Point3::Zero(), -1.0, v), Error);
}

TEST(RecoverPoint, TranslationEquivariant) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const UnitDir v(RandomVec(rng));
    const Point3 s = RandomVec(rng, 50.0);
    const Vec3 t = RandomVec(rng, 50.0);
    const Point3 a = RecoverPoint(s, 7.5, v) + t;
    const Point3 b = RecoverPoint(s + t, 7.5, v);
    EXPECT_LT((a - b).norm(), 1e-12);
  }
}

TEST(Rotation, Properties) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int i = 0; i < 200; ++i) {
    const UnitDir n(RandomVec(rng));
    const double th = ang(rng);
    const Mat3 r = RotationMatrix(n, th);
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
    EXPECT_LT((r * RotationMatrix(n, -th) - Mat3::Identity()).norm(), 1e-12);
    EXPECT_LT((r * n.vec() - n.vec()).norm(), 1e-12);
    // Composition about one axis adds angles.
    const double th2 = ang(rng);
    EXPECT_LT((r * RotationMatrix(n, th2) - RotationMatrix(n, th + th2)).norm(), 1e-12);
    // Independent oracle: quaternion rotation.
    const Eigen::AngleAxisd aa(th, n.vec());
    EXPECT_LT((r - aa.toRotationMatrix()).norm(), 1e-12);
  }
}

TEST(Rotation, AboutOffsetCentre) {
  const Rotation rot(UnitDir(0, 0, 1), kPi / 2);
  const Point3 c(1.0, 1.0, 0.0);
  const Point3 p = RotateAbout(rot, c, Point3(2.0, 1.0, 5.0));
  EXPECT_LT((p - Point3(1.0, 2.0, 5.0)).norm(), 1e-12);
  EXPECT_LT((RotateAbout(rot, c, c) - c).norm(), 1e-12);
}

TEST(Edge, PluckerInvariants) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const Point3 p = RandomVec(rng, 20.0);
    const UnitDir q(RandomVec(rng));
    const Edge e = EdgeThrough(p, q);
    EXPECT_NEAR(e.q.vec().dot(e.m), 0.0, 1e-10);
    EXPECT_LT(PointOnEdgeResidual(e, p + g(rng) * q.vec()).norm(), 1e-10);
    // Distance oracle by orthogonal projection.
    const Point3 x = RandomVec(rng, 20.0);
    const Vec3 d = x - p;
    const double expect = (d - d.dot(q.vec()) * q.vec()).norm();
    EXPECT_NEAR(PointToEdgeDistance(e, x), expect, 1e-10);
    EXPECT_NEAR((e.ClosestPointToOrigin()).dot(q.vec()), 0.0, 1e-10);
  }
}

TEST(Edge, RotateEdgeMatchesRotatedPoints) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Point3 a = RandomVec(rng, 10.0), b = RandomVec(rng, 10.0);
    const Edge e = EdgeThrough(a, UnitDir(b - a));
    const Rotation rot(UnitDir(RandomVec(rng)), 1.3);
    const Point3 c = RandomVec(rng, 10.0);
    const Edge r = RotateEdge(rot, c, e);
    EXPECT_LT(PointToEdgeDistance(r, RotateAbout(rot, c, a)), 1e-10);
    EXPECT_LT(PointToEdgeDistance(r, RotateAbout(rot, c, b)), 1e-10);
  }
}

TEST(FitDirection, CollinearAndNoisy) {
  const UnitDir q(0.3, -0.2, 0.9);
  std::vector<Point3> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(Point3(1, 2, 3) + i * 0.5 * q.vec());
  EXPECT_LT(AngleBetween(FitDirection(pts), q), 1e-10);

  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 0.01);
  for (Point3& p : pts) p += Vec3(g(rng), g(rng), g(rng));
  const UnitDir f = FitDirection(pts);
  EXPECT_LT(AngleBetween(f, q), 0.02);
  EXPECT_GT(f.z(), 0.0);  // largest component positive

  const std::vector<Point3> same(4, Point3(1, 1, 1));
  try {
    FitDirection(same);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegeneratePoints);
  }
  EXPECT_THROW(FitDirection(std::span<const Point3>(same.data(), 1)), Error);
}

TEST(MakeEdge, PassesThroughCentroid) {
  std::vector<Point3> pts{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  const Edge e = MakeEdge(pts);
  EXPECT_LT(PointToEdgeDistance(e, Point3(7, 0, 0)), 1e-12);
  EXPECT_NEAR(std::abs(e.q.x()), 1.0, 1e-12);
}

TEST(UnitDir, AnglesAndTangents) {
  EXPECT_THROW(UnitDir(0, 0, 0), Error);
  const UnitDir a(1, 0, 0);
  EXPECT_NEAR(AngleBetween(a, UnitDir(1, 1e-9, 0)), 1e-9, 1e-20);
  EXPECT_NEAR(AngleBetween(a, -a), kPi, 1e-15);
  EXPECT_NEAR(WrapAngle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(WrapAngle(-kPi), kPi, 1e-12);
  EXPECT_NEAR(WrapAngle(0.5 + 4 * kPi), 0.5, 1e-12);

  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const UnitDir u(RandomVec(rng));
    const auto b = TangentBasis(u.vec());
    EXPECT_NEAR(b.col(0).dot(u.vec()), 0.0, 1e-12);
    EXPECT_NEAR(b.col(1).dot(u.vec()), 0.0, 1e-12);
    EXPECT_NEAR(b.col(0).dot(b.col(1)), 0.0, 1e-12);
    EXPECT_NEAR(b.col(0).norm(), 1.0, 1e-12);
    const UnitDir r = Retract(u, Eigen::Vector2d(0.01, -0.02));
    EXPECT_NEAR(r.vec().norm(), 1.0, 1e-12);
    EXPECT_NEAR(AngleBetween(u, r), std::atan(std::hypot(0.01, 0.02)), 1e-12);
  }
}

TEST(Rotation, AboutCentrePreservesDistancesAndComposes) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int i = 0; i < 100; ++i) {
    const UnitDir n(RandomVec(rng));
    const Point3 c = RandomVec(rng, 100.0);
    const double t1 = ang(rng), t2 = ang(rng);
    const Point3 a = RandomVec(rng, 50.0), b = RandomVec(rng, 50.0);
    const Rotation r1(n, t1), r2(n, t2);
    const Point3 ra = RotateAbout(r1, c, a), rb = RotateAbout(r1, c, b);
    EXPECT_NEAR((ra - rb).norm(), (a - b).norm(), 1e-12 * (1.0 + (a - b).norm()));
    const Point3 twice = RotateAbout(r2, c, ra);
    EXPECT_LT((twice - RotateAbout(Rotation(n, t1 + t2), c, a)).norm(), 1e-12 * (1.0 + (a - c).norm()));
  }
}

TEST(FitDirection, InvariantUnderPermutationTranslationScaling) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int i = 0; i < 100; ++i) {
    const UnitDir q(RandomVec(rng));
    std::vector<Point3> pts;
    for (int k = 0; k < 12; ++k) pts.push_back(RandomVec(rng, 5.0) + (k - 6.0) * q.vec() + RandomVec(rng, 0.2));
    const UnitDir f = FitDirection(pts);

    std::vector<Point3> perm = pts;
    std::shuffle(perm.begin(), perm.end(), rng);
    EXPECT_LT(AngleBetween(FitDirection(perm), f), 1e-9);

    const Vec3 t = RandomVec(rng, 100.0);
    std::vector<Point3> moved = pts;
    for (Point3& p : moved) p += t;
    EXPECT_LT(AngleBetween(FitDirection(moved), f), 1e-9);

    Point3 centroid = Point3::Zero();
    for (const Point3& p : pts) centroid += p / static_cast<double>(pts.size());
    const double s = scale(rng);
    std::vector<Point3> scaled = pts;
    for (Point3& p : scaled) p = centroid + s * (p - centroid);
    EXPECT_LT(AngleBetween(FitDirection(scaled), f), 1e-9);
  }
}

TEST(MakeEdge, PluckerConstraintOnRandomSets) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> count(2, 30);
  for (int i = 0; i < 100; ++i) {
    std::vector<Point3> pts;
    const int n = count(rng);
    for (int k = 0; k < n; ++k) pts.push_back(RandomVec(rng, 30.0));
    const Edge e = MakeEdge(pts);
    EXPECT_NEAR(e.q.vec().dot(e.m), 0.0, 1e-9);
  }
}

TEST(MakeEdge, RefitAfterRotationFollowsAxis) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int i = 0; i < 100; ++i) {
    const UnitDir q(RandomVec(rng));
    const Point3 p0 = RandomVec(rng, 20.0);
    std::vector<Point3> pts;
    for (int k = 0; k < 8; ++k) pts.push_back(p0 + (k * 1.5 - 4.0) * q.vec());
    const Edge e = MakeEdge(pts);
    const UnitDir n(RandomVec(rng));
    const Rotation rot(n, ang(rng));
    const Point3 c = RandomVec(rng, 20.0);
    std::vector<Point3> rotated;
    for (const Point3& p : pts) rotated.push_back(RotateAbout(rot, c, p));
    const Edge r = MakeEdge(rotated);
    const Vec3 expect = RotationMatrix(rot) * e.q.vec();
    EXPECT_LT(std::min((r.q.vec() - expect).norm(), (r.q.vec() + expect).norm()), 1e-9);
  }
}

}  // namespace
}  // namespace pdm2
