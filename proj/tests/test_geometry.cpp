#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "geometry/pose.hpp"

using namespace svr::geometry;

namespace {

constexpr double kRadius = 1.8;
constexpr double kFov = 40.0;

double frobenius_diff(const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (int i = 0; i < 9; ++i) s += (a.m[i] - b.m[i]) * (a.m[i] - b.m[i]);
  return std::sqrt(s);
}

bool orthonormal(const Mat3& r, double tol = 1e-12) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double d = r.col(i).dot(r.col(j));
      if (std::abs(d - (i == j ? 1.0 : 0.0)) > tol) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("canonical pose sits on the +z axis looking at the origin") {
  const CameraPose p = canonical_pose(kRadius, kFov);
  CHECK_EQ(p.translation.x, 0.0);
  CHECK_EQ(p.translation.y, 0.0);
  CHECK_EQ(p.translation.z, kRadius);
  for (int i = 0; i < 9; ++i) CHECK_EQ(p.rotation.m[i], (i % 4 == 0) ? 1.0 : 0.0);
  CHECK_EQ(p.fov_deg, kFov);
  CHECK_THROWS_AS(canonical_pose(0.0, kFov), std::invalid_argument);
  CHECK_THROWS_AS(canonical_pose(kRadius, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(canonical_pose(kRadius, 180.0), std::invalid_argument);
}

TEST_CASE("zero offset reproduces the canonical pose exactly") {
  const CameraPose c = canonical_pose(kRadius, kFov);
  const CameraPose p = pose_from_azel({0.0, 0.0}, kRadius, kFov);
  CHECK_EQ(frobenius_diff(c.rotation, p.rotation), 0.0);
  CHECK_EQ(p.translation.x, c.translation.x);
  CHECK_EQ(p.translation.y, c.translation.y);
  CHECK_EQ(p.translation.z, c.translation.z);
}

TEST_CASE("named azimuth and elevation offsets land where expected") {
  const CameraPose back = pose_from_azel({180.0, 0.0}, kRadius, kFov);
  CHECK_EQ(back.translation.x, doctest::Approx(0.0).epsilon(1e-12));
  CHECK_EQ(back.translation.z, doctest::Approx(-kRadius).epsilon(1e-12));

  const CameraPose right = pose_from_azel({90.0, 0.0}, kRadius, kFov);
  CHECK_EQ(right.translation.x, doctest::Approx(kRadius).epsilon(1e-12));
  CHECK_EQ(right.translation.z, doctest::Approx(0.0).epsilon(1e-12));

  const CameraPose up = pose_from_azel({0.0, 90.0}, kRadius, kFov);
  CHECK_EQ(up.translation.y, doctest::Approx(kRadius).epsilon(1e-12));
  CHECK(orthonormal(up.rotation));  // up-vector fallback still gives a frame

  // azimuth mirror symmetry: x flips, y and z agree
  const CameraPose a = pose_from_azel({37.0, 21.0}, kRadius, kFov);
  const CameraPose b = pose_from_azel({-37.0, 21.0}, kRadius, kFov);
  CHECK_EQ(a.translation.x, doctest::Approx(-b.translation.x).epsilon(1e-12));
  CHECK_EQ(a.translation.y, doctest::Approx(b.translation.y).epsilon(1e-12));
  CHECK_EQ(a.translation.z, doctest::Approx(b.translation.z).epsilon(1e-12));
}

TEST_CASE("every orbit pose is a proper rotation at the right distance") {
  for (double az = -180.0; az <= 180.0; az += 30.0)
    for (double el = -89.0; el <= 89.0; el += 22.25) {
      const CameraPose p = pose_from_azel({az, el}, kRadius, kFov);
      CHECK(orthonormal(p.rotation));
      CHECK_EQ(p.rotation.det(), doctest::Approx(1.0).epsilon(1e-12));
      CHECK_EQ(p.translation.norm(), doctest::Approx(kRadius).epsilon(1e-12));
      // looks at the origin: backward axis is parallel to the center direction
      const Vec3 bwd = p.rotation.col(2);
      CHECK_EQ(bwd.cross(p.translation).norm(), doctest::Approx(0.0).epsilon(1e-9));
      double u = 0.0, v = 0.0;
      project_point(p, {0.0, 0.0, 0.0}, u, v);
      CHECK_EQ(u, doctest::Approx(0.0).epsilon(1e-12));
      CHECK_EQ(v, doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("pose varies continuously in the offsets") {
  const double eps = 1e-4;
  for (double az : {0.0, 45.0, 179.9, -90.0})
    for (double el : {0.0, 45.0, -89.0}) {
      const CameraPose p = pose_from_azel({az, el}, kRadius, kFov);
      const CameraPose q = pose_from_azel({az + eps, el}, kRadius, kFov);
      const CameraPose r = pose_from_azel({az, el + eps}, kRadius, kFov);
      CHECK_LT(frobenius_diff(p.rotation, q.rotation), 1e-5);
      CHECK_LT(frobenius_diff(p.rotation, r.rotation), 1e-5);
    }
}

TEST_CASE("compose_relative matches the explicit orbit and inversion negates") {
  const CameraRig rig;
  const RelativePose d{-42.0, 17.0};
  const CameraPose a = compose_relative(d, rig);
  const CameraPose b = pose_from_azel(d, rig.radius, rig.fov_deg);
  CHECK_EQ(frobenius_diff(a.rotation, b.rotation), 0.0);
  CHECK_EQ(a.translation.z, b.translation.z);

  const RelativePose inv = invert_delta(d);
  CHECK_EQ(inv.azimuth_deg, 42.0);
  CHECK_EQ(inv.elevation_deg, -17.0);
  const RelativePose twice = invert_delta(inv);
  CHECK_EQ(twice.azimuth_deg, d.azimuth_deg);
  CHECK_EQ(twice.elevation_deg, d.elevation_deg);
}

TEST_CASE("camera rays are unit length and start at the camera center") {
  const CameraPose p = pose_from_azel({33.0, -12.0}, kRadius, kFov);
  const RayBundle rays = camera_rays(p, 16, 0.5, 3.0);
  REQUIRE_EQ(rays.width, 16);
  REQUIRE_EQ(rays.height, 16);
  REQUIRE_EQ(rays.directions.size(), 256u);
  REQUIRE_EQ(rays.origins.size(), 256u);
  CHECK_EQ(rays.near, 0.5);
  CHECK_EQ(rays.far, 3.0);
  for (const Vec3& d : rays.directions) CHECK_EQ(d.norm(), doctest::Approx(1.0).epsilon(1e-12));
  for (const Vec3& o : rays.origins) {
    CHECK_EQ(o.x, p.translation.x);
    CHECK_EQ(o.y, p.translation.y);
    CHECK_EQ(o.z, p.translation.z);
  }
}

TEST_CASE("center pixel of an odd-resolution image looks straight ahead") {
  const CameraPose p = pose_from_azel({105.0, 41.0}, kRadius, kFov);
  const RayBundle rays = camera_rays(p, 9, 0.4, 3.2);
  const Vec3 center = rays.directions[4 * 9 + 4];
  const Vec3 fwd = p.rotation.col(2) * -1.0;
  CHECK_EQ(center.x, doctest::Approx(fwd.x).epsilon(1e-12));
  CHECK_EQ(center.y, doctest::Approx(fwd.y).epsilon(1e-12));
  CHECK_EQ(center.z, doctest::Approx(fwd.z).epsilon(1e-12));
}

TEST_CASE("image rows advance downward in world space") {
  const CameraPose p = canonical_pose(kRadius, kFov);
  const RayBundle rays = camera_rays(p, 8, 0.4, 3.2);
  // canonical up is +y, so the first row must point higher than the last
  CHECK_GT(rays.directions[3].y, rays.directions[7 * 8 + 3].y);
  // and the last column points toward +x (camera right)
  CHECK_GT(rays.directions[3 * 8 + 7].x, rays.directions[3 * 8].x);
}

TEST_CASE("rays through projected pixels pass back through the point") {
  const CameraPose p = pose_from_azel({-58.0, 24.0}, kRadius, kFov);
  const int res = 64;
  const RayBundle rays = camera_rays(p, res, 0.4, 3.2);
  const double tan_half = std::tan(kFov * 0.5 * M_PI / 180.0);
  const Vec3 target{0.21, -0.14, 0.33};
  double u = 0.0, v = 0.0;
  project_point(p, target, u, v);
  // locate the pixel whose center is nearest to (u, v)
  const int col = static_cast<int>(std::lround(u * (res / 2.0) - 0.5 + res / 2.0));
  const int row = static_cast<int>(std::lround(-v * (res / 2.0) - 0.5 + res / 2.0));
  REQUIRE(col >= 0);
  REQUIRE(col < res);
  REQUIRE(row >= 0);
  REQUIRE(row < res);
  const Vec3 d = rays.directions[row * res + col];
  // distance from the target to the ray must be under one pixel footprint
  const Vec3 rel = target - p.translation;
  const double dist = rel.cross(d).norm();
  const double pixel = 2.0 * tan_half * rel.norm() / res;
  CHECK_LT(dist, pixel);
}

TEST_CASE("camera ray argument validation") {
  const CameraPose p = canonical_pose(kRadius, kFov);
  CHECK_THROWS_AS(camera_rays(p, 4, 0.4, 3.2), std::invalid_argument);
  CHECK_THROWS_AS(camera_rays(p, 16, 0.0, 3.2), std::invalid_argument);
  CHECK_THROWS_AS(camera_rays(p, 16, -0.5, 3.2), std::invalid_argument);
  CHECK_THROWS_AS(camera_rays(p, 16, 2.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(camera_rays(p, 16, 3.0, 2.0), std::invalid_argument);
}

TEST_CASE("world_to_camera puts the origin on the optical axis") {
  const CameraPose p = pose_from_azel({77.0, -31.0}, kRadius, kFov);
  const Vec3 c = world_to_camera(p, {0.0, 0.0, 0.0});
  CHECK_EQ(c.x, doctest::Approx(0.0).epsilon(1e-12));
  CHECK_EQ(c.y, doctest::Approx(0.0).epsilon(1e-12));
  CHECK_EQ(c.z, doctest::Approx(-kRadius).epsilon(1e-12));
  const Vec3 self = world_to_camera(p, p.translation);
  CHECK_EQ(self.norm(), doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("projecting a point behind the camera throws") {
  const CameraPose p = canonical_pose(kRadius, kFov);
  double u = 0.0, v = 0.0;
  CHECK_THROWS_AS(project_point(p, {0.0, 0.0, kRadius + 1.0}, u, v), std::invalid_argument);
}

TEST_CASE("default march bounds bracket the shape cube") {
  const double near = default_near(kRadius);
  const double far = default_far(kRadius);
  CHECK_GT(near, 0.0);
  CHECK_LT(near, far);
  const double half_diag = 0.9 * std::sqrt(3.0) * 0.87;
  CHECK_EQ(near, doctest::Approx(kRadius - half_diag).epsilon(1e-12));
  CHECK_EQ(far, doctest::Approx(kRadius + half_diag).epsilon(1e-12));
  // tiny radius clips to a positive bound instead of going negative
  CHECK_GT(default_near(0.1), 0.0);
}

TEST_CASE("relative pose validity window") {
  CHECK(RelativePose{120.0, -45.0}.valid());
  CHECK(RelativePose{-180.0, 90.0}.valid());
  CHECK_FALSE(RelativePose{181.0, 0.0}.valid());
  CHECK_FALSE(RelativePose{0.0, 90.5}.valid());
}
