#include "geometry/pose.hpp"

#include <algorithm>
#include <stdexcept>

namespace svr::geometry {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kCubeHalf = 0.87;  // shapes are normalized into [-0.87, 0.87]^3

double deg2rad(double d) { return d * kPi / 180.0; }

}  // namespace

CameraPose canonical_pose(double radius, double fov_deg) {
  if (!(radius > 0.0)) throw std::invalid_argument("canonical_pose: radius must be positive");
  if (!(fov_deg > 0.0 && fov_deg < 180.0))
    throw std::invalid_argument("canonical_pose: fov out of range");
  CameraPose p;
  p.rotation = Mat3();  // identity: right (1,0,0), up (0,1,0), backward (0,0,1)
  p.translation = {0.0, 0.0, radius};
  p.fov_deg = fov_deg;
  return p;
}

CameraPose pose_from_azel(const RelativePose& delta, double radius, double fov_deg) {
  if (!(radius > 0.0)) throw std::invalid_argument("pose_from_azel: radius must be positive");
  if (!(fov_deg > 0.0 && fov_deg < 180.0))
    throw std::invalid_argument("pose_from_azel: fov out of range");
  if (!delta.valid()) throw std::invalid_argument("pose_from_azel: relative pose out of range");
  if (delta.azimuth_deg == 0.0 && delta.elevation_deg == 0.0)
    return canonical_pose(radius, fov_deg);

  const double az = deg2rad(delta.azimuth_deg);
  const double el = deg2rad(delta.elevation_deg);
  const Vec3 center{radius * std::sin(az) * std::cos(el), radius * std::sin(el),
                    radius * std::cos(az) * std::cos(el)};
  const Vec3 backward = center.normalized();  // camera looks at the origin

  // World up breaks down when looking straight up/down; switch to -z there.
  Vec3 up{0.0, 1.0, 0.0};
  Vec3 right = up.cross(backward);
  if (right.norm() < 1e-9) {
    up = {0.0, 0.0, -1.0};
    right = up.cross(backward);
  }
  right = right.normalized();
  const Vec3 cam_up = backward.cross(right);

  CameraPose p;
  p.rotation = Mat3::from_columns(right, cam_up, backward);
  p.translation = center;
  p.fov_deg = fov_deg;
  return p;
}

CameraPose compose_relative(const RelativePose& delta, const CameraRig& rig) {
  return pose_from_azel(delta, rig.radius, rig.fov_deg);
}

RelativePose invert_delta(const RelativePose& delta) {
  return {-delta.azimuth_deg, -delta.elevation_deg};
}

RayBundle camera_rays(const CameraPose& pose, int resolution, double near, double far) {
  if (resolution < 8) throw std::invalid_argument("camera_rays: resolution must be >= 8");
  if (!(near > 0.0 && near < far)) throw std::invalid_argument("camera_rays: need 0 < near < far");
  RayBundle rays;
  rays.width = rays.height = resolution;
  rays.near = near;
  rays.far = far;
  rays.origins.assign(static_cast<size_t>(resolution) * resolution, pose.translation);
  rays.directions.resize(static_cast<size_t>(resolution) * resolution);

  const double tan_half = std::tan(deg2rad(pose.fov_deg) * 0.5);
  const Vec3 right = pose.rotation.col(0);
  const Vec3 up = pose.rotation.col(1);
  const Vec3 backward = pose.rotation.col(2);
  const double half = resolution / 2.0;
  for (int i = 0; i < resolution; ++i) {
    const double v = (i + 0.5 - half) / half * tan_half;  // image rows grow downward
    for (int j = 0; j < resolution; ++j) {
      const double u = (j + 0.5 - half) / half * tan_half;
      const Vec3 d = right * u - up * v - backward;
      rays.directions[static_cast<size_t>(i) * resolution + j] = d.normalized();
    }
  }
  return rays;
}

Vec3 world_to_camera(const CameraPose& pose, const Vec3& p) {
  return pose.rotation.mul_transposed(p - pose.translation);
}

void project_point(const CameraPose& pose, const Vec3& p, double& u, double& v) {
  const Vec3 c = world_to_camera(pose, p);
  if (!(c.z < 0.0)) throw std::invalid_argument("project_point: point not in front of camera");
  const double tan_half = std::tan(deg2rad(pose.fov_deg) * 0.5);
  u = (c.x / -c.z) / tan_half;
  v = (c.y / -c.z) / tan_half;
}

double default_near(double radius) {
  return std::max(radius - 0.9 * std::sqrt(3.0) * kCubeHalf, 1e-3);
}
double default_far(double radius) { return radius + 0.9 * std::sqrt(3.0) * kCubeHalf; }

}  // namespace svr::geometry
