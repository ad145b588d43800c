#pragma once

#include <cmath>
#include <vector>

namespace svr::geometry {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    const double n = norm();
    return {x / n, y / n, z / n};
  }
};

// Row-major 3x3 matrix. For camera poses the columns are the camera axes
// (right, up, backward) expressed in world coordinates.
struct Mat3 {
  double m[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    Mat3 r;
    r.m[0] = c0.x; r.m[1] = c1.x; r.m[2] = c2.x;
    r.m[3] = c0.y; r.m[4] = c1.y; r.m[5] = c2.y;
    r.m[6] = c0.z; r.m[7] = c1.z; r.m[8] = c2.z;
    return r;
  }
  Vec3 col(int i) const { return {m[i], m[3 + i], m[6 + i]}; }
  Vec3 mul(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  // R^T v; for an orthonormal pose matrix this maps world to camera coords.
  Vec3 mul_transposed(const Vec3& v) const {
    return {m[0] * v.x + m[3] * v.y + m[6] * v.z,
            m[1] * v.x + m[4] * v.y + m[7] * v.z,
            m[2] * v.x + m[5] * v.y + m[8] * v.z};
  }
  double det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }
};

// Camera-to-world pose: rotation columns are (right, up, backward), so the
// camera looks along -col(2); translation is the camera center in world units.
struct CameraPose {
  Mat3 rotation;
  Vec3 translation;
  double fov_deg = 40.0;
};

// Relative pose between a view and the canonical viewpoint, in degrees.
struct RelativePose {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  bool valid() const {
    return azimuth_deg >= -180.0 && azimuth_deg <= 180.0 && elevation_deg >= -90.0 &&
           elevation_deg <= 90.0;
  }
};

struct RayBundle {
  std::vector<Vec3> origins;
  std::vector<Vec3> directions;  // unit vectors, row-major over pixels
  double near = 0.0, far = 0.0;
  int width = 0, height = 0;
};

// Shared camera rig: orbit radius and vertical field of view.
struct CameraRig {
  double radius = 1.8;
  double fov_deg = 40.0;
};

CameraPose canonical_pose(double radius, double fov_deg);
CameraPose pose_from_azel(const RelativePose& delta, double radius, double fov_deg);

// Realizes the absolute pose of a relative offset against the canonical view.
CameraPose compose_relative(const RelativePose& delta, const CameraRig& rig);
RelativePose invert_delta(const RelativePose& delta);

RayBundle camera_rays(const CameraPose& pose, int resolution, double near, double far);

// World point into camera coordinates (x right, y up, z backward).
Vec3 world_to_camera(const CameraPose& pose, const Vec3& p);

// Normalized image coordinates of a world point: (0,0) is the image center,
// +/-1 the vertical frustum edge. Throws if the point is behind the camera.
void project_point(const CameraPose& pose, const Vec3& p, double& u, double& v);

// Ray-march bounds that just cover the normalized shape cube.
double default_near(double radius);
double default_far(double radius);

}  // namespace svr::geometry
