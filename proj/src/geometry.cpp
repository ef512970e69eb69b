// SPDX-License-Identifier: Apache-2.0

#include "mvgeo/geometry.hpp"

#include <cmath>

#include "mvgeo/errors.hpp"

namespace mvgeo {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0))
    throw ValidationError("intrinsics: focal lengths must be positive");
  if (width < 1 || height < 1)
    throw ValidationError("intrinsics: image size must be at least 1x1");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw ValidationError("intrinsics: principal point outside the image");
}

void CameraPose::validate(double tol) const {
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol)
    throw ValidationError("pose: rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > tol)
    throw ValidationError("pose: rotation determinant is not +1");
  if (!translation.allFinite())
    throw ValidationError("pose: translation is not finite");
}

CameraPose CameraPose::inverse() const {
  CameraPose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(rotation.transpose() * translation);
  return inv;
}

CameraPose compose(const CameraPose& a, const CameraPose& b) {
  CameraPose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

DepthMap DepthMap::from_values(int w, int h, std::vector<double> vals) {
  DepthMap map;
  map.width = w;
  map.height = h;
  map.values = std::move(vals);
  map.valid.resize(map.values.size());
  for (size_t i = 0; i < map.values.size(); ++i) {
    const double d = map.values[i];
    map.valid[i] = (std::isfinite(d) && d > 0.0) ? 1 : 0;
  }
  return map;
}

size_t DepthMap::valid_count() const {
  size_t n = 0;
  for (uint8_t m : valid) n += m;
  return n;
}

void MotionProbMap::validate() const {
  for (double p : values) {
    if (!(std::isfinite(p) && p >= 0.0 && p <= 1.0))
      throw ValidationError("motion map: probability outside [0, 1]");
  }
}

std::vector<BackprojectedPoint> backproject(const DepthMap& depth,
                                            const CameraIntrinsics& K,
                                            const CameraPose& pose) {
  if (depth.width != K.width || depth.height != K.height)
    throw ValidationError("backproject: depth raster does not match intrinsics size");
  std::vector<BackprojectedPoint> out;
  out.reserve(depth.valid_count());
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const size_t idx = depth.index(u, v);
      if (!depth.valid[idx]) continue;
      const double d = depth.values[idx];
      const Point3 cam((u - K.cx) * d / K.fx, (v - K.cy) * d / K.fy, d);
      out.push_back({pose.apply(cam), static_cast<int32_t>(idx)});
    }
  }
  return out;
}

Projection project(const Point3& point, const CameraIntrinsics& K,
                   const CameraPose& pose) {
  const Point3 cam = pose.apply_inverse(point);
  Projection p;
  p.z = cam.z();
  if (!(cam.z() > 0.0)) {
    p.behind = true;
    return p;
  }
  p.u = K.fx * cam.x() / cam.z() + K.cx;
  p.v = K.fy * cam.y() / cam.z() + K.cy;
  return p;
}

}  // namespace mvgeo
