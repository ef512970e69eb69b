// SPDX-License-Identifier: Apache-2.0
//
// Pinhole camera model, SE(3) camera poses and dense depth rasters.
// Projection, backprojection and pose algebra live here; every other
// module goes through these functions so the conventions are fixed in
// exactly one place:
//   - pixel (u, v) means the *center* of the pixel in column u, row v
//   - depth is z-depth (distance along the optical axis), not ray length
//   - CameraPose maps camera-frame points into world-frame points

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <optional>
#include <vector>

namespace mvgeo {

using Point3 = Eigen::Vector3d;

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws ValidationError unless fx,fy > 0, width,height >= 1 and the
  /// principal point lies inside the image.
  void validate() const;
};

/// Camera-to-world rigid transform: world = rotation * camera + translation.
struct CameraPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  /// Checks RᵀR = I and det(R) = +1 within `tol`.
  void validate(double tol = 1e-9) const;

  /// (R, t)⁻¹ = (Rᵀ, −Rᵀ t).
  CameraPose inverse() const;

  /// Camera-frame point to world frame.
  Point3 apply(const Point3& p) const { return rotation * p + translation; }

  /// World-frame point to camera frame, without forming the inverse.
  Point3 apply_inverse(const Point3& p) const {
    return rotation.transpose() * (p - translation);
  }

  static CameraPose identity() { return CameraPose{}; }
};

/// Composition: (a ∘ b) maps b's input frame through b then a.
CameraPose compose(const CameraPose& a, const CameraPose& b);

/// Dense H×W z-depth raster with a validity mask. Invalid entries keep
/// whatever raw value produced them (NaN, zero, negative) so file
/// round-trips are bit-faithful; downstream code must consult `valid`.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;   // row-major, top-left origin
  std::vector<uint8_t> valid;   // 1 = usable depth

  DepthMap() = default;
  DepthMap(int w, int h, double fill = 0.0, bool fill_valid = false)
      : width(w),
        height(h),
        values(static_cast<size_t>(w) * h, fill),
        valid(static_cast<size_t>(w) * h, fill_valid ? 1 : 0) {}

  /// Builds the mask from the values: valid iff finite and > 0.
  static DepthMap from_values(int w, int h, std::vector<double> vals);

  size_t index(int u, int v) const { return static_cast<size_t>(v) * width + u; }
  double at(int u, int v) const { return values[index(u, v)]; }
  bool valid_at(int u, int v) const { return valid[index(u, v)] != 0; }
  size_t size() const { return values.size(); }
  size_t valid_count() const;
};

/// H×W per-pixel motion probability in [0, 1].
struct MotionProbMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  MotionProbMap() = default;
  MotionProbMap(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

  size_t index(int u, int v) const { return static_cast<size_t>(v) * width + u; }
  double at(int u, int v) const { return values[index(u, v)]; }

  /// Throws ValidationError unless every entry is finite and in [0, 1].
  void validate() const;
};

/// One frame of the sequence: depth, pose, intrinsics and an optional
/// motion-probability map. Immutable by convention after construction.
struct Frame {
  DepthMap depth;
  CameraPose pose;
  CameraIntrinsics intrinsics;
  std::optional<MotionProbMap> motion;
};

/// Temporally ordered frame sequence sharing one world frame.
struct FrameSet {
  std::vector<Frame> frames;

  size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  const Frame& operator[](size_t i) const { return frames[i]; }
  Frame& operator[](size_t i) { return frames[i]; }
};

/// A world point together with the linear index (v * width + u) of the
/// pixel it was lifted from.
struct BackprojectedPoint {
  Point3 position;
  int32_t pixel;
};

/// Lifts every valid pixel through the inverse pinhole model and the pose:
/// camera point for (u, v, d) is ((u−cx)·d/fx, (v−cy)·d/fy, d).
/// Output is in row-major pixel order. Throws ValidationError if the
/// raster dimensions disagree with the intrinsics.
std::vector<BackprojectedPoint> backproject(const DepthMap& depth,
                                            const CameraIntrinsics& K,
                                            const CameraPose& pose);

/// Result of projecting a world point into a camera.
struct Projection {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;      // camera-frame depth
  bool behind = false; // z <= 0; u,v are not meaningful in that case
};

/// World point to continuous pixel coordinates plus camera depth.
/// Points with camera depth <= 0 come back flagged `behind` and no
/// division is performed.
Projection project(const Point3& point, const CameraIntrinsics& K,
                   const CameraPose& pose);

/// Round-half-even to the nearest integer pixel index.
inline int round_to_pixel(double x) { return static_cast<int>(std::nearbyint(x)); }

}  // namespace mvgeo
