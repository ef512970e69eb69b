// SPDX-License-Identifier: Apache-2.0
//
// Reprojection of the fused cloud into each frame and the thresholded
// depth-consistency loss with analytic gradients. The reprojected depth is
// treated as a detached target: gradients flow only through the per-frame
// depth maps, never through the cloud or the selection ops.

#pragma once

#include <cstdint>
#include <vector>

#include "mvgeo/cloud.hpp"
#include "mvgeo/geometry.hpp"

namespace mvgeo {

struct GeoLossConfig {
  /// Residual tolerance, same units as the depth maps. Residuals at or
  /// above it are dropped by the indicator.
  double delta = 0.05;
  /// Motion probability strictly above this marks a pixel dynamic.
  double dynamic_threshold = 0.5;
  /// Dynamic points align only with points whose motion probability
  /// differs by strictly less than this.
  double prob_similarity = 0.1;
  /// Dynamic candidates come from frames within +- this many steps.
  int neighbor_radius = 1;
  /// Keep the nearest depth per pixel instead of the mean (occlusion
  /// handling variant; off by default).
  bool min_z = false;

  void validate() const;
};

/// Per-frame depth raster produced by projecting a cloud into a camera.
struct ReprojectedDepth {
  int width = 0;
  int height = 0;
  std::vector<double> values;     // defined wherever hit
  std::vector<uint8_t> hit;       // at least one point landed here
  std::vector<int32_t> hit_count;

  size_t index(int u, int v) const { return static_cast<size_t>(v) * width + u; }
};

/// Projects every cloud point; drops behind-camera and out-of-image points;
/// rounds continuous coordinates half-even to the nearest pixel; a pixel
/// stores the mean camera depth of the points it received (or the minimum
/// with min_z). An empty cloud produces an all-miss raster.
ReprojectedDepth reproject_cloud(const PointCloud& cloud,
                                 const CameraIntrinsics& K,
                                 const CameraPose& pose, bool min_z = false);

/// reproject_cloud for every frame, optionally in parallel.
std::vector<ReprojectedDepth> reproject_all(const FrameSet& frames,
                                            const PointCloud& cloud,
                                            bool min_z = false, int threads = 1);

/// Per-frame motion classification: 1 marks dynamic pixels. Frames without
/// a motion map are entirely static, so the partition is always exhaustive
/// and disjoint.
struct MotionPartition {
  std::vector<std::vector<uint8_t>> dynamic;

  bool is_dynamic(size_t frame, size_t pixel) const {
    return dynamic[frame][pixel] != 0;
  }
};

MotionPartition partition_by_motion(const FrameSet& frames,
                                    const GeoLossConfig& config);

struct FrameLossDiag {
  double loss = 0.0;           // mean clipped residual over the frame's pixel set
  int64_t valid_depth = 0;     // pixels with a valid depth value
  int64_t static_valid = 0;    // valid and classified static
  int64_t counted = 0;         // additionally hit by the reprojection
  double hit_rate = 0.0;       // counted / static_valid
  double clipped_fraction = 0.0;  // residuals >= delta among counted pixels
  bool empty = false;          // counted == 0, frame contributes 0
};

struct GeoLossResult {
  double loss = 0.0;
  std::vector<FrameLossDiag> per_frame;
};

/// The loss given an already-computed reprojection per frame. This is the
/// detached-target form: it is a plain function of the depth maps, which is
/// what the analytic gradient below differentiates and what finite
/// differences must probe.
GeoLossResult geo_loss_with_reprojections(
    const FrameSet& frames, const std::vector<ReprojectedDepth>& reprojections,
    const GeoLossConfig& config);

/// Full pipeline: reproject the cloud into every frame, then average the
/// clipped residuals over valid, static, hit pixels. Frames with an empty
/// pixel set contribute 0 and are flagged.
GeoLossResult geo_loss(const FrameSet& frames, const PointCloud& cloud,
                       const GeoLossConfig& config, int threads = 1);

struct GradRaster {
  int width = 0;
  int height = 0;
  std::vector<double> values;
};

struct GeoLossGradResult {
  GeoLossResult loss;
  std::vector<GradRaster> per_frame;
};

/// Analytic d(loss)/d(depth) per pixel under the detached-target
/// convention: -sign(reproj - depth) * [|residual| < delta] / (T * |V_i|),
/// zero outside the counted pixel set.
GeoLossGradResult geo_loss_grad(const FrameSet& frames, const PointCloud& cloud,
                                const GeoLossConfig& config, int threads = 1);

struct DynamicFrameDiag {
  double loss = 0.0;
  int64_t dynamic_valid = 0;   // dynamic pixels with valid depth
  int64_t with_candidates = 0; // of those, pixels with a nonempty candidate set
  bool empty = false;
};

struct DynamicLossResult {
  double loss = 0.0;
  std::vector<DynamicFrameDiag> per_frame;
};

/// Alignment loss for dynamic pixels: candidates are backprojected points
/// of frames within neighbor_radius whose motion probability is similar to
/// the pixel's, averaged per pixel with the same rounding rule, then pushed
/// through the clipped residual. Pixels with no candidates contribute 0.
DynamicLossResult dynamic_alignment_loss(const FrameSet& frames,
                                         const GeoLossConfig& config,
                                         int threads = 1);

}  // namespace mvgeo
