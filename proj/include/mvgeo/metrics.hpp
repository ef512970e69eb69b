// SPDX-License-Identifier: Apache-2.0
//
// Multi-View Consistency Score and Reprojection Error over a frame set.

#pragma once

#include <cstdint>
#include <vector>

#include "mvgeo/cloud.hpp"
#include "mvgeo/geometry.hpp"

namespace mvgeo {

struct MetricsConfig {
  /// Relative depth tolerance of the warp consistency predicate.
  double mvcs_rel_tol = 0.05;
  /// Frame offsets to warp into; must be nonempty and exclude 0.
  std::vector<int> neighbor_offsets{-1, 1};
  /// Voxel size when fusing for the reprojection error; 0 disables
  /// downsampling (outlier removal stays off for metrics by default).
  double reproj_voxel = 0.0;
  /// Motion probability strictly above this marks a pixel dynamic; dynamic
  /// pixels are excluded from both metrics.
  double dynamic_threshold = 0.5;

  void validate() const;

  /// Fusion settings implied by reproj_voxel.
  FusionConfig reproj_fusion() const;
};

struct MvcsResult {
  double score = 0.0;       // 100 * consistent / total
  int64_t consistent = 0;
  int64_t total = 0;        // in-bounds warps with a valid target sample
};

/// Warps every valid static pixel of frame i into frame i+offset and
/// compares the warped depth against the target frame's depth, sampled at
/// the nearest pixel, under the relative tolerance. Behind-camera and
/// out-of-image warps (and warps landing on invalid target pixels) are not
/// counted. Throws ValidationError for fewer than two frames and
/// ComputationError when no warp is countable.
MvcsResult mvcs(const FrameSet& frames, const MetricsConfig& config,
                int threads = 1);

/// How a pixel is paired with its reconstructed 3D point.
enum class Correspondence {
  /// The fused point nearest in 3D to the pixel's backprojected point.
  NearestPoint,
  /// The fused point whose provenance contains this (frame, pixel); pixels
  /// absent from the cloud's provenance are skipped. Useful when scoring a
  /// frame set against a cloud built from different (e.g. uncorrupted)
  /// inputs, where nearest-in-3D pairing would hide pose error.
  Provenance,
};

struct ReprojErrorResult {
  double mean_px = 0.0;
  int64_t count = 0;
  std::vector<double> per_frame_mean;
  std::vector<int64_t> per_frame_count;
};

/// Pixel distance between each valid static pixel and the reprojection of
/// its corresponding fused point, averaged over all frames. The cloud is
/// built from the frames with the given fusion settings.
/// Throws ComputationError when the fused cloud is empty.
ReprojErrorResult reprojection_error(const FrameSet& frames,
                                     const MetricsConfig& config,
                                     const FusionConfig& fusion,
                                     int threads = 1);

/// Same measurement against an externally supplied cloud.
ReprojErrorResult reprojection_error_against(
    const FrameSet& frames, const PointCloud& cloud, const MetricsConfig& config,
    Correspondence mode = Correspondence::NearestPoint, int threads = 1);

}  // namespace mvgeo
