// SPDX-License-Identifier: Apache-2.0

#include "mvgeo/pipeline.hpp"

#include <algorithm>

namespace mvgeo {

namespace {

bool has_motion_maps(const FrameSet& frames) {
  return std::any_of(frames.frames.begin(), frames.frames.end(),
                     [](const Frame& f) { return f.motion.has_value(); });
}

}  // namespace

LossEvaluation evaluate_loss(const FrameSet& frames, const FusionConfig& fusion,
                             const GeoLossConfig& config, int threads) {
  const bool motion = has_motion_maps(frames);
  const PointCloud cloud = build_global_cloud(
      frames, fusion, motion ? PixelFilter::StaticOnly : PixelFilter::All,
      config.dynamic_threshold, threads);
  LossEvaluation out;
  out.cloud_points = cloud.size();
  out.geo = geo_loss(frames, cloud, config, threads);
  if (motion) out.dynamic = dynamic_alignment_loss(frames, config, threads);
  return out;
}

GradEvaluation evaluate_grad(const FrameSet& frames, const FusionConfig& fusion,
                             const GeoLossConfig& config, int threads) {
  const bool motion = has_motion_maps(frames);
  const PointCloud cloud = build_global_cloud(
      frames, fusion, motion ? PixelFilter::StaticOnly : PixelFilter::All,
      config.dynamic_threshold, threads);
  GradEvaluation out;
  out.cloud_points = cloud.size();
  out.grad = geo_loss_grad(frames, cloud, config, threads);
  if (motion) out.dynamic = dynamic_alignment_loss(frames, config, threads);
  return out;
}

}  // namespace mvgeo
