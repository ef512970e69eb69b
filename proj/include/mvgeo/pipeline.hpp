// SPDX-License-Identifier: Apache-2.0
//
// End-to-end loss evaluation: motion partition, static-only cloud fusion,
// reprojection loss on static pixels and the alignment term for dynamic
// pixels. The CLI and the test suites share these entry points.

#pragma once

#include <optional>

#include "mvgeo/cloud.hpp"
#include "mvgeo/loss.hpp"

namespace mvgeo {

struct LossEvaluation {
  GeoLossResult geo;  // static pixels against the fused cloud
  std::optional<DynamicLossResult> dynamic;  // present when motion maps exist
  size_t cloud_points = 0;
};

/// Builds the fused cloud (static pixels only when motion maps are present)
/// and evaluates the consistency loss; adds the dynamic alignment term when
/// any frame carries a motion map.
LossEvaluation evaluate_loss(const FrameSet& frames, const FusionConfig& fusion,
                             const GeoLossConfig& config, int threads = 1);

struct GradEvaluation {
  GeoLossGradResult grad;
  std::optional<DynamicLossResult> dynamic;
  size_t cloud_points = 0;
};

/// Same pipeline, also producing per-frame gradient rasters.
GradEvaluation evaluate_grad(const FrameSet& frames, const FusionConfig& fusion,
                             const GeoLossConfig& config, int threads = 1);

}  // namespace mvgeo
