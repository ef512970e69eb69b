// SPDX-License-Identifier: Apache-2.0

#include "mvgeo/metrics.hpp"

#include <cmath>
#include <unordered_map>

#include "mvgeo/errors.hpp"
#include "mvgeo/parallel.hpp"

namespace mvgeo {

void MetricsConfig::validate() const {
  if (!(mvcs_rel_tol > 0.0))
    throw ValidationError("metrics: mvcs_rel_tol must be > 0");
  if (neighbor_offsets.empty())
    throw ValidationError("metrics: neighbor_offsets must be nonempty");
  for (int off : neighbor_offsets) {
    if (off == 0)
      throw ValidationError("metrics: neighbor_offsets must exclude 0");
  }
  if (!(reproj_voxel >= 0.0))
    throw ValidationError("metrics: reproj_voxel must be >= 0");
}

FusionConfig MetricsConfig::reproj_fusion() const {
  FusionConfig f = FusionConfig::disabled();
  if (reproj_voxel > 0.0) {
    f.voxel_enabled = true;
    f.voxel_size = reproj_voxel;
  }
  return f;
}

namespace {

bool pixel_static(const Frame& fr, size_t idx, double threshold) {
  return !fr.motion || !(fr.motion->values[idx] > threshold);
}

}  // namespace

MvcsResult mvcs(const FrameSet& frames, const MetricsConfig& config,
                int threads) {
  config.validate();
  const int T = static_cast<int>(frames.size());
  if (T < 2) throw ValidationError("mvcs: needs at least two frames");

  // Per ordered pair counts, reduced in pair order afterwards.
  struct PairCount {
    int64_t consistent = 0;
    int64_t total = 0;
  };
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < T; ++i) {
    for (int off : config.neighbor_offsets) {
      const int j = i + off;
      if (j >= 0 && j < T) pairs.emplace_back(i, j);
    }
  }
  std::vector<PairCount> counts(pairs.size());

  parallel_for(static_cast<int>(pairs.size()), threads, [&](int p) {
    const auto [i, j] = pairs[p];
    const Frame& src = frames[i];
    const Frame& dst = frames[j];
    PairCount& c = counts[p];
    for (int v = 0; v < src.depth.height; ++v) {
      for (int u = 0; u < src.depth.width; ++u) {
        const size_t idx = src.depth.index(u, v);
        if (!src.depth.valid[idx]) continue;
        if (!pixel_static(src, idx, config.dynamic_threshold)) continue;
        const double d = src.depth.values[idx];
        const Point3 cam((u - src.intrinsics.cx) * d / src.intrinsics.fx,
                         (v - src.intrinsics.cy) * d / src.intrinsics.fy, d);
        const Projection pr =
            project(src.pose.apply(cam), dst.intrinsics, dst.pose);
        if (pr.behind) continue;
        const int tu = round_to_pixel(pr.u);
        const int tv = round_to_pixel(pr.v);
        if (tu < 0 || tu >= dst.depth.width || tv < 0 || tv >= dst.depth.height)
          continue;
        const size_t tidx = dst.depth.index(tu, tv);
        if (!dst.depth.valid[tidx]) continue;
        ++c.total;
        const double target = dst.depth.values[tidx];
        if (std::abs(pr.z - target) / target < config.mvcs_rel_tol)
          ++c.consistent;
      }
    }
  });

  MvcsResult result;
  for (const PairCount& c : counts) {
    result.consistent += c.consistent;
    result.total += c.total;
  }
  if (result.total == 0)
    throw ComputationError("mvcs: no in-bounds warps, score undefined");
  result.score = 100.0 * static_cast<double>(result.consistent) /
                 static_cast<double>(result.total);
  return result;
}

ReprojErrorResult reprojection_error(const FrameSet& frames,
                                     const MetricsConfig& config,
                                     const FusionConfig& fusion, int threads) {
  if (frames.empty())
    throw ValidationError("reprojection_error: empty frame set");
  const PointCloud cloud = build_global_cloud(
      frames, fusion, PixelFilter::All, config.dynamic_threshold, threads);
  return reprojection_error_against(frames, cloud, config,
                                    Correspondence::NearestPoint, threads);
}

ReprojErrorResult reprojection_error_against(const FrameSet& frames,
                                             const PointCloud& cloud,
                                             const MetricsConfig& config,
                                             Correspondence mode, int threads) {
  config.validate();
  if (frames.empty())
    throw ValidationError("reprojection_error: empty frame set");
  if (cloud.empty())
    throw ComputationError("reprojection_error: fused cloud is empty");

  const int T = static_cast<int>(frames.size());
  NearestNeighborIndex index(cloud.points);

  std::unordered_map<uint64_t, int> by_origin;
  if (mode == Correspondence::Provenance) {
    by_origin.reserve(cloud.size());
    for (size_t pi = 0; pi < cloud.size(); ++pi) {
      for (const PointOrigin& o : cloud.provenance[pi]) {
        const uint64_t key = (static_cast<uint64_t>(o.frame) << 32) |
                             static_cast<uint32_t>(o.pixel);
        by_origin.emplace(key, static_cast<int>(pi));
      }
    }
  }

  ReprojErrorResult result;
  result.per_frame_mean.assign(T, 0.0);
  result.per_frame_count.assign(T, 0);
  std::vector<double> frame_sum(T, 0.0);

  parallel_for(T, threads, [&](int i) {
    const Frame& fr = frames[i];
    for (int v = 0; v < fr.depth.height; ++v) {
      for (int u = 0; u < fr.depth.width; ++u) {
        const size_t idx = fr.depth.index(u, v);
        if (!fr.depth.valid[idx]) continue;
        if (!pixel_static(fr, idx, config.dynamic_threshold)) continue;
        const double d = fr.depth.values[idx];
        const Point3 cam((u - fr.intrinsics.cx) * d / fr.intrinsics.fx,
                         (v - fr.intrinsics.cy) * d / fr.intrinsics.fy, d);
        const Point3 world = fr.pose.apply(cam);

        int pi = -1;
        if (mode == Correspondence::NearestPoint) {
          pi = index.nearest(world);
        } else {
          const uint64_t key = (static_cast<uint64_t>(i) << 32) |
                               static_cast<uint32_t>(idx);
          auto it = by_origin.find(key);
          if (it == by_origin.end()) continue;
          pi = it->second;
        }
        const Projection pr = project(cloud.points[pi], fr.intrinsics, fr.pose);
        if (pr.behind) continue;
        frame_sum[i] += std::hypot(pr.u - u, pr.v - v);
        ++result.per_frame_count[i];
      }
    }
  });

  double total = 0.0;
  int64_t n = 0;
  for (int i = 0; i < T; ++i) {
    if (result.per_frame_count[i] > 0)
      result.per_frame_mean[i] = frame_sum[i] / result.per_frame_count[i];
    total += frame_sum[i];
    n += result.per_frame_count[i];
  }
  if (n == 0)
    throw ComputationError("reprojection_error: no measurable pixels");
  result.mean_px = total / static_cast<double>(n);
  result.count = n;
  return result;
}

}  // namespace mvgeo
