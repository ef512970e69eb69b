// SPDX-License-Identifier: Apache-2.0

#include "mvgeo/loss.hpp"

#include <cmath>

#include "mvgeo/errors.hpp"
#include "mvgeo/parallel.hpp"

namespace mvgeo {

void GeoLossConfig::validate() const {
  if (!(delta > 0.0)) throw ValidationError("loss: delta must be > 0");
  if (!(dynamic_threshold >= 0.0 && dynamic_threshold <= 1.0))
    throw ValidationError("loss: dynamic_threshold must be in [0, 1]");
  if (!(prob_similarity >= 0.0 && prob_similarity <= 1.0))
    throw ValidationError("loss: prob_similarity must be in [0, 1]");
  if (neighbor_radius < 0)
    throw ValidationError("loss: neighbor_radius must be >= 0");
}

ReprojectedDepth reproject_cloud(const PointCloud& cloud,
                                 const CameraIntrinsics& K,
                                 const CameraPose& pose, bool min_z) {
  ReprojectedDepth rep;
  rep.width = K.width;
  rep.height = K.height;
  const size_t n = static_cast<size_t>(K.width) * K.height;
  rep.values.assign(n, 0.0);
  rep.hit.assign(n, 0);
  rep.hit_count.assign(n, 0);

  for (const Point3& p : cloud.points) {
    const Projection pr = project(p, K, pose);
    if (pr.behind) continue;
    const int u = round_to_pixel(pr.u);
    const int v = round_to_pixel(pr.v);
    if (u < 0 || u >= K.width || v < 0 || v >= K.height) continue;
    const size_t idx = rep.index(u, v);
    if (min_z) {
      if (rep.hit_count[idx] == 0 || pr.z < rep.values[idx]) rep.values[idx] = pr.z;
    } else {
      rep.values[idx] += pr.z;
    }
    rep.hit[idx] = 1;
    rep.hit_count[idx] += 1;
  }
  if (!min_z) {
    for (size_t i = 0; i < n; ++i) {
      if (rep.hit_count[i] > 1) rep.values[i] /= rep.hit_count[i];
    }
  }
  return rep;
}

std::vector<ReprojectedDepth> reproject_all(const FrameSet& frames,
                                            const PointCloud& cloud,
                                            bool min_z, int threads) {
  std::vector<ReprojectedDepth> reps(frames.size());
  parallel_for(static_cast<int>(frames.size()), threads, [&](int i) {
    reps[i] = reproject_cloud(cloud, frames[i].intrinsics, frames[i].pose, min_z);
  });
  return reps;
}

MotionPartition partition_by_motion(const FrameSet& frames,
                                    const GeoLossConfig& config) {
  MotionPartition part;
  part.dynamic.resize(frames.size());
  for (size_t i = 0; i < frames.size(); ++i) {
    const Frame& fr = frames[i];
    part.dynamic[i].assign(fr.depth.size(), 0);
    if (!fr.motion) continue;
    for (size_t p = 0; p < fr.depth.size(); ++p) {
      if (fr.motion->values[p] > config.dynamic_threshold) part.dynamic[i][p] = 1;
    }
  }
  return part;
}

namespace {

FrameLossDiag frame_loss(const Frame& fr, const ReprojectedDepth& rep,
                         const std::vector<uint8_t>& dynamic_mask, double delta) {
  FrameLossDiag d;
  double sum = 0.0;
  int64_t clipped = 0;
  for (size_t p = 0; p < fr.depth.size(); ++p) {
    if (!fr.depth.valid[p]) continue;
    ++d.valid_depth;
    if (dynamic_mask[p]) continue;
    ++d.static_valid;
    if (!rep.hit[p]) continue;
    ++d.counted;
    const double r = std::abs(rep.values[p] - fr.depth.values[p]);
    if (r < delta)
      sum += r;
    else
      ++clipped;
  }
  if (d.counted > 0) {
    d.loss = sum / d.counted;
    d.clipped_fraction = static_cast<double>(clipped) / d.counted;
  } else {
    d.empty = true;
  }
  d.hit_rate = d.static_valid > 0
                   ? static_cast<double>(d.counted) / d.static_valid
                   : 0.0;
  return d;
}

}  // namespace

GeoLossResult geo_loss_with_reprojections(
    const FrameSet& frames, const std::vector<ReprojectedDepth>& reprojections,
    const GeoLossConfig& config) {
  if (frames.empty()) throw ValidationError("geo_loss: empty frame set");
  if (reprojections.size() != frames.size())
    throw ValidationError("geo_loss: one reprojection per frame required");
  config.validate();
  const MotionPartition part = partition_by_motion(frames, config);

  GeoLossResult result;
  result.per_frame.reserve(frames.size());
  double total = 0.0;
  for (size_t i = 0; i < frames.size(); ++i) {
    FrameLossDiag d =
        frame_loss(frames[i], reprojections[i], part.dynamic[i], config.delta);
    total += d.loss;
    result.per_frame.push_back(d);
  }
  result.loss = total / static_cast<double>(frames.size());
  return result;
}

GeoLossResult geo_loss(const FrameSet& frames, const PointCloud& cloud,
                       const GeoLossConfig& config, int threads) {
  const auto reps = reproject_all(frames, cloud, config.min_z, threads);
  return geo_loss_with_reprojections(frames, reps, config);
}

GeoLossGradResult geo_loss_grad(const FrameSet& frames, const PointCloud& cloud,
                                const GeoLossConfig& config, int threads) {
  const auto reps = reproject_all(frames, cloud, config.min_z, threads);
  GeoLossGradResult out;
  out.loss = geo_loss_with_reprojections(frames, reps, config);
  const MotionPartition part = partition_by_motion(frames, config);

  const double T = static_cast<double>(frames.size());
  out.per_frame.resize(frames.size());
  for (size_t i = 0; i < frames.size(); ++i) {
    const Frame& fr = frames[i];
    GradRaster& g = out.per_frame[i];
    g.width = fr.depth.width;
    g.height = fr.depth.height;
    g.values.assign(fr.depth.size(), 0.0);
    const int64_t count = out.loss.per_frame[i].counted;
    if (count == 0) continue;
    const ReprojectedDepth& rep = reps[i];
    for (size_t p = 0; p < fr.depth.size(); ++p) {
      if (!fr.depth.valid[p] || part.dynamic[i][p] || !rep.hit[p]) continue;
      const double diff = rep.values[p] - fr.depth.values[p];
      if (std::abs(diff) >= config.delta || diff == 0.0) continue;
      const double sign = diff > 0.0 ? 1.0 : -1.0;
      g.values[p] = -sign / (T * static_cast<double>(count));
    }
  }
  return out;
}

DynamicLossResult dynamic_alignment_loss(const FrameSet& frames,
                                         const GeoLossConfig& config,
                                         int threads) {
  if (frames.empty())
    throw ValidationError("dynamic_alignment_loss: empty frame set");
  config.validate();
  const MotionPartition part = partition_by_motion(frames, config);
  const int T = static_cast<int>(frames.size());

  // Backprojected points with their motion probabilities, per frame.
  std::vector<std::vector<BackprojectedPoint>> points(T);
  parallel_for(T, threads, [&](int j) {
    points[j] = backproject(frames[j].depth, frames[j].intrinsics, frames[j].pose);
  });

  DynamicLossResult result;
  result.per_frame.resize(T);
  std::vector<double> frame_terms(T, 0.0);

  parallel_for(T, threads, [&](int i) {
    const Frame& fr = frames[i];
    DynamicFrameDiag& diag = result.per_frame[i];
    for (size_t p = 0; p < fr.depth.size(); ++p)
      if (fr.depth.valid[p] && part.dynamic[i][p]) ++diag.dynamic_valid;
    if (diag.dynamic_valid == 0) {
      diag.empty = true;
      return;
    }

    // Mean candidate depth per dynamic pixel, filtered by probability
    // similarity against the pixel's own motion probability.
    std::vector<double> sum(fr.depth.size(), 0.0);
    std::vector<int32_t> count(fr.depth.size(), 0);
    for (int j = i - config.neighbor_radius; j <= i + config.neighbor_radius; ++j) {
      if (j < 0 || j >= T || j == i) continue;
      const Frame& nb = frames[j];
      for (const BackprojectedPoint& bp : points[j]) {
        const Projection pr = project(bp.position, fr.intrinsics, fr.pose);
        if (pr.behind) continue;
        const int u = round_to_pixel(pr.u);
        const int v = round_to_pixel(pr.v);
        if (u < 0 || u >= fr.depth.width || v < 0 || v >= fr.depth.height)
          continue;
        const size_t idx = fr.depth.index(u, v);
        if (!fr.depth.valid[idx] || !part.dynamic[i][idx]) continue;
        const double pixel_prob = fr.motion ? fr.motion->values[idx] : 0.0;
        const double point_prob = nb.motion ? nb.motion->values[bp.pixel] : 0.0;
        if (!(std::abs(point_prob - pixel_prob) < config.prob_similarity))
          continue;
        sum[idx] += pr.z;
        count[idx] += 1;
      }
    }

    double loss_sum = 0.0;
    for (size_t p = 0; p < fr.depth.size(); ++p) {
      if (count[p] == 0) continue;
      ++diag.with_candidates;
      const double r = std::abs(sum[p] / count[p] - fr.depth.values[p]);
      if (r < config.delta) loss_sum += r;
    }
    if (diag.with_candidates > 0) {
      diag.loss = loss_sum / diag.with_candidates;
    } else {
      diag.empty = true;
    }
    frame_terms[i] = diag.loss;
  });

  double total = 0.0;
  for (double t : frame_terms) total += t;
  result.loss = total / T;
  return result;
}

}  // namespace mvgeo
