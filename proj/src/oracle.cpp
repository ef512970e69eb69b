// SPDX-License-Identifier: Apache-2.0

#include "mvgeo/oracle.hpp"

#include <cmath>
#include <random>

#include "mvgeo/errors.hpp"
#include "mvgeo/parallel.hpp"

namespace mvgeo::oracle {

namespace {

constexpr double kRayEps = 1e-12;

// Rays are parameterized as origin + t * dir with dir the camera-frame
// pixel direction ((u-cx)/fx, (v-cy)/fy, 1) rotated into the world. Because
// dir has unit z in the camera frame, the parameter t *is* the z-depth.

double intersect(const Plane& pl, const Point3& o, const Point3& d) {
  const double denom = pl.normal.dot(d);
  if (denom == 0.0) return -1.0;
  const double t = (pl.offset - pl.normal.dot(o)) / denom;
  return t > kRayEps ? t : -1.0;
}

double intersect(const Sphere& s, const Point3& o, const Point3& d) {
  const Point3 oc = o - s.center;
  const double a = d.squaredNorm();
  const double b = 2.0 * d.dot(oc);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return -1.0;
  const double sq = std::sqrt(disc);
  const double t0 = (-b - sq) / (2.0 * a);
  if (t0 > kRayEps) return t0;
  const double t1 = (-b + sq) / (2.0 * a);
  return t1 > kRayEps ? t1 : -1.0;
}

double intersect(const Box& box, const Point3& o, const Point3& d) {
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < box.min[a] || o[a] > box.max[a]) return -1.0;
      continue;
    }
    double t0 = (box.min[a] - o[a]) / d[a];
    double t1 = (box.max[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return -1.0;
  }
  if (tmin > kRayEps) return tmin;
  return tmax > kRayEps ? tmax : -1.0;
}

double intersect_any(const Primitive& prim, const Point3& o, const Point3& d) {
  return std::visit([&](const auto& p) { return intersect(p, o, d); }, prim);
}

Primitive translated(const Primitive& prim, const Eigen::Vector3d& offset) {
  Primitive out = prim;
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Plane>) {
          p.offset += p.normal.dot(offset);
        } else if constexpr (std::is_same_v<T, Sphere>) {
          p.center += offset;
        } else {
          p.min += offset;
          p.max += offset;
        }
      },
      out);
  return out;
}

bool contains(const Primitive& prim, const Point3& p) {
  return std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Plane>) {
          return false;
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return (p - s.center).norm() < s.radius;
        } else {
          return p.x() > s.min.x() && p.x() < s.max.x() && p.y() > s.min.y() &&
                 p.y() < s.max.y() && p.z() > s.min.z() && p.z() < s.max.z();
        }
      },
      prim);
}

void check_primitive_sizes(const Primitive& prim) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Plane>) {
          if (!(p.normal.norm() > 0.0))
            throw ValidationError("scene: plane normal must be nonzero");
        } else if constexpr (std::is_same_v<T, Sphere>) {
          if (!(p.radius > 0.0))
            throw ValidationError("scene: sphere radius must be > 0");
        } else {
          if (!((p.max - p.min).minCoeff() > 0.0))
            throw ValidationError("scene: box must have positive extent");
        }
      },
      prim);
}

CameraPose look_at_pose(const Point3& eye, const Point3& target) {
  Eigen::Vector3d forward = target - eye;
  if (!(forward.norm() > 0.0))
    throw ValidationError("trajectory: camera center coincides with look-at target");
  forward.normalize();
  Eigen::Vector3d up(0, 1, 0);
  if (std::abs(forward.dot(up)) > 1.0 - 1e-9) up = Eigen::Vector3d(1, 0, 0);
  const Eigen::Vector3d right = up.cross(forward).normalized();
  const Eigen::Vector3d down = forward.cross(right);
  CameraPose pose;
  pose.rotation.col(0) = right;
  pose.rotation.col(1) = down;
  pose.rotation.col(2) = forward;
  pose.translation = eye;
  return pose;
}

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t x = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

}  // namespace

void SceneSpec::validate(int frame_count) const {
  if (primitives.empty() && !dynamic)
    throw ValidationError("scene: needs at least one primitive");
  for (const Primitive& p : primitives) check_primitive_sizes(p);
  if (dynamic) {
    check_primitive_sizes(dynamic->shape);
    if (static_cast<int>(dynamic->offsets.size()) != frame_count)
      throw ValidationError("scene: dynamic motion must cover every frame");
  }
  if (!(background > 0.0))
    throw ValidationError("scene: background depth must be > 0");
}

void TrajectorySpec::validate() const {
  if (frames < 1) throw ValidationError("trajectory: frames must be >= 1");
  if (kind == TrajectoryKind::Orbit && !(radius > 0.0))
    throw ValidationError("trajectory: orbit radius must be > 0");
}

std::vector<CameraPose> TrajectorySpec::poses() const {
  validate();
  std::vector<CameraPose> out;
  out.reserve(frames);
  for (int i = 0; i < frames; ++i) {
    switch (kind) {
      case TrajectoryKind::Static: {
        CameraPose p;
        p.translation = start;
        out.push_back(p);
        break;
      }
      case TrajectoryKind::Dolly: {
        CameraPose p;
        p.translation = start + i * step;
        out.push_back(p);
        break;
      }
      case TrajectoryKind::Orbit: {
        const double theta = sweep_deg * M_PI / 180.0 * i / frames;
        const Point3 eye =
            look_at + radius * Point3(std::sin(theta), 0.0, -std::cos(theta));
        out.push_back(look_at_pose(eye, look_at));
        break;
      }
    }
  }
  return out;
}

FrameSet render(const SceneSpec& scene, const TrajectorySpec& traj,
                const CameraIntrinsics& K, int threads) {
  scene.validate(traj.frames);
  K.validate();
  const std::vector<CameraPose> poses = traj.poses();

  for (size_t i = 0; i < poses.size(); ++i) {
    for (const Primitive& p : scene.primitives) {
      if (contains(p, poses[i].translation))
        throw ValidationError("scene: camera inside a primitive");
    }
    if (scene.dynamic &&
        contains(translated(scene.dynamic->shape, scene.dynamic->offsets[i]),
                 poses[i].translation))
      throw ValidationError("scene: camera inside the dynamic primitive");
  }

  FrameSet frames;
  frames.frames.resize(poses.size());
  parallel_for(static_cast<int>(poses.size()), threads, [&](int i) {
    Frame& fr = frames[i];
    fr.pose = poses[i];
    fr.intrinsics = K;
    fr.depth = DepthMap(K.width, K.height, 0.0, true);
    std::optional<Primitive> dyn;
    if (scene.dynamic)
      dyn = translated(scene.dynamic->shape, scene.dynamic->offsets[i]);
    if (dyn) fr.motion = MotionProbMap(K.width, K.height, 0.0);

    const Point3 origin = fr.pose.translation;
    for (int v = 0; v < K.height; ++v) {
      for (int u = 0; u < K.width; ++u) {
        const Point3 dir = fr.pose.rotation *
                           Point3((u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0);
        double best = scene.background;
        bool dynamic_hit = false;
        for (const Primitive& p : scene.primitives) {
          const double t = intersect_any(p, origin, dir);
          if (t > 0.0 && t < best) best = t;
        }
        if (dyn) {
          const double t = intersect_any(*dyn, origin, dir);
          if (t > 0.0 && t < best) {
            best = t;
            dynamic_hit = true;
          }
        }
        const size_t idx = fr.depth.index(u, v);
        fr.depth.values[idx] = best;
        if (fr.motion) fr.motion->values[idx] = dynamic_hit ? 1.0 : 0.0;
      }
    }
  });
  return frames;
}

FrameSet perturb(const FrameSet& frames, const PerturbationSpec& spec) {
  if (!spec.per_frame_scale.empty() &&
      spec.per_frame_scale.size() != 1 &&
      spec.per_frame_scale.size() != frames.size())
    throw ValidationError("perturb: per_frame_scale must have 1 or T entries");
  if (!(spec.depth_noise_sigma >= 0.0) || !(spec.pose_trans >= 0.0) ||
      !(spec.pose_rot_deg >= 0.0))
    throw ValidationError("perturb: magnitudes must be >= 0");

  FrameSet out = frames;
  for (size_t i = 0; i < out.size(); ++i) {
    Frame& fr = out[i];
    std::mt19937_64 rng(mix_seed(spec.seed, i));
    std::normal_distribution<double> gauss(0.0, 1.0);

    if (spec.pose_rot_deg != 0.0) {
      Eigen::Vector3d axis(gauss(rng), gauss(rng), gauss(rng));
      if (!(axis.norm() > 0.0)) axis = Eigen::Vector3d(0, 1, 0);
      axis.normalize();
      const Eigen::AngleAxisd jitter(spec.pose_rot_deg * M_PI / 180.0, axis);
      fr.pose.rotation = fr.pose.rotation * jitter.toRotationMatrix();
    }
    if (spec.pose_trans != 0.0) {
      Eigen::Vector3d dir(gauss(rng), gauss(rng), gauss(rng));
      if (!(dir.norm() > 0.0)) dir = Eigen::Vector3d(0, 0, 1);
      dir.normalize();
      fr.pose.translation += spec.pose_trans * dir;
    }
    if (spec.depth_noise_sigma != 0.0) {
      for (size_t p = 0; p < fr.depth.size(); ++p) {
        if (!fr.depth.valid[p]) continue;
        const double noisy =
            fr.depth.values[p] + spec.depth_noise_sigma * gauss(rng);
        fr.depth.values[p] = std::max(noisy, 1e-9);
      }
    }
    if (!spec.per_frame_scale.empty()) {
      const double s = spec.per_frame_scale.size() == 1 ? spec.per_frame_scale[0]
                                                        : spec.per_frame_scale[i];
      if (s != 1.0) {
        for (size_t p = 0; p < fr.depth.size(); ++p) {
          if (fr.depth.valid[p]) fr.depth.values[p] *= s;
        }
      }
    }
  }
  return out;
}

namespace presets {

CameraIntrinsics default_intrinsics(int size) {
  CameraIntrinsics K;
  K.fx = K.fy = 100.0 * size / 128.0;
  K.cx = K.cy = size / 2.0;
  K.width = K.height = size;
  return K;
}

SceneSpec plane_scene() {
  SceneSpec s;
  s.primitives.push_back(Plane{{0, 0, 1}, 2.0});
  return s;
}

SceneSpec sphere_scene() {
  // Large enough that every pixel ray from the preset cameras hits it, so
  // depth maps contain no silhouette against the background.
  SceneSpec s;
  s.primitives.push_back(Sphere{{0, 0, 2.5}, 1.8});
  return s;
}

SceneSpec box_scene() {
  SceneSpec s;
  s.primitives.push_back(Box{{-2.6, -2.6, 2.25}, {2.6, 2.6, 3.4}});
  return s;
}

SceneSpec dynamic_box_scene(int frames, double step_per_frame) {
  SceneSpec s;
  s.primitives.push_back(Plane{{0, 0, 1}, 2.0});
  DynamicPrimitive dyn;
  // A thin plate: its front face sits at constant depth, so lateral motion
  // leaves the observed depth of dynamic pixels unchanged.
  dyn.shape = Box{{-0.4, -0.4, 1.2}, {0.4, 0.4, 1.2 + 1e-9}};
  for (int i = 0; i < frames; ++i)
    dyn.offsets.push_back(Eigen::Vector3d(step_per_frame * i, 0.0, 0.0));
  s.dynamic = dyn;
  return s;
}

TrajectorySpec static_traj(int frames) {
  TrajectorySpec t;
  t.kind = TrajectoryKind::Static;
  t.frames = frames;
  return t;
}

TrajectorySpec dolly_traj(int frames) {
  TrajectorySpec t;
  t.kind = TrajectoryKind::Dolly;
  t.frames = frames;
  t.step = Eigen::Vector3d(0, 0, 0.02);
  return t;
}

TrajectorySpec orbit_traj(int frames, const SceneSpec& scene) {
  TrajectorySpec t;
  t.kind = TrajectoryKind::Orbit;
  t.frames = frames;
  // Orbit the dominant primitive; sweeps stay moderate so the primitive
  // keeps covering the full field of view from every camera.
  t.sweep_deg = 30.0;
  t.look_at = Eigen::Vector3d(0, 0, 2.0);
  t.radius = 2.0;
  if (!scene.primitives.empty()) {
    const Primitive& p = scene.primitives.front();
    if (std::holds_alternative<Sphere>(p)) {
      t.look_at = std::get<Sphere>(p).center;
      t.radius = t.look_at.z();
    } else if (std::holds_alternative<Box>(p)) {
      const Box& b = std::get<Box>(p);
      t.look_at = 0.5 * (b.min + b.max);
      t.radius = t.look_at.z();
      t.sweep_deg = 12.0;
    }
  }
  return t;
}

}  // namespace presets

}  // namespace mvgeo::oracle
