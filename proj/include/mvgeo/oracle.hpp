// SPDX-License-Identifier: Apache-2.0
//
// Synthetic RGB-D frame generator: analytic ray casts against plane,
// sphere and axis-aligned box primitives, canned camera trajectories and
// seeded perturbations. Stands in for a depth/pose predictor in tests.

#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "mvgeo/geometry.hpp"

namespace mvgeo::oracle {

/// Infinite plane {p : n·p = offset} with unit normal n.
struct Plane {
  Eigen::Vector3d normal{0, 0, 1};
  double offset = 0.0;
};

struct Sphere {
  Eigen::Vector3d center{0, 0, 0};
  double radius = 1.0;
};

/// Axis-aligned box.
struct Box {
  Eigen::Vector3d min{0, 0, 0};
  Eigen::Vector3d max{1, 1, 1};
};

using Primitive = std::variant<Plane, Sphere, Box>;

/// One primitive that rigidly translates over the sequence; offsets[i] is
/// added to its rest position when rendering frame i.
struct DynamicPrimitive {
  Primitive shape;
  std::vector<Eigen::Vector3d> offsets;
};

struct SceneSpec {
  std::vector<Primitive> primitives;
  std::optional<DynamicPrimitive> dynamic;
  /// Depth assigned to rays that miss every primitive.
  double background = 50.0;

  void validate(int frame_count) const;
};

enum class TrajectoryKind { Static, Orbit, Dolly };

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::Static;
  int frames = 1;
  /// Orbit: circle of this radius in the y = look_at.y plane around look_at.
  double radius = 4.0;
  /// Orbit: total sweep; frame i sits at angle sweep_deg * i / frames.
  double sweep_deg = 360.0;
  Eigen::Vector3d look_at{0, 0, 0};
  /// Static and dolly: first camera center. Dolly adds step per frame and
  /// keeps the identity orientation.
  Eigen::Vector3d start{0, 0, 0};
  Eigen::Vector3d step{0, 0, 0.02};

  void validate() const;
  std::vector<CameraPose> poses() const;
};

/// Ray-casts every pixel of every frame. Depths are exact analytic z-depths;
/// pixels whose nearest hit is the dynamic primitive get motion probability
/// 1.0, every other pixel 0.0 (the motion map is attached only when the
/// scene has a dynamic primitive). Rays that miss take the background depth.
/// Throws ValidationError if a camera center sits inside a sphere or box.
FrameSet render(const SceneSpec& scene, const TrajectorySpec& traj,
                const CameraIntrinsics& K, int threads = 1);

struct PerturbationSpec {
  double depth_noise_sigma = 0.0;  // i.i.d. Gaussian on valid depths
  double pose_rot_deg = 0.0;       // axis-angle jitter, seeded random axis
  double pose_trans = 0.0;         // translation jitter magnitude
  std::vector<double> per_frame_scale;  // empty = all 1.0
  uint64_t seed = 0;
};

/// Applies the perturbations; deterministic given the seed, independent of
/// thread count, and a bit-exact identity when all magnitudes are zero.
/// Valid masks are unchanged; noisy depths are clamped to stay positive.
FrameSet perturb(const FrameSet& frames, const PerturbationSpec& spec);

/// Canned scenes used by the CLI and the test suites. The camera layouts
/// keep every pixel on a primitive surface (no background hits) so that
/// cross-view depth comparisons are free of silhouette discontinuities.
namespace presets {

/// Fronto-parallel plane at z = 2.
SceneSpec plane_scene();
/// Sphere centered on the +z axis, large enough to fill the view.
SceneSpec sphere_scene();
/// Axis-aligned box whose front face fills the view.
SceneSpec box_scene();
/// Static plane background plus a laterally translating box marked dynamic.
/// The box face sits at constant depth, so consistent depths stay exactly
/// consistent while it moves.
SceneSpec dynamic_box_scene(int frames, double step_per_frame = 0.0);

TrajectorySpec static_traj(int frames);
TrajectorySpec orbit_traj(int frames, const SceneSpec& scene);
TrajectorySpec dolly_traj(int frames);

CameraIntrinsics default_intrinsics(int size);

}  // namespace presets

}  // namespace mvgeo::oracle
