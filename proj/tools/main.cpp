// SPDX-License-Identifier: Apache-2.0
//
// mvgeo: multi-view geometric consistency toolkit.
//
// Subcommands: synth, fuse, loss, grad, metrics, schedule, perturb.
// Exit codes: 0 success, 1 usage error, 2 input validation error,
// 3 computation error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mvgeo/errors.hpp"
#include "mvgeo/io.hpp"
#include "mvgeo/metrics.hpp"
#include "mvgeo/oracle.hpp"
#include "mvgeo/pipeline.hpp"
#include "mvgeo/report.hpp"
#include "mvgeo/training.hpp"
#include "mvgeo/version.hpp"

namespace fs = std::filesystem;
using namespace mvgeo;

namespace {

struct FusionFlags {
  double voxel = -1.0;  // -1 auto, 0 disabled, > 0 explicit size
  int outlier_k = 16;
  double outlier_ratio = 2.0;
  bool no_outlier = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--voxel", voxel,
                    "voxel size for downsampling; 0 disables, negative means "
                    "automatic (1% of the cloud bounding-box diagonal)");
    cmd->add_option("--outlier-k", outlier_k, "neighbour count for outlier removal");
    cmd->add_option("--outlier-ratio", outlier_ratio,
                    "standard-deviation multiplier for outlier removal");
    cmd->add_flag("--no-outlier", no_outlier, "disable statistical outlier removal");
  }

  FusionConfig config() const {
    FusionConfig f;
    f.outlier_enabled = !no_outlier;
    f.outlier_k = outlier_k;
    f.outlier_std_ratio = outlier_ratio;
    if (voxel < 0.0) {
      f.voxel_enabled = true;  // automatic size
    } else if (voxel == 0.0) {
      f.voxel_enabled = false;
    } else {
      f.voxel_enabled = true;
      f.voxel_size = voxel;
    }
    return f;
  }
};

struct LossFlags {
  GeoLossConfig cfg;

  void attach(CLI::App* cmd) {
    cmd->add_option("--delta", cfg.delta, "residual tolerance threshold");
    cmd->add_option("--dynamic-threshold", cfg.dynamic_threshold,
                    "motion probability above which a pixel is dynamic");
    cmd->add_option("--prob-similarity", cfg.prob_similarity,
                    "probability tolerance for dynamic alignment candidates");
    cmd->add_option("--neighbor-radius", cfg.neighbor_radius,
                    "frame radius for dynamic alignment candidates");
    cmd->add_flag("--min-z", cfg.min_z,
                  "keep the nearest depth per pixel instead of the mean");
  }
};

void emit_report(const ReportJson& doc, bool to_stdout, const std::string& out) {
  const std::string text = render_report(doc);
  if (!out.empty()) {
    const fs::path path(out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot write report: " + out);
    f << text;
  }
  if (to_stdout || out.empty()) std::cout << text;
}

int run(int argc, char** argv) {
  CLI::App app{"multi-view geometric consistency toolkit"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  // ---- synth -------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "render a synthetic frame set");
  std::string synth_scene = "plane";
  std::string synth_traj = "orbit";
  int synth_frames = 16, synth_size = 128, synth_threads = 1;
  double synth_dyn_step = 0.01;
  std::string synth_out;
  synth->add_option("--scene", synth_scene, "plane | sphere | box | dynamic-box")
      ->check(CLI::IsMember({"plane", "sphere", "box", "dynamic-box"}));
  synth->add_option("--traj", synth_traj, "static | orbit | dolly")
      ->check(CLI::IsMember({"static", "orbit", "dolly"}));
  synth->add_option("--frames", synth_frames, "frame count")->check(CLI::PositiveNumber);
  synth->add_option("--size", synth_size, "image width and height")
      ->check(CLI::PositiveNumber);
  synth->add_option("--dyn-step", synth_dyn_step,
                    "lateral step per frame of the dynamic primitive");
  synth->add_option("--threads", synth_threads, "worker threads");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->callback([&] {
    oracle::SceneSpec scene;
    if (synth_scene == "plane") scene = oracle::presets::plane_scene();
    else if (synth_scene == "sphere") scene = oracle::presets::sphere_scene();
    else if (synth_scene == "box") scene = oracle::presets::box_scene();
    else scene = oracle::presets::dynamic_box_scene(synth_frames, synth_dyn_step);

    oracle::TrajectorySpec traj;
    if (synth_traj == "static") traj = oracle::presets::static_traj(synth_frames);
    else if (synth_traj == "dolly") traj = oracle::presets::dolly_traj(synth_frames);
    else traj = oracle::presets::orbit_traj(synth_frames, scene);

    const CameraIntrinsics K = oracle::presets::default_intrinsics(synth_size);
    const FrameSet frames = oracle::render(scene, traj, K, synth_threads);

    double depth_sum = 0.0;
    size_t depth_n = 0;
    for (const Frame& fr : frames.frames) {
      for (size_t p = 0; p < fr.depth.size(); ++p) {
        if (fr.depth.valid[p]) {
          depth_sum += fr.depth.values[p];
          ++depth_n;
        }
      }
    }
    const auto manifest = write_manifest(
        fs::path(synth_out), frames,
        depth_n > 0 ? std::optional<double>(depth_sum / depth_n) : std::nullopt);
    std::cout << manifest.string() << "\n";
  });

  // ---- fuse --------------------------------------------------------------
  auto* fuse = app.add_subcommand("fuse", "fuse a frame set into a PLY cloud");
  std::string fuse_manifest, fuse_out, fuse_format = "binary";
  bool fuse_static_only = false, fuse_with_motion = false;
  int fuse_threads = 1;
  double fuse_dyn_threshold = 0.5;
  FusionFlags fuse_fusion;
  fuse->add_option("manifest", fuse_manifest, "input manifest")->required();
  fuse->add_option("--out", fuse_out, "output PLY path")->required();
  fuse->add_option("--format", fuse_format, "binary | ascii")
      ->check(CLI::IsMember({"binary", "ascii"}));
  fuse->add_flag("--static-only", fuse_static_only,
                 "fuse only pixels classified static");
  fuse->add_flag("--with-motion", fuse_with_motion,
                 "write per-vertex motion_prob property");
  fuse->add_option("--dynamic-threshold", fuse_dyn_threshold,
                   "motion probability above which a pixel is dynamic");
  fuse->add_option("--threads", fuse_threads, "worker threads");
  fuse_fusion.attach(fuse);
  fuse->callback([&] {
    const LoadedManifest loaded = read_manifest(fuse_manifest);
    const PointCloud cloud = build_global_cloud(
        loaded.frames, fuse_fusion.config(),
        fuse_static_only ? PixelFilter::StaticOnly : PixelFilter::All,
        fuse_dyn_threshold, fuse_threads);
    const fs::path out(fuse_out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_ply(out, cloud,
              fuse_format == "binary" ? PlyFormat::BinaryLittleEndian
                                      : PlyFormat::Ascii,
              fuse_with_motion);
    std::cout << cloud.size() << " points -> " << out.string() << "\n";
  });

  // ---- loss --------------------------------------------------------------
  auto* loss = app.add_subcommand("loss", "reprojection consistency loss");
  std::string loss_manifest, loss_out;
  bool loss_json = false;
  int loss_threads = 1;
  FusionFlags loss_fusion;
  LossFlags loss_flags;
  loss->add_option("manifest", loss_manifest, "input manifest")->required();
  loss_flags.attach(loss);
  loss_fusion.attach(loss);
  loss->add_option("--threads", loss_threads, "worker threads");
  loss->add_flag("--json", loss_json, "print the JSON report to stdout");
  loss->add_option("--out", loss_out, "write the JSON report to this file");
  loss->callback([&] {
    const LoadedManifest loaded = read_manifest(loss_manifest);
    const LossEvaluation eval = evaluate_loss(loaded.frames, loss_fusion.config(),
                                              loss_flags.cfg, loss_threads);
    if (loss_json || !loss_out.empty()) {
      emit_report(loss_report(loss_manifest, loaded.frames.size(),
                              loaded.scene_scale, loss_fusion.config(),
                              loss_flags.cfg, eval),
                  loss_json, loss_out);
    } else {
      std::cout << "l_geo = " << eval.geo.loss << " (" << loaded.frames.size()
                << " frames, " << eval.cloud_points << " cloud points)\n";
      if (eval.dynamic) std::cout << "l_dynamic = " << eval.dynamic->loss << "\n";
    }
  });

  // ---- grad --------------------------------------------------------------
  auto* grad = app.add_subcommand("grad", "loss gradients w.r.t. depth maps");
  std::string grad_manifest, grad_out;
  int grad_threads = 1;
  FusionFlags grad_fusion;
  LossFlags grad_flags;
  grad->add_option("manifest", grad_manifest, "input manifest")->required();
  grad->add_option("--out", grad_out, "output directory")->required();
  grad_flags.attach(grad);
  grad_fusion.attach(grad);
  grad->add_option("--threads", grad_threads, "worker threads");
  grad->callback([&] {
    const LoadedManifest loaded = read_manifest(grad_manifest);
    const GradEvaluation eval = evaluate_grad(loaded.frames, grad_fusion.config(),
                                              grad_flags.cfg, grad_threads);
    fs::create_directories(grad_out);
    LossEvaluation as_loss{eval.grad.loss, eval.dynamic, eval.cloud_points};
    ReportJson doc =
        loss_report(grad_manifest, loaded.frames.size(), loaded.scene_scale,
                    grad_fusion.config(), grad_flags.cfg, as_loss);
    doc["command"] = "grad";
    for (size_t i = 0; i < eval.grad.per_frame.size(); ++i) {
      const GradRaster& g = eval.grad.per_frame[i];
      char name[32];
      std::snprintf(name, sizeof name, "grad_%03zu.dfr", i);
      write_raw_raster(fs::path(grad_out) / name, g.width, g.height, g.values);
      doc["frames"][i]["grad_path"] = name;
    }
    emit_report(doc, false, (fs::path(grad_out) / "report.json").string());
    std::cout << eval.grad.per_frame.size() << " gradient rasters -> " << grad_out
              << "\n";
  });

  // ---- metrics -----------------------------------------------------------
  auto* metrics = app.add_subcommand("metrics", "consistency score and reprojection error");
  std::string metrics_manifest, metrics_out;
  bool metrics_json = false;
  int metrics_threads = 1;
  MetricsConfig mcfg;
  metrics->add_option("manifest", metrics_manifest, "input manifest")->required();
  metrics->add_option("--mvcs-rel-tol", mcfg.mvcs_rel_tol,
                      "relative depth tolerance for warp consistency");
  metrics->add_option("--offsets", mcfg.neighbor_offsets,
                      "frame offsets for warping (default -1,1)")
      ->delimiter(',');
  metrics->add_option("--reproj-voxel", mcfg.reproj_voxel,
                      "voxel size when fusing for the reprojection error (0 = off)");
  metrics->add_option("--dynamic-threshold", mcfg.dynamic_threshold,
                      "motion probability above which a pixel is dynamic");
  metrics->add_option("--threads", metrics_threads, "worker threads");
  metrics->add_flag("--json", metrics_json, "print the JSON report to stdout");
  metrics->add_option("--out", metrics_out, "write the JSON report to this file");
  metrics->callback([&] {
    const LoadedManifest loaded = read_manifest(metrics_manifest);
    const MvcsResult m = mvcs(loaded.frames, mcfg, metrics_threads);
    const ReprojErrorResult r = reprojection_error(
        loaded.frames, mcfg, mcfg.reproj_fusion(), metrics_threads);
    if (metrics_json || !metrics_out.empty()) {
      emit_report(metrics_report(metrics_manifest, loaded.frames.size(),
                                 loaded.scene_scale, mcfg, m, r),
                  metrics_json, metrics_out);
    } else {
      std::cout << "mvcs = " << m.score << "\n"
                << "reprojection_error = " << r.mean_px << " px\n";
    }
  });

  // ---- schedule ----------------------------------------------------------
  auto* schedule = app.add_subcommand("schedule", "print the depth-loss weight ramp");
  LossWeights weights;
  int64_t sched_max = 20000, sched_stride = 1000;
  bool sched_json = false;
  schedule->add_option("--alpha", weights.alpha_ramp, "per-step ramp increment");
  schedule->add_option("--lambda-geo", weights.lambda_geo, "geometric loss weight");
  schedule->add_option("--max-step", sched_max, "last step to print");
  schedule->add_option("--stride", sched_stride, "step stride");
  schedule->add_flag("--json", sched_json, "print JSON");
  schedule->callback([&] {
    weights.validate();
    if (sched_stride < 1 || sched_max < 0)
      throw ValidationError("schedule: stride must be >= 1 and max-step >= 0");
    if (sched_json) {
      ReportJson doc;
      doc["tool"] = kToolName;
      doc["version"] = kToolVersion;
      doc["command"] = "schedule";
      doc["alpha"] = weights.alpha_ramp;
      doc["lambda_geo"] = weights.lambda_geo;
      ReportJson rows = ReportJson::array();
      for (int64_t s = 0; s <= sched_max; s += sched_stride) {
        ReportJson row;
        row["step"] = s;
        row["lambda_depth"] = lambda_depth(s, weights);
        rows.push_back(std::move(row));
      }
      doc["rows"] = std::move(rows);
      std::cout << render_report(doc);
    } else {
      std::printf("%8s  %s\n", "step", "lambda_depth");
      for (int64_t s = 0; s <= sched_max; s += sched_stride)
        std::printf("%8lld  %.6f\n", static_cast<long long>(s),
                    lambda_depth(s, weights));
    }
  });

  // ---- perturb -----------------------------------------------------------
  auto* perturb_cmd = app.add_subcommand("perturb", "apply seeded perturbations");
  std::string pert_manifest, pert_out;
  oracle::PerturbationSpec pspec;
  perturb_cmd->add_option("manifest", pert_manifest, "input manifest")->required();
  perturb_cmd->add_option("--out", pert_out, "output directory")->required();
  perturb_cmd->add_option("--depth-noise", pspec.depth_noise_sigma,
                          "Gaussian depth noise sigma");
  perturb_cmd->add_option("--pose-rot-deg", pspec.pose_rot_deg,
                          "rotation jitter in degrees about a seeded axis");
  perturb_cmd->add_option("--pose-trans", pspec.pose_trans,
                          "translation jitter magnitude");
  perturb_cmd->add_option("--per-frame-scale", pspec.per_frame_scale,
                          "per-frame depth scale factors (1 or T values)")
      ->delimiter(',');
  perturb_cmd->add_option("--seed", pspec.seed, "random seed");
  perturb_cmd->callback([&] {
    const LoadedManifest loaded = read_manifest(pert_manifest);
    const FrameSet out = oracle::perturb(loaded.frames, pspec);
    const auto manifest = write_manifest(fs::path(pert_out), out, loaded.scene_scale);
    std::cout << manifest.string() << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ComputationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
