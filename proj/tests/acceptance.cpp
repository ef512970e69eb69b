// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: runs every release criterion end to end and prints one
// PASS/FAIL line per criterion (with per-case detail lines where a
// criterion spans several configurations). The process exit code is the
// number of failed criteria.
//
// Usage: mvgeo_acceptance [path-to-mvgeo-cli]
// The CLI path is needed only by the determinism/performance criterion.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <thread>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mvgeo/cloud.hpp"
#include "mvgeo/geometry.hpp"
#include "mvgeo/io.hpp"
#include "mvgeo/loss.hpp"
#include "mvgeo/metrics.hpp"
#include "mvgeo/oracle.hpp"
#include "mvgeo/pipeline.hpp"
#include "mvgeo/training.hpp"

namespace fs = std::filesystem;
using namespace mvgeo;
using Clock = std::chrono::steady_clock;

namespace {

int g_threads = 4;

struct Outcome {
  bool pass = true;
  std::string summary;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      details.push_back("violated: " + what);
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------- 1
Outcome criterion_roundtrip() {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> depth(0.1, 100.0);
  std::uniform_real_distribution<double> focal(20.0, 500.0);
  std::uniform_real_distribution<double> principal(0.0, 8.0);
  std::uniform_int_distribution<int> px(0, 7);

  double max_err = 0.0;
  for (int i = 0; i < 10000; ++i) {
    CameraIntrinsics K;
    K.fx = focal(rng);
    K.fy = focal(rng);
    K.cx = principal(rng);
    K.cy = principal(rng);
    K.width = K.height = 8;

    Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    q.normalize();
    CameraPose pose;
    pose.rotation = q.toRotationMatrix();
    pose.translation = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)) * 2.0;

    DepthMap d(8, 8);
    const int u = px(rng), v = px(rng);
    const double dep = depth(rng);
    d.values[d.index(u, v)] = dep;
    d.valid[d.index(u, v)] = 1;

    const auto pts = backproject(d, K, pose);
    const Projection pr = project(pts.at(0).position, K, pose);
    if (pr.behind) {
      out.require(false, "round trip landed behind the camera");
      continue;
    }
    max_err = std::max({max_err, std::abs(pr.u - u), std::abs(pr.v - v),
                        std::abs(pr.z - dep)});
  }
  const double secs = seconds_since(t0);
  out.require(max_err < 1e-9, fmt("max error %.3e must be < 1e-9", max_err));
  out.require(secs < 1.0, fmt("runtime %.2f s must be < 1 s", secs));
  out.summary = fmt("max err %.2e over 10000 tuples (%.2f s)", max_err, secs);
  return out;
}

// ---------------------------------------------------------------------- 2
Outcome criterion_oracle_exactness() {
  Outcome out;
  const auto t0 = Clock::now();
  const int T = 24, size = 128;

  for (const char* scene_name : {"plane", "sphere", "box"}) {
    for (const char* traj_name : {"static", "orbit", "dolly"}) {
      oracle::SceneSpec scene;
      if (std::string(scene_name) == "plane") scene = oracle::presets::plane_scene();
      else if (std::string(scene_name) == "sphere") scene = oracle::presets::sphere_scene();
      else scene = oracle::presets::box_scene();

      oracle::TrajectorySpec traj;
      if (std::string(traj_name) == "static") traj = oracle::presets::static_traj(T);
      else if (std::string(traj_name) == "orbit") traj = oracle::presets::orbit_traj(T, scene);
      else traj = oracle::presets::dolly_traj(T);

      const FrameSet frames = oracle::render(
          scene, traj, oracle::presets::default_intrinsics(size), g_threads);
      const PointCloud cloud =
          build_global_cloud(frames, FusionConfig::disabled(), PixelFilter::All,
                             0.5, g_threads);
      const double l_geo = geo_loss(frames, cloud, GeoLossConfig{}, g_threads).loss;
      const double score = mvcs(frames, MetricsConfig{}, g_threads).score;
      const double reproj =
          reprojection_error(frames, MetricsConfig{}, FusionConfig::disabled(),
                             g_threads)
              .mean_px;

      const bool ok_loss = l_geo < 1e-9;
      const bool ok_mvcs = std::abs(score - 100.0) <= 1e-6;
      const bool ok_reproj = reproj < 1e-9;
      out.pass = out.pass && ok_loss && ok_mvcs && ok_reproj;
      out.details.push_back(
          fmt("%-6s/%-6s  l_geo=%.2e %s  mvcs=%.6f %s  reproj=%.2e %s",
              scene_name, traj_name, l_geo, ok_loss ? "ok" : "FAIL(>1e-9)",
              score, ok_mvcs ? "ok" : "FAIL", reproj,
              ok_reproj ? "ok" : "FAIL"));
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 30.0) {
    out.pass = false;
    out.details.push_back(fmt("violated: runtime %.1f s must be < 30 s", secs));
  }
  out.summary = fmt("9 scene/trajectory combos at %d frames, %dpx (%.1f s)", T,
                    size, secs);
  return out;
}

// ---------------------------------------------------------------------- 3
Outcome criterion_hand_derived_loss() {
  Outcome out;
  CameraIntrinsics K;
  K.fx = K.fy = 10.0;
  K.cx = K.cy = 2.0;
  K.width = K.height = 4;

  auto pair_loss = [&](double d1, double d2) {
    FrameSet fs;
    for (double d : {d1, d2}) {
      Frame fr;
      fr.intrinsics = K;
      fr.depth = DepthMap(4, 4, d, true);
      fs.frames.push_back(fr);
    }
    const PointCloud cloud = build_global_cloud(fs, FusionConfig::disabled());
    return geo_loss(fs, cloud, GeoLossConfig{}).loss;
  };

  const double near = pair_loss(1.0, 1.02);
  const double far = pair_loss(1.0, 2.0);
  out.require(std::abs(near - 0.01) <= 1e-12,
              fmt("1.0/1.02 pair: %.17g must equal 0.01 within 1e-12", near));
  out.require(std::abs(far - 0.0) <= 1e-12,
              fmt("1.0/2.0 pair: %.17g must be clipped to 0", far));
  out.summary = fmt("pair losses %.12f and %.1f", near, far);
  return out;
}

// ---------------------------------------------------------------------- 4
Outcome criterion_gradcheck() {
  Outcome out;
  const auto t0 = Clock::now();
  const double h = 1e-4;
  const GeoLossConfig cfg;
  double worst = 0.0;

  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const auto scene = seed % 2 ? oracle::presets::sphere_scene()
                                : oracle::presets::plane_scene();
    const auto base =
        oracle::render(scene, oracle::presets::static_traj(3),
                       oracle::presets::default_intrinsics(24), g_threads);
    oracle::PerturbationSpec spec;
    spec.depth_noise_sigma = 0.01;
    spec.seed = seed;
    FrameSet frames = oracle::perturb(base, spec);

    const PointCloud cloud =
        build_global_cloud(frames, FusionConfig::disabled());
    const auto reps = reproject_all(frames, cloud);
    const GeoLossGradResult g = geo_loss_grad(frames, cloud, cfg);

    for (size_t f = 0; f < frames.size(); ++f) {
      const double quantum =
          1.0 / (static_cast<double>(frames.size()) *
                 static_cast<double>(g.loss.per_frame[f].counted));
      for (size_t p = 0; p < frames[f].depth.size(); ++p) {
        if (!frames[f].depth.valid[p] || !reps[f].hit[p]) continue;
        const double r = std::abs(reps[f].values[p] - frames[f].depth.values[p]);
        if (r < 3 * h || std::abs(r - cfg.delta) < 3 * h) continue;

        const double saved = frames[f].depth.values[p];
        frames[f].depth.values[p] = saved + h;
        const double up = geo_loss_with_reprojections(frames, reps, cfg).loss;
        frames[f].depth.values[p] = saved - h;
        const double down = geo_loss_with_reprojections(frames, reps, cfg).loss;
        frames[f].depth.values[p] = saved;

        const double fd = (up - down) / (2 * h);
        worst = std::max(worst,
                         std::abs(fd - g.per_frame[f].values[p]) / quantum);
      }
    }
  }
  const double secs = seconds_since(t0);
  out.require(worst < 1e-3, fmt("max relative error %.3e must be < 1e-3", worst));
  out.require(secs < 120.0, fmt("runtime %.1f s must be < 2 min", secs));
  out.summary =
      fmt("5 seeded scenes, h=1e-4, max rel err %.2e (%.1f s)", worst, secs);
  return out;
}

// ---------------------------------------------------------------------- 5
Outcome criterion_monotonicity() {
  Outcome out;
  const auto t0 = Clock::now();
  const auto base =
      oracle::render(oracle::presets::plane_scene(),
                     oracle::presets::static_traj(4),
                     oracle::presets::default_intrinsics(32), g_threads);
  const double scene_scale = 2.0;  // plane depth
  const GeoLossConfig lcfg;

  std::vector<double> mean_loss, mean_mvcs, mean_reproj;
  for (double sigma : {0.005, 0.01, 0.02}) {
    double sl = 0, sm = 0, sr = 0;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
      oracle::PerturbationSpec spec;
      spec.depth_noise_sigma = sigma * scene_scale;
      spec.seed = seed;
      const FrameSet noisy = oracle::perturb(base, spec);

      const PointCloud cloud = build_global_cloud(
          noisy, FusionConfig::disabled(), PixelFilter::All, 0.5, g_threads);
      const double l = geo_loss(noisy, cloud, lcfg, g_threads).loss;
      out.require(l >= 0.0 && l < lcfg.delta,
                  fmt("l_geo %.4f outside [0, delta)", l));
      sl += l;
      sm += mvcs(noisy, MetricsConfig{}, g_threads).score;
      // Fusion voxel above the noise amplitude so nearest-point pairing
      // references the denoised surface rather than each noisy sample.
      MetricsConfig rcfg;
      rcfg.reproj_voxel = 0.1;
      sr += reprojection_error(noisy, rcfg, rcfg.reproj_fusion(), g_threads)
                .mean_px;
    }
    mean_loss.push_back(sl / 20);
    mean_mvcs.push_back(sm / 20);
    mean_reproj.push_back(sr / 20);
  }
  for (int i = 1; i < 3; ++i) {
    out.require(mean_loss[i] > mean_loss[i - 1], "mean l_geo not increasing");
    out.require(mean_mvcs[i] < mean_mvcs[i - 1], "mean mvcs not decreasing");
    out.require(mean_reproj[i] > mean_reproj[i - 1],
                "mean reprojection error not increasing");
  }
  out.summary = fmt(
      "l_geo %.4f/%.4f/%.4f, mvcs %.2f/%.2f/%.2f, reproj %.3f/%.3f/%.3f (%.1f s)",
      mean_loss[0], mean_loss[1], mean_loss[2], mean_mvcs[0], mean_mvcs[1],
      mean_mvcs[2], mean_reproj[0], mean_reproj[1], mean_reproj[2],
      seconds_since(t0));
  return out;
}

// ---------------------------------------------------------------------- 6
Outcome criterion_pose_sensitivity() {
  Outcome out;
  CameraIntrinsics K;
  K.fx = K.fy = 100.0;
  K.cx = K.cy = 32.0;
  K.width = K.height = 64;

  const auto frames = oracle::render(oracle::presets::plane_scene(),
                                     oracle::presets::static_traj(4), K);
  const PointCloud truth = build_global_cloud(frames, FusionConfig::disabled());

  FrameSet corrupted = frames;
  corrupted[2].pose.rotation =
      corrupted[2].pose.rotation *
      Eigen::AngleAxisd(M_PI / 180.0, Eigen::Vector3d::UnitY()).toRotationMatrix();

  // The reference cloud comes from the clean poses; provenance pairing
  // keeps each pixel matched to its own reconstructed point, so the
  // corrupted pose cannot re-select a nearby point that hides the error.
  const ReprojErrorResult r = reprojection_error_against(
      corrupted, truth, MetricsConfig{}, Correspondence::Provenance);

  const double expect = 100.0 * std::tan(M_PI / 180.0);
  const double measured = r.per_frame_mean[2];
  out.require(std::abs(measured - expect) / expect < 0.2,
              fmt("corrupted frame error %.3f px not within 20%% of %.3f",
                  measured, expect));
  out.summary = fmt("corrupted frame %.3f px vs fx*tan(1deg) = %.3f px",
                    measured, expect);
  return out;
}

// ---------------------------------------------------------------------- 7
Outcome criterion_weight_extension() {
  Outcome out;
  std::mt19937_64 rng(777);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int draw = 0; draw < 100; ++draw) {
    const int cv = 1 + static_cast<int>(rng() % 8);
    const int ct = 1 + static_cast<int>(rng() % 8);
    ProjectionWeights w;
    w.w_in = Eigen::MatrixXd::NullaryExpr(cv, ct, [&] { return gauss(rng); });
    w.b_in = Eigen::VectorXd::NullaryExpr(ct, [&] { return gauss(rng); });
    w.w_out = Eigen::MatrixXd::NullaryExpr(ct, cv, [&] { return gauss(rng); });
    w.b_out = Eigen::VectorXd::NullaryExpr(cv, [&] { return gauss(rng); });
    const auto ext = extend_projections(w);

    Eigen::VectorXd z(2 * cv);
    z = Eigen::VectorXd::NullaryExpr(2 * cv, [&] { return gauss(rng); });
    const Eigen::VectorXd original = toy_forward(w, z.head(cv).eval());
    const Eigen::VectorXd extended = toy_forward(ext, z);
    for (int c = 0; c < cv; ++c) {
      out.require(extended(c) == original(c),
                  "extended RGB output differs from the original");
      out.require(extended(cv + c) == extended(c),
                  "depth output differs from RGB output");
    }
    if (!out.pass) break;
  }
  out.summary = "100 random draws, exact equality on both halves";
  return out;
}

// ---------------------------------------------------------------------- 8
Outcome criterion_ramp() {
  Outcome out;
  const LossWeights w;  // alpha = 1e-4
  out.require(lambda_depth(0, w) == 0.1, "lambda(0) != 0.1");
  out.require(lambda_depth(9000, w) == 1.0, "lambda(9000) != 1.0");
  out.require(lambda_depth(20000, w) == 1.0, "lambda(20000) != 1.0");
  double prev = 0.0;
  for (int64_t s = 0; s <= 25000; s += 13) {
    const double v = lambda_depth(s, w);
    out.require(v >= prev && v >= 0.1 && v <= 1.0, "ramp not monotone/clamped");
    prev = v;
  }
  out.summary = "lambda(0)=0.1, lambda(9000)=1, lambda(20000)=1, monotone";
  return out;
}

// ---------------------------------------------------------------------- 9
Outcome criterion_objectives() {
  Outcome out;
  const LossWeights w;  // lambda_geo = 0.5
  out.require(std::abs(stage1_loss(1.0, 0.5, 0, w) - 1.05) <= 1e-12,
              "stage1(1.0, 0.5, 0) != 1.05");
  out.require(std::abs(stage1_loss(1.0, 0.5, 9000, w) - 1.5) <= 1e-12,
              "stage1(1.0, 0.5, 9000) != 1.5");
  out.require(stage1_loss(0, 0, 5, w) == 0.0, "stage1(0,0) != 0");
  out.require(std::abs(total_loss(1.0, 0.5, 0.2, 9000, w) - 1.6) <= 1e-12,
              "total(1.0, 0.5, 0.2) != 1.6");
  out.require(total_loss(1.0, 0.5, 0.0, 42, w) == stage1_loss(1.0, 0.5, 42, w),
              "total with l_geo=0 does not reduce to stage 1");
  out.require(std::abs(total_loss(0, 0, 0.04, 0, w) - 0.02) <= 1e-12,
              "total(0, 0, 0.04) != 0.02");
  out.summary = "staged objectives reproduce the worked examples exactly";
  return out;
}

// --------------------------------------------------------------------- 10
Outcome criterion_v_prediction() {
  Outcome out;
  const NoiseSchedule sched = NoiseSchedule::linear_alpha_bar(1000);
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double worst = 0.0;
  for (int t = 1; t <= sched.steps(); ++t) {
    const Eigen::VectorXd z0 =
        Eigen::VectorXd::NullaryExpr(4, [&] { return gauss(rng); });
    const Eigen::VectorXd eps =
        Eigen::VectorXd::NullaryExpr(4, [&] { return gauss(rng); });
    const Eigen::VectorXd zt = add_noise(z0, eps, t, sched);
    const Eigen::VectorXd v = v_target(z0, eps, t, sched);
    worst = std::max(worst,
                     (recover_z0(zt, v, t, sched) - z0).cwiseAbs().maxCoeff());
  }
  out.require(worst < 1e-9, fmt("z0 recovery error %.2e must be < 1e-9", worst));

  const int t = 400;
  const double abar = sched.at(t);
  const double z0 = 1.25;
  const int n = 100000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const double zt = std::sqrt(abar) * z0 + std::sqrt(1 - abar) * gauss(rng);
    sum += zt;
    sumsq += zt * zt;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  const double se_mean = std::sqrt((1 - abar) / n);
  const double se_var = (1 - abar) * std::sqrt(2.0 / (n - 1));
  out.require(std::abs(mean - std::sqrt(abar) * z0) < 3 * se_mean,
              fmt("noising mean off by %.4f (3se = %.4f)",
                  std::abs(mean - std::sqrt(abar) * z0), 3 * se_mean));
  out.require(std::abs(var - (1 - abar)) < 3 * se_var,
              fmt("noising variance off by %.4f (3se = %.4f)",
                  std::abs(var - (1 - abar)), 3 * se_var));
  out.summary = fmt("round trip max err %.1e; stats within 3 standard errors",
                    worst);
  return out;
}

// --------------------------------------------------------------------- 11
Outcome criterion_fusion_properties() {
  Outcome out;
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  for (double voxel : {0.03, 0.09, 0.17}) {
    PointCloud c;
    for (int i = 0; i < 2000; ++i)
      c.push({uni(rng), uni(rng), uni(rng)}, {0, i}, 0.0);
    const PointCloud once = voxel_downsample(c, voxel);
    const PointCloud twice = voxel_downsample(once, voxel);
    out.require(once.size() == twice.size(),
                fmt("voxel idempotence failed at size %.2f", voxel));
  }

  PointCloud planted;
  for (int i = 0; i < 1000; ++i)
    planted.push({uni(rng), uni(rng), uni(rng)}, {0, i}, 0.0);
  planted.push({100, 100, 100}, {0, 1000}, 0.0);
  for (KnnBackend backend : {KnnBackend::Grid, KnnBackend::BruteForce}) {
    const PointCloud cleaned =
        remove_statistical_outliers(planted, 8, 2.0, backend);
    bool outlier_gone = true;
    for (const Point3& p : cleaned.points) outlier_gone &= p.x() < 50.0;
    out.require(outlier_gone, "planted outlier survived");
    out.require(cleaned.size() >= 990, "lost more than 1% of inliers");
  }

  for (int iter = 0; iter < 3; ++iter) {
    std::vector<Point3> pts;
    for (int i = 0; i < 600; ++i) pts.push_back({uni(rng), uni(rng), uni(rng)});
    for (int i = 0; i < 30; ++i) pts.push_back(pts[static_cast<size_t>(i) * 3]);
    for (int k : {1, 8, 16}) {
      const auto grid = mean_knn_distances(pts, k, KnnBackend::Grid);
      const auto brute = mean_knn_distances(pts, k, KnnBackend::BruteForce);
      bool equal = grid.size() == brute.size();
      for (size_t i = 0; equal && i < grid.size(); ++i)
        equal = grid[i] == brute[i];
      out.require(equal, fmt("grid vs brute-force k-NN mismatch at k=%d", k));
    }
  }
  out.summary = "idempotence, planted-outlier removal, grid == brute force";
  return out;
}

// --------------------------------------------------------------------- 12
Outcome criterion_cli_determinism(const std::string& cli) {
  Outcome out;
  if (cli.empty()) {
    out.pass = false;
    out.summary = "CLI path not provided";
    return out;
  }
  const fs::path dir = fs::temp_directory_path() / "mvgeo_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  auto shell = [](const std::string& cmd) { return std::system(cmd.c_str()); };

  const std::string scene_dir = (dir / "scene").string();
  out.require(shell("'" + cli + "' synth --scene plane --traj orbit --frames 81 "
                    "--size 128 --threads 4 --out '" + scene_dir +
                    "' > /dev/null") == 0,
              "synth failed");
  const std::string manifest = scene_dir + "/manifest.json";

  const auto t0 = Clock::now();
  out.require(shell("'" + cli + "' loss '" + manifest + "' --threads 1 --out '" +
                    (dir / "r1.json").string() + "'") == 0,
              "single-threaded loss run failed");
  const double secs = seconds_since(t0);
  out.require(secs < 10.0, fmt("single-threaded loss took %.2f s (>= 10 s)", secs));

  out.require(shell("'" + cli + "' loss '" + manifest + "' --threads 8 --out '" +
                    (dir / "r8.json").string() + "'") == 0,
              "multi-threaded loss run failed");

  std::ifstream a(dir / "r1.json", std::ios::binary);
  std::ifstream b(dir / "r8.json", std::ios::binary);
  const std::string bytes_a{std::istreambuf_iterator<char>(a), {}};
  const std::string bytes_b{std::istreambuf_iterator<char>(b), {}};
  out.require(!bytes_a.empty() && bytes_a == bytes_b,
              "reports differ between --threads 1 and --threads 8");
  out.summary = fmt("81-frame loss in %.2f s single-threaded; reports byte-identical",
                    secs);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  if (unsigned hw = std::thread::hardware_concurrency(); hw > 0)
    g_threads = static_cast<int>(std::min(hw, 8u));

  struct Entry {
    int number;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries = {
      {1, "round-trip geometry", criterion_roundtrip},
      {2, "oracle exactness (loss, mvcs, reprojection)", criterion_oracle_exactness},
      {3, "hand-derived loss values", criterion_hand_derived_loss},
      {4, "gradient vs central finite differences", criterion_gradcheck},
      {5, "perturbation monotonicity", criterion_monotonicity},
      {6, "pose-corruption sensitivity", criterion_pose_sensitivity},
      {7, "weight-extension invariants", criterion_weight_extension},
      {8, "depth-loss ramp schedule", criterion_ramp},
      {9, "staged objective arithmetic", criterion_objectives},
      {10, "v-prediction identities and noising statistics", criterion_v_prediction},
      {11, "fusion properties", criterion_fusion_properties},
      {12, "CLI determinism and performance",
       [&] { return criterion_cli_determinism(cli); }},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.summary = std::string("exception: ") + ex.what();
    }
    std::printf("[%s] %2d  %s: %s\n", o.pass ? "PASS" : "FAIL", e.number,
                e.name, o.summary.c_str());
    for (const std::string& d : o.details) std::printf("          %s\n", d.c_str());
    if (!o.pass) ++failures;
  }
  std::printf("%zu of %zu criteria passed\n", entries.size() - failures,
              entries.size());
  return failures;
}
