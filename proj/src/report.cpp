// SPDX-License-Identifier: Apache-2.0

#include "mvgeo/report.hpp"

#include <cmath>

#include "mvgeo/io.hpp"
#include "mvgeo/version.hpp"

namespace mvgeo {

void set_number(ReportJson& obj, const std::string& key, double value) {
  if (std::isfinite(value)) {
    obj[key] = value;
  } else {
    obj[key] = nullptr;
    obj[key + "_reason"] = "not finite";
  }
}

ReportJson report_header(const std::string& command,
                         const std::filesystem::path& manifest_path,
                         size_t frame_count,
                         const std::optional<double>& scene_scale) {
  ReportJson doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["command"] = command;
  ReportJson inputs;
  inputs["manifest"] = manifest_path.string();
  inputs["digest"] = file_digest(manifest_path);
  inputs["frames"] = frame_count;
  if (scene_scale)
    inputs["scene_scale"] = *scene_scale;
  else
    inputs["scene_scale"] = nullptr;
  doc["inputs"] = std::move(inputs);
  return doc;
}

ReportJson fusion_config_json(const FusionConfig& cfg) {
  ReportJson j;
  j["outlier_enabled"] = cfg.outlier_enabled;
  j["outlier_k"] = cfg.outlier_k;
  j["outlier_std_ratio"] = cfg.outlier_std_ratio;
  j["voxel_enabled"] = cfg.voxel_enabled;
  if (cfg.voxel_size)
    j["voxel_size"] = *cfg.voxel_size;
  else
    j["voxel_size"] = "auto";
  return j;
}

ReportJson loss_config_json(const GeoLossConfig& cfg) {
  ReportJson j;
  j["delta"] = cfg.delta;
  j["dynamic_threshold"] = cfg.dynamic_threshold;
  j["prob_similarity"] = cfg.prob_similarity;
  j["neighbor_radius"] = cfg.neighbor_radius;
  j["min_z"] = cfg.min_z;
  return j;
}

ReportJson metrics_config_json(const MetricsConfig& cfg) {
  ReportJson j;
  j["mvcs_rel_tol"] = cfg.mvcs_rel_tol;
  j["neighbor_offsets"] = cfg.neighbor_offsets;
  j["reproj_voxel"] = cfg.reproj_voxel;
  j["dynamic_threshold"] = cfg.dynamic_threshold;
  return j;
}

ReportJson loss_report(const std::filesystem::path& manifest_path,
                       size_t frame_count,
                       const std::optional<double>& scene_scale,
                       const FusionConfig& fusion, const GeoLossConfig& cfg,
                       const LossEvaluation& eval) {
  ReportJson doc = report_header("loss", manifest_path, frame_count, scene_scale);
  doc["config"] = loss_config_json(cfg);
  doc["config"]["fusion"] = fusion_config_json(fusion);
  doc["cloud_points"] = eval.cloud_points;

  ReportJson frames = ReportJson::array();
  for (size_t i = 0; i < eval.geo.per_frame.size(); ++i) {
    const FrameLossDiag& d = eval.geo.per_frame[i];
    ReportJson f;
    f["index"] = i;
    set_number(f, "l_geo", d.loss);
    f["valid_depth"] = d.valid_depth;
    f["static_valid"] = d.static_valid;
    f["counted"] = d.counted;
    set_number(f, "hit_rate", d.hit_rate);
    set_number(f, "clipped_fraction", d.clipped_fraction);
    f["empty"] = d.empty;
    if (eval.dynamic) {
      const DynamicFrameDiag& dd = eval.dynamic->per_frame[i];
      set_number(f, "l_dynamic", dd.loss);
      f["dynamic_valid"] = dd.dynamic_valid;
      f["dynamic_with_candidates"] = dd.with_candidates;
    }
    frames.push_back(std::move(f));
  }
  doc["frames"] = std::move(frames);

  ReportJson agg;
  set_number(agg, "l_geo", eval.geo.loss);
  if (eval.dynamic)
    set_number(agg, "l_dynamic", eval.dynamic->loss);
  else
    agg["l_dynamic"] = nullptr;
  doc["aggregate"] = std::move(agg);
  return doc;
}

ReportJson metrics_report(const std::filesystem::path& manifest_path,
                          size_t frame_count,
                          const std::optional<double>& scene_scale,
                          const MetricsConfig& cfg, const MvcsResult& mvcs,
                          const ReprojErrorResult& reproj) {
  ReportJson doc =
      report_header("metrics", manifest_path, frame_count, scene_scale);
  doc["config"] = metrics_config_json(cfg);

  ReportJson m;
  set_number(m, "score", mvcs.score);
  m["consistent"] = mvcs.consistent;
  m["total"] = mvcs.total;
  doc["mvcs"] = std::move(m);

  ReportJson r;
  set_number(r, "mean_px", reproj.mean_px);
  r["count"] = reproj.count;
  ReportJson per = ReportJson::array();
  for (size_t i = 0; i < reproj.per_frame_mean.size(); ++i) {
    ReportJson f;
    f["index"] = i;
    set_number(f, "mean_px", reproj.per_frame_mean[i]);
    f["count"] = reproj.per_frame_count[i];
    per.push_back(std::move(f));
  }
  r["per_frame"] = std::move(per);
  doc["reprojection_error"] = std::move(r);
  return doc;
}

std::string render_report(const ReportJson& doc) { return doc.dump(2) + "\n"; }

}  // namespace mvgeo
