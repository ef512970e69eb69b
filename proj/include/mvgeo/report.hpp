// SPDX-License-Identifier: Apache-2.0
//
// Deterministic JSON reports: stable key order, shortest round-trip float
// formatting, no timestamps. Identical inputs and settings must produce
// byte-identical documents, so nothing execution-dependent (thread count,
// hostnames, wall time) belongs here.

#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mvgeo/metrics.hpp"
#include "mvgeo/pipeline.hpp"

namespace mvgeo {

using ReportJson = nlohmann::ordered_json;

/// Common preamble: tool, version, command and input identification.
ReportJson report_header(const std::string& command,
                         const std::filesystem::path& manifest_path,
                         size_t frame_count,
                         const std::optional<double>& scene_scale);

ReportJson fusion_config_json(const FusionConfig& cfg);
ReportJson loss_config_json(const GeoLossConfig& cfg);
ReportJson metrics_config_json(const MetricsConfig& cfg);

ReportJson loss_report(const std::filesystem::path& manifest_path,
                       size_t frame_count,
                       const std::optional<double>& scene_scale,
                       const FusionConfig& fusion, const GeoLossConfig& cfg,
                       const LossEvaluation& eval);

ReportJson metrics_report(const std::filesystem::path& manifest_path,
                          size_t frame_count,
                          const std::optional<double>& scene_scale,
                          const MetricsConfig& cfg, const MvcsResult& mvcs,
                          const ReprojErrorResult& reproj);

/// Serializes with a trailing newline; numbers that are not finite become
/// null with a sibling "<key>_reason" string.
std::string render_report(const ReportJson& doc);

/// Inserts value under key, or null plus "<key>_reason" when not finite.
void set_number(ReportJson& obj, const std::string& key, double value);

}  // namespace mvgeo
