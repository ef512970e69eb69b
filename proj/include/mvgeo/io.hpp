// SPDX-License-Identifier: Apache-2.0
//
// File formats: the DFR1 depth raster, the JSON frame manifest and PLY
// point cloud export. All binary payloads are little-endian regardless of
// the host.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mvgeo/cloud.hpp"
#include "mvgeo/geometry.hpp"

namespace mvgeo {

// --------------------------------------------------------------------------
// DFR1 raster: "DFR1" magic, u32le width, u32le height, then width*height
// float32le values, row-major from the top-left pixel. Non-finite or <= 0
// values mark invalid pixels when the raster is read as a depth map.

void write_depth_raster(const std::filesystem::path& path, const DepthMap& map);

/// Strict reader: rejects bad magic, truncated payloads and trailing bytes.
DepthMap read_depth_raster(const std::filesystem::path& path);

/// Same container, probability semantics: every value must be finite and
/// in [0, 1].
void write_prob_raster(const std::filesystem::path& path,
                       const MotionProbMap& map);
MotionProbMap read_prob_raster(const std::filesystem::path& path);

/// Raw raster write for data without depth semantics (e.g. gradients).
void write_raw_raster(const std::filesystem::path& path, int width, int height,
                      const std::vector<double>& values);

// --------------------------------------------------------------------------
// Manifest: versioned JSON document listing per-frame raster paths, 4x4
// row-major camera-to-world poses and pinhole intrinsics. Raster paths are
// relative to the manifest's directory.

inline constexpr const char* kManifestVersion = "mvgeo-manifest-v1";

struct LoadedManifest {
  FrameSet frames;
  std::optional<double> scene_scale;
};

/// Reads and fully validates a manifest; any failure names the offending
/// frame. Pose rotation blocks are checked at tolerance 1e-6.
LoadedManifest read_manifest(const std::filesystem::path& path);

/// Writes manifest.json plus one DFR raster per frame (and one per motion
/// map) into `dir`. Returns the manifest path.
std::filesystem::path write_manifest(const std::filesystem::path& dir,
                                     const FrameSet& frames,
                                     std::optional<double> scene_scale = {});

// --------------------------------------------------------------------------
// PLY export: vertices with float32 x, y, z and optionally a float32
// motion_prob property.

enum class PlyFormat { BinaryLittleEndian, Ascii };

void write_ply(const std::filesystem::path& path, const PointCloud& cloud,
               PlyFormat format = PlyFormat::BinaryLittleEndian,
               bool with_motion_prob = false);

// --------------------------------------------------------------------------

/// FNV-1a 64-bit digest of a file's bytes, formatted "fnv1a64:<hex>".
std::string file_digest(const std::filesystem::path& path);

}  // namespace mvgeo
