// SPDX-License-Identifier: Apache-2.0

#include "mvgeo/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mvgeo/errors.hpp"

namespace mvgeo {

namespace {

constexpr char kMagic[4] = {'D', 'F', 'R', '1'};

void put_u32le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32le(std::string& out, float f) {
  put_u32le(out, std::bit_cast<uint32_t>(f));
}

uint32_t get_u32le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

float get_f32le(const unsigned char* p) {
  return std::bit_cast<float>(get_u32le(p));
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open file for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError("short write: " + path.string());
}

std::string raster_bytes(int width, int height, const std::vector<double>& values) {
  std::string out;
  out.reserve(12 + 4 * values.size());
  out.append(kMagic, 4);
  put_u32le(out, static_cast<uint32_t>(width));
  put_u32le(out, static_cast<uint32_t>(height));
  for (double v : values) put_f32le(out, static_cast<float>(v));
  return out;
}

struct RawRaster {
  int width = 0;
  int height = 0;
  std::vector<double> values;
};

RawRaster read_raster_file(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw ValidationError("raster: bad magic in " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  RawRaster r;
  r.width = static_cast<int>(get_u32le(p + 4));
  r.height = static_cast<int>(get_u32le(p + 8));
  if (r.width < 1 || r.height < 1)
    throw ValidationError("raster: bad dimensions in " + path.string());
  const size_t expected = 12 + 4 * static_cast<size_t>(r.width) * r.height;
  if (bytes.size() < expected)
    throw ValidationError("raster: truncated payload in " + path.string());
  if (bytes.size() > expected)
    throw ValidationError("raster: trailing bytes in " + path.string());
  r.values.resize(static_cast<size_t>(r.width) * r.height);
  for (size_t i = 0; i < r.values.size(); ++i)
    r.values[i] = static_cast<double>(get_f32le(p + 12 + 4 * i));
  return r;
}

}  // namespace

void write_depth_raster(const std::filesystem::path& path, const DepthMap& map) {
  write_file_bytes(path, raster_bytes(map.width, map.height, map.values));
}

DepthMap read_depth_raster(const std::filesystem::path& path) {
  RawRaster r = read_raster_file(path);
  return DepthMap::from_values(r.width, r.height, std::move(r.values));
}

void write_prob_raster(const std::filesystem::path& path,
                       const MotionProbMap& map) {
  map.validate();
  write_file_bytes(path, raster_bytes(map.width, map.height, map.values));
}

MotionProbMap read_prob_raster(const std::filesystem::path& path) {
  RawRaster r = read_raster_file(path);
  MotionProbMap map;
  map.width = r.width;
  map.height = r.height;
  map.values = std::move(r.values);
  try {
    map.validate();
  } catch (const ValidationError&) {
    throw ValidationError("motion raster: value outside [0, 1] in " +
                          path.string());
  }
  return map;
}

void write_raw_raster(const std::filesystem::path& path, int width, int height,
                      const std::vector<double>& values) {
  if (values.size() != static_cast<size_t>(width) * height)
    throw ValidationError("raster: value count does not match dimensions");
  write_file_bytes(path, raster_bytes(width, height, values));
}

// --------------------------------------------------------------------------
// Manifest

namespace {

using json = nlohmann::ordered_json;

std::string frame_tag(size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return buf;
}

}  // namespace

LoadedManifest read_manifest(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file_bytes(path));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: parse error: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("version") ||
      doc["version"] != kManifestVersion)
    throw ValidationError("manifest: missing or unsupported version tag");
  if (!doc.contains("frames") || !doc["frames"].is_array() ||
      doc["frames"].empty())
    throw ValidationError("manifest: needs a nonempty frames array");

  const auto dir = path.parent_path();
  LoadedManifest out;
  if (doc.contains("scene_scale")) out.scene_scale = doc["scene_scale"].get<double>();

  size_t index = 0;
  for (const auto& entry : doc["frames"]) {
    const std::string where = "manifest: frame " + std::to_string(index);
    try {
      Frame fr;
      const auto& intr = entry.at("intrinsics");
      fr.intrinsics.fx = intr.at("fx").get<double>();
      fr.intrinsics.fy = intr.at("fy").get<double>();
      fr.intrinsics.cx = intr.at("cx").get<double>();
      fr.intrinsics.cy = intr.at("cy").get<double>();
      fr.intrinsics.width = intr.at("width").get<int>();
      fr.intrinsics.height = intr.at("height").get<int>();
      fr.intrinsics.validate();

      const auto& pose = entry.at("pose");
      if (!pose.is_array() || pose.size() != 16)
        throw ValidationError("pose must be 16 numbers (row-major 4x4)");
      Eigen::Matrix4d m;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          m(r, c) = pose[static_cast<size_t>(4 * r + c)].get<double>();
      if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9)
        throw ValidationError("pose bottom row must be 0 0 0 1");
      fr.pose.rotation = m.topLeftCorner<3, 3>();
      fr.pose.translation = m.topRightCorner<3, 1>();
      fr.pose.validate(1e-6);

      const auto depth_path = dir / entry.at("depth_path").get<std::string>();
      fr.depth = read_depth_raster(depth_path);
      if (fr.depth.width != fr.intrinsics.width ||
          fr.depth.height != fr.intrinsics.height)
        throw ValidationError("depth raster size does not match intrinsics");

      if (entry.contains("motion_prob_path")) {
        const auto mp_path = dir / entry["motion_prob_path"].get<std::string>();
        fr.motion = read_prob_raster(mp_path);
        if (fr.motion->width != fr.intrinsics.width ||
            fr.motion->height != fr.intrinsics.height)
          throw ValidationError("motion raster size does not match intrinsics");
      }
      out.frames.frames.push_back(std::move(fr));
    } catch (const json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    ++index;
  }
  return out;
}

std::filesystem::path write_manifest(const std::filesystem::path& dir,
                                     const FrameSet& frames,
                                     std::optional<double> scene_scale) {
  if (frames.empty()) throw ValidationError("manifest: empty frame set");
  std::filesystem::create_directories(dir);

  json doc;
  doc["version"] = kManifestVersion;
  if (scene_scale) doc["scene_scale"] = *scene_scale;
  doc["frames"] = json::array();
  for (size_t i = 0; i < frames.size(); ++i) {
    const Frame& fr = frames[i];
    const std::string depth_name = "frame_" + frame_tag(i) + ".dfr";
    write_depth_raster(dir / depth_name, fr.depth);

    json entry;
    entry["depth_path"] = depth_name;
    if (fr.motion) {
      const std::string mp_name = "frame_" + frame_tag(i) + "_motion.dfr";
      write_prob_raster(dir / mp_name, *fr.motion);
      entry["motion_prob_path"] = mp_name;
    }
    json pose = json::array();
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = fr.pose.rotation;
    m.topRightCorner<3, 1>() = fr.pose.translation;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) pose.push_back(m(r, c));
    entry["pose"] = std::move(pose);
    entry["intrinsics"] = {{"fx", fr.intrinsics.fx}, {"fy", fr.intrinsics.fy},
                           {"cx", fr.intrinsics.cx}, {"cy", fr.intrinsics.cy},
                           {"width", fr.intrinsics.width},
                           {"height", fr.intrinsics.height}};
    doc["frames"].push_back(std::move(entry));
  }

  const auto manifest_path = dir / "manifest.json";
  write_file_bytes(manifest_path, doc.dump(2) + "\n");
  return manifest_path;
}

// --------------------------------------------------------------------------
// PLY

void write_ply(const std::filesystem::path& path, const PointCloud& cloud,
               PlyFormat format, bool with_motion_prob) {
  std::string out;
  out += "ply\n";
  out += format == PlyFormat::BinaryLittleEndian
             ? "format binary_little_endian 1.0\n"
             : "format ascii 1.0\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  if (with_motion_prob) out += "property float motion_prob\n";
  out += "end_header\n";

  if (format == PlyFormat::BinaryLittleEndian) {
    for (size_t i = 0; i < cloud.size(); ++i) {
      put_f32le(out, static_cast<float>(cloud.points[i].x()));
      put_f32le(out, static_cast<float>(cloud.points[i].y()));
      put_f32le(out, static_cast<float>(cloud.points[i].z()));
      if (with_motion_prob)
        put_f32le(out, static_cast<float>(cloud.motion_prob[i]));
    }
  } else {
    std::ostringstream ss;
    ss.precision(9);
    for (size_t i = 0; i < cloud.size(); ++i) {
      ss << static_cast<float>(cloud.points[i].x()) << ' '
         << static_cast<float>(cloud.points[i].y()) << ' '
         << static_cast<float>(cloud.points[i].z());
      if (with_motion_prob) ss << ' ' << static_cast<float>(cloud.motion_prob[i]);
      ss << '\n';
    }
    out += ss.str();
  }
  write_file_bytes(path, out);
}

// --------------------------------------------------------------------------

std::string file_digest(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mvgeo
