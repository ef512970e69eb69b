// SPDX-License-Identifier: Apache-2.0
//
// Global point cloud fusion: per-frame backprojection union, statistical
// outlier removal and voxel grid downsampling.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mvgeo/geometry.hpp"

namespace mvgeo {

/// Identifies the source of a cloud point: frame index plus linear pixel
/// index within that frame.
struct PointOrigin {
  int32_t frame = 0;
  int32_t pixel = 0;
};

/// World-space point set with per-point provenance and motion probability.
/// After voxel downsampling a point may carry several origins (all the
/// members merged into its voxel); before it, exactly one.
struct PointCloud {
  std::vector<Point3> points;
  std::vector<std::vector<PointOrigin>> provenance;
  std::vector<double> motion_prob;  // in [0, 1], 0 when no motion map given

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  void reserve(size_t n) {
    points.reserve(n);
    provenance.reserve(n);
    motion_prob.reserve(n);
  }
  void push(const Point3& p, PointOrigin origin, double mp) {
    points.push_back(p);
    provenance.push_back({origin});
    motion_prob.push_back(mp);
  }
};

struct FusionConfig {
  bool outlier_enabled = true;
  int outlier_k = 16;
  double outlier_std_ratio = 2.0;
  bool voxel_enabled = true;
  /// Voxel edge in world units. Unset means automatic: 1% of the diagonal
  /// of the raw cloud's bounding box.
  std::optional<double> voxel_size;

  void validate() const;

  static FusionConfig disabled() {
    FusionConfig cfg;
    cfg.outlier_enabled = false;
    cfg.voxel_enabled = false;
    return cfg;
  }
};

/// Which pixels of a frame contribute points to a cloud.
enum class PixelFilter { All, StaticOnly, DynamicOnly };

/// Union of backprojected frames in frame order, then outlier removal,
/// then voxel downsampling (each step only if enabled). With both steps
/// disabled the result is the exact union with one origin per point.
/// `filter` selects pixels by motion classification (probability strictly
/// above `dynamic_threshold` counts as dynamic; frames without motion maps
/// are entirely static). Throws ValidationError on an empty frame set.
PointCloud build_global_cloud(const FrameSet& frames, const FusionConfig& config,
                              PixelFilter filter = PixelFilter::All,
                              double dynamic_threshold = 0.5, int threads = 1);

/// Buckets points by floor(coord / voxel_size) per axis and emits one
/// centroid per occupied voxel, in first-occurrence order. Motion
/// probability is averaged; provenance lists are concatenated.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

enum class KnnBackend { Grid, BruteForce };

/// Mean distance from each point to its k nearest neighbours (self
/// excluded). Neighbours are ordered by (distance, index) so results are
/// identical for both backends. Requires cloud.size() > k.
std::vector<double> mean_knn_distances(const std::vector<Point3>& points, int k,
                                       KnnBackend backend = KnnBackend::Grid,
                                       int threads = 1);

/// Removes points whose mean k-NN distance exceeds mean + std_ratio * std
/// of the per-point means (population standard deviation). Clouds with
/// at most k points are returned unchanged.
PointCloud remove_statistical_outliers(const PointCloud& cloud, int k,
                                       double std_ratio,
                                       KnnBackend backend = KnnBackend::Grid,
                                       int threads = 1);

/// Axis-aligned bounding box diagonal; 0 for clouds with < 2 points.
double bounding_box_diagonal(const std::vector<Point3>& points);

/// Exact nearest-neighbour queries against a fixed point set, accelerated
/// by a hashed voxel grid. The cell size is tuned to the observed occupancy
/// (depth-map clouds concentrate on surfaces, so a volumetric guess would
/// overfill cells). Ties are broken toward the lower point index; results
/// match the brute-force path bit for bit.
class NearestNeighborIndex {
 public:
  explicit NearestNeighborIndex(const std::vector<Point3>& points);

  /// Index of the nearest point to q, or -1 for an empty set.
  int nearest(const Point3& q) const;

  /// Indices of the k nearest points to q sorted by (distance, index),
  /// skipping the point with index `exclude` (pass -1 to keep all).
  std::vector<int> k_nearest(const Point3& q, int k, int exclude = -1) const;

 private:
  size_t size_ = 0;
  double cell_ = 1.0;
  int64_t cmin_[3] = {0, 0, 0};  // occupied cell range per axis
  int64_t cmax_[3] = {0, 0, 0};
  // Open-addressing table from packed cell coordinates to bucket ranges.
  size_t table_mask_ = 0;
  std::vector<int64_t> table_key_;
  std::vector<int32_t> bucket_start_;
  std::vector<int32_t> bucket_count_;
  // Point ids grouped by bucket, ascending within each bucket, plus their
  // coordinates in the same layout for contiguous scans.
  std::vector<int32_t> order_;
  std::vector<double> coords_;

  struct KBest;  // defined with the implementation

  int32_t find_bucket(int64_t key) const;
  template <typename Visit>
  void scan_cell(int64_t cx, int64_t cy, int64_t cz, Visit&& visit) const;
  void search(const Point3& q, int exclude, KBest& best) const;
};

}  // namespace mvgeo
