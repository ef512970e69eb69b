// SPDX-License-Identifier: Apache-2.0

#include "mvgeo/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "mvgeo/errors.hpp"
#include "mvgeo/parallel.hpp"

namespace mvgeo {

void FusionConfig::validate() const {
  if (outlier_k < 1) throw ValidationError("fusion: outlier_k must be >= 1");
  if (!(outlier_std_ratio > 0.0))
    throw ValidationError("fusion: outlier_std_ratio must be > 0");
  if (voxel_size && !(*voxel_size >= 0.0))
    throw ValidationError("fusion: voxel_size must be >= 0");
}

double bounding_box_diagonal(const std::vector<Point3>& points) {
  if (points.size() < 2) return 0.0;
  Point3 lo = points.front(), hi = points.front();
  for (const Point3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

// ---------------------------------------------------------------------------
// NearestNeighborIndex

namespace {

// (squared distance, index) ordering used everywhere a neighbour set is
// selected; the index component makes tie handling deterministic.
struct Cand {
  double d2;
  int idx;
  bool operator<(const Cand& o) const {
    return d2 != o.d2 ? d2 < o.d2 : idx < o.idx;
  }
};

// Shared by the grid and brute-force paths so both produce bit-identical
// squared distances.
inline double dist2(double ax, double ay, double az, double bx, double by,
                    double bz) {
  const double dx = ax - bx, dy = ay - by, dz = az - bz;
  return dx * dx + dy * dy + dz * dz;
}

inline int64_t cell_coord(double x, double cell) {
  return static_cast<int64_t>(std::floor(x / cell));
}

inline int64_t pack_cell(int64_t x, int64_t y, int64_t z) {
  // 21 bits per axis, biased; cell coordinates stay far below 2^20 because
  // the cell size is derived from the bounding box.
  return ((x + (1ll << 20)) << 42) | ((y + (1ll << 20)) << 21) |
         (z + (1ll << 20));
}

inline size_t hash_cell(int64_t key) {
  uint64_t x = static_cast<uint64_t>(key) * 0x9E3779B97F4A7C15ull;
  x ^= x >> 29;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 32;
  return static_cast<size_t>(x);
}

constexpr int64_t kEmptyKey = std::numeric_limits<int64_t>::min();

}  // namespace

// Keeps the k best candidates ordered by (d2, idx). k stays small here, so
// sorted insertion beats a heap.
struct NearestNeighborIndex::KBest {
  explicit KBest(int k) : k_(k) { items_.reserve(k); }
  void offer(const Cand& c) {
    if (static_cast<int>(items_.size()) == k_ && !(c < items_.back())) return;
    auto it = std::upper_bound(items_.begin(), items_.end(), c);
    items_.insert(it, c);
    if (static_cast<int>(items_.size()) > k_) items_.pop_back();
  }
  bool full() const { return static_cast<int>(items_.size()) == k_; }
  double worst_d2() const { return items_.back().d2; }
  const std::vector<Cand>& items() const { return items_; }

 private:
  int k_;
  std::vector<Cand> items_;
};

NearestNeighborIndex::NearestNeighborIndex(const std::vector<Point3>& points) {
  size_ = points.size();
  if (size_ == 0) return;
  const size_t n = size_;

  Point3 lo = points.front(), hi = points.front();
  for (const Point3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diag = (hi - lo).norm();

  // Tune the cell size to the observed occupancy of nonempty cells. Depth
  // clouds live on surfaces, so occupancy scales roughly with cell^2 and a
  // square-root update converges in a couple of rounds.
  cell_ = diag > 0.0 ? diag / std::cbrt(static_cast<double>(n)) : 1.0;
  size_t table_size = 1;
  while (table_size < 2 * n) table_size <<= 1;
  table_mask_ = table_size - 1;
  std::vector<int32_t> slot_of_point(n);

  size_t buckets = 0;
  size_t prev_buckets = 0;
  for (int round = 0; round < 8; ++round) {
    table_key_.assign(table_size, kEmptyKey);
    bucket_count_.assign(table_size, 0);
    buckets = 0;
    for (size_t i = 0; i < n; ++i) {
      const int64_t key = pack_cell(cell_coord(points[i].x(), cell_),
                                    cell_coord(points[i].y(), cell_),
                                    cell_coord(points[i].z(), cell_));
      size_t slot = hash_cell(key) & table_mask_;
      while (table_key_[slot] != kEmptyKey && table_key_[slot] != key)
        slot = (slot + 1) & table_mask_;
      if (table_key_[slot] == kEmptyKey) {
        table_key_[slot] = key;
        ++buckets;
      }
      ++bucket_count_[slot];
      slot_of_point[i] = static_cast<int32_t>(slot);
    }
    const double occupancy = static_cast<double>(n) / buckets;
    // Stop once cells are small enough, or when shrinking stops paying off
    // (coincident points never separate, whatever the cell size). The last
    // round never updates cell_, so the table always matches it.
    if (occupancy <= 16.0 || cell_ <= 1e-12 || round == 7) break;
    if (round > 0 && buckets < prev_buckets + prev_buckets / 8) break;
    prev_buckets = buckets;
    cell_ *= std::sqrt(8.0 / occupancy);
  }
  for (int a = 0; a < 3; ++a) {
    cmin_[a] = cell_coord(lo[a], cell_);
    cmax_[a] = cell_coord(hi[a], cell_);
  }

  bucket_start_.assign(table_size + 1, 0);
  for (size_t s = 0; s < table_size; ++s)
    bucket_start_[s + 1] = bucket_start_[s] + bucket_count_[s];
  order_.resize(n);
  coords_.resize(3 * n);
  std::vector<int32_t> cursor(bucket_start_.begin(), bucket_start_.end() - 1);
  // Filling in index order keeps every bucket ascending by point index.
  for (size_t i = 0; i < n; ++i) {
    const int32_t at = cursor[slot_of_point[i]]++;
    order_[at] = static_cast<int32_t>(i);
    coords_[3 * static_cast<size_t>(at) + 0] = points[i].x();
    coords_[3 * static_cast<size_t>(at) + 1] = points[i].y();
    coords_[3 * static_cast<size_t>(at) + 2] = points[i].z();
  }
}

int32_t NearestNeighborIndex::find_bucket(int64_t key) const {
  size_t slot = hash_cell(key) & table_mask_;
  while (true) {
    if (table_key_[slot] == key) return static_cast<int32_t>(slot);
    if (table_key_[slot] == kEmptyKey) return -1;
    slot = (slot + 1) & table_mask_;
  }
}

template <typename Visit>
void NearestNeighborIndex::scan_cell(int64_t cx, int64_t cy, int64_t cz,
                                     Visit&& visit) const {
  const int32_t bucket = find_bucket(pack_cell(cx, cy, cz));
  if (bucket < 0) return;
  const int32_t end = bucket_start_[bucket] + bucket_count_[bucket];
  for (int32_t s = bucket_start_[bucket]; s < end; ++s)
    visit(order_[s], coords_[3 * static_cast<size_t>(s)],
          coords_[3 * static_cast<size_t>(s) + 1],
          coords_[3 * static_cast<size_t>(s) + 2]);
}

namespace {

// Distance from q to the complement of the cube of cells scanned through
// `ring`; once the current worst neighbour beats it, no farther cell can
// contribute, not even on an exact tie (ties resolve inside the cube).
inline double cube_margin(const Point3& q, int64_t cx, int64_t cy, int64_t cz,
                          int ring, double cell) {
  const double lox = static_cast<double>(cx - ring) * cell;
  const double hix = static_cast<double>(cx + ring + 1) * cell;
  const double loy = static_cast<double>(cy - ring) * cell;
  const double hiy = static_cast<double>(cy + ring + 1) * cell;
  const double loz = static_cast<double>(cz - ring) * cell;
  const double hiz = static_cast<double>(cz + ring + 1) * cell;
  return std::min({q.x() - lox, hix - q.x(), q.y() - loy, hiy - q.y(),
                   q.z() - loz, hiz - q.z()});
}

}  // namespace

void NearestNeighborIndex::search(const Point3& q, int exclude,
                                  KBest& best) const {
  const int64_t cx = cell_coord(q.x(), cell_);
  const int64_t cy = cell_coord(q.y(), cell_);
  const int64_t cz = cell_coord(q.z(), cell_);
  auto offer = [&](int32_t idx, double x, double y, double z) {
    if (idx == exclude) return;
    best.offer({dist2(x, y, z, q.x(), q.y(), q.z()), idx});
  };
  for (int ring = 0;; ++ring) {
    if (ring == 0) {
      scan_cell(cx, cy, cz, offer);
    } else {
      // Walk the shell of the cube, restricted to occupied cell range so a
      // query far from the data does not pay for the empty space between.
      const int64_t z0 = std::max(cz - ring, cmin_[2]);
      const int64_t z1 = std::min(cz + ring, cmax_[2]);
      const int64_t y0 = std::max(cy - ring, cmin_[1]);
      const int64_t y1 = std::min(cy + ring, cmax_[1]);
      const int64_t x0 = std::max(cx - ring, cmin_[0]);
      const int64_t x1 = std::min(cx + ring, cmax_[0]);
      for (int64_t z = z0; z <= z1; ++z) {
        for (int64_t y = y0; y <= y1; ++y) {
          const bool shell_zy =
              (z == cz - ring || z == cz + ring || y == cy - ring || y == cy + ring);
          if (shell_zy) {
            for (int64_t x = x0; x <= x1; ++x) scan_cell(x, y, z, offer);
          } else {
            if (cx - ring >= cmin_[0]) scan_cell(cx - ring, y, z, offer);
            if (cx + ring <= cmax_[0]) scan_cell(cx + ring, y, z, offer);
          }
        }
      }
    }
    if (best.full()) {
      const double margin = cube_margin(q, cx, cy, cz, ring, cell_);
      if (margin > 0.0 && margin * margin > best.worst_d2()) break;
    }
    // Once the cube covers every occupied cell the whole set has been
    // offered and no further ring can add anything.
    if (cx - ring <= cmin_[0] && cx + ring >= cmax_[0] &&
        cy - ring <= cmin_[1] && cy + ring >= cmax_[1] &&
        cz - ring <= cmin_[2] && cz + ring >= cmax_[2])
      break;
  }
}

int NearestNeighborIndex::nearest(const Point3& q) const {
  if (size_ == 0) return -1;
  KBest best(1);
  search(q, -1, best);
  return best.items().front().idx;
}

std::vector<int> NearestNeighborIndex::k_nearest(const Point3& q, int k,
                                                 int exclude) const {
  KBest best(k);
  search(q, exclude, best);
  std::vector<int> out;
  out.reserve(best.items().size());
  for (const Cand& c : best.items()) out.push_back(c.idx);
  return out;
}

// ---------------------------------------------------------------------------
// k-NN statistics and outlier removal

std::vector<double> mean_knn_distances(const std::vector<Point3>& points, int k,
                                       KnnBackend backend, int threads) {
  const int n = static_cast<int>(points.size());
  if (k < 1) throw ValidationError("knn: k must be >= 1");
  if (n <= k) throw ValidationError("knn: need more than k points");
  std::vector<double> means(n, 0.0);
  if (backend == KnnBackend::Grid) {
    const NearestNeighborIndex index(points);
    parallel_for(n, threads, [&](int i) {
      const auto nb = index.k_nearest(points[i], k, i);
      double sum = 0.0;
      for (int j : nb)
        sum += std::sqrt(dist2(points[j].x(), points[j].y(), points[j].z(),
                               points[i].x(), points[i].y(), points[i].z()));
      means[i] = sum / k;
    });
  } else {
    std::vector<Cand> cands(static_cast<size_t>(n) - 1);
    for (int i = 0; i < n; ++i) {
      int w = 0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        cands[w++] = {dist2(points[j].x(), points[j].y(), points[j].z(),
                            points[i].x(), points[i].y(), points[i].z()),
                      j};
      }
      std::partial_sort(cands.begin(), cands.begin() + k, cands.end());
      double sum = 0.0;
      for (int s = 0; s < k; ++s) sum += std::sqrt(cands[s].d2);
      means[i] = sum / k;
    }
  }
  return means;
}

PointCloud remove_statistical_outliers(const PointCloud& cloud, int k,
                                       double std_ratio, KnnBackend backend,
                                       int threads) {
  if (k < 1) throw ValidationError("outliers: k must be >= 1");
  if (!(std_ratio > 0.0)) throw ValidationError("outliers: std_ratio must be > 0");
  const int n = static_cast<int>(cloud.size());
  if (n <= k) return cloud;

  const std::vector<double> means =
      mean_knn_distances(cloud.points, k, backend, threads);
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= n;
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= n;
  const double threshold = mean + std_ratio * std::sqrt(var);

  PointCloud out;
  out.reserve(cloud.size());
  for (int i = 0; i < n; ++i) {
    if (means[i] > threshold) continue;
    out.points.push_back(cloud.points[i]);
    out.provenance.push_back(cloud.provenance[i]);
    out.motion_prob.push_back(cloud.motion_prob[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Voxel downsampling

namespace {

struct VoxelKey {
  int64_t x, y, z;
  bool operator==(const VoxelKey& o) const {
    return x == o.x && y == o.y && z == o.z;
  }
};

struct VoxelKeyHash {
  size_t operator()(const VoxelKey& k) const {
    uint64_t h = 1469598103934665603ull;
    for (uint64_t v : {static_cast<uint64_t>(k.x), static_cast<uint64_t>(k.y),
                       static_cast<uint64_t>(k.z)}) {
      h ^= v;
      h *= 1099511628211ull;
    }
    return static_cast<size_t>(h);
  }
};

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0))
    throw ValidationError("voxel_downsample: voxel_size must be > 0");

  struct Acc {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    double mp_sum = 0.0;
    int count = 0;
    std::vector<PointOrigin> origins;
  };
  std::unordered_map<VoxelKey, int, VoxelKeyHash> slot;
  std::vector<Acc> acc;
  slot.reserve(cloud.size());

  for (size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    const VoxelKey key{static_cast<int64_t>(std::floor(p.x() / voxel_size)),
                       static_cast<int64_t>(std::floor(p.y() / voxel_size)),
                       static_cast<int64_t>(std::floor(p.z() / voxel_size))};
    auto [it, inserted] = slot.try_emplace(key, static_cast<int>(acc.size()));
    if (inserted) acc.emplace_back();
    Acc& a = acc[it->second];
    a.sum += p;
    a.mp_sum += cloud.motion_prob[i];
    a.count += 1;
    a.origins.insert(a.origins.end(), cloud.provenance[i].begin(),
                     cloud.provenance[i].end());
  }

  // Emission in first-occurrence order keeps the result independent of the
  // hash table's iteration order.
  PointCloud out;
  out.reserve(acc.size());
  for (Acc& a : acc) {
    out.points.push_back(a.sum / a.count);
    out.motion_prob.push_back(a.mp_sum / a.count);
    out.provenance.push_back(std::move(a.origins));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Frame fusion

PointCloud build_global_cloud(const FrameSet& frames, const FusionConfig& config,
                              PixelFilter filter, double dynamic_threshold,
                              int threads) {
  if (frames.empty())
    throw ValidationError("build_global_cloud: empty frame set");
  config.validate();

  const int T = static_cast<int>(frames.size());
  std::vector<PointCloud> per_frame(T);
  parallel_for(T, threads, [&](int i) {
    const Frame& fr = frames[i];
    auto pts = backproject(fr.depth, fr.intrinsics, fr.pose);
    PointCloud& pc = per_frame[i];
    pc.reserve(pts.size());
    for (const BackprojectedPoint& bp : pts) {
      const double mp = fr.motion ? fr.motion->values[bp.pixel] : 0.0;
      if (filter == PixelFilter::StaticOnly && mp > dynamic_threshold) continue;
      if (filter == PixelFilter::DynamicOnly && !(mp > dynamic_threshold)) continue;
      pc.push(bp.position, {static_cast<int32_t>(i), bp.pixel}, mp);
    }
  });

  PointCloud cloud;
  size_t total = 0;
  for (const PointCloud& pc : per_frame) total += pc.size();
  cloud.reserve(total);
  for (PointCloud& pc : per_frame) {
    cloud.points.insert(cloud.points.end(), pc.points.begin(), pc.points.end());
    for (auto& prov : pc.provenance) cloud.provenance.push_back(std::move(prov));
    cloud.motion_prob.insert(cloud.motion_prob.end(), pc.motion_prob.begin(),
                             pc.motion_prob.end());
  }

  // Outliers are removed before downsampling so they cannot drag centroids.
  const double raw_diagonal = bounding_box_diagonal(cloud.points);
  if (config.outlier_enabled && cloud.size() > static_cast<size_t>(config.outlier_k))
    cloud = remove_statistical_outliers(cloud, config.outlier_k,
                                        config.outlier_std_ratio,
                                        KnnBackend::Grid, threads);
  if (config.voxel_enabled) {
    const double vs = config.voxel_size ? *config.voxel_size : 0.01 * raw_diagonal;
    if (vs > 0.0) cloud = voxel_downsample(cloud, vs);
  }
  return cloud;
}

}  // namespace mvgeo
