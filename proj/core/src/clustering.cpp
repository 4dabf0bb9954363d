#include "semreg/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "semreg/errors.hpp"

namespace semreg {

void DcvcParams::validate() const {
  if (azimuth_res_deg <= 0 || polar_res_deg <= 0 || radial_base_m <= 0)
    throw ConfigError("clustering resolutions must be positive");
  if (radial_growth < 1.0)
    throw ConfigError("clustering.radial_growth must be >= 1");
  if (min_cluster_size < 3)
    throw ConfigError("clustering.min_cluster_size must be >= 3");
}

std::pair<Vec3, Mat3> cluster_stats(std::span<const Vec3> points) {
  if (points.empty())
    throw std::invalid_argument("cluster_stats: empty point set");
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());
  cov = 0.5 * (cov + cov.transpose()).eval();
  return {mean, cov};
}

namespace {

struct VoxelKey {
  int az, pol, rad;
  bool operator==(const VoxelKey& o) const {
    return az == o.az && pol == o.pol && rad == o.rad;
  }
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::size_t h = static_cast<std::size_t>(k.az) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::size_t>(k.pol) * 0xc2b2ae3d27d4eb4fULL + (h << 6);
    h ^= static_cast<std::size_t>(k.rad) * 0x165667b19e3779f9ULL + (h >> 3);
    return h;
  }
};

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

int radial_bin(double range, const DcvcParams& p) {
  if (range <= 0.0) return 0;
  if (p.radial_growth <= 1.0 + 1e-12)
    return static_cast<int>(range / p.radial_base_m);
  // Bin k spans [base*(g^k - 1)/(g - 1), base*(g^{k+1} - 1)/(g - 1)).
  const double g = p.radial_growth;
  const double x = range * (g - 1.0) / p.radial_base_m + 1.0;
  return static_cast<int>(std::log(x) / std::log(g));
}

}  // namespace

std::vector<Cluster> dcvc_segment(const SemanticPointCloud& cloud,
                                  std::uint32_t label,
                                  const DcvcParams& params) {
  params.validate();

  const double az_res = params.azimuth_res_deg * M_PI / 180.0;
  const double pol_res = params.polar_res_deg * M_PI / 180.0;
  const int n_az = std::max(1, static_cast<int>(std::round(2.0 * M_PI / az_res)));

  std::unordered_map<VoxelKey, std::vector<int>, VoxelKeyHash> voxels;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.labels[i] != label) continue;
    const Vec3& p = cloud.points[i];
    const double range = p.norm();
    const double az = std::atan2(p.y(), p.x());  // [-pi, pi]
    const double pol =
        range > 0 ? std::acos(std::clamp(p.z() / range, -1.0, 1.0)) : 0.0;
    VoxelKey key;
    key.az = static_cast<int>(std::floor((az + M_PI) / az_res)) % n_az;
    if (key.az < 0) key.az += n_az;
    key.pol = static_cast<int>(pol / pol_res);
    key.rad = radial_bin(range, params);
    voxels[key].push_back(static_cast<int>(i));
  }
  if (voxels.empty()) return {};

  std::vector<const std::vector<int>*> cell_points;
  std::unordered_map<VoxelKey, int, VoxelKeyHash> cell_id;
  cell_points.reserve(voxels.size());
  for (const auto& [key, pts] : voxels) {
    cell_id.emplace(key, static_cast<int>(cell_points.size()));
    cell_points.push_back(&pts);
  }

  UnionFind uf(static_cast<int>(cell_points.size()));
  for (const auto& [key, id] : cell_id) {
    for (int da = -1; da <= 1; ++da) {
      for (int dp = -1; dp <= 1; ++dp) {
        for (int dr = -1; dr <= 1; ++dr) {
          if (da == 0 && dp == 0 && dr == 0) continue;
          VoxelKey nb;
          nb.az = (key.az + da + n_az) % n_az;
          nb.pol = key.pol + dp;
          nb.rad = key.rad + dr;
          if (nb.pol < 0 || nb.rad < 0) continue;
          auto it = cell_id.find(nb);
          if (it != cell_id.end()) uf.unite(id, it->second);
        }
      }
    }
  }

  std::unordered_map<int, std::vector<int>> components;
  for (const auto& [key, id] : cell_id) {
    auto& pts = components[uf.find(id)];
    const auto& cell = *cell_points[static_cast<std::size_t>(id)];
    pts.insert(pts.end(), cell.begin(), cell.end());
  }

  std::vector<Cluster> clusters;
  for (auto& [root, indices] : components) {
    if (static_cast<int>(indices.size()) < params.min_cluster_size) continue;
    std::sort(indices.begin(), indices.end());
    Cluster c;
    c.label = label;
    c.point_indices = std::move(indices);
    std::vector<Vec3> pts;
    pts.reserve(c.point_indices.size());
    for (int idx : c.point_indices) pts.push_back(cloud.points[idx]);
    std::tie(c.centroid, c.covariance) = cluster_stats(pts);
    clusters.push_back(std::move(c));
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& a, const Cluster& b) {
              return a.point_indices.front() < b.point_indices.front();
            });
  return clusters;
}

std::vector<Cluster> segment_instances(const SemanticPointCloud& cloud,
                                       const LabelConfig& labels,
                                       const DcvcParams& params) {
  std::vector<Cluster> all;
  for (std::uint32_t label : labels.instance_classes) {
    auto clusters = dcvc_segment(cloud, label, params);
    all.insert(all.end(), std::make_move_iterator(clusters.begin()),
               std::make_move_iterator(clusters.end()));
  }
  return all;
}

}  // namespace semreg
