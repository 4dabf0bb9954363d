#include "semreg/descriptors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "semreg/errors.hpp"
#include "semreg/kdtree.hpp"
#include "semreg/parallel.hpp"

namespace semreg {

void DescriptorParams::validate() const {
  if (normal_radius_m <= 0 || fpfh_radius_m <= 0 || downsample_res_m <= 0)
    throw ConfigError("descriptor radii and downsample resolution must be positive");
  if (workers < 1) throw ConfigError("descriptors.workers must be >= 1");
}

std::vector<Vec3> estimate_normals(const SemanticPointCloud& cloud,
                                   double radius, int workers) {
  if (radius <= 0) throw ConfigError("normal radius must be positive");
  std::vector<Vec3> normals(cloud.size(), Vec3::Zero());
  if (cloud.empty()) return normals;
  KdTree3 tree(cloud.points);

  parallel_for(cloud.size(), workers, [&](std::size_t b, std::size_t e) {
    std::vector<int> nbrs;
    for (std::size_t i = b; i < e; ++i) {
      tree.radius_search(cloud.points[i], radius, nbrs);
      if (nbrs.size() < 3) continue;
      Vec3 mean = Vec3::Zero();
      for (int j : nbrs) mean += cloud.points[j];
      mean /= static_cast<double>(nbrs.size());
      Mat3 cov = Mat3::Zero();
      for (int j : nbrs) {
        const Vec3 d = cloud.points[j] - mean;
        cov += d * d.transpose();
      }
      Eigen::SelfAdjointEigenSolver<Mat3> es;
      es.computeDirect(cov);
      Vec3 n = es.eigenvectors().col(0);  // least eigenvalue
      const double len = n.norm();
      if (len < 1e-12) continue;
      n /= len;
      if (n.dot(cloud.points[i]) > 0) n = -n;  // face the sensor origin
      normals[i] = n;
    }
  });
  return normals;
}

namespace {

// Darboux-frame angle triple for a point pair; the source is the endpoint
// whose normal makes the smaller angle with the connecting line.
bool pair_features(const Vec3& p1, const Vec3& n1, const Vec3& p2,
                   const Vec3& n2, double& alpha, double& phi, double& theta) {
  Vec3 d = p2 - p1;
  const double dist = d.norm();
  if (dist < 1e-12) return false;
  d /= dist;

  Vec3 ns = n1, nt = n2;
  const double a1 = n1.dot(d);
  const double a2 = n2.dot(d);
  double f_phi = a1;
  if (std::acos(std::min(1.0, std::abs(a1))) >
      std::acos(std::min(1.0, std::abs(a2)))) {
    ns = n2;
    nt = n1;
    d = -d;
    f_phi = -a2;
  }

  Vec3 v = d.cross(ns);
  const double vn = v.norm();
  if (vn < 1e-12) return false;
  v /= vn;
  const Vec3 w = ns.cross(v);

  alpha = v.dot(nt);
  phi = f_phi;
  theta = std::atan2(w.dot(nt), ns.dot(nt));
  return true;
}

inline int bin11(double value, double lo, double hi) {
  const int b = static_cast<int>(11.0 * (value - lo) / (hi - lo));
  return std::clamp(b, 0, 10);
}

using Hist33 = std::array<double, 33>;

void accumulate(Hist33& h, double alpha, double phi, double theta) {
  h[bin11(alpha, -1.0, 1.0)] += 1.0;
  h[11 + bin11(phi, -1.0, 1.0)] += 1.0;
  h[22 + bin11(theta, -M_PI, M_PI)] += 1.0;
}

void normalize_blocks(Hist33& h) {
  for (int blk = 0; blk < 3; ++blk) {
    double sum = 0.0;
    for (int k = 0; k < 11; ++k) sum += h[blk * 11 + k];
    if (sum > 0)
      for (int k = 0; k < 11; ++k) h[blk * 11 + k] *= 100.0 / sum;
  }
}

}  // namespace

std::vector<FpfhDescriptor> compute_fpfh(const SemanticPointCloud& cloud,
                                         const std::vector<Vec3>& normals,
                                         double radius, int workers) {
  if (radius <= 0) throw ConfigError("fpfh radius must be positive");
  const std::size_t n = cloud.size();
  std::vector<FpfhDescriptor> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i].anchor_index = static_cast<int>(i);
  if (n == 0) return out;

  KdTree3 tree(cloud.points);
  std::vector<std::vector<int>> neighborhoods(n);
  parallel_for(n, workers, [&](std::size_t b, std::size_t e) {
    std::vector<int> nbrs;
    for (std::size_t i = b; i < e; ++i) {
      if (!is_valid_normal(normals[i])) continue;
      tree.radius_search(cloud.points[i], radius, nbrs);
      auto& keep = neighborhoods[i];
      keep.reserve(nbrs.size());
      for (int j : nbrs)
        if (j != static_cast<int>(i) && is_valid_normal(normals[j]))
          keep.push_back(j);
    }
  });

  std::vector<Hist33> spfh(n, Hist33{});
  parallel_for(n, workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      for (int j : neighborhoods[i]) {
        double alpha, phi, theta;
        if (pair_features(cloud.points[i], normals[i], cloud.points[j],
                          normals[j], alpha, phi, theta))
          accumulate(spfh[i], alpha, phi, theta);
      }
      normalize_blocks(spfh[i]);
    }
  });

  parallel_for(n, workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (!is_valid_normal(normals[i])) continue;  // zero descriptor marker
      Hist33 h = spfh[i];
      const auto& nbrs = neighborhoods[i];
      if (!nbrs.empty()) {
        Hist33 acc{};
        for (int j : nbrs) {
          const double w = (cloud.points[i] - cloud.points[j]).norm();
          if (w < 1e-12) continue;
          const double inv = 1.0 / w;
          for (int k = 0; k < 33; ++k) acc[k] += inv * spfh[j][k];
        }
        const double scale = 1.0 / static_cast<double>(nbrs.size());
        for (int k = 0; k < 33; ++k) h[k] += scale * acc[k];
      }
      normalize_blocks(h);
      out[i].histogram = h;
    }
  });
  return out;
}

namespace {

bool is_zero_descriptor(const FpfhDescriptor& d) {
  for (double v : d.histogram)
    if (v != 0.0) return false;
  return true;
}

double desc_dist_sq(const FpfhDescriptor& a, const FpfhDescriptor& b) {
  double s = 0.0;
  for (int k = 0; k < 33; ++k) {
    const double d = a.histogram[k] - b.histogram[k];
    s += d * d;
  }
  return s;
}

// For each query descriptor the best candidate index (ties to the lowest
// index) or -1; invalid descriptors and label mismatches are skipped.
std::vector<int> nearest_in(const std::vector<FpfhDescriptor>& queries,
                            const std::vector<FpfhDescriptor>& candidates,
                            const std::vector<std::uint32_t>& q_labels,
                            const std::vector<std::uint32_t>& c_labels,
                            int workers) {
  std::vector<int> best(queries.size(), -1);
  parallel_for(queries.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (is_zero_descriptor(queries[i])) continue;
      const std::uint32_t label = q_labels[queries[i].anchor_index];
      double best_d = std::numeric_limits<double>::infinity();
      int best_j = -1;
      for (std::size_t j = 0; j < candidates.size(); ++j) {
        if (c_labels[candidates[j].anchor_index] != label) continue;
        if (is_zero_descriptor(candidates[j])) continue;
        const double d = desc_dist_sq(queries[i], candidates[j]);
        if (d < best_d) {
          best_d = d;
          best_j = static_cast<int>(j);
        }
      }
      best[i] = best_j;
    }
  });
  return best;
}

}  // namespace

std::vector<DescriptorMatch> match_descriptors(
    const std::vector<FpfhDescriptor>& src_desc,
    const std::vector<FpfhDescriptor>& dst_desc,
    const std::vector<std::uint32_t>& src_labels,
    const std::vector<std::uint32_t>& dst_labels, int workers) {
  std::vector<DescriptorMatch> matches;
  if (src_desc.empty() || dst_desc.empty()) return matches;

  const std::vector<int> fwd =
      nearest_in(src_desc, dst_desc, src_labels, dst_labels, workers);
  const std::vector<int> bwd =
      nearest_in(dst_desc, src_desc, dst_labels, src_labels, workers);

  for (std::size_t i = 0; i < src_desc.size(); ++i) {
    const int j = fwd[i];
    if (j < 0 || bwd[j] != static_cast<int>(i)) continue;
    DescriptorMatch m;
    m.src_index = static_cast<int>(i);
    m.dst_index = j;
    m.distance = std::sqrt(desc_dist_sq(src_desc[i], dst_desc[j]));
    matches.push_back(m);
  }
  return matches;
}

SemanticPointCloud voxel_downsample(const SemanticPointCloud& cloud,
                                    double voxel_m) {
  if (voxel_m <= 0) throw ConfigError("voxel size must be positive");
  struct Acc {
    Vec3 sum = Vec3::Zero();
    int n = 0;
  };
  std::map<std::tuple<int, int, int, std::uint32_t>, Acc> cells;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const auto key = std::make_tuple(
        static_cast<int>(std::floor(p.x() / voxel_m)),
        static_cast<int>(std::floor(p.y() / voxel_m)),
        static_cast<int>(std::floor(p.z() / voxel_m)), cloud.labels[i]);
    auto& acc = cells[key];
    acc.sum += p;
    acc.n += 1;
  }
  SemanticPointCloud out;
  out.points.reserve(cells.size());
  out.labels.reserve(cells.size());
  for (const auto& [key, acc] : cells) {
    out.points.push_back(acc.sum / acc.n);
    out.labels.push_back(std::get<3>(key));
  }
  return out;
}

}  // namespace semreg
