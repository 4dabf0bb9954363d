#pragma once

#include <array>
#include <vector>

#include "semreg/types.hpp"

namespace semreg {

struct DescriptorParams {
  double normal_radius_m = 1.0;
  double fpfh_radius_m = 2.5;
  double downsample_res_m = 0.5;
  int workers = 4;

  void validate() const;
};

/// 33-bin descriptor: three 11-bin angular histograms, each normalized to
/// sum 100 (all zero for points without a valid normal).
struct FpfhDescriptor {
  std::array<double, 33> histogram{};
  int anchor_index = -1;
};

inline bool is_valid_normal(const Vec3& n) { return n.squaredNorm() > 0.25; }

/// Per-point surface normals from the least-eigenvalue eigenvector of the
/// radius neighborhood covariance, unit norm, flipped toward the sensor
/// origin. Points with fewer than 3 neighbors (self included) get the
/// zero-vector marker.
std::vector<Vec3> estimate_normals(const SemanticPointCloud& cloud,
                                   double radius, int workers = 1);

std::vector<FpfhDescriptor> compute_fpfh(const SemanticPointCloud& cloud,
                                         const std::vector<Vec3>& normals,
                                         double radius, int workers = 1);

struct DescriptorMatch {
  int src_index = -1;
  int dst_index = -1;
  double distance = 0.0;  // L2 in descriptor space
};

/// Reciprocal nearest neighbors in descriptor space; pairs whose anchor
/// labels differ are removed. Invalid (all-zero) descriptors never match.
std::vector<DescriptorMatch> match_descriptors(
    const std::vector<FpfhDescriptor>& src_desc,
    const std::vector<FpfhDescriptor>& dst_desc,
    const std::vector<std::uint32_t>& src_labels,
    const std::vector<std::uint32_t>& dst_labels, int workers = 1);

/// Per-(voxel, label) centroid downsampling; labels are preserved exactly.
SemanticPointCloud voxel_downsample(const SemanticPointCloud& cloud,
                                    double voxel_m);

}  // namespace semreg
