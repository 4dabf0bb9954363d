#pragma once

#include <span>
#include <utility>
#include <vector>

#include "semreg/types.hpp"

namespace semreg {

/// Curved-voxel grid parameters. The grid is polar: azimuth x polar angle
/// x radial bins whose width grows geometrically with range, so far
/// clusters do not fragment.
struct DcvcParams {
  double azimuth_res_deg = 2.0;
  double polar_res_deg = 1.5;
  double radial_base_m = 0.5;
  double radial_growth = 1.1;  // >= 1; 1 means uniform radial bins
  int min_cluster_size = 20;

  void validate() const;  // throws ConfigError
};

/// Arithmetic mean and population (1/n) covariance, symmetrized.
/// Throws std::invalid_argument on empty input.
std::pair<Vec3, Mat3> cluster_stats(std::span<const Vec3> points);

/// Segments the points carrying `label` into disjoint clusters: points in
/// the same curved voxel or in 26-connected neighboring voxels share a
/// cluster. Clusters smaller than min_cluster_size are discarded. Output
/// is ordered by smallest contained point index.
std::vector<Cluster> dcvc_segment(const SemanticPointCloud& cloud,
                                  std::uint32_t label,
                                  const DcvcParams& params);

/// dcvc_segment over every instance class, concatenated in label order.
std::vector<Cluster> segment_instances(const SemanticPointCloud& cloud,
                                       const LabelConfig& labels,
                                       const DcvcParams& params);

}  // namespace semreg
