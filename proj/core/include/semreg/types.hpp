#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "semreg/geometry.hpp"

namespace semreg {

/// A LiDAR scan where every point carries an integer semantic label.
struct SemanticPointCloud {
  std::vector<Vec3> points;
  std::vector<std::uint32_t> labels;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Which label ids form instance classes (clustered all-to-all), which
/// form feature classes (matched by descriptor), and how raw file labels
/// map onto canonical ids. Raw ids absent from `remap` pass through when
/// they are already a known canonical class and collapse to
/// `unclassified_id` otherwise.
struct LabelConfig {
  std::set<std::uint32_t> instance_classes;
  std::set<std::uint32_t> feature_classes;
  std::uint32_t unclassified_id = 0;
  std::map<std::uint32_t, std::uint32_t> remap;

  std::uint32_t canonical(std::uint32_t raw) const;
  void validate() const;  // throws ConfigError on overlap/invalid ids
};

/// A semantic instance summarized as a Gaussian.
struct Cluster {
  Vec3 centroid = Vec3::Zero();
  Mat3 covariance = Mat3::Zero();
  std::uint32_t label = 0;
  std::vector<int> point_indices;  // indices into the source cloud

  int count() const { return static_cast<int>(point_indices.size()); }
};

enum class CorrespondenceOrigin { semantic, feature };

/// A matched pair of Gaussian-summarized measurements.
struct Correspondence {
  Vec3 src_mean = Vec3::Zero();
  Vec3 dst_mean = Vec3::Zero();
  Mat3 src_cov = Mat3::Zero();
  Mat3 dst_cov = Mat3::Zero();
  std::uint32_t label = 0;
  CorrespondenceOrigin origin = CorrespondenceOrigin::semantic;
  double match_distance = 0.0;  // descriptor distance for feature origin
};

}  // namespace semreg
