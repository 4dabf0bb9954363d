#pragma once

#include <span>
#include <vector>

#include "semreg/descriptors.hpp"
#include "semreg/types.hpp"

namespace semreg {

struct CorrespondenceParams {
  int patch_k = 20;               // same-label neighbors for feature covariances
  std::size_t feature_cap = 800;  // 0 = unlimited; truncation by match quality
  std::size_t semantic_cap = 0;   // 0 = unlimited (semantic kept whole)

  void validate() const;
};

/// All-to-all pairs per label between the two cluster sets. Output order:
/// (label, src position, dst position).
std::vector<Correspondence> build_semantic_correspondences(
    std::span<const Cluster> src_clusters, std::span<const Cluster> dst_clusters);

/// One correspondence per descriptor match: mean = anchor coordinate,
/// covariance = stats over the patch_k nearest same-label neighbors of the
/// anchor (anchor excluded). Matches whose patch has fewer than 3 points
/// on either side are dropped.
std::vector<Correspondence> build_feature_correspondences(
    const SemanticPointCloud& src_cloud, const SemanticPointCloud& dst_cloud,
    std::span<const DescriptorMatch> matches, int patch_k);

/// I_raw = semantic + feature, each origin truncated to its cap (feature
/// by ascending descriptor distance). Throws NoCorrespondencesError when
/// both inputs are empty.
std::vector<Correspondence> merge_correspondences(
    std::vector<Correspondence> semantic, std::vector<Correspondence> feature,
    const CorrespondenceParams& params);

}  // namespace semreg
