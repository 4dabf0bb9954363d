#include "semreg/correspondence.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "semreg/clustering.hpp"
#include "semreg/errors.hpp"
#include "semreg/kdtree.hpp"

namespace semreg {

void CorrespondenceParams::validate() const {
  if (patch_k < 3) throw ConfigError("correspondence.patch_k must be >= 3");
}

std::vector<Correspondence> build_semantic_correspondences(
    std::span<const Cluster> src_clusters,
    std::span<const Cluster> dst_clusters) {
  std::map<std::uint32_t, std::vector<const Cluster*>> src_by_label;
  std::map<std::uint32_t, std::vector<const Cluster*>> dst_by_label;
  for (const Cluster& c : src_clusters) src_by_label[c.label].push_back(&c);
  for (const Cluster& c : dst_clusters) dst_by_label[c.label].push_back(&c);

  std::vector<Correspondence> out;
  for (const auto& [label, src_list] : src_by_label) {
    auto it = dst_by_label.find(label);
    if (it == dst_by_label.end()) continue;
    for (const Cluster* s : src_list) {
      for (const Cluster* d : it->second) {
        Correspondence c;
        c.src_mean = s->centroid;
        c.dst_mean = d->centroid;
        c.src_cov = s->covariance;
        c.dst_cov = d->covariance;
        c.label = label;
        c.origin = CorrespondenceOrigin::semantic;
        out.push_back(c);
      }
    }
  }
  return out;
}

namespace {

struct LabelPatchIndex {
  std::vector<int> to_cloud;  // subset index -> cloud index
  KdTree3 tree;
};

// Lazily built per-label kd-trees over same-label points of one cloud.
class PatchLookup {
 public:
  explicit PatchLookup(const SemanticPointCloud& cloud) : cloud_(cloud) {}

  // Covariance of the patch_k nearest same-label neighbors of `anchor`
  // (anchor itself excluded). Returns false when the patch has < 3 points.
  bool patch_cov(int anchor, int patch_k, Mat3& cov) {
    const std::uint32_t label = cloud_.labels[anchor];
    LabelPatchIndex& idx = index_for(label);
    std::vector<int> nbrs;
    idx.tree.knn_search(cloud_.points[anchor], patch_k + 1, nbrs);
    std::vector<Vec3> patch;
    patch.reserve(nbrs.size());
    for (int j : nbrs) {
      const int cloud_idx = idx.to_cloud[j];
      if (cloud_idx == anchor) continue;
      patch.push_back(cloud_.points[cloud_idx]);
      if (static_cast<int>(patch.size()) == patch_k) break;
    }
    if (patch.size() < 3) return false;
    cov = cluster_stats(patch).second;
    return true;
  }

 private:
  LabelPatchIndex& index_for(std::uint32_t label) {
    auto it = indices_.find(label);
    if (it != indices_.end()) return it->second;
    LabelPatchIndex idx;
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < cloud_.size(); ++i) {
      if (cloud_.labels[i] != label) continue;
      idx.to_cloud.push_back(static_cast<int>(i));
      pts.push_back(cloud_.points[i]);
    }
    idx.tree = KdTree3(pts);
    return indices_.emplace(label, std::move(idx)).first->second;
  }

  const SemanticPointCloud& cloud_;
  std::unordered_map<std::uint32_t, LabelPatchIndex> indices_;
};

}  // namespace

std::vector<Correspondence> build_feature_correspondences(
    const SemanticPointCloud& src_cloud, const SemanticPointCloud& dst_cloud,
    std::span<const DescriptorMatch> matches, int patch_k) {
  PatchLookup src_lookup(src_cloud);
  PatchLookup dst_lookup(dst_cloud);

  std::vector<Correspondence> out;
  out.reserve(matches.size());
  for (const DescriptorMatch& m : matches) {
    Correspondence c;
    c.src_mean = src_cloud.points[m.src_index];
    c.dst_mean = dst_cloud.points[m.dst_index];
    c.label = src_cloud.labels[m.src_index];
    c.origin = CorrespondenceOrigin::feature;
    c.match_distance = m.distance;
    if (!src_lookup.patch_cov(m.src_index, patch_k, c.src_cov)) continue;
    if (!dst_lookup.patch_cov(m.dst_index, patch_k, c.dst_cov)) continue;
    out.push_back(c);
  }
  return out;
}

std::vector<Correspondence> merge_correspondences(
    std::vector<Correspondence> semantic, std::vector<Correspondence> feature,
    const CorrespondenceParams& params) {
  if (semantic.empty() && feature.empty())
    throw NoCorrespondencesError("no correspondences: both semantic and feature sets are empty");

  if (params.semantic_cap > 0 && semantic.size() > params.semantic_cap)
    semantic.resize(params.semantic_cap);
  if (params.feature_cap > 0 && feature.size() > params.feature_cap) {
    std::stable_sort(feature.begin(), feature.end(),
                     [](const Correspondence& a, const Correspondence& b) {
                       return a.match_distance < b.match_distance;
                     });
    feature.resize(params.feature_cap);
  }
  std::vector<Correspondence> out = std::move(semantic);
  out.insert(out.end(), std::make_move_iterator(feature.begin()),
             std::make_move_iterator(feature.end()));
  return out;
}

}  // namespace semreg
