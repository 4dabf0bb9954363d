#include "semreg/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "semreg/clustering.hpp"
#include "semreg/correspondence.hpp"
#include "semreg/descriptors.hpp"
#include "semreg/errors.hpp"
#include "semreg/kdtree.hpp"
#include "semreg/max_clique.hpp"
#include "semreg/pose_solver.hpp"
#include "semreg/synth.hpp"

namespace semreg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SemanticPointCloud feature_subcloud(const SemanticPointCloud& cloud,
                                    const LabelConfig& labels) {
  SemanticPointCloud out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (labels.feature_classes.count(cloud.labels[i])) {
      out.points.push_back(cloud.points[i]);
      out.labels.push_back(cloud.labels[i]);
    }
  }
  return out;
}

}  // namespace

RegistrationResult register_clouds(const SemanticPointCloud& src,
                                   const SemanticPointCloud& dst,
                                   const RunConfig& cfg) {
  const auto t_start = Clock::now();
  RegistrationResult result;
  result.mode = cfg.mode;

  // Semantic track: per-label DCVC clusters on both clouds.
  auto t0 = Clock::now();
  const std::vector<Cluster> src_clusters =
      segment_instances(src, cfg.labels, cfg.clustering);
  const std::vector<Cluster> dst_clusters =
      segment_instances(dst, cfg.labels, cfg.clustering);
  result.timings.clustering_s = seconds_since(t0);

  // Feature track: FPFH over the downsampled feature-class points.
  t0 = Clock::now();
  std::vector<Correspondence> feature_corrs;
  const SemanticPointCloud src_feat_full = feature_subcloud(src, cfg.labels);
  const SemanticPointCloud dst_feat_full = feature_subcloud(dst, cfg.labels);
  SemanticPointCloud src_feat, dst_feat;
  std::vector<DescriptorMatch> matches;
  if (!src_feat_full.empty() && !dst_feat_full.empty()) {
    src_feat = voxel_downsample(src_feat_full, cfg.descriptors.downsample_res_m);
    dst_feat = voxel_downsample(dst_feat_full, cfg.descriptors.downsample_res_m);
    const int workers = cfg.pipeline.workers;
    const auto src_normals =
        estimate_normals(src_feat, cfg.descriptors.normal_radius_m, workers);
    const auto dst_normals =
        estimate_normals(dst_feat, cfg.descriptors.normal_radius_m, workers);
    const auto src_desc = compute_fpfh(src_feat, src_normals,
                                       cfg.descriptors.fpfh_radius_m, workers);
    const auto dst_desc = compute_fpfh(dst_feat, dst_normals,
                                       cfg.descriptors.fpfh_radius_m, workers);
    matches = match_descriptors(src_desc, dst_desc, src_feat.labels,
                                dst_feat.labels, workers);
  }
  result.timings.descriptors_s = seconds_since(t0);

  // Correspondence sets I_SC, I_F and their merge I_raw.
  t0 = Clock::now();
  std::vector<Correspondence> semantic_corrs =
      build_semantic_correspondences(src_clusters, dst_clusters);
  if (!matches.empty())
    feature_corrs = build_feature_correspondences(src_feat, dst_feat, matches,
                                                  cfg.correspondence.patch_k);
  result.semantic_count = static_cast<int>(semantic_corrs.size());
  result.feature_count = static_cast<int>(feature_corrs.size());

  std::vector<Correspondence> corrs;
  try {
    corrs = merge_correspondences(std::move(semantic_corrs),
                                  std::move(feature_corrs), cfg.correspondence);
  } catch (const NoCorrespondencesError& e) {
    throw NoCorrespondencesError(std::string("[correspondence] ") + e.what());
  }
  if (cfg.pipeline.inject_outlier_fraction > 0)
    corrs = inject_outlier_matches(std::move(corrs),
                                   cfg.pipeline.inject_outlier_fraction,
                                   cfg.pipeline.inject_outlier_seed);
  result.raw_correspondence_count = static_cast<int>(corrs.size());
  result.timings.correspondences_s = seconds_since(t0);

  if (corrs.size() < 3)
    throw CliqueTooSmallError(
        "[consistency] fewer than 3 correspondences; pose is underdetermined");

  // Consistency graph and maximum inlier clique.
  t0 = Clock::now();
  const ConsistencyGraph graph =
      build_graph(corrs, cfg.mode, cfg.consistency, cfg.consistency_workers);
  result.graph_edge_count = graph.edge_count();
  result.timings.graph_s = seconds_since(t0);

  t0 = Clock::now();
  const Clique clique =
      max_clique(graph, cfg.clique.time_budget_s, cfg.clique.workers);
  result.approximate_clique = clique.approximate;
  result.inlier_count = clique.size();
  result.timings.clique_s = seconds_since(t0);
  if (clique.size() < 3)
    throw CliqueTooSmallError(
        "[max_clique] inlier clique has " + std::to_string(clique.size()) +
        " vertices; need at least 3");

  // GNC-TLS on the clique members.
  t0 = Clock::now();
  std::vector<Correspondence> inliers;
  inliers.reserve(clique.vertices.size());
  for (int v : clique.vertices) inliers.push_back(corrs[v]);
  try {
    result.pose = gnc_tls_solve(inliers, cfg.solver).pose;
  } catch (const DegenerateSolutionError& e) {
    throw DegenerateSolutionError(std::string("[pose_solver] ") + e.what());
  }
  result.timings.solver_s = seconds_since(t0);

  if (cfg.pipeline.refine_icp) {
    t0 = Clock::now();
    result.pose = refine_icp(src, dst, result.pose, cfg.icp).pose;
    result.timings.refine_s = seconds_since(t0);
  }
  result.timings.total_s = seconds_since(t_start);
  return result;
}

IcpResult refine_icp(const SemanticPointCloud& src,
                     const SemanticPointCloud& dst, const Pose& initial,
                     const IcpParams& params) {
  const SemanticPointCloud src_ds = voxel_downsample(src, params.voxel_m);
  const SemanticPointCloud dst_ds = voxel_downsample(dst, params.voxel_m);
  KdTree3 dst_tree(dst_ds.points);

  auto mean_gated_residual = [&](const Pose& pose, int* pair_count) {
    double sum = 0;
    int n = 0;
    const double gate_sq = params.gate_m * params.gate_m;
    for (const Vec3& p : src_ds.points) {
      double d2 = 0;
      const int j = dst_tree.nearest(pose.apply(p), &d2);
      if (j >= 0 && d2 <= gate_sq) {
        sum += std::sqrt(d2);
        ++n;
      }
    }
    if (pair_count) *pair_count = n;
    return n > 0 ? sum / n : std::numeric_limits<double>::infinity();
  };

  IcpResult out;
  out.pose = initial;
  int pairs0 = 0;
  double best = mean_gated_residual(initial, &pairs0);
  out.mean_residual = best;
  if (pairs0 == 0) {
    out.no_overlap = true;
    return out;
  }

  Pose pose = initial;
  const double gate_sq = params.gate_m * params.gate_m;
  std::vector<Vec3> a, b;
  std::vector<double> w;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    a.clear();
    b.clear();
    for (const Vec3& p : src_ds.points) {
      double d2 = 0;
      const int j = dst_tree.nearest(pose.apply(p), &d2);
      if (j >= 0 && d2 <= gate_sq) {
        a.push_back(p);
        b.push_back(dst_ds.points[j]);
      }
    }
    if (a.size() < 3) break;
    w.assign(a.size(), 1.0);
    Pose next;
    try {
      next = weighted_horn(a, b, w);
    } catch (const DegenerateSolutionError&) {
      break;
    }
    const double delta = (next.rotation - pose.rotation).norm() +
                         (next.translation - pose.translation).norm();
    pose = next;
    out.iterations = iter + 1;
    const double res = mean_gated_residual(pose, nullptr);
    if (res < best) {
      best = res;
      out.pose = pose;
      out.mean_residual = res;
    }
    if (delta < params.tol) break;
  }
  return out;
}

std::string serialize_record(const RegistrationResult& result) {
  std::ostringstream ss;
  ss.precision(12);
  ss << "mode " << (result.mode == TrimMode::l_trim ? "l_trim" : "g_trim")
     << '\n';
  ss << "pose";
  const Mat3& r = result.pose.rotation;
  const Vec3& t = result.pose.translation;
  const double row_major[12] = {r(0, 0), r(0, 1), r(0, 2), t.x(),
                                r(1, 0), r(1, 1), r(1, 2), t.y(),
                                r(2, 0), r(2, 1), r(2, 2), t.z()};
  for (double v : row_major) ss << ' ' << v;
  ss << '\n';
  ss << "inliers " << result.inlier_count << '\n';
  ss << "raw_correspondences " << result.raw_correspondence_count << '\n';
  ss << "semantic_correspondences " << result.semantic_count << '\n';
  ss << "feature_correspondences " << result.feature_count << '\n';
  ss << "graph_edges " << result.graph_edge_count << '\n';
  ss << "approximate_clique " << (result.approximate_clique ? 1 : 0) << '\n';
  return ss.str();
}

}  // namespace semreg
