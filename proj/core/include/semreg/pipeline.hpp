#pragma once

#include <string>

#include "semreg/config.hpp"
#include "semreg/types.hpp"

namespace semreg {

struct StageTimings {
  double clustering_s = 0;
  double descriptors_s = 0;
  double correspondences_s = 0;
  double graph_s = 0;
  double clique_s = 0;
  double solver_s = 0;
  double refine_s = 0;
  double total_s = 0;
};

struct RegistrationResult {
  Pose pose;  // maps src coordinates into the dst frame
  int inlier_count = 0;
  int raw_correspondence_count = 0;
  int semantic_count = 0;
  int feature_count = 0;
  std::size_t graph_edge_count = 0;
  StageTimings timings;
  TrimMode mode = TrimMode::g_trim;
  bool approximate_clique = false;
};

/// Full registration flow: per-label clustering, feature descriptors and
/// matching, correspondence merge, consistency graph, maximum clique,
/// GNC-TLS, optional ICP polish. Stage failures are rethrown with a stage
/// tag: NoCorrespondencesError, CliqueTooSmallError,
/// DegenerateSolutionError.
RegistrationResult register_clouds(const SemanticPointCloud& src,
                                   const SemanticPointCloud& dst,
                                   const RunConfig& cfg);

struct IcpResult {
  Pose pose;
  bool no_overlap = false;  // no gated neighbors; initial returned as-is
  int iterations = 0;
  double mean_residual = 0.0;
};

/// Point-to-point ICP from `initial`; never returns a pose whose mean
/// gated closest-point residual exceeds the initial one.
IcpResult refine_icp(const SemanticPointCloud& src,
                     const SemanticPointCloud& dst, const Pose& initial,
                     const IcpParams& params);

/// Line-oriented result record, documented field order:
/// mode, pose (12 reals, row-major 3x4), inliers, raw_correspondences,
/// semantic_correspondences, feature_correspondences, graph_edges,
/// approximate_clique. Timings are diagnostics and deliberately excluded
/// (records stay byte-identical across runs).
std::string serialize_record(const RegistrationResult& result);

}  // namespace semreg
