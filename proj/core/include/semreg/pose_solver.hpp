#pragma once

#include <span>
#include <vector>

#include "semreg/types.hpp"

namespace semreg {

struct GncConfig {
  double noise_bound = 0.2;       // truncation parameter, meters
  double mu_update_factor = 1.4;  // > 1
  int max_iterations = 100;
  double convergence_tol = 1e-6;  // weight fixpoint threshold

  void validate() const;
};

/// Closed-form weighted least-squares alignment: minimizes
/// sum_i w_i ||dst_i - R src_i - t||^2 over R in SO(3), t. Throws
/// DegenerateSolutionError when fewer than 3 pairs carry positive weight
/// or the weighted source points are (near-)collinear.
Pose weighted_horn(std::span<const Vec3> src, std::span<const Vec3> dst,
                   std::span<const double> weights);

struct GncResult {
  Pose pose;
  std::vector<double> weights;
  /// Truncated objective sum_i min(r_i, noise_bound) after each outer
  /// iteration (index 0 is the unweighted initialization).
  std::vector<double> objective_trace;
  int iterations = 0;
};

/// Graduated non-convexity over the truncated-least-squares objective.
/// Alternates weighted_horn with the weight update
///   w_i = clamp(noise_bound^2 (mu + 1) / r_i^2 - mu, 0, 1),
/// raising mu by mu_update_factor per round; mu starts at
/// c^2 / (2 r_max^2 - c^2) clamped positive. Terminates on a weight
/// fixpoint or max_iterations. Throws DegenerateSolutionError when fewer
/// than 3 pairs survive with positive weight.
GncResult gnc_tls_solve(std::span<const Correspondence> corrs,
                        const GncConfig& cfg);

/// ||dst_mean - R src_mean - t||.
double residual(const Pose& pose, const Correspondence& corr);

}  // namespace semreg
