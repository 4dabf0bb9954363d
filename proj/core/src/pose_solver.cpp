#include "semreg/pose_solver.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "semreg/errors.hpp"

namespace semreg {

void GncConfig::validate() const {
  if (noise_bound <= 0) throw ConfigError("solver.noise_bound_m must be positive");
  if (mu_update_factor <= 1.0)
    throw ConfigError("solver.mu_update_factor must be > 1");
  if (max_iterations < 1) throw ConfigError("solver.max_iterations must be >= 1");
  if (convergence_tol <= 0) throw ConfigError("solver.convergence_tol must be positive");
}

Pose weighted_horn(std::span<const Vec3> src, std::span<const Vec3> dst,
                   std::span<const double> weights) {
  if (src.size() != dst.size() || src.size() != weights.size())
    throw std::invalid_argument("weighted_horn: size mismatch");

  double total = 0.0;
  int positive = 0;
  for (double w : weights) {
    if (w < 0) throw std::invalid_argument("weighted_horn: negative weight");
    total += w;
    if (w > 0) ++positive;
  }
  if (positive < 3 || total <= 0)
    throw DegenerateSolutionError(
        "weighted_horn: fewer than 3 pairs with positive weight");

  Vec3 src_centroid = Vec3::Zero();
  Vec3 dst_centroid = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    src_centroid += weights[i] * src[i];
    dst_centroid += weights[i] * dst[i];
  }
  src_centroid /= total;
  dst_centroid /= total;

  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i)
    h += weights[i] * (src[i] - src_centroid) * (dst[i] - dst_centroid).transpose();

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sigma = svd.singularValues();
  if (sigma(0) <= 0 || sigma(1) <= 1e-12 * sigma(0))
    throw DegenerateSolutionError(
        "weighted_horn: rank-deficient (collinear) configuration");

  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() > 0
                ? 1.0
                : -1.0;
  Pose pose;
  pose.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  pose.translation = dst_centroid - pose.rotation * src_centroid;
  return pose;
}

double residual(const Pose& pose, const Correspondence& corr) {
  return (corr.dst_mean - pose.rotation * corr.src_mean - pose.translation)
      .norm();
}

GncResult gnc_tls_solve(std::span<const Correspondence> corrs,
                        const GncConfig& cfg) {
  cfg.validate();
  const std::size_t n = corrs.size();
  if (n < 3)
    throw DegenerateSolutionError("gnc_tls_solve: need at least 3 correspondences");

  std::vector<Vec3> src(n), dst(n);
  for (std::size_t i = 0; i < n; ++i) {
    src[i] = corrs[i].src_mean;
    dst[i] = corrs[i].dst_mean;
  }
  const double c = cfg.noise_bound;
  const double c_sq = c * c;

  GncResult out;
  out.weights.assign(n, 1.0);

  auto residuals = [&](const Pose& pose, std::vector<double>& r) {
    for (std::size_t i = 0; i < n; ++i)
      r[i] = (dst[i] - pose.rotation * src[i] - pose.translation).norm();
  };
  auto truncated_objective = [&](const std::vector<double>& r) {
    double s = 0.0;
    for (double ri : r) s += std::min(ri, c);
    return s;
  };

  Pose pose = weighted_horn(src, dst, out.weights);
  std::vector<double> r(n);
  residuals(pose, r);
  out.objective_trace.push_back(truncated_objective(r));

  double r_max = 0.0;
  for (double ri : r) r_max = std::max(r_max, ri);
  // mu_0 per the standard GNC recipe; when every residual is already
  // inside the bound the surrogate starts at the TLS limit.
  const double denom = 2.0 * r_max * r_max - c_sq;
  double mu = denom > 1e-12 ? c_sq / denom : 1e10;

  std::vector<double> w_new(n);
  std::vector<double> r_cand(n);
  double current_obj = out.objective_trace.back();
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    int positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r_sq = r[i] * r[i];
      double w = r_sq < 1e-24 ? 1.0
                              : std::clamp(c_sq * (mu + 1.0) / r_sq - mu, 0.0, 1.0);
      w_new[i] = w;
      if (w > 0) ++positive;
    }
    if (positive < 3)
      throw DegenerateSolutionError(
          "gnc_tls_solve: fewer than 3 surviving weight-positive pairs");

    // Monotone descent: a candidate that raises the truncated objective is
    // not accepted; annealing continues from the incumbent.
    const Pose candidate = weighted_horn(src, dst, w_new);
    residuals(candidate, r_cand);
    const double cand_obj = truncated_objective(r_cand);
    if (cand_obj <= current_obj) {
      pose = candidate;
      r = r_cand;
      current_obj = cand_obj;
    }
    out.objective_trace.push_back(current_obj);
    out.iterations = iter;

    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      delta = std::max(delta, std::abs(w_new[i] - out.weights[i]));
    out.weights = w_new;
    if (delta < cfg.convergence_tol) break;
    mu *= cfg.mu_update_factor;
  }

  int surviving = 0;
  for (double w : out.weights)
    if (w > 0.5) ++surviving;
  if (surviving < 3)
    throw DegenerateSolutionError(
        "gnc_tls_solve: fewer than 3 surviving weight-positive pairs at convergence");

  out.pose = pose;
  return out;
}

}  // namespace semreg
