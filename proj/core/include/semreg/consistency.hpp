#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "semreg/types.hpp"

namespace semreg {

enum class TrimMode { l_trim, g_trim };

/// Pairwise consistency thresholds. `noise_bound` is the per-endpoint
/// measurement error bound (the l-TRIM check allows 2x of it per pair);
/// `g_trim_bound` bounds the Wasserstein distance between difference
/// Gaussians and defaults to sqrt(noise_bound^2 + shape_slack).
struct TrimThresholds {
  double noise_bound = 0.2;     // meters
  double shape_slack = 0.1;     // meters^2, the G-TRIM covariance budget
  double g_trim_bound = 0.0;    // meters; 0 derives sqrt(eps^2 + slack)

  double effective_g_bound() const;
  void validate() const;
};

/// Symmetric PSD square root via eigendecomposition, eigenvalues clamped
/// at zero. Throws std::invalid_argument when the input is not symmetric
/// within tolerance.
Mat3 spd_sqrt(const Mat3& m);

/// Closed-form squared 2-Wasserstein distance between Gaussians:
/// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^{1/2} S_b S_a^{1/2})^{1/2}).
/// Inputs must be symmetric PSD within tolerance. The result may carry
/// numerical noise down to about -1e-12 and is not clamped.
double wasserstein_sq(const Vec3& mean_a, const Mat3& cov_a,
                      const Vec3& mean_b, const Mat3& cov_b);

/// Length-preserving check: | ||src_i - src_j|| - ||dst_i - dst_j|| | <= 2 eps.
bool l_trim_consistent(const Correspondence& ci, const Correspondence& cj,
                       double noise_bound);

/// Distribution-preserving check. The two difference Gaussians
/// a_ij = N(src_i - src_j, S_i + S_j) and b_ij (dst side) are expressed in
/// their own segment frames (mean rotated onto +x) and compared by
/// wasserstein_sq with the leftover roll about the segment axis resolved
/// by minimizing the covariance term. This keeps the predicate exactly
/// invariant under a rigid motion of either cloud while still separating
/// swapped (crossings) pairs through covariance orientation.
bool g_trim_consistent(const Correspondence& ci, const Correspondence& cj,
                       double g_trim_bound);

/// The squared distance the g-TRIM predicate thresholds (exposed for
/// analysis and tests).
double g_trim_distance_sq(const Correspondence& ci, const Correspondence& cj);

/// Undirected consistency graph over correspondences, bitset adjacency.
class ConsistencyGraph {
 public:
  ConsistencyGraph() = default;
  ConsistencyGraph(int n, TrimMode mode);

  int n_vertices() const { return n_; }
  TrimMode mode() const { return mode_; }
  std::size_t edge_count() const { return edge_count_; }

  void add_edge(int i, int j);
  bool adjacent(int i, int j) const;

  int words_per_row() const { return words_; }
  const std::uint64_t* row(int i) const { return bits_.data() + std::size_t(i) * words_; }

 private:
  int n_ = 0;
  int words_ = 0;
  TrimMode mode_ = TrimMode::g_trim;
  std::size_t edge_count_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Evaluates the mode's predicate on all O(N^2) pairs. Throws
/// std::invalid_argument for fewer than 2 correspondences.
ConsistencyGraph build_graph(std::span<const Correspondence> corrs,
                             TrimMode mode, const TrimThresholds& thresholds,
                             int workers = 1);

}  // namespace semreg
