#include "semreg/consistency.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "semreg/errors.hpp"
#include "semreg/parallel.hpp"

namespace semreg {

namespace {

// Keeps planar covariance products numerically tame in the G-TRIM path.
constexpr double kCovRegularization = 1e-6;

void check_spsd(const Mat3& m, const char* what) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es;
  es.computeDirect(0.5 * (m + m.transpose()));
  if (es.eigenvalues().minCoeff() < -1e-8 * scale)
    throw std::invalid_argument(std::string(what) + ": matrix is indefinite");
}

// Eigenvalues of a symmetric 3x3 matrix, ascending, by the trigonometric
// closed form. Cheap enough for the inner roll search.
void sym_eigenvalues(const Mat3& a, double ev[3]) {
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  if (p1 < 1e-30) {
    ev[0] = a(0, 0);
    ev[1] = a(1, 1);
    ev[2] = a(2, 2);
    std::sort(ev, ev + 3);
    return;
  }
  const double q = a.trace() / 3.0;
  const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                    (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  Mat3 b = (a - q * Mat3::Identity()) / p;
  const double r = std::clamp(b.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  ev[2] = q + 2.0 * p * std::cos(phi);
  ev[0] = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  ev[1] = 3.0 * q - ev[0] - ev[2];
}

// Tr((A^{1/2} B A^{1/2})^{1/2}) given sqrt_a = A^{1/2}.
double trace_cross_sqrt(const Mat3& sqrt_a, const Mat3& b) {
  Mat3 m = sqrt_a * b * sqrt_a;
  m = 0.5 * (m + m.transpose()).eval();
  double ev[3];
  sym_eigenvalues(m, ev);
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += std::sqrt(std::max(ev[k], 0.0));
  return s;
}

inline Mat3 roll_x(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

// min over the roll about +x of Bures^2(A, Rx B Rx^T): coarse grid plus
// golden-section refinement around the best sample. Early exit once the
// value drops at or below `accept` (the caller only thresholds).
double min_roll_bures_sq(const Mat3& a, const Mat3& b, double accept) {
  const Mat3 sqrt_a = spd_sqrt(a);
  const double tr_sum = a.trace() + b.trace();
  auto f = [&](double theta) {
    const Mat3 r = roll_x(theta);
    return tr_sum - 2.0 * trace_cross_sqrt(sqrt_a, r * b * r.transpose());
  };

  constexpr int kGrid = 16;
  double best = std::numeric_limits<double>::infinity();
  double best_theta = 0.0;
  for (int k = 0; k < kGrid; ++k) {
    const double theta = 2.0 * M_PI * k / kGrid;
    const double v = f(theta);
    if (v <= accept) return v;
    if (v < best) {
      best = v;
      best_theta = theta;
    }
  }

  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = best_theta - 2.0 * M_PI / kGrid;
  double hi = best_theta + 2.0 * M_PI / kGrid;
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 28; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = f(x2);
    }
    const double v = std::min(f1, f2);
    if (v <= accept) return v;
  }
  return std::min(best, std::min(f1, f2));
}

}  // namespace

double TrimThresholds::effective_g_bound() const {
  if (g_trim_bound > 0.0) return g_trim_bound;
  return std::sqrt(noise_bound * noise_bound + shape_slack);
}

void TrimThresholds::validate() const {
  if (noise_bound <= 0.0)
    throw ConfigError("consistency.noise_bound_m must be positive");
  if (shape_slack < 0.0)
    throw ConfigError("consistency.shape_slack_m2 must be >= 0");
  if (g_trim_bound < 0.0)
    throw ConfigError("consistency.g_trim_bound_m must be >= 0");
  if (effective_g_bound() <= 0.0)
    throw ConfigError("derived g-TRIM bound must be positive");
}

Mat3 spd_sqrt(const Mat3& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw std::invalid_argument("spd_sqrt: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es;
  es.computeDirect(0.5 * (m + m.transpose()));
  Vec3 ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

double wasserstein_sq(const Vec3& mean_a, const Mat3& cov_a,
                      const Vec3& mean_b, const Mat3& cov_b) {
  check_spsd(cov_a, "wasserstein_sq");
  check_spsd(cov_b, "wasserstein_sq");
  const Mat3 sqrt_a = spd_sqrt(cov_a);
  const double tr =
      cov_a.trace() + cov_b.trace() - 2.0 * trace_cross_sqrt(sqrt_a, cov_b);
  return (mean_a - mean_b).squaredNorm() + tr;
}

bool l_trim_consistent(const Correspondence& ci, const Correspondence& cj,
                       double noise_bound) {
  const double src_len = (ci.src_mean - cj.src_mean).norm();
  const double dst_len = (ci.dst_mean - cj.dst_mean).norm();
  return std::abs(src_len - dst_len) <= 2.0 * noise_bound;
}

namespace {

struct GTrimSides {
  double src_len, dst_len;
  Mat3 src_cov_canon, dst_cov_canon;  // segment frames, mean along +x
};

GTrimSides g_trim_sides(const Correspondence& ci, const Correspondence& cj) {
  GTrimSides s;
  const Vec3 mu_a = ci.src_mean - cj.src_mean;
  const Vec3 mu_b = ci.dst_mean - cj.dst_mean;
  const Mat3 reg = kCovRegularization * Mat3::Identity();
  const Mat3 cov_a = ci.src_cov + cj.src_cov + reg;
  const Mat3 cov_b = ci.dst_cov + cj.dst_cov + reg;
  s.src_len = mu_a.norm();
  s.dst_len = mu_b.norm();
  const Mat3 ra = rotation_from_to(mu_a, Vec3::UnitX());
  const Mat3 rb = rotation_from_to(mu_b, Vec3::UnitX());
  s.src_cov_canon = ra * cov_a * ra.transpose();
  s.dst_cov_canon = rb * cov_b * rb.transpose();
  return s;
}

}  // namespace

double g_trim_distance_sq(const Correspondence& ci, const Correspondence& cj) {
  const GTrimSides s = g_trim_sides(ci, cj);
  const double pos = (s.src_len - s.dst_len) * (s.src_len - s.dst_len);
  return pos + min_roll_bures_sq(s.src_cov_canon, s.dst_cov_canon, -1.0);
}

bool g_trim_consistent(const Correspondence& ci, const Correspondence& cj,
                       double g_trim_bound) {
  const double bound_sq = g_trim_bound * g_trim_bound;
  const GTrimSides s = g_trim_sides(ci, cj);
  const double pos = (s.src_len - s.dst_len) * (s.src_len - s.dst_len);
  if (pos > bound_sq) return false;
  const double shape =
      min_roll_bures_sq(s.src_cov_canon, s.dst_cov_canon, bound_sq - pos);
  return pos + shape <= bound_sq;
}

ConsistencyGraph::ConsistencyGraph(int n, TrimMode mode)
    : n_(n), words_((n + 63) / 64), mode_(mode),
      bits_(static_cast<std::size_t>(n) * ((n + 63) / 64), 0) {}

void ConsistencyGraph::add_edge(int i, int j) {
  if (i == j) return;  // no self-loops
  if (adjacent(i, j)) return;
  bits_[std::size_t(i) * words_ + j / 64] |= std::uint64_t(1) << (j % 64);
  bits_[std::size_t(j) * words_ + i / 64] |= std::uint64_t(1) << (i % 64);
  ++edge_count_;
}

bool ConsistencyGraph::adjacent(int i, int j) const {
  return (bits_[std::size_t(i) * words_ + j / 64] >> (j % 64)) & 1u;
}

ConsistencyGraph build_graph(std::span<const Correspondence> corrs,
                             TrimMode mode, const TrimThresholds& thresholds,
                             int workers) {
  if (corrs.size() < 2)
    throw std::invalid_argument("build_graph: need at least 2 correspondences");
  thresholds.validate();

  const int n = static_cast<int>(corrs.size());
  ConsistencyGraph graph(n, mode);
  const double g_bound = thresholds.effective_g_bound();

  // Rows are partitioned across workers; each worker writes only its own
  // rows' partner lists, so no synchronization is needed.
  std::vector<std::vector<int>> row_partners(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), workers,
               [&](std::size_t b, std::size_t e) {
                 for (std::size_t i = b; i < e; ++i) {
                   for (std::size_t j = i + 1; j < corrs.size(); ++j) {
                     const bool ok =
                         mode == TrimMode::l_trim
                             ? l_trim_consistent(corrs[i], corrs[j],
                                                 thresholds.noise_bound)
                             : g_trim_consistent(corrs[i], corrs[j], g_bound);
                     if (ok) row_partners[i].push_back(static_cast<int>(j));
                   }
                 }
               });
  for (int i = 0; i < n; ++i)
    for (int j : row_partners[i]) graph.add_edge(i, j);
  return graph;
}

}  // namespace semreg
