#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semreg/config.hpp"
#include "semreg/types.hpp"

namespace semreg {

struct RpeError {
  double e_trans = 0.0;    // meters
  double e_rot_deg = 0.0;  // degrees
};

/// Relative pose error of the estimate against the ground truth:
/// dT = estimate * ground_truth^-1; e_trans = ||dt||, e_rot the geodesic
/// angle of dR.
RpeError rpe(const Pose& estimate, const Pose& ground_truth);

/// Strict thresholds: e_trans < 2 m and e_rot < 5 degrees.
bool is_success(double e_trans, double e_rot_deg);

enum class Hardness { easy, medium, hard, unbucketed };

const char* hardness_name(Hardness h);

struct HardnessBucket {
  std::string name;
  double r1 = 0.0;
  double r2 = 0.0;
  Hardness hardness = Hardness::unbucketed;
};

/// The paper-style displacement buckets: easy [3,5], medium [8,10],
/// hard [10,15] meters. A gap on a shared edge goes to the lower bucket.
std::vector<HardnessBucket> default_buckets();

struct LoopPair {
  int index_k = 0;  // later scan (dst frame)
  int index_i = 0;  // earlier scan (src frame)
  Pose gt_relative_pose;  // T_k^-1 * T_i
  double translation_gap = 0.0;
  Hardness hardness = Hardness::unbucketed;
};

/// All pairs (k, i), i < k, with r1 <= ||t_k - t_i|| <= r2 and
/// |i - k| >= m, ordered by (k, i). Hardness is assigned from `buckets`
/// (first containing bucket wins).
std::vector<LoopPair> generate_loop_pairs(
    std::span<const Pose> poses, double r1, double r2, int m,
    std::span<const HardnessBucket> buckets = {});

/// Rotates all points about the sensor z-axis; labels untouched.
SemanticPointCloud perturb_yaw(const SemanticPointCloud& cloud,
                               double angle_deg);

/// Sets exactly floor(rate * n) labels, sampled without replacement, to
/// `unclassified_id`. Deterministic per seed; points untouched.
SemanticPointCloud deteriorate_labels(const SemanticPointCloud& cloud,
                                      double rate, std::uint64_t seed,
                                      std::uint32_t unclassified_id);

/// Resolves scan indices for the loop suite. Returning nullopt marks the
/// pair as skipped (reported separately, never silently dropped).
class ScanSource {
 public:
  virtual ~ScanSource() = default;
  virtual std::optional<SemanticPointCloud> load(int index) = 0;
};

struct PairRecord {
  int index_k = 0;
  int index_i = 0;
  Hardness hardness = Hardness::unbucketed;
  double translation_gap = 0.0;
  bool skipped = false;
  bool success = false;
  double e_trans = 0.0;
  double e_rot_deg = 0.0;
  double time_s = 0.0;
  int raw_correspondences = 0;
  std::size_t graph_edges = 0;
  int inliers = 0;
  bool approximate_clique = false;
  std::string error;
};

struct BucketSummary {
  std::string bucket;
  int pairs = 0;      // denominator, skipped included
  int successes = 0;
  int skipped = 0;
  double rate_pct = 0.0;
  double mean_e_trans = 0.0;   // over successes
  double mean_e_rot = 0.0;     // over successes
  double mean_time_s = 0.0;    // over attempted pairs
  double aic = 0.0;            // mean graph edge count over successes
};

struct SuiteResult {
  std::vector<PairRecord> records;  // sorted by (k, i)
  std::vector<BucketSummary> table;
  int total_skipped = 0;
};

/// Registers every pair (src = scan i, dst = scan k) and aggregates
/// per-bucket statistics. Pairs fan out over cfg.eval.workers.
SuiteResult run_suite(std::span<const LoopPair> pairs, ScanSource& source,
                      const RunConfig& cfg);

/// Comma-separated table with header:
/// bucket,pairs,successes,rate,mean_e_trans,mean_e_rot,mean_time,aic
std::string format_table(const SuiteResult& result);

void write_pair_records_csv(const std::string& path,
                            std::span<const PairRecord> records);

/// Synthetic scan source: sensor-frame views of one world scene along a
/// trajectory, with seeded per-scan noise and a range gate. Scans are
/// cached; load is serialized by the suite.
class SyntheticScanSource : public ScanSource {
 public:
  SyntheticScanSource(SemanticPointCloud world, std::vector<Pose> poses,
                      double noise_sigma, double range_gate,
                      std::uint64_t seed);
  std::optional<SemanticPointCloud> load(int index) override;
  const std::vector<Pose>& poses() const { return poses_; }

 private:
  SemanticPointCloud world_;
  std::vector<Pose> poses_;
  double noise_sigma_;
  double range_gate_;
  std::uint64_t seed_;
  std::map<int, SemanticPointCloud> cache_;
};

}  // namespace semreg
