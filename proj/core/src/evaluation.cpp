#include "semreg/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "semreg/errors.hpp"
#include "semreg/pipeline.hpp"
#include "semreg/rng.hpp"
#include "semreg/synth.hpp"

namespace semreg {

RpeError rpe(const Pose& estimate, const Pose& ground_truth) {
  const Pose delta = estimate * ground_truth.inverse();
  RpeError out;
  out.e_trans = delta.translation.norm();
  out.e_rot_deg = rotation_angle_deg(delta.rotation);
  return out;
}

bool is_success(double e_trans, double e_rot_deg) {
  return e_trans < 2.0 && e_rot_deg < 5.0;
}

const char* hardness_name(Hardness h) {
  switch (h) {
    case Hardness::easy: return "easy";
    case Hardness::medium: return "medium";
    case Hardness::hard: return "hard";
    default: return "unbucketed";
  }
}

std::vector<HardnessBucket> default_buckets() {
  return {{"easy", 3.0, 5.0, Hardness::easy},
          {"medium", 8.0, 10.0, Hardness::medium},
          {"hard", 10.0, 15.0, Hardness::hard}};
}

std::vector<LoopPair> generate_loop_pairs(
    std::span<const Pose> poses, double r1, double r2, int m,
    std::span<const HardnessBucket> buckets) {
  if (r1 >= r2)
    throw std::invalid_argument("generate_loop_pairs: need r1 < r2");
  if (m < 1) throw std::invalid_argument("generate_loop_pairs: need m >= 1");
  const std::vector<HardnessBucket> defaults = default_buckets();
  if (buckets.empty()) buckets = defaults;

  std::vector<LoopPair> out;
  const int n = static_cast<int>(poses.size());
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < k; ++i) {
      if (k - i < m) continue;
      const double gap = (poses[k].translation - poses[i].translation).norm();
      if (gap < r1 || gap > r2) continue;
      LoopPair pair;
      pair.index_k = k;
      pair.index_i = i;
      pair.gt_relative_pose = poses[k].inverse() * poses[i];
      pair.translation_gap = gap;
      for (const HardnessBucket& b : buckets) {
        if (gap >= b.r1 && gap <= b.r2) {  // first containing bucket wins
          pair.hardness = b.hardness;
          break;
        }
      }
      out.push_back(pair);
    }
  }
  return out;
}

SemanticPointCloud perturb_yaw(const SemanticPointCloud& cloud,
                               double angle_deg) {
  const Mat3 r = yaw_rotation(angle_deg * M_PI / 180.0);
  SemanticPointCloud out = cloud;
  for (Vec3& p : out.points) p = r * p;
  return out;
}

SemanticPointCloud deteriorate_labels(const SemanticPointCloud& cloud,
                                      double rate, std::uint64_t seed,
                                      std::uint32_t unclassified_id) {
  if (rate < 0 || rate > 1)
    throw std::invalid_argument("deteriorate_labels: rate must be in [0, 1]");
  const std::size_t count =
      static_cast<std::size_t>(rate * static_cast<double>(cloud.size()));
  XorShift64Star rng(seed);
  const auto chosen = rng.sample_without_replacement(cloud.size(), count);
  SemanticPointCloud out = cloud;
  for (std::size_t idx : chosen) out.labels[idx] = unclassified_id;
  return out;
}

SuiteResult run_suite(std::span<const LoopPair> pairs, ScanSource& source,
                      const RunConfig& cfg) {
  SuiteResult result;
  result.records.resize(pairs.size());

  std::atomic<std::size_t> next{0};
  std::mutex source_mu;

  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= pairs.size()) break;
      const LoopPair& pair = pairs[idx];
      PairRecord rec;
      rec.index_k = pair.index_k;
      rec.index_i = pair.index_i;
      rec.hardness = pair.hardness;
      rec.translation_gap = pair.translation_gap;

      std::optional<SemanticPointCloud> src, dst;
      {
        std::lock_guard<std::mutex> lock(source_mu);
        src = source.load(pair.index_i);
        dst = source.load(pair.index_k);
      }
      if (!src || !dst) {
        rec.skipped = true;
        rec.error = "unresolvable scan";
        result.records[idx] = std::move(rec);
        continue;
      }
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const RegistrationResult reg = register_clouds(*src, *dst, cfg);
        const RpeError err = rpe(reg.pose, pair.gt_relative_pose);
        rec.e_trans = err.e_trans;
        rec.e_rot_deg = err.e_rot_deg;
        rec.success = is_success(err.e_trans, err.e_rot_deg);
        rec.raw_correspondences = reg.raw_correspondence_count;
        rec.graph_edges = reg.graph_edge_count;
        rec.inliers = reg.inlier_count;
        rec.approximate_clique = reg.approximate_clique;
      } catch (const std::exception& e) {
        rec.success = false;
        rec.error = e.what();
      }
      rec.time_s = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
      result.records[idx] = std::move(rec);
    }
  };

  const int workers = std::max(1, cfg.eval.workers);
  if (workers == 1 || pairs.size() < 2) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::sort(result.records.begin(), result.records.end(),
            [](const PairRecord& a, const PairRecord& b) {
              return a.index_k != b.index_k ? a.index_k < b.index_k
                                            : a.index_i < b.index_i;
            });

  // Per-bucket aggregation; the denominator keeps skipped pairs.
  for (const HardnessBucket& bucket : default_buckets()) {
    BucketSummary row;
    row.bucket = bucket.name;
    double sum_et = 0, sum_er = 0, sum_time = 0, sum_edges = 0;
    int attempted = 0;
    for (const PairRecord& rec : result.records) {
      if (rec.hardness != bucket.hardness) continue;
      ++row.pairs;
      if (rec.skipped) {
        ++row.skipped;
        continue;
      }
      ++attempted;
      sum_time += rec.time_s;
      if (rec.success) {
        ++row.successes;
        sum_et += rec.e_trans;
        sum_er += rec.e_rot_deg;
        sum_edges += static_cast<double>(rec.graph_edges);
      }
    }
    if (row.pairs == 0) continue;
    row.rate_pct = 100.0 * row.successes / row.pairs;
    if (row.successes > 0) {
      row.mean_e_trans = sum_et / row.successes;
      row.mean_e_rot = sum_er / row.successes;
      row.aic = sum_edges / row.successes;
    }
    if (attempted > 0) row.mean_time_s = sum_time / attempted;
    result.table.push_back(row);
  }
  for (const PairRecord& rec : result.records)
    if (rec.skipped) ++result.total_skipped;
  return result;
}

std::string format_table(const SuiteResult& result) {
  std::ostringstream ss;
  ss << "bucket,pairs,successes,rate,mean_e_trans,mean_e_rot,mean_time,aic\n";
  char line[256];
  for (const BucketSummary& row : result.table) {
    std::snprintf(line, sizeof(line), "%s,%d,%d,%.1f,%.4f,%.4f,%.4f,%.1f\n",
                  row.bucket.c_str(), row.pairs, row.successes, row.rate_pct,
                  row.mean_e_trans, row.mean_e_rot, row.mean_time_s, row.aic);
    ss << line;
  }
  return ss.str();
}

void write_pair_records_csv(const std::string& path,
                            std::span<const PairRecord> records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << "k,i,bucket,gap_m,skipped,success,e_trans_m,e_rot_deg,time_s,"
         "raw_correspondences,graph_edges,inliers,approximate_clique,error\n";
  out.precision(9);
  for (const PairRecord& r : records) {
    out << r.index_k << ',' << r.index_i << ',' << hardness_name(r.hardness)
        << ',' << r.translation_gap << ',' << (r.skipped ? 1 : 0) << ','
        << (r.success ? 1 : 0) << ',' << r.e_trans << ',' << r.e_rot_deg << ','
        << r.time_s << ',' << r.raw_correspondences << ',' << r.graph_edges
        << ',' << r.inliers << ',' << (r.approximate_clique ? 1 : 0) << ','
        << r.error << '\n';
  }
  if (!out) throw IoError("failed writing file: " + path);
}

SyntheticScanSource::SyntheticScanSource(SemanticPointCloud world,
                                         std::vector<Pose> poses,
                                         double noise_sigma, double range_gate,
                                         std::uint64_t seed)
    : world_(std::move(world)), poses_(std::move(poses)),
      noise_sigma_(noise_sigma), range_gate_(range_gate), seed_(seed) {}

std::optional<SemanticPointCloud> SyntheticScanSource::load(int index) {
  if (index < 0 || index >= static_cast<int>(poses_.size()))
    return std::nullopt;
  auto it = cache_.find(index);
  if (it != cache_.end()) return it->second;
  try {
    SemanticPointCloud scan =
        derive_pair(world_, poses_[index].inverse(), noise_sigma_,
                    RangeGateCrop{range_gate_},
                    seed_ ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    return cache_.emplace(index, std::move(scan)).first->second;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace semreg
