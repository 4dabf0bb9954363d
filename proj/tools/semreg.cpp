// Command-line frontend: register, eval-loops, yaw-sweep, deteriorate,
// and synth subcommands over the registration core. Results go to stdout,
// logs and timings to stderr.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "semreg/config.hpp"
#include "semreg/errors.hpp"
#include "semreg/evaluation.hpp"
#include "semreg/pipeline.hpp"
#include "semreg/point_cloud_io.hpp"
#include "semreg/synth.hpp"

namespace {

using namespace semreg;

// Exit-code taxonomy (documented in the README).
enum ExitCode {
  kOk = 0,
  kUnexpected = 1,
  kUsage = 2,
  kIo = 3,
  kNoCorrespondences = 4,
  kCliqueTooSmall = 5,
  kDegenerateSolution = 6,
  kConfig = 7,
};

struct CliState {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;  // key, value
  std::string mode_shorthand;

  RunConfig make_config() const {
    RunConfig cfg =
        config_path.empty() ? default_config() : load_config(config_path);
    for (const auto& [key, value] : overrides) apply_override(cfg, key, value);
    if (!mode_shorthand.empty())
      apply_override(cfg, "consistency.mode", mode_shorthand);
    cfg.validate();
    return cfg;
  }
};

void add_config_options(CLI::App& app, CliState& state) {
  app.add_option("--config", state.config_path,
                 "YAML config file (section: {key: value})");
  app.add_option("--mode", state.mode_shorthand,
                 "shorthand for consistency.mode (l_trim|g_trim)");
  for (const auto& info : config_schema()) {
    const std::string flag = "--" + info.key;
    const std::string help = info.description + " [default: " +
                             (info.default_str.empty() ? "(empty)"
                                                       : info.default_str) +
                             "]";
    app.add_option_function<std::string>(
           flag,
           [&state, key = info.key](const std::string& value) {
             state.overrides.emplace_back(key, value);
           },
           help)
        ->expected(1);
  }
}

void log_timings(const RegistrationResult& result) {
  const auto& t = result.timings;
  std::fprintf(stderr,
               "timings_s clustering=%.4f descriptors=%.4f "
               "correspondences=%.4f graph=%.4f clique=%.4f solver=%.4f "
               "refine=%.4f total=%.4f\n",
               t.clustering_s, t.descriptors_s, t.correspondences_s, t.graph_s,
               t.clique_s, t.solver_s, t.refine_s, t.total_s);
}

SemanticPointCloud load_input(const std::string& scan_path,
                              const std::string& label_path,
                              const LabelConfig& labels) {
  SemanticPointCloud cloud = load_scan(scan_path, labels.unclassified_id);
  if (!label_path.empty()) cloud = load_labels(label_path, cloud, labels);
  return cloud;
}

// ---------------------------------------------------------------- register

int cmd_register(const CliState& state, const std::string& src_path,
                 const std::string& dst_path, const std::string& src_labels,
                 const std::string& dst_labels) {
  const RunConfig cfg = state.make_config();
  const auto src = load_input(src_path, src_labels, cfg.labels);
  const auto dst = load_input(dst_path, dst_labels, cfg.labels);
  const RegistrationResult result = register_clouds(src, dst, cfg);
  log_timings(result);
  std::cout << serialize_record(result);
  // Label provenance travels with the record.
  std::cout << "src " << src_path << '\n'
            << "src_labels " << (src_labels.empty() ? "-" : src_labels) << '\n'
            << "dst " << dst_path << '\n'
            << "dst_labels " << (dst_labels.empty() ? "-" : dst_labels) << '\n';
  return kOk;
}

// --------------------------------------------------------------- eval-loops

class KittiScanSource : public ScanSource {
 public:
  KittiScanSource(std::string scan_dir, std::string label_dir,
                  LabelConfig labels)
      : scan_dir_(std::move(scan_dir)), label_dir_(std::move(label_dir)),
        labels_(std::move(labels)) {}

  std::optional<SemanticPointCloud> load(int index) override {
    char name[32];
    std::snprintf(name, sizeof(name), "%06d", index);
    const auto scan = scan_dir_ + "/" + name + ".bin";
    try {
      SemanticPointCloud cloud = load_scan(scan, labels_.unclassified_id);
      if (!label_dir_.empty())
        cloud = load_labels(label_dir_ + "/" + name + ".label", cloud, labels_);
      return cloud;
    } catch (const IoError& e) {
      std::fprintf(stderr, "skip scan %d: %s\n", index, e.what());
      return std::nullopt;
    }
  }

 private:
  std::string scan_dir_;
  std::string label_dir_;
  LabelConfig labels_;
};

std::vector<LoopPair> bucketed_pairs(const std::vector<Pose>& poses, int m,
                                     int max_per_bucket) {
  auto pairs = generate_loop_pairs(poses, 3.0, 15.0, m);
  std::vector<LoopPair> kept;
  std::map<Hardness, int> counts;
  for (const auto& p : pairs) {
    if (p.hardness == Hardness::unbucketed) continue;  // 5-8 m gap
    if (max_per_bucket > 0 && counts[p.hardness] >= max_per_bucket) continue;
    ++counts[p.hardness];
    kept.push_back(p);
  }
  return kept;
}

int cmd_eval_loops(const CliState& state, bool synthetic,
                   const std::string& poses_path, const std::string& scan_dir,
                   const std::string& label_dir,
                   const std::string& records_path, int max_per_bucket) {
  const RunConfig cfg = state.make_config();
  SuiteResult result;
  if (synthetic) {
    const double half_x = 38, half_y = 13;
    const Scene world =
        generate_scene(corridor_scene_spec(cfg.eval.seed, half_x, half_y));
    auto poses = u_turn_trajectory(60, 1.0, 3.0);
    const auto pairs =
        bucketed_pairs(poses, cfg.eval.min_index_gap, max_per_bucket);
    SyntheticScanSource source(world.cloud, poses, cfg.eval.noise_sigma_m,
                               cfg.eval.range_gate_m, cfg.eval.seed);
    std::fprintf(stderr, "synthetic suite: %zu pairs\n", pairs.size());
    result = run_suite(pairs, source, cfg);
  } else {
    const auto poses = load_poses(poses_path);
    const auto pairs =
        bucketed_pairs(poses, cfg.eval.min_index_gap, max_per_bucket);
    KittiScanSource source(scan_dir, label_dir, cfg.labels);
    std::fprintf(stderr, "file suite: %zu pairs from %zu poses\n",
                 pairs.size(), poses.size());
    result = run_suite(pairs, source, cfg);
  }
  std::cout << format_table(result);
  std::fprintf(stderr, "skipped pairs: %d\n", result.total_skipped);
  if (!records_path.empty())
    write_pair_records_csv(records_path, result.records);
  return kOk;
}

// ---------------------------------------------------------------- yaw-sweep

struct SynthPair {
  SemanticPointCloud src;
  SemanticPointCloud dst;
  Pose gt;
};

SynthPair make_synth_pair(const RunConfig& cfg) {
  const Scene scene = generate_scene(default_scene_spec(cfg.eval.seed));
  SynthPair pair;
  pair.src = scene.cloud;
  pair.gt.rotation = yaw_rotation(20.0 * M_PI / 180.0);
  pair.gt.translation = Vec3(2.5, 1.2, 0.2);
  pair.dst = derive_pair(scene.cloud, pair.gt, cfg.eval.noise_sigma_m, NoCrop{},
                         cfg.eval.seed + 1);
  return pair;
}

int cmd_yaw_sweep(const CliState& state) {
  const RunConfig cfg = state.make_config();
  const SynthPair pair = make_synth_pair(cfg);
  std::cout << "angle_deg,e_trans_m,e_rot_deg,success\n";
  char line[128];
  for (double angle = -180.0; angle <= 180.0 + 1e-9;
       angle += cfg.eval.yaw_step_deg) {
    const auto rotated = perturb_yaw(pair.src, angle);
    // Rotating the source pre-composes the ground truth with the inverse.
    Pose gt = pair.gt;
    gt.rotation = gt.rotation * yaw_rotation(-angle * M_PI / 180.0);
    RpeError err{1e9, 180.0};
    try {
      const auto result = register_clouds(rotated, pair.dst, cfg);
      err = rpe(result.pose, gt);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "angle %.1f failed: %s\n", angle, e.what());
    }
    std::snprintf(line, sizeof(line), "%.1f,%.6f,%.6f,%d\n", angle, err.e_trans,
                  err.e_rot_deg, is_success(err.e_trans, err.e_rot_deg) ? 1 : 0);
    std::cout << line;
  }
  return kOk;
}

// -------------------------------------------------------------- deteriorate

int cmd_deteriorate(const CliState& state) {
  const RunConfig cfg = state.make_config();
  const SynthPair pair = make_synth_pair(cfg);
  std::cout << "rate_pct,mean_e_trans_m,mean_e_rot_deg,successes,repeats\n";
  char line[160];
  for (double rate_pct : cfg.eval.deteriorate_rates_pct) {
    double sum_et = 0, sum_er = 0;
    int successes = 0;
    for (int rep = 0; rep < cfg.eval.deteriorate_repeats; ++rep) {
      const std::uint64_t seed = cfg.eval.seed + 1000 * (rep + 1);
      const auto src = deteriorate_labels(pair.src, rate_pct / 100.0, seed,
                                          cfg.labels.unclassified_id);
      const auto dst = deteriorate_labels(pair.dst, rate_pct / 100.0, seed + 1,
                                          cfg.labels.unclassified_id);
      RpeError err{1e9, 180.0};
      try {
        const auto result = register_clouds(src, dst, cfg);
        err = rpe(result.pose, pair.gt);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "rate %.0f rep %d failed: %s\n", rate_pct, rep,
                     e.what());
      }
      sum_et += err.e_trans;
      sum_er += err.e_rot_deg;
      if (is_success(err.e_trans, err.e_rot_deg)) ++successes;
    }
    const double n = static_cast<double>(cfg.eval.deteriorate_repeats);
    std::snprintf(line, sizeof(line), "%.0f,%.6f,%.6f,%d,%d\n", rate_pct,
                  sum_et / n, sum_er / n, successes,
                  cfg.eval.deteriorate_repeats);
    std::cout << line;
  }
  return kOk;
}

// -------------------------------------------------------------------- synth

int cmd_synth(const CliState& state, const std::string& out_dir,
              const std::string& preset, std::uint64_t seed) {
  const RunConfig cfg = state.make_config();
  std::filesystem::create_directories(out_dir);

  SemanticPointCloud world;
  if (preset == "default") {
    world = generate_scene(default_scene_spec(seed)).cloud;
  } else if (preset == "crossings") {
    world = generate_crossings_scene(seed).cloud;
  } else if (preset == "corridor") {
    world = generate_scene(corridor_scene_spec(seed, 38, 13)).cloud;
  } else {
    throw ConfigError("unknown synth preset: " + preset);
  }

  Pose gt;
  gt.rotation = yaw_rotation(20.0 * M_PI / 180.0);
  gt.translation = Vec3(2.5, 1.2, 0.2);
  const auto dst =
      derive_pair(world, gt, cfg.eval.noise_sigma_m, NoCrop{}, seed + 1);

  write_scan(out_dir + "/src.bin", world);
  write_labels(out_dir + "/src.label", world);
  write_scan(out_dir + "/dst.bin", dst);
  write_labels(out_dir + "/dst.label", dst);
  write_poses(out_dir + "/gt_pose.txt", {gt});
  std::cout << "out_dir " << out_dir << '\n'
            << "preset " << preset << '\n'
            << "seed " << seed << '\n'
            << "src_points " << world.size() << '\n'
            << "dst_points " << dst.size() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semantic LiDAR global registration"};
  app.require_subcommand(1);
  app.fallthrough();

  CliState state;
  add_config_options(app, state);

  auto* reg = app.add_subcommand("register", "register two labeled scans");
  std::string src_path, dst_path, src_labels, dst_labels;
  reg->add_option("--src", src_path, "source scan (.bin)")->required();
  reg->add_option("--dst", dst_path, "destination scan (.bin)")->required();
  reg->add_option("--src-labels", src_labels, "source labels (.label)");
  reg->add_option("--dst-labels", dst_labels, "destination labels (.label)");

  auto* loops = app.add_subcommand("eval-loops", "loop-closing success table");
  bool synthetic = false;
  std::string poses_path, scan_dir, label_dir, records_path;
  int max_per_bucket = 0;
  loops->add_flag("--synthetic", synthetic, "built-in synthetic trajectory");
  loops->add_option("--poses", poses_path, "pose file (12 reals per line)");
  loops->add_option("--scans", scan_dir, "scan directory (000000.bin ...)");
  loops->add_option("--labels", label_dir, "label directory (000000.label ...)");
  loops->add_option("--records", records_path, "per-pair CSV output path");
  loops->add_option("--max-per-bucket", max_per_bucket,
                    "cap pairs per hardness bucket (0 = all)");

  auto* sweep = app.add_subcommand("yaw-sweep",
                                   "register under yaw perturbations of the "
                                   "synthetic pair");
  auto* det = app.add_subcommand("deteriorate",
                                 "registration accuracy under label "
                                 "deterioration");
  auto* synth = app.add_subcommand("synth", "export a synthetic scene pair");
  std::string out_dir, preset = "default";
  std::uint64_t synth_seed = 7;
  synth->add_option("--out-dir", out_dir, "output directory")->required();
  synth->add_option("--preset", preset, "default|crossings|corridor");
  synth->add_option("--seed", synth_seed, "scene seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (reg->parsed())
      return cmd_register(state, src_path, dst_path, src_labels, dst_labels);
    if (loops->parsed())
      return cmd_eval_loops(state, synthetic, poses_path, scan_dir, label_dir,
                            records_path, max_per_bucket);
    if (sweep->parsed()) return cmd_yaw_sweep(state);
    if (det->parsed()) return cmd_deteriorate(state);
    if (synth->parsed()) return cmd_synth(state, out_dir, preset, synth_seed);
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kIo;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const NoCorrespondencesError& e) {
    std::fprintf(stderr, "registration failed: %s\n", e.what());
    return kNoCorrespondences;
  } catch (const CliqueTooSmallError& e) {
    std::fprintf(stderr, "registration failed: %s\n", e.what());
    return kCliqueTooSmall;
  } catch (const DegenerateSolutionError& e) {
    std::fprintf(stderr, "registration failed: %s\n", e.what());
    return kDegenerateSolution;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUnexpected;
  }
  return kUsage;
}
