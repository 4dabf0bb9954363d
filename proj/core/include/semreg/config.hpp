#pragma once

#include <string>
#include <vector>

#include "semreg/clustering.hpp"
#include "semreg/consistency.hpp"
#include "semreg/correspondence.hpp"
#include "semreg/descriptors.hpp"
#include "semreg/pose_solver.hpp"
#include "semreg/types.hpp"

namespace semreg {

struct CliqueParams {
  double time_budget_s = 1.0;
  int workers = 4;
};

struct IcpParams {
  int max_iterations = 30;
  double tol = 1e-6;
  double gate_m = 1.0;     // closest-point pairing gate
  double voxel_m = 0.4;    // downsample resolution for refinement
};

struct PipelineParams {
  bool refine_icp = false;
  int workers = 4;  // descriptor and graph stages
  // Stress knobs for the evaluation protocols: appends synthetic outlier
  // correspondences after the merge stage when fraction > 0.
  double inject_outlier_fraction = 0.0;
  std::uint64_t inject_outlier_seed = 1;
};

struct EvalParams {
  int workers = 2;
  double noise_sigma_m = 0.03;  // synthetic second-scan noise
  double range_gate_m = 32.0;   // synthetic sensor range
  int min_index_gap = 30;       // Eq.-style loop gap m
  double yaw_step_deg = 15.0;
  std::vector<double> deteriorate_rates_pct = {10, 30, 50, 70, 90};
  int deteriorate_repeats = 10;
  std::uint64_t seed = 7;
};

/// Every configurable default from all modules. Loaded from a YAML file
/// (two levels: section -> key) with command-line overrides of the form
/// section.key=value. Unknown keys are rejected; values are range-checked.
struct RunConfig {
  LabelConfig labels;
  DcvcParams clustering;
  DescriptorParams descriptors;
  CorrespondenceParams correspondence;
  TrimThresholds consistency;
  TrimMode mode = TrimMode::g_trim;
  int consistency_workers = 4;
  CliqueParams clique;
  GncConfig solver;
  IcpParams icp;
  PipelineParams pipeline;
  EvalParams eval;

  void validate() const;  // throws ConfigError
};

RunConfig default_config();

/// Parses a YAML config file into defaults + overrides. Throws ConfigError
/// on unknown keys, type errors, or range violations.
RunConfig load_config(const std::string& path);

/// Applies one "section.key=value"-style override.
void apply_override(RunConfig& cfg, const std::string& key,
                    const std::string& value);

struct ConfigKeyInfo {
  std::string key;          // section.key
  std::string default_str;  // rendered default
  std::string description;
};

/// The full schema, one entry per config key (drives --help).
std::vector<ConfigKeyInfo> config_schema();

}  // namespace semreg
