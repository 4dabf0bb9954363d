#include "semreg/config.hpp"

#include <yaml-cpp/yaml.h>

#include <functional>
#include <sstream>

#include "semreg/errors.hpp"

namespace semreg {

namespace {

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, delim)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not a number: '" + v + "'");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not an integer: '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key " + key + ": not a boolean: '" + v + "'");
}

struct KeyEntry {
  std::string description;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string render_set(const std::set<std::uint32_t>& s) {
  std::string out;
  for (auto v : s) {
    if (!out.empty()) out += ',';
    out += std::to_string(v);
  }
  return out;
}

std::string render_map(const std::map<std::uint32_t, std::uint32_t>& m) {
  std::string out;
  for (const auto& [k, v] : m) {
    if (!out.empty()) out += ',';
    out += std::to_string(k) + ':' + std::to_string(v);
  }
  return out;
}

std::string render_rates(const std::vector<double>& r) {
  std::ostringstream ss;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i) ss << ',';
    ss << r[i];
  }
  return ss.str();
}

const std::map<std::string, KeyEntry>& registry() {
  static const std::map<std::string, KeyEntry> reg = [] {
    std::map<std::string, KeyEntry> r;

    r["io.unclassified_id"] = {
        "label id for unclassified points",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.labels.unclassified_id = static_cast<std::uint32_t>(parse_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.labels.unclassified_id); }};
    r["io.instance_classes"] = {
        "comma-separated label ids clustered all-to-all",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.labels.instance_classes.clear();
          for (const auto& tok : split(v, ','))
            c.labels.instance_classes.insert(
                static_cast<std::uint32_t>(parse_int(k, tok)));
        },
        [](const RunConfig& c) { return render_set(c.labels.instance_classes); }};
    r["io.feature_classes"] = {
        "comma-separated label ids matched by descriptor",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.labels.feature_classes.clear();
          for (const auto& tok : split(v, ','))
            c.labels.feature_classes.insert(
                static_cast<std::uint32_t>(parse_int(k, tok)));
        },
        [](const RunConfig& c) { return render_set(c.labels.feature_classes); }};
    r["io.remap"] = {
        "raw:canonical label pairs, comma-separated",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.labels.remap.clear();
          for (const auto& tok : split(v, ',')) {
            const auto parts = split(tok, ':');
            if (parts.size() != 2)
              throw ConfigError("config key " + k + ": expected raw:canonical, got '" + tok + "'");
            c.labels.remap[static_cast<std::uint32_t>(parse_int(k, parts[0]))] =
                static_cast<std::uint32_t>(parse_int(k, parts[1]));
          }
        },
        [](const RunConfig& c) { return render_map(c.labels.remap); }};

    r["clustering.azimuth_res_deg"] = {
        "curved-voxel azimuth resolution (degrees)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.clustering.azimuth_res_deg = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.clustering.azimuth_res_deg); }};
    r["clustering.polar_res_deg"] = {
        "curved-voxel polar resolution (degrees)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.clustering.polar_res_deg = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.clustering.polar_res_deg); }};
    r["clustering.radial_base_m"] = {
        "first radial bin width (meters)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.clustering.radial_base_m = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.clustering.radial_base_m); }};
    r["clustering.radial_growth"] = {
        "geometric growth factor of radial bins",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.clustering.radial_growth = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.clustering.radial_growth); }};
    r["clustering.min_cluster_size"] = {
        "minimum points per cluster",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.clustering.min_cluster_size = static_cast<int>(parse_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.clustering.min_cluster_size); }};

    r["descriptors.normal_radius_m"] = {
        "normal estimation radius (meters)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.descriptors.normal_radius_m = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.descriptors.normal_radius_m); }};
    r["descriptors.fpfh_radius_m"] = {
        "descriptor radius (meters)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.descriptors.fpfh_radius_m = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.descriptors.fpfh_radius_m); }};
    r["descriptors.downsample_res_m"] = {
        "feature-track voxel size (meters)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.descriptors.downsample_res_m = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.descriptors.downsample_res_m); }};

    r["correspondence.patch_k"] = {
        "same-label neighbors for feature covariances",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.correspondence.patch_k = static_cast<int>(parse_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.correspondence.patch_k); }};
    r["correspondence.feature_cap"] = {
        "max feature correspondences kept (0 = unlimited)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.correspondence.feature_cap = static_cast<std::size_t>(parse_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.correspondence.feature_cap); }};
    r["correspondence.semantic_cap"] = {
        "max semantic correspondences kept (0 = unlimited)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.correspondence.semantic_cap = static_cast<std::size_t>(parse_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.correspondence.semantic_cap); }};

    r["consistency.mode"] = {
        "consistency predicate: l_trim or g_trim",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "l_trim") c.mode = TrimMode::l_trim;
          else if (v == "g_trim") c.mode = TrimMode::g_trim;
          else throw ConfigError("config key " + k + ": expected l_trim or g_trim, got '" + v + "'");
        },
        [](const RunConfig& c) {
          return std::string(c.mode == TrimMode::l_trim ? "l_trim" : "g_trim");
        }};
    r["consistency.noise_bound_m"] = {
        "measurement error bound epsilon (meters)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.consistency.noise_bound = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.consistency.noise_bound); }};
    r["consistency.shape_slack_m2"] = {
        "g-TRIM covariance budget kappa (meters^2)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.consistency.shape_slack = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.consistency.shape_slack); }};
    r["consistency.g_trim_bound_m"] = {
        "explicit g-TRIM bound; 0 derives sqrt(eps^2 + kappa)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.consistency.g_trim_bound = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.consistency.g_trim_bound); }};
    r["consistency.workers"] = {
        "threads for graph construction",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.consistency_workers = static_cast<int>(parse_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.consistency_workers); }};

    r["clique.time_budget_s"] = {
        "max-clique search budget (seconds)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.clique.time_budget_s = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.clique.time_budget_s); }};
    r["clique.workers"] = {
        "threads for the clique search",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.clique.workers = static_cast<int>(parse_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.clique.workers); }};

    r["solver.noise_bound_m"] = {
        "TLS truncation parameter c (meters)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.solver.noise_bound = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.solver.noise_bound); }};
    r["solver.mu_update_factor"] = {
        "GNC annealing factor (> 1)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.solver.mu_update_factor = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.solver.mu_update_factor); }};
    r["solver.max_iterations"] = {
        "GNC outer iteration cap",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.solver.max_iterations = static_cast<int>(parse_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.solver.max_iterations); }};
    r["solver.convergence_tol"] = {
        "weight fixpoint threshold",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.solver.convergence_tol = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.solver.convergence_tol); }};

    r["icp.max_iterations"] = {
        "ICP refinement iteration cap",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.icp.max_iterations = static_cast<int>(parse_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.icp.max_iterations); }};
    r["icp.tol"] = {
        "ICP convergence threshold on pose change",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.icp.tol = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.icp.tol); }};
    r["icp.gate_m"] = {
        "closest-point pairing gate (meters)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.icp.gate_m = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.icp.gate_m); }};
    r["icp.voxel_m"] = {
        "ICP downsample resolution (meters)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.icp.voxel_m = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.icp.voxel_m); }};

    r["pipeline.refine_icp"] = {
        "polish the estimate with point-to-point ICP",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.pipeline.refine_icp = parse_bool(k, v);
        },
        [](const RunConfig& c) { return std::string(c.pipeline.refine_icp ? "true" : "false"); }};
    r["pipeline.workers"] = {
        "threads for descriptor computation",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.pipeline.workers = static_cast<int>(parse_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.pipeline.workers); }};
    r["pipeline.inject_outlier_fraction"] = {
        "stress knob: synthetic outlier correspondence fraction [0,1)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.pipeline.inject_outlier_fraction = parse_double(k, v);
        },
        [](const RunConfig& c) {
          return std::to_string(c.pipeline.inject_outlier_fraction);
        }};
    r["pipeline.inject_outlier_seed"] = {
        "seed for injected outliers",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.pipeline.inject_outlier_seed = static_cast<std::uint64_t>(parse_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.pipeline.inject_outlier_seed); }};

    r["eval.workers"] = {
        "threads fanning out suite pairs",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.eval.workers = static_cast<int>(parse_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.eval.workers); }};
    r["eval.noise_sigma_m"] = {
        "synthetic per-point noise sigma (meters)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.eval.noise_sigma_m = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.eval.noise_sigma_m); }};
    r["eval.range_gate_m"] = {
        "synthetic sensor max range (meters)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.eval.range_gate_m = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.eval.range_gate_m); }};
    r["eval.min_index_gap"] = {
        "loop-pair minimum index separation m",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.eval.min_index_gap = static_cast<int>(parse_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.eval.min_index_gap); }};
    r["eval.yaw_step_deg"] = {
        "yaw sweep step (degrees)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.eval.yaw_step_deg = parse_double(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.eval.yaw_step_deg); }};
    r["eval.deteriorate_rates_pct"] = {
        "label deterioration rates (percent, comma-separated)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.eval.deteriorate_rates_pct.clear();
          for (const auto& tok : split(v, ','))
            c.eval.deteriorate_rates_pct.push_back(parse_double(k, tok));
        },
        [](const RunConfig& c) { return render_rates(c.eval.deteriorate_rates_pct); }};
    r["eval.deteriorate_repeats"] = {
        "seeded repetitions per deterioration rate",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.eval.deteriorate_repeats = static_cast<int>(parse_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.eval.deteriorate_repeats); }};
    r["eval.seed"] = {
        "base seed for synthetic protocols",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.eval.seed = static_cast<std::uint64_t>(parse_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.eval.seed); }};

    return r;
  }();
  return reg;
}

}  // namespace

RunConfig default_config() {
  RunConfig cfg;
  cfg.labels.instance_classes = {1, 2, 3};
  cfg.labels.feature_classes = {10, 11};
  cfg.labels.unclassified_id = 0;
  return cfg;
}

void RunConfig::validate() const {
  labels.validate();
  clustering.validate();
  descriptors.validate();
  correspondence.validate();
  consistency.validate();
  solver.validate();
  if (consistency_workers < 1 || clique.workers < 1 || pipeline.workers < 1 ||
      eval.workers < 1)
    throw ConfigError("worker counts must be >= 1");
  if (clique.time_budget_s <= 0)
    throw ConfigError("clique.time_budget_s must be positive");
  if (icp.max_iterations < 1 || icp.tol <= 0 || icp.gate_m <= 0 || icp.voxel_m <= 0)
    throw ConfigError("icp parameters must be positive");
  if (pipeline.inject_outlier_fraction < 0 || pipeline.inject_outlier_fraction >= 1)
    throw ConfigError("pipeline.inject_outlier_fraction must be in [0, 1)");
  if (eval.noise_sigma_m < 0 || eval.range_gate_m <= 0 || eval.min_index_gap < 1 ||
      eval.yaw_step_deg <= 0 || eval.deteriorate_repeats < 1)
    throw ConfigError("eval parameters out of range");
  for (double rate : eval.deteriorate_rates_pct)
    if (rate < 0 || rate > 100)
      throw ConfigError("eval.deteriorate_rates_pct entries must be in [0, 100]");
}

void apply_override(RunConfig& cfg, const std::string& key,
                    const std::string& value) {
  const auto& reg = registry();
  auto it = reg.find(key);
  if (it == reg.end()) throw ConfigError("unknown config key: " + key);
  it->second.set(cfg, key, value);
}

RunConfig load_config(const std::string& path) {
  RunConfig cfg = default_config();
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw IoError("cannot open config file: " + path);
  } catch (const YAML::Exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  if (root.IsNull() || !root.IsDefined()) {
    cfg.validate();
    return cfg;
  }
  if (!root.IsMap()) throw ConfigError("config root must be a mapping: " + path);

  for (const auto& section : root) {
    const std::string section_name = section.first.as<std::string>();
    if (!section.second.IsMap())
      throw ConfigError("config section '" + section_name + "' must be a mapping");
    for (const auto& kv : section.second) {
      const std::string key = section_name + "." + kv.first.as<std::string>();
      std::string value;
      if (kv.second.IsScalar()) {
        value = kv.second.as<std::string>();
      } else if (kv.second.IsSequence()) {
        for (const auto& item : kv.second) {
          if (!value.empty()) value += ',';
          value += item.as<std::string>();
        }
      } else if (kv.second.IsMap()) {
        for (const auto& item : kv.second) {
          if (!value.empty()) value += ',';
          value += item.first.as<std::string>() + ':' + item.second.as<std::string>();
        }
      } else {
        throw ConfigError("config key " + key + ": unsupported value type");
      }
      apply_override(cfg, key, value);
    }
  }
  cfg.validate();
  return cfg;
}

std::vector<ConfigKeyInfo> config_schema() {
  const RunConfig defaults = default_config();
  std::vector<ConfigKeyInfo> out;
  for (const auto& [key, entry] : registry()) {
    ConfigKeyInfo info;
    info.key = key;
    info.default_str = entry.get(defaults);
    info.description = entry.description;
    out.push_back(std::move(info));
  }
  return out;
}

}  // namespace semreg
