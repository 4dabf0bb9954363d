#include "doctest.h"

#include "semreg/config.hpp"
#include "semreg/errors.hpp"
#include "test_util.hpp"

using namespace semreg;
using semreg::test::TempDir;

TEST_CASE("defaults validate and match the documented values") {
  const RunConfig cfg = default_config();
  cfg.validate();
  CHECK(cfg.consistency.noise_bound == doctest::Approx(0.2));
  CHECK(cfg.consistency.effective_g_bound() ==
        doctest::Approx(std::sqrt(0.2 * 0.2 + 0.1)));
  CHECK(cfg.solver.noise_bound == doctest::Approx(0.2));
  CHECK(cfg.clustering.min_cluster_size == 20);
  CHECK(cfg.correspondence.patch_k == 20);
  CHECK(cfg.correspondence.feature_cap == 800);
  CHECK(cfg.mode == TrimMode::g_trim);
  CHECK(cfg.clique.time_budget_s == doctest::Approx(1.0));
  CHECK(cfg.clique.workers == 4);
}

TEST_CASE("yaml files load into sections") {
  TempDir tmp;
  const auto path = tmp.path("cfg.yaml");
  test::write_text(path,
                   "clustering:\n"
                   "  min_cluster_size: 12\n"
                   "consistency:\n"
                   "  mode: l_trim\n"
                   "  noise_bound_m: 0.35\n"
                   "io:\n"
                   "  instance_classes: [4, 5]\n"
                   "  feature_classes: [20]\n"
                   "  remap: {10: 4, 18: 5}\n"
                   "solver:\n"
                   "  max_iterations: 64\n");
  const RunConfig cfg = load_config(path);
  CHECK(cfg.clustering.min_cluster_size == 12);
  CHECK(cfg.mode == TrimMode::l_trim);
  CHECK(cfg.consistency.noise_bound == doctest::Approx(0.35));
  CHECK(cfg.labels.instance_classes == std::set<std::uint32_t>{4, 5});
  CHECK(cfg.labels.feature_classes == std::set<std::uint32_t>{20});
  CHECK(cfg.labels.remap.at(10) == 4);
  CHECK(cfg.labels.remap.at(18) == 5);
  CHECK(cfg.solver.max_iterations == 64);
}

TEST_CASE("unknown keys are rejected") {
  TempDir tmp;
  const auto path = tmp.path("bad.yaml");
  test::write_text(path, "clustering:\n  not_a_key: 3\n");
  CHECK_THROWS_WITH_AS(load_config(path),
                       doctest::Contains("clustering.not_a_key"), ConfigError);
  RunConfig cfg = default_config();
  CHECK_THROWS_AS(apply_override(cfg, "nope.nope", "1"), ConfigError);
}

TEST_CASE("values are range-checked at load") {
  TempDir tmp;
  SUBCASE("min_cluster_size below 3") {
    const auto path = tmp.path("a.yaml");
    test::write_text(path, "clustering:\n  min_cluster_size: 2\n");
    CHECK_THROWS_AS(load_config(path), ConfigError);
  }
  SUBCASE("overlapping class sets") {
    const auto path = tmp.path("b.yaml");
    test::write_text(path,
                     "io:\n  instance_classes: [1]\n  feature_classes: [1]\n");
    CHECK_THROWS_AS(load_config(path), ConfigError);
  }
  SUBCASE("bad mode string") {
    const auto path = tmp.path("c.yaml");
    test::write_text(path, "consistency:\n  mode: fancy\n");
    CHECK_THROWS_AS(load_config(path), ConfigError);
  }
  SUBCASE("non-numeric value") {
    const auto path = tmp.path("d.yaml");
    test::write_text(path, "solver:\n  noise_bound_m: lots\n");
    CHECK_THROWS_AS(load_config(path), ConfigError);
  }
}

TEST_CASE("overrides use section.key=value form") {
  RunConfig cfg = default_config();
  apply_override(cfg, "consistency.mode", "l_trim");
  apply_override(cfg, "clique.workers", "2");
  apply_override(cfg, "io.remap", "10:1,71:2");
  CHECK(cfg.mode == TrimMode::l_trim);
  CHECK(cfg.clique.workers == 2);
  CHECK(cfg.labels.remap.at(71) == 2);
}

TEST_CASE("schema covers every section with defaults") {
  const auto schema = config_schema();
  CHECK(schema.size() >= 35);
  bool saw_mode = false;
  for (const auto& info : schema) {
    CHECK(!info.key.empty());
    CHECK(info.key.find('.') != std::string::npos);
    CHECK(!info.description.empty());
    if (info.key == "consistency.mode") {
      saw_mode = true;
      CHECK(info.default_str == "g_trim");
    }
  }
  CHECK(saw_mode);

  // Every schema key round-trips through apply_override with its default.
  RunConfig cfg = default_config();
  for (const auto& info : schema) {
    if (info.default_str.empty()) continue;  // empty list/map defaults
    apply_override(cfg, info.key, info.default_str);
  }
  cfg.validate();
}
