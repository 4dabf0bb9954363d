#include "doctest.h"

#include <cmath>

#include "semreg/errors.hpp"
#include "semreg/evaluation.hpp"
#include "semreg/pipeline.hpp"
#include "semreg/synth.hpp"
#include "test_util.hpp"

using namespace semreg;

namespace {

RunConfig light_config() {
  RunConfig cfg = default_config();
  cfg.clustering.min_cluster_size = 15;
  cfg.descriptors.downsample_res_m = 0.7;
  cfg.correspondence.feature_cap = 250;
  return cfg;
}

Pose test_transform() {
  Pose p;
  p.rotation = yaw_rotation(25.0 * M_PI / 180.0);
  p.translation = Vec3(3.0, -1.5, 0.3);
  return p;
}

}  // namespace

TEST_CASE("register_clouds self-registration is the identity") {
  const Scene scene = generate_scene(default_scene_spec(101));
  const RunConfig cfg = light_config();
  const auto result = register_clouds(scene.cloud, scene.cloud, cfg);
  const auto err = rpe(result.pose, Pose::identity());
  CHECK(err.e_trans < 1e-6);
  CHECK(err.e_rot_deg < 1e-6);
  CHECK(result.inlier_count >= 3);
  CHECK(result.inlier_count <= result.raw_correspondence_count);
  CHECK(result.mode == TrimMode::g_trim);
}

TEST_CASE("register_clouds recovers a known transform under outliers") {
  const Scene scene = generate_scene(default_scene_spec(102));
  const Pose gt = test_transform();
  const auto dst = derive_pair(scene.cloud, gt, 0.03, NoCrop{}, 55);

  RunConfig cfg = light_config();
  cfg.pipeline.inject_outlier_fraction = 0.4;
  cfg.pipeline.inject_outlier_seed = 11;
  const auto result = register_clouds(scene.cloud, dst, cfg);
  const auto err = rpe(result.pose, gt);
  CHECK(err.e_trans < 0.1);
  CHECK(err.e_rot_deg < 0.5);
}

TEST_CASE("register_clouds surfaces stage-tagged errors") {
  SUBCASE("disjoint label sets and featureless geometry") {
    SemanticPointCloud src, dst;
    XorShift64Star rng(1);
    for (int i = 0; i < 200; ++i) {
      src.points.push_back(rng.normal_vec3(5.0));
      src.labels.push_back(1);
      dst.points.push_back(rng.normal_vec3(5.0));
      dst.labels.push_back(2);
    }
    const RunConfig cfg = light_config();
    CHECK_THROWS_AS(register_clouds(src, dst, cfg), NoCorrespondencesError);
    try {
      register_clouds(src, dst, cfg);
    } catch (const NoCorrespondencesError& e) {
      CHECK(std::string(e.what()).find("[correspondence]") != std::string::npos);
    }
  }
}

TEST_CASE("frame convention round-trip composes to identity") {
  const Scene scene = generate_scene(default_scene_spec(103));
  const Pose gt = test_transform();
  const auto dst = derive_pair(scene.cloud, gt, 0.02, NoCrop{}, 77);

  const RunConfig cfg = light_config();
  const auto fwd = register_clouds(scene.cloud, dst, cfg);
  const auto bwd = register_clouds(dst, scene.cloud, cfg);
  const Pose composed = fwd.pose * bwd.pose;
  const auto err = rpe(composed, Pose::identity());
  CHECK(err.e_trans < 0.2);
  CHECK(err.e_rot_deg < 1.0);
}

TEST_CASE("g_trim prunes at least as hard as l_trim") {
  const Scene scene = generate_scene(default_scene_spec(104));
  const Pose gt = test_transform();
  const auto dst = derive_pair(scene.cloud, gt, 0.03, NoCrop{}, 88);

  RunConfig cfg = light_config();
  cfg.mode = TrimMode::g_trim;
  const auto g_result = register_clouds(scene.cloud, dst, cfg);
  cfg.mode = TrimMode::l_trim;
  const auto l_result = register_clouds(scene.cloud, dst, cfg);
  CHECK(g_result.graph_edge_count <= l_result.graph_edge_count);
  CHECK(g_result.raw_correspondence_count == l_result.raw_correspondence_count);
}

TEST_CASE("refine_icp contracts") {
  const Scene scene = generate_scene(default_scene_spec(105));
  IcpParams params;

  SUBCASE("perfect alignment stays put") {
    const auto result =
        refine_icp(scene.cloud, scene.cloud, Pose::identity(), params);
    CHECK(!result.no_overlap);
    CHECK((result.pose.matrix() - Mat4::Identity()).norm() < 1e-9);
  }
  SUBCASE("a 0.3 m offset strictly decreases the residual") {
    Pose off;
    off.translation = Vec3(0.3, 0, 0);
    // src shifted by off^-1 so the true correction is off.
    const auto moved = derive_pair(scene.cloud, off.inverse(), 0.0, NoCrop{}, 1);
    const auto before = refine_icp(moved, scene.cloud, Pose::identity(), params);
    // One full run: final residual must not exceed the initial.
    IcpParams one = params;
    one.max_iterations = 1;
    const auto first = refine_icp(moved, scene.cloud, Pose::identity(), one);
    CHECK(before.mean_residual <= first.mean_residual + 1e-12);
    CHECK(before.mean_residual < 0.05);
    const auto err = rpe(before.pose, off);
    CHECK(err.e_trans < 0.05);
  }
  SUBCASE("fully disjoint clouds return the initial pose flagged") {
    SemanticPointCloud far = scene.cloud;
    for (auto& p : far.points) p += Vec3(500, 0, 0);
    Pose init;
    init.translation = Vec3(1, 2, 3);
    const auto result = refine_icp(scene.cloud, far, init, params);
    CHECK(result.no_overlap);
    CHECK((result.pose.matrix() - init.matrix()).norm() == 0.0);
  }
}

TEST_CASE("records serialize in the documented field order") {
  RegistrationResult r;
  r.pose = test_transform();
  r.inlier_count = 12;
  r.raw_correspondence_count = 40;
  r.semantic_count = 10;
  r.feature_count = 30;
  r.graph_edge_count = 77;
  r.mode = TrimMode::l_trim;
  const std::string record = serialize_record(r);

  const std::vector<std::string> keys = {
      "mode l_trim", "pose ", "inliers 12", "raw_correspondences 40",
      "semantic_correspondences 10", "feature_correspondences 30",
      "graph_edges 77", "approximate_clique 0"};
  std::size_t at = 0;
  for (const auto& key : keys) {
    const auto pos = record.find(key, at);
    REQUIRE(pos != std::string::npos);
    at = pos;
  }
  // Timings never leak into the record.
  CHECK(record.find("time") == std::string::npos);
}
