#include "doctest.h"

#include <cmath>
#include <set>

#include "semreg/clustering.hpp"
#include "semreg/consistency.hpp"
#include "semreg/max_clique.hpp"
#include "semreg/point_cloud_io.hpp"
#include "semreg/synth.hpp"
#include "test_util.hpp"

using namespace semreg;
using semreg::test::TempDir;

TEST_CASE("generate_scene is deterministic per seed") {
  SceneSpec spec;
  spec.seed = 7;
  spec.instances.push_back({1, 5, 100, 0.05, 0.3, 0.4, 1.2});  // cars
  spec.instances.push_back({2, 3, 80, 0.02, 0.2, 0.8, 2.0});   // trunks
  SurfaceClassSpec shell;
  shell.label = 10;
  shell.density_pts_per_m2 = 4.0;
  shell.rects = make_shell_rects(20, 20, 2.0);
  shell.rects.push_back(make_ground_rect(20, 20));
  spec.surfaces.push_back(shell);

  const Scene a = generate_scene(spec);
  const Scene b = generate_scene(spec);
  REQUIRE(a.cloud.size() == b.cloud.size());
  for (std::size_t i = 0; i < a.cloud.size(); ++i) {
    CHECK(a.cloud.points[i] == b.cloud.points[i]);
    CHECK(a.cloud.labels[i] == b.cloud.labels[i]);
  }
  CHECK(a.clusters.size() == 8);

  SceneSpec other = spec;
  other.seed = 8;
  const Scene c = generate_scene(other);
  CHECK(c.cloud.points[0] != a.cloud.points[0]);
}

TEST_CASE("generate_scene with surfaces only") {
  SceneSpec spec;
  spec.seed = 3;
  SurfaceClassSpec shell;
  shell.label = 10;
  shell.density_pts_per_m2 = 3.0;
  shell.rects = make_shell_rects(10, 10, 2.0);
  spec.surfaces.push_back(shell);
  const Scene scene = generate_scene(spec);
  CHECK(scene.clusters.empty());
  CHECK(scene.cloud.size() > 100);
  for (auto l : scene.cloud.labels) CHECK(l == 10);
}

TEST_CASE("generate_scene reports infeasible packing") {
  SceneSpec spec;
  spec.seed = 1;
  spec.extent_x = 50;
  spec.extent_y = 50;
  spec.min_separation = 30.0;
  spec.instances.push_back({1, 100, 10, 0.05, 0.2, 0, 1});
  CHECK_THROWS_WITH_AS(generate_scene(spec), doctest::Contains("pack"),
                       std::runtime_error);
}

TEST_CASE("scene cluster stats agree with the sampling Gaussians") {
  const SceneSpec spec = default_scene_spec(21);
  const Scene scene = generate_scene(spec);
  std::map<std::uint32_t, int> points_per_cluster;
  for (const auto& inst : spec.instances)
    points_per_cluster[inst.label] = inst.points_per_cluster;

  // Clusters were emitted as contiguous blocks in declaration order.
  std::size_t offset = 0;
  for (const auto& gt : scene.clusters) {
    const int n = points_per_cluster.at(gt.label);
    std::vector<Vec3> pts;
    for (int k = 0; k < n; ++k, ++offset) {
      REQUIRE(scene.cloud.labels[offset] == gt.label);
      pts.push_back(scene.cloud.points[offset]);
    }
    const auto [mean, cov] = cluster_stats(pts);
    const double sigma_max = std::sqrt(gt.cov.diagonal().maxCoeff());
    // 3 sigma / sqrt(n) per axis, with headroom for the 3-vector norm.
    CHECK((mean - gt.mean).norm() < 9.0 * sigma_max / std::sqrt(double(n)));
    CHECK((cov - gt.cov).norm() < 0.3 * gt.cov.norm() + 0.02);
  }
}

TEST_CASE("derive_pair identity is the identity") {
  const Scene scene = generate_scene(default_scene_spec(5));
  const auto copy =
      derive_pair(scene.cloud, Pose::identity(), 0.0, NoCrop{}, 1);
  REQUIRE(copy.size() == scene.cloud.size());
  for (std::size_t i = 0; i < copy.size(); ++i) {
    CHECK(copy.points[i] == scene.cloud.points[i]);
    CHECK(copy.labels[i] == scene.cloud.labels[i]);
  }
}

TEST_CASE("derive_pair applies transform, noise, and crop") {
  const Scene scene = generate_scene(default_scene_spec(6));
  Pose pose;
  pose.rotation = yaw_rotation(0.4);
  pose.translation = Vec3(2, -1, 0.2);

  SUBCASE("crop can fail everything") {
    CHECK_THROWS_AS(
        derive_pair(scene.cloud, pose, 0.0, RangeGateCrop{1e-3}, 1),
        std::runtime_error);
  }
  SUBCASE("half-space crop controls overlap") {
    const auto cropped = derive_pair(scene.cloud, Pose::identity(), 0.0,
                                     HalfSpaceCrop{Vec3(1, 0, 0), 0.0}, 1);
    CHECK(cropped.size() < scene.cloud.size());
    for (const auto& p : cropped.points) CHECK(p.x() <= 0.0);
  }
  SUBCASE("noise is seed-deterministic") {
    const auto a = derive_pair(scene.cloud, pose, 0.05, NoCrop{}, 9);
    const auto b = derive_pair(scene.cloud, pose, 0.05, NoCrop{}, 9);
    const auto c = derive_pair(scene.cloud, pose, 0.05, NoCrop{}, 10);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.points[i] == b.points[i]);
    CHECK(a.points[0] != c.points[0]);
  }
}

TEST_CASE("inject_outlier_matches counts and determinism") {
  std::vector<Correspondence> corrs(10);
  for (int i = 0; i < 10; ++i) {
    corrs[i].label = i < 6 ? 1 : 2;
    corrs[i].src_mean = Vec3(i, 0, 0);
    corrs[i].dst_mean = Vec3(i, 1, 0);
  }
  CHECK(inject_outlier_matches(corrs, 0.0, 1).size() == 10);
  CHECK(inject_outlier_matches(corrs, 0.5, 1).size() == 20);
  CHECK(inject_outlier_matches(corrs, 0.9, 1).size() == 100);

  const auto a = inject_outlier_matches(corrs, 0.5, 3);
  const auto b = inject_outlier_matches(corrs, 0.5, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].src_mean == b[i].src_mean);
    CHECK(a[i].dst_mean == b[i].dst_mean);
    CHECK(a[i].label == b[i].label);
  }
  for (std::size_t i = 10; i < a.size(); ++i) {
    bool src_ok = false, dst_ok = false;
    for (int j = 0; j < 10; ++j) {
      if (corrs[j].label != a[i].label) continue;
      src_ok |= corrs[j].src_mean == a[i].src_mean;
      dst_ok |= corrs[j].dst_mean == a[i].dst_mean;
    }
    CHECK(src_ok);
    CHECK(dst_ok);
  }
}

TEST_CASE("downstream clique still recovers inliers at 90% injected outliers") {
  // 10 exact inliers, fraction 0.9 -> 100 total; the consistency graph's
  // maximum clique must contain the 10 inliers on at least 95/100 seeds.
  const Mat3 r = yaw_rotation(0.9);
  const Vec3 t(3, -2, 0.5);
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    XorShift64Star rng(seed);
    std::vector<Correspondence> corrs;
    for (int i = 0; i < 10; ++i) {
      Correspondence c;
      c.src_mean = rng.normal_vec3(5.0);
      c.src_cov = semreg::test::random_spd(rng, 0.02, 0.3);
      c.dst_mean = r * c.src_mean + t;
      c.dst_cov = r * c.src_cov * r.transpose();
      c.label = 1 + (i % 2);
      corrs.push_back(c);
    }
    const auto stressed = inject_outlier_matches(corrs, 0.9, seed * 13);
    REQUIRE(stressed.size() == 100);
    const TrimThresholds thresholds;
    const auto graph = build_graph(stressed, TrimMode::g_trim, thresholds);
    const auto clique = max_clique(graph, 2.0, 1);
    std::set<int> got(clique.vertices.begin(), clique.vertices.end());
    bool all = true;
    for (int i = 0; i < 10; ++i) all &= got.count(i) > 0;
    if (all) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("scenes round-trip through the scan and label writers") {
  TempDir tmp;
  const Scene scene = generate_scene(default_scene_spec(31));
  const auto bin = tmp.path("scene.bin");
  const auto lab = tmp.path("scene.label");
  write_scan(bin, scene.cloud);
  write_labels(lab, scene.cloud);

  LabelConfig cfg;
  cfg.instance_classes = {1, 2, 3};
  cfg.feature_classes = {10, 11};
  auto loaded = load_scan(bin);
  loaded = load_labels(lab, loaded, cfg);
  REQUIRE(loaded.size() == scene.cloud.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    // Storage is float32; the loaded value must equal the float cast.
    CHECK(loaded.points[i].x() == static_cast<float>(scene.cloud.points[i].x()));
    CHECK(loaded.points[i].y() == static_cast<float>(scene.cloud.points[i].y()));
    CHECK(loaded.points[i].z() == static_cast<float>(scene.cloud.points[i].z()));
  }
  // Labels 12 (ground) fall outside the class sets and collapse to 0.
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    const auto orig = scene.cloud.labels[i];
    CHECK(loaded.labels[i] == (orig == 12 ? 0u : orig));
  }
}

TEST_CASE("permute_cloud shuffles without losing points") {
  const Scene scene = generate_scene(default_scene_spec(41));
  const auto shuffled = permute_cloud(scene.cloud, 99);
  REQUIRE(shuffled.size() == scene.cloud.size());
  std::multiset<double> a, b;
  for (const auto& p : scene.cloud.points) a.insert(p.x());
  for (const auto& p : shuffled.points) b.insert(p.x());
  CHECK(a == b);
}
