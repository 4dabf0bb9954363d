#include "semreg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "semreg/rng.hpp"

namespace semreg {

namespace {

bool crop_keeps(const Crop& crop, const Vec3& p) {
  if (std::holds_alternative<NoCrop>(crop)) return true;
  if (const auto* hs = std::get_if<HalfSpaceCrop>(&crop))
    return hs->normal.dot(p) <= hs->offset;
  const auto& rg = std::get<RangeGateCrop>(crop);
  return p.norm() <= rg.max_range;
}

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
  for (const auto& inst : spec.instances) {
    if (inst.points_per_cluster <= 0 || inst.eig_min <= 0 ||
        inst.eig_max < inst.eig_min)
      throw std::runtime_error("generate_scene: invalid instance class spec");
  }
  for (const auto& surf : spec.surfaces) {
    if (surf.density_pts_per_m2 <= 0)
      throw std::runtime_error("generate_scene: surface density must be positive");
  }

  XorShift64Star rng(spec.seed);
  Scene scene;

  // Instance clusters: rejection-sampled centers with pairwise separation.
  std::vector<Vec3> centers;
  for (const auto& inst : spec.instances) {
    for (int c = 0; c < inst.count; ++c) {
      const double half_x = spec.extent_x / 2.0 - 1.0;
      const double half_y = spec.extent_y / 2.0 - 1.0;
      Vec3 center;
      bool placed = false;
      for (int attempt = 0; attempt < 2000; ++attempt) {
        center = Vec3(rng.uniform(-half_x, half_x), rng.uniform(-half_y, half_y),
                      rng.uniform(inst.z_min, inst.z_max));
        bool ok = true;
        for (const Vec3& other : centers) {
          if ((center - other).norm() < spec.min_separation) {
            ok = false;
            break;
          }
        }
        if (ok) {
          placed = true;
          break;
        }
      }
      if (!placed)
        throw std::runtime_error(
            "generate_scene: cannot pack clusters at min_separation " +
            std::to_string(spec.min_separation));
      centers.push_back(center);

      const Mat3 axes = rng.random_rotation();
      Vec3 eig;
      for (int k = 0; k < 3; ++k) eig[k] = rng.uniform(inst.eig_min, inst.eig_max);
      const Mat3 cov =
          axes * eig.asDiagonal() * axes.transpose();
      const Mat3 transform = axes * eig.cwiseSqrt().asDiagonal();

      GroundTruthCluster gt;
      gt.mean = center;
      gt.cov = 0.5 * (cov + cov.transpose());
      gt.label = inst.label;
      scene.clusters.push_back(gt);

      for (int p = 0; p < inst.points_per_cluster; ++p) {
        const Vec3 z = rng.normal_vec3();
        scene.cloud.points.push_back(center + transform * z);
        scene.cloud.labels.push_back(inst.label);
      }
    }
  }

  // Surface points: uniform per rectangle, count = area * density.
  for (const auto& surf : spec.surfaces) {
    for (const Rect& rect : surf.rects) {
      const int count = static_cast<int>(std::round(rect.area() * surf.density_pts_per_m2));
      for (int p = 0; p < count; ++p) {
        const double u = rng.uniform01();
        const double v = rng.uniform01();
        scene.cloud.points.push_back(rect.origin + u * rect.edge_u + v * rect.edge_v);
        scene.cloud.labels.push_back(surf.label);
      }
    }
  }
  return scene;
}

SemanticPointCloud derive_pair(const SemanticPointCloud& scene,
                               const Pose& pose, double noise_sigma,
                               const Crop& crop, std::uint64_t seed) {
  if (noise_sigma < 0)
    throw std::runtime_error("derive_pair: noise_sigma must be >= 0");
  XorShift64Star rng(seed);
  SemanticPointCloud out;
  out.points.reserve(scene.size());
  out.labels.reserve(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    Vec3 p = pose.apply(scene.points[i]);
    if (noise_sigma > 0) p += rng.normal_vec3(noise_sigma);
    if (!crop_keeps(crop, p)) continue;
    out.points.push_back(p);
    out.labels.push_back(scene.labels[i]);
  }
  if (out.empty() && !scene.empty())
    throw std::runtime_error("derive_pair: crop removed every point");
  return out;
}

std::vector<Correspondence> inject_outlier_matches(
    std::vector<Correspondence> corrs, double fraction, std::uint64_t seed) {
  if (fraction < 0 || fraction >= 1)
    throw std::runtime_error("inject_outlier_matches: fraction must be in [0, 1)");
  if (fraction == 0 || corrs.empty()) return corrs;

  const std::size_t n = corrs.size();
  const std::size_t extra = static_cast<std::size_t>(
      std::ceil(fraction / (1.0 - fraction) * static_cast<double>(n)));

  // Endpoint pools per label.
  std::map<std::uint32_t, std::vector<const Correspondence*>> by_label;
  for (const Correspondence& c : corrs) by_label[c.label].push_back(&c);
  std::vector<std::uint32_t> labels;
  for (const auto& [label, list] : by_label) labels.push_back(label);

  XorShift64Star rng(seed);
  corrs.reserve(n + extra);
  for (std::size_t k = 0; k < extra; ++k) {
    const std::uint32_t label = labels[rng.below(labels.size())];
    const auto& pool = by_label[label];
    const Correspondence& a = *pool[rng.below(pool.size())];
    const Correspondence& b = *pool[rng.below(pool.size())];
    Correspondence c;
    c.src_mean = a.src_mean;
    c.src_cov = a.src_cov;
    c.dst_mean = b.dst_mean;
    c.dst_cov = b.dst_cov;
    c.label = label;
    c.origin = a.origin;
    c.match_distance = 1e6;  // sorts after genuine matches
    corrs.push_back(c);
  }
  return corrs;
}

std::vector<Rect> make_shell_rects(double half_x, double half_y, double height) {
  std::vector<Rect> rects;
  const Vec3 up(0, 0, height);
  rects.push_back({Vec3(-half_x, -half_y, 0), Vec3(2 * half_x, 0, 0), up});
  rects.push_back({Vec3(-half_x, half_y, 0), Vec3(2 * half_x, 0, 0), up});
  rects.push_back({Vec3(-half_x, -half_y, 0), Vec3(0, 2 * half_y, 0), up});
  rects.push_back({Vec3(half_x, -half_y, 0), Vec3(0, 2 * half_y, 0), up});
  return rects;
}

std::vector<Rect> make_box_rects(const Vec3& center, const Vec3& size,
                                 double yaw_rad, bool include_top) {
  const Mat3 r = yaw_rotation(yaw_rad);
  const Vec3 ex = r * Vec3(size.x(), 0, 0);
  const Vec3 ey = r * Vec3(0, size.y(), 0);
  const Vec3 ez(0, 0, size.z());
  const Vec3 base = center - 0.5 * (ex + ey) - Vec3(0, 0, size.z() / 2.0);

  std::vector<Rect> rects;
  rects.push_back({base, ex, ez});
  rects.push_back({base + ey, ex, ez});
  rects.push_back({base, ey, ez});
  rects.push_back({base + ex, ey, ez});
  if (include_top) rects.push_back({base + ez, ex, ey});
  return rects;
}

Rect make_ground_rect(double half_x, double half_y) {
  return {Vec3(-half_x, -half_y, 0), Vec3(2 * half_x, 0, 0), Vec3(0, 2 * half_y, 0)};
}

SceneSpec default_scene_spec(std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  spec.extent_x = 44.0;
  spec.extent_y = 44.0;
  spec.min_separation = 3.0;

  spec.instances.push_back({1, 7, 180, 0.05, 0.45, 0.4, 1.2});
  spec.instances.push_back({2, 5, 130, 0.02, 0.30, 0.8, 2.0});
  spec.instances.push_back({3, 5, 110, 0.02, 0.25, 1.0, 2.5});

  SurfaceClassSpec walls;
  walls.label = 10;
  // Dense enough that a 90% label dropout still leaves usable geometry.
  walls.density_pts_per_m2 = 18.0;
  walls.rects = make_shell_rects(20.0, 20.0, 2.5);
  XorShift64Star rng(seed ^ 0xABCDEF12345ULL);
  for (int b = 0; b < 3; ++b) {
    const Vec3 center(rng.uniform(-13, 13), rng.uniform(-13, 13), 1.5);
    const Vec3 size(rng.uniform(3.5, 6.0), rng.uniform(2.5, 4.5), 3.0);
    const auto box = make_box_rects(center, size, rng.uniform(0, M_PI), true);
    walls.rects.insert(walls.rects.end(), box.begin(), box.end());
  }
  spec.surfaces.push_back(walls);

  SurfaceClassSpec ground;
  ground.label = 12;  // neither instance nor feature class by default
  ground.density_pts_per_m2 = 1.5;
  ground.rects.push_back(make_ground_rect(21.0, 21.0));
  spec.surfaces.push_back(ground);
  return spec;
}

Scene generate_crossings_scene(std::uint64_t seed) {
  XorShift64Star rng(seed);
  Scene scene;

  struct PairSpec {
    std::uint32_t label;
    int pairs;
    int points;
  };
  const PairSpec layout[] = {{1, 3, 160}, {2, 2, 130}};
  const double min_sep = 4.5;

  std::vector<Vec3> centers;
  auto place = [&](double z_lo, double z_hi) {
    for (int attempt = 0; attempt < 4000; ++attempt) {
      const Vec3 c(rng.uniform(-16, 16), rng.uniform(-16, 16),
                   rng.uniform(z_lo, z_hi));
      const Vec3 mirror(-c.x(), -c.y(), c.z());
      if ((c - mirror).head<2>().norm() < min_sep) continue;
      bool ok = true;
      for (const Vec3& other : centers) {
        if ((c - other).norm() < min_sep || (mirror - other).norm() < min_sep) {
          ok = false;
          break;
        }
      }
      if (ok) return c;
    }
    throw std::runtime_error("generate_crossings_scene: packing failed");
  };

  auto add_cluster = [&](const Vec3& center, std::uint32_t label, int points) {
    const Mat3 axes = rng.random_rotation();
    Vec3 eig;
    eig << rng.uniform(0.25, 0.55), rng.uniform(0.04, 0.10),
        rng.uniform(0.01, 0.03);  // strongly anisotropic
    const Mat3 cov = axes * eig.asDiagonal() * axes.transpose();
    const Mat3 transform = axes * eig.cwiseSqrt().asDiagonal();
    scene.clusters.push_back({center, 0.5 * (cov + cov.transpose()), label});
    for (int p = 0; p < points; ++p) {
      scene.cloud.points.push_back(center + transform * rng.normal_vec3());
      scene.cloud.labels.push_back(label);
    }
  };

  for (const PairSpec& ps : layout) {
    for (int k = 0; k < ps.pairs; ++k) {
      const Vec3 c = place(0.5, 1.5);
      const Vec3 mirror(-c.x(), -c.y(), c.z());
      centers.push_back(c);
      centers.push_back(mirror);
      add_cluster(c, ps.label, ps.points);
      add_cluster(mirror, ps.label, ps.points);
    }
  }
  return scene;
}

SemanticPointCloud permute_cloud(const SemanticPointCloud& cloud,
                                 std::uint64_t seed) {
  XorShift64Star rng(seed);
  const auto order = rng.sample_without_replacement(cloud.size(), cloud.size());
  SemanticPointCloud out;
  out.points.reserve(cloud.size());
  out.labels.reserve(cloud.size());
  for (std::size_t i : order) {
    out.points.push_back(cloud.points[i]);
    out.labels.push_back(cloud.labels[i]);
  }
  return out;
}

SceneSpec corridor_scene_spec(std::uint64_t seed, double half_x, double half_y) {
  SceneSpec spec;
  spec.seed = seed;
  spec.extent_x = 2.0 * half_x;
  spec.extent_y = 2.0 * half_y;
  spec.min_separation = 3.0;

  spec.instances.push_back({1, 10, 170, 0.05, 0.45, 0.4, 1.2});
  spec.instances.push_back({2, 7, 130, 0.02, 0.30, 0.8, 2.0});
  spec.instances.push_back({3, 7, 110, 0.02, 0.25, 1.0, 2.5});

  SurfaceClassSpec walls;
  walls.label = 10;
  walls.density_pts_per_m2 = 6.0;
  walls.rects = make_shell_rects(half_x, half_y, 2.2);
  XorShift64Star rng(seed ^ 0x5EEDB0CE5ULL);
  const int boxes = static_cast<int>(half_x / 8.0);
  for (int b = 0; b < boxes; ++b) {
    const double x = rng.uniform(-half_x + 5, half_x - 5);
    const double y = rng.uniform(-half_y + 4, half_y - 4);
    const Vec3 size(rng.uniform(3.0, 5.5), rng.uniform(2.5, 4.0), 2.8);
    const auto box = make_box_rects(Vec3(x, y, 1.4), size, rng.uniform(0, M_PI), true);
    walls.rects.insert(walls.rects.end(), box.begin(), box.end());
  }
  spec.surfaces.push_back(walls);
  return spec;
}

std::vector<Pose> u_turn_trajectory(int poses_per_leg, double spacing,
                                    double leg_gap) {
  std::vector<Pose> poses;
  poses.reserve(2 * poses_per_leg);
  const double x0 = -(poses_per_leg - 1) * spacing / 2.0;
  for (int i = 0; i < poses_per_leg; ++i) {
    Pose p;
    p.translation = Vec3(x0 + i * spacing, -leg_gap / 2.0, 0);
    poses.push_back(p);
  }
  for (int i = 0; i < poses_per_leg; ++i) {
    Pose p;
    p.rotation = yaw_rotation(M_PI);
    p.translation = Vec3(x0 + (poses_per_leg - 1 - i) * spacing, leg_gap / 2.0, 0);
    poses.push_back(p);
  }
  return poses;
}

}  // namespace semreg
