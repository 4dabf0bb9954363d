#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "semreg/types.hpp"

namespace semreg {

/// A planar rectangle: origin corner plus two edge vectors.
struct Rect {
  Vec3 origin;
  Vec3 edge_u;
  Vec3 edge_v;

  double area() const { return edge_u.cross(edge_v).norm(); }
};

/// Gaussian-blob instance class: `count` clusters of `points_per_cluster`
/// samples with covariance eigenvalues drawn from [eig_min, eig_max] m^2.
struct InstanceClassSpec {
  std::uint32_t label = 1;
  int count = 5;
  int points_per_cluster = 150;
  double eig_min = 0.02;
  double eig_max = 0.4;
  double z_min = 0.4;
  double z_max = 1.5;
};

/// Feature-class geometry sampled uniformly on rectangles.
struct SurfaceClassSpec {
  std::uint32_t label = 10;
  double density_pts_per_m2 = 12.0;
  std::vector<Rect> rects;
};

struct SceneSpec {
  double extent_x = 44.0;       // scene spans [-extent/2, extent/2]
  double extent_y = 44.0;
  double min_separation = 3.0;  // between instance cluster centers
  std::uint64_t seed = 7;
  std::vector<InstanceClassSpec> instances;
  std::vector<SurfaceClassSpec> surfaces;
};

struct GroundTruthCluster {
  Vec3 mean;
  Mat3 cov;
  std::uint32_t label;
};

struct Scene {
  SemanticPointCloud cloud;
  std::vector<GroundTruthCluster> clusters;
};

/// Deterministic per seed. Throws std::runtime_error when the requested
/// cluster count cannot be packed at min_separation.
Scene generate_scene(const SceneSpec& spec);

struct NoCrop {};
struct HalfSpaceCrop {
  Vec3 normal;    // keep points with normal . p <= offset
  double offset;
};
struct RangeGateCrop {
  double max_range;  // keep points with ||p|| <= max_range
};
using Crop = std::variant<NoCrop, HalfSpaceCrop, RangeGateCrop>;

/// Second scan of a pair with known transform: scene points mapped by
/// `pose`, per-coordinate Gaussian noise added, crop applied last. Labels
/// are preserved. Throws std::runtime_error when the crop removes all
/// points.
SemanticPointCloud derive_pair(const SemanticPointCloud& scene,
                               const Pose& pose, double noise_sigma,
                               const Crop& crop, std::uint64_t seed);

/// Appends ceil(fraction/(1-fraction) * n) outlier correspondences that
/// pair uniformly random same-label measurements drawn from the input
/// set's endpoint pools. Deterministic per seed.
std::vector<Correspondence> inject_outlier_matches(
    std::vector<Correspondence> corrs, double fraction, std::uint64_t seed);

/// Walls of the [-half, half]^2 perimeter as rectangles of given height.
std::vector<Rect> make_shell_rects(double half_x, double half_y, double height);

/// Side faces (and optionally the top) of a yawed box.
std::vector<Rect> make_box_rects(const Vec3& center, const Vec3& size,
                                 double yaw_rad, bool include_top = true);

/// Horizontal rectangle at z = 0 covering the scene footprint.
Rect make_ground_rect(double half_x, double half_y);

/// The standard desk-scale fixture: three instance classes among walls,
/// boxes, and sparse ground.
SceneSpec default_scene_spec(std::uint64_t seed);

/// Rotation-symmetric instance layout: same-label cluster pairs mapped
/// onto each other by a 180-degree yaw about the origin, with independent
/// anisotropic covariances. Floods the all-to-all consistency graph with
/// length-preserving crossings that only distribution checks separate.
Scene generate_crossings_scene(std::uint64_t seed);

/// Same cloud with points in a seeded random order (scans never agree on
/// point order in practice; segmentation must not care).
SemanticPointCloud permute_cloud(const SemanticPointCloud& cloud,
                                 std::uint64_t seed);

/// Corridor scene sized for loop-closure trajectories along +-x.
SceneSpec corridor_scene_spec(std::uint64_t seed, double half_x, double half_y);

/// Out-and-back trajectory: one leg along +x, U-turn, return leg along -x
/// offset by leg_gap in y. Headings follow the travel direction.
std::vector<Pose> u_turn_trajectory(int poses_per_leg, double spacing,
                                    double leg_gap);

}  // namespace semreg
