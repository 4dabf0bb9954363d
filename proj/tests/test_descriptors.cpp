#include "doctest.h"

#include <cmath>

#include "semreg/descriptors.hpp"
#include "semreg/rng.hpp"
#include "test_util.hpp"

using namespace semreg;

namespace {

SemanticPointCloud grid_plane(double half, double step, double z,
                              std::uint32_t label) {
  SemanticPointCloud cloud;
  for (double x = -half; x <= half; x += step) {
    for (double y = -half; y <= half; y += step) {
      cloud.points.emplace_back(x, y, z);
      cloud.labels.push_back(label);
    }
  }
  return cloud;
}

// Bumpy surface patch with distinctive local curvature everywhere.
SemanticPointCloud bumpy_patch(std::uint32_t label) {
  SemanticPointCloud cloud;
  for (double x = 0; x <= 4.0; x += 0.25) {
    for (double y = 0; y <= 4.0; y += 0.25) {
      const double z =
          0.25 * std::sin(1.37 * x) * std::cos(0.83 * y) +
          0.18 * std::sin(2.11 * x + 1.73 * y);
      cloud.points.emplace_back(x, y, z + 1.0);
      cloud.labels.push_back(label);
    }
  }
  return cloud;
}

SemanticPointCloud transformed(const SemanticPointCloud& cloud, const Mat3& r,
                               const Vec3& t) {
  SemanticPointCloud out = cloud;
  for (auto& p : out.points) p = r * p + t;
  return out;
}

void append(SemanticPointCloud& cloud, const SemanticPointCloud& other) {
  cloud.points.insert(cloud.points.end(), other.points.begin(), other.points.end());
  cloud.labels.insert(cloud.labels.end(), other.labels.begin(), other.labels.end());
}

}  // namespace

TEST_CASE("estimate_normals on a dense plane returns +-z") {
  // Plane at z=2 so the sensor-origin flip is exercised.
  const auto cloud = grid_plane(2.0, 0.2, 2.0, 10);
  const auto normals = estimate_normals(cloud, 0.5);
  REQUIRE(normals.size() == cloud.size());
  for (std::size_t i = 0; i < normals.size(); ++i) {
    REQUIRE(is_valid_normal(normals[i]));
    CHECK(std::abs(std::abs(normals[i].z()) - 1.0) < 1e-6);
    CHECK(normals[i].dot(cloud.points[i]) <= 0);  // faces the origin
  }
}

TEST_CASE("estimate_normals on a sphere is radial within 5 degrees") {
  XorShift64Star rng(17);
  SemanticPointCloud cloud;
  for (int i = 0; i < 800; ++i) {
    Vec3 dir = rng.normal_vec3();
    while (dir.norm() < 1e-6) dir = rng.normal_vec3();
    cloud.points.push_back(dir.normalized());
    cloud.labels.push_back(10);
  }
  const auto normals = estimate_normals(cloud, 0.3);
  int valid = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!is_valid_normal(normals[i])) continue;
    ++valid;
    const Vec3 radial = cloud.points[i].normalized();
    const double cosang = std::abs(normals[i].dot(radial));
    CHECK(std::acos(std::min(1.0, cosang)) < 5.0 * M_PI / 180.0);
  }
  CHECK(valid > 700);
}

TEST_CASE("estimate_normals marks isolated points invalid") {
  SemanticPointCloud cloud;
  cloud.points = {Vec3(0, 0, 1), Vec3(50, 50, 50)};
  cloud.labels = {10, 10};
  const auto normals = estimate_normals(cloud, 1.0);
  CHECK(!is_valid_normal(normals[0]));
  CHECK(!is_valid_normal(normals[1]));
}

TEST_CASE("fpfh is self-similar on plane interiors") {
  const auto cloud = grid_plane(4.0, 0.25, 0.5, 10);
  const auto normals = estimate_normals(cloud, 0.6);
  const auto desc = compute_fpfh(cloud, normals, 1.0);

  std::vector<int> interior;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (cloud.points[i].head<2>().cwiseAbs().maxCoeff() < 2.5)
      interior.push_back(static_cast<int>(i));
  REQUIRE(interior.size() > 50);

  double h_l1 = 0;
  for (double v : desc[interior[0]].histogram) h_l1 += std::abs(v);
  for (std::size_t k = 1; k < interior.size(); k += 7) {
    double l1 = 0;
    for (int b = 0; b < 33; ++b)
      l1 += std::abs(desc[interior[0]].histogram[b] -
                     desc[interior[k]].histogram[b]);
    CHECK(l1 < 0.05 * h_l1);
  }
}

TEST_CASE("fpfh is invariant under rigid transformation") {
  XorShift64Star rng(23);
  SemanticPointCloud cloud;
  for (int i = 0; i < 400; ++i) {
    cloud.points.push_back(
        Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-1, 1)));
    cloud.labels.push_back(10);
  }
  const Mat3 r = rng.random_rotation();
  const Vec3 t(4.2, -1.7, 0.9);
  const auto moved = transformed(cloud, r, t);

  const auto n_a = estimate_normals(cloud, 1.0);
  const auto n_b = estimate_normals(moved, 1.0);
  const auto d_a = compute_fpfh(cloud, n_a, 2.5);
  const auto d_b = compute_fpfh(moved, n_b, 2.5);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int b = 0; b < 33; ++b)
      CHECK(std::abs(d_a[i].histogram[b] - d_b[i].histogram[b]) < 1e-6);
  }
}

TEST_CASE("points with invalid normals get the zero descriptor") {
  SemanticPointCloud cloud = grid_plane(1.0, 0.2, 0.5, 10);
  cloud.points.push_back(Vec3(40, 40, 40));  // isolated
  cloud.labels.push_back(10);
  const auto normals = estimate_normals(cloud, 0.5);
  const auto desc = compute_fpfh(cloud, normals, 1.0);
  REQUIRE(!is_valid_normal(normals.back()));
  for (double v : desc.back().histogram) CHECK(v == 0.0);
}

TEST_CASE("match_descriptors maps identical clouds onto themselves") {
  const auto cloud = bumpy_patch(10);
  const auto normals = estimate_normals(cloud, 0.6);
  const auto desc = compute_fpfh(cloud, normals, 1.2);
  const auto matches =
      match_descriptors(desc, desc, cloud.labels, cloud.labels);
  int valid = 0;
  for (const auto& d : desc) {
    bool zero = true;
    for (double v : d.histogram) zero &= (v == 0.0);
    if (!zero) ++valid;
  }
  CHECK(static_cast<int>(matches.size()) == valid);
  for (const auto& m : matches) CHECK(m.src_index == m.dst_index);
}

TEST_CASE("match_descriptors removes cross-label pairs") {
  const auto patch = bumpy_patch(10);
  auto as_label = [&](std::uint32_t label) {
    SemanticPointCloud c = patch;
    c.labels.assign(c.size(), label);
    return c;
  };
  const auto src = as_label(10);
  const auto dst = as_label(11);
  const auto n_s = estimate_normals(src, 0.6);
  const auto n_d = estimate_normals(dst, 0.6);
  const auto d_s = compute_fpfh(src, n_s, 1.2);
  const auto d_d = compute_fpfh(dst, n_d, 1.2);
  CHECK(match_descriptors(d_s, d_d, src.labels, dst.labels).empty());
}

TEST_CASE("match_descriptors is symmetric in src/dst") {
  XorShift64Star rng(31);
  auto cloud_a = bumpy_patch(10);
  auto cloud_b = transformed(cloud_a, rng.random_rotation(), Vec3(1, 2, 0.3));
  const auto n_a = estimate_normals(cloud_a, 0.6);
  const auto n_b = estimate_normals(cloud_b, 0.6);
  const auto d_a = compute_fpfh(cloud_a, n_a, 1.2);
  const auto d_b = compute_fpfh(cloud_b, n_b, 1.2);

  const auto fwd = match_descriptors(d_a, d_b, cloud_a.labels, cloud_b.labels);
  const auto bwd = match_descriptors(d_b, d_a, cloud_b.labels, cloud_a.labels);
  REQUIRE(fwd.size() == bwd.size());
  std::set<std::pair<int, int>> fwd_set, bwd_set;
  for (const auto& m : fwd) fwd_set.emplace(m.src_index, m.dst_index);
  for (const auto& m : bwd) bwd_set.emplace(m.dst_index, m.src_index);
  CHECK(fwd_set == bwd_set);
}

TEST_CASE("match_descriptors recovers a planted structure among clutter") {
  XorShift64Star rng(41);
  const auto patch = bumpy_patch(10);
  const std::size_t planted = patch.size();

  auto make_clutter = [&](std::uint64_t seed, const Vec3& offset) {
    XorShift64Star crng(seed);
    SemanticPointCloud clutter;
    for (int i = 0; i < 300; ++i) {
      clutter.points.push_back(offset + crng.normal_vec3(1.5));
      clutter.labels.push_back(10);
    }
    return clutter;
  };

  SemanticPointCloud src = patch;
  append(src, make_clutter(1001, Vec3(15, 0, 0)));

  const Mat3 r = yaw_rotation(30.0 * M_PI / 180.0);
  const Vec3 t(2.0, -1.0, 0.5);
  SemanticPointCloud dst = transformed(patch, r, t);
  append(dst, make_clutter(2002, Vec3(-15, 5, 0)));

  const auto n_s = estimate_normals(src, 0.6);
  const auto n_d = estimate_normals(dst, 0.6);
  const auto d_s = compute_fpfh(src, n_s, 1.2);
  const auto d_d = compute_fpfh(dst, n_d, 1.2);
  const auto matches = match_descriptors(d_s, d_d, src.labels, dst.labels);

  int recovered = 0;
  for (const auto& m : matches)
    if (m.src_index < static_cast<int>(planted) && m.src_index == m.dst_index)
      ++recovered;
  CHECK(recovered >= static_cast<int>(0.8 * planted));
}

TEST_CASE("voxel_downsample keeps labels separate inside one voxel") {
  SemanticPointCloud cloud;
  cloud.points = {Vec3(0.1, 0.1, 0.1), Vec3(0.2, 0.2, 0.2), Vec3(0.15, 0.1, 0.1)};
  cloud.labels = {10, 10, 11};
  const auto ds = voxel_downsample(cloud, 1.0);
  REQUIRE(ds.size() == 2);  // one per (voxel, label)
}
