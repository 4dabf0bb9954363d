#include "semreg/rng.hpp"

#include <Eigen/Geometry>

#include <numeric>

namespace semreg {

Mat3 XorShift64Star::random_rotation() {
  Eigen::Quaterniond q(normal(), normal(), normal(), normal());
  if (q.norm() < 1e-12) q = Eigen::Quaterniond::Identity();
  q.normalize();
  return q.toRotationMatrix();
}

std::vector<std::size_t> XorShift64Star::sample_without_replacement(
    std::size_t n, std::size_t k) {
  if (k > n) k = n;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace semreg
