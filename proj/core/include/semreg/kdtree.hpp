#pragma once

#include <span>
#include <vector>

#include "semreg/geometry.hpp"

namespace semreg {

/// Static 3-d kd-tree over a copied point set. Median splits along the
/// widest axis; queries return original point indices.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(std::span<const Vec3> points);

  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }

  /// Indices of points with ||p - q|| <= radius, ascending by index.
  void radius_search(const Vec3& q, double radius,
                     std::vector<int>& out) const;

  /// k nearest indices ordered by (distance, index).
  void knn_search(const Vec3& q, int k, std::vector<int>& out) const;

  /// Nearest point index, or -1 on an empty tree.
  int nearest(const Vec3& q, double* dist_sq = nullptr) const;

 private:
  struct Node {
    int left = -1;
    int right = -1;
    int begin = 0;
    int end = 0;  // leaf range into order_
    int axis = 0;
    double split = 0.0;
  };

  int build(int begin, int end);

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr int kLeafSize = 16;
};

}  // namespace semreg
