#include "semreg/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace semreg {

KdTree3::KdTree3(std::span<const Vec3> points)
    : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 8);
    root_ = build(0, static_cast<int>(points_.size()));
  }
}

int KdTree3::build(int begin, int end) {
  Node node;
  node.begin = begin;
  node.end = end;
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  const Vec3 extent = hi - lo;
  int axis = 0;
  if (extent.y() > extent[axis]) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;
  if (extent[axis] <= 0.0) return id;  // all points identical

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](int a, int b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  nodes_[id].axis = axis;
  nodes_[id].split = points_[order_[mid]][axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree3::radius_search(const Vec3& q, double radius,
                            std::vector<int>& out) const {
  out.clear();
  if (root_ < 0) return;
  const double r2 = radius * radius;
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    if (n.left < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        const int p = order_[i];
        if ((points_[p] - q).squaredNorm() <= r2) out.push_back(p);
      }
      continue;
    }
    const double d = q[n.axis] - n.split;
    if (d <= radius) stack.push_back(n.left);
    if (d >= -radius) stack.push_back(n.right);
  }
  std::sort(out.begin(), out.end());
}

void KdTree3::knn_search(const Vec3& q, int k, std::vector<int>& out) const {
  out.clear();
  if (root_ < 0 || k <= 0) return;
  using Entry = std::pair<double, int>;  // (dist_sq, index), max-heap
  std::priority_queue<Entry> heap;
  double worst = std::numeric_limits<double>::infinity();

  std::vector<int> stack{root_};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    if (n.left < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        const int p = order_[i];
        const double d2 = (points_[p] - q).squaredNorm();
        if (static_cast<int>(heap.size()) < k) {
          heap.emplace(d2, p);
        } else if (d2 < heap.top().first ||
                   (d2 == heap.top().first && p < heap.top().second)) {
          heap.pop();
          heap.emplace(d2, p);
        }
        if (static_cast<int>(heap.size()) == k) worst = heap.top().first;
      }
      continue;
    }
    const double d = q[n.axis] - n.split;
    const double bound = static_cast<int>(heap.size()) < k
                             ? std::numeric_limits<double>::infinity()
                             : std::sqrt(worst);
    if (d <= bound) stack.push_back(n.left);
    if (d >= -bound) stack.push_back(n.right);
  }

  std::vector<Entry> entries;
  entries.reserve(heap.size());
  while (!heap.empty()) {
    entries.push_back(heap.top());
    heap.pop();
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.first != b.first ? a.first < b.first : a.second < b.second;
  });
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.second);
}

int KdTree3::nearest(const Vec3& q, double* dist_sq) const {
  std::vector<int> out;
  knn_search(q, 1, out);
  if (out.empty()) return -1;
  if (dist_sq) *dist_sq = (points_[out[0]] - q).squaredNorm();
  return out[0];
}

}  // namespace semreg
