#pragma once

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <vector>

#include "mtt/types.hpp"

namespace mtt {

/// Exact k-nearest-neighbor tree over low-dimensional points (columns of a
/// d x N matrix). Median splits, one point per node. Ties broken by index so
/// queries are deterministic under duplicated points.
class KdTree {
 public:
  explicit KdTree(MatX pts) : pts_(std::move(pts)) {
    const int n = static_cast<int>(pts_.cols());
    if (n == 0) throw std::invalid_argument("empty point set");
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    nodes_.reserve(n);
    root_ = build(ids, 0, n, 0);
  }

  int size() const { return static_cast<int>(pts_.cols()); }
  const MatX& points() const { return pts_; }

  /// k nearest neighbors of q, ascending distance; `exclude` skips one index
  /// (the query point itself when querying from the set).
  void knn(const VecX& q, int k, std::vector<int>& idx, std::vector<double>& dist,
           int exclude = -1) const {
    if (k < 1) throw std::invalid_argument("k must be positive");
    Heap heap;
    search(root_, q, k, exclude, heap);
    idx.resize(heap.size());
    dist.resize(heap.size());
    for (int i = static_cast<int>(heap.size()) - 1; i >= 0; --i) {
      idx[i] = heap.top().second;
      dist[i] = std::sqrt(heap.top().first);
      heap.pop();
    }
  }

  /// All indices within (inclusive) radius of q.
  void radius(const VecX& q, double rad, std::vector<int>& idx, int exclude = -1) const {
    idx.clear();
    radius_search(root_, q, rad * rad, exclude, idx);
  }

 private:
  using Entry = std::pair<double, int>;  // (squared distance, index)
  using Heap = std::priority_queue<Entry>;

  struct Node {
    int point = -1;
    int left = -1, right = -1;
    int dim = 0;
    double split = 0.0;
  };

  int build(std::vector<int>& ids, int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int dim = depth % static_cast<int>(pts_.rows());
    const int mid = (lo + hi) / 2;
    std::nth_element(ids.begin() + lo, ids.begin() + mid, ids.begin() + hi,
                     [&](int a, int b) {
                       const double pa = pts_(dim, a), pb = pts_(dim, b);
                       return pa < pb || (pa == pb && a < b);
                     });
    Node node;
    node.point = ids[mid];
    node.dim = dim;
    node.split = pts_(dim, ids[mid]);
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    nodes_[self].left = build(ids, lo, mid, depth + 1);
    nodes_[self].right = build(ids, mid + 1, hi, depth + 1);
    return self;
  }

  void search(int ni, const VecX& q, int k, int exclude, Heap& heap) const {
    if (ni < 0) return;
    const Node& node = nodes_[ni];
    const int p = node.point;
    if (p != exclude) {
      const double d2 = (pts_.col(p) - q).squaredNorm();
      const Entry e{d2, p};
      if (static_cast<int>(heap.size()) < k) {
        heap.push(e);
      } else if (e < heap.top()) {
        heap.pop();
        heap.push(e);
      }
    }
    const double diff = q[node.dim] - node.split;
    const int near = diff <= 0.0 ? node.left : node.right;
    const int far = diff <= 0.0 ? node.right : node.left;
    search(near, q, k, exclude, heap);
    if (static_cast<int>(heap.size()) < k || diff * diff <= heap.top().first)
      search(far, q, k, exclude, heap);
  }

  void radius_search(int ni, const VecX& q, double rad2, int exclude,
                     std::vector<int>& out) const {
    if (ni < 0) return;
    const Node& node = nodes_[ni];
    const int p = node.point;
    if (p != exclude && (pts_.col(p) - q).squaredNorm() <= rad2) out.push_back(p);
    const double diff = q[node.dim] - node.split;
    const int near = diff <= 0.0 ? node.left : node.right;
    const int far = diff <= 0.0 ? node.right : node.left;
    radius_search(near, q, rad2, exclude, out);
    if (diff * diff <= rad2) radius_search(far, q, rad2, exclude, out);
  }

  MatX pts_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace mtt
