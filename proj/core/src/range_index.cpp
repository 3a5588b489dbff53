#include "embres/range_index.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "embres/errors.hpp"

namespace embres {

RangeIndex::RangeIndex(const PointCloud& cloud, std::size_t leaf_size)
    : dim_(cloud.dim()), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  const std::size_t count = cloud.size();
  ids_.resize(count);
  std::iota(ids_.begin(), ids_.end(), std::size_t{0});
  // Build over a scratch copy, then lay the coordinates out in tree order.
  coords_.assign(cloud.coords().begin(), cloud.coords().end());
  nodes_.reserve(2 * count / leaf_size_ + 2);
  build(0, count);

  std::vector<double> ordered(count * dim_);
  for (std::size_t i = 0; i < count; ++i) {
    auto p = cloud.point(ids_[i]);
    std::copy(p.begin(), p.end(), ordered.begin() + static_cast<std::ptrdiff_t>(i * dim_));
  }
  coords_ = std::move(ordered);
}

std::ptrdiff_t RangeIndex::build(std::size_t begin, std::size_t end) {
  const auto node_id = static_cast<std::ptrdiff_t>(nodes_.size());
  nodes_.push_back({begin, end});
  lo_.resize(lo_.size() + dim_);
  hi_.resize(hi_.size() + dim_);

  double* lo = lo_.data() + node_id * static_cast<std::ptrdiff_t>(dim_);
  double* hi = hi_.data() + node_id * static_cast<std::ptrdiff_t>(dim_);
  for (std::size_t k = 0; k < dim_; ++k) {
    lo[k] = std::numeric_limits<double>::infinity();
    hi[k] = -std::numeric_limits<double>::infinity();
  }
  for (std::size_t i = begin; i < end; ++i) {
    const double* p = coords_.data() + ids_[i] * dim_;
    for (std::size_t k = 0; k < dim_; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
  if (end - begin <= leaf_size_) return node_id;

  std::size_t axis = 0;
  double widest = -1.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    if (hi[k] - lo[k] > widest) {
      widest = hi[k] - lo[k];
      axis = k;
    }
  }
  if (widest <= 0.0) return node_id;  // all points coincide

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(ids_.begin() + static_cast<std::ptrdiff_t>(begin),
                   ids_.begin() + static_cast<std::ptrdiff_t>(mid),
                   ids_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     const double va = coords_[a * dim_ + axis];
                     const double vb = coords_[b * dim_ + axis];
                     return va < vb || (va == vb && a < b);
                   });
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[static_cast<std::size_t>(node_id)].left = left;
  nodes_[static_cast<std::size_t>(node_id)].right = right;
  return node_id;
}

double RangeIndex::box_sq_gap(std::size_t node, std::span<const double> q) const noexcept {
  const double* lo = lo_.data() + node * dim_;
  const double* hi = hi_.data() + node * dim_;
  double acc = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    double gap = 0.0;
    if (q[k] < lo[k]) {
      gap = q[k] - lo[k];
    } else if (q[k] > hi[k]) {
      gap = q[k] - hi[k];
    }
    acc += gap * gap;
  }
  return acc;
}

void RangeIndex::check_query(std::span<const double> center, double r) const {
  if (center.size() != dim_)
    fail(ErrorCode::DimensionMismatch, "query has " + std::to_string(center.size()) +
                                           " coordinates, index has n=" + std::to_string(dim_));
  if (!(r >= 0.0)) fail(ErrorCode::InvalidArgument, "radius must be >= 0");
}

template <class Visit>
void RangeIndex::visit_ball(std::span<const double> center, double r2, Visit&& visit) const {
  if (nodes_.empty()) return;
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const std::size_t id = stack.back();
    stack.pop_back();
    if (box_sq_gap(id, center) > r2) continue;
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const double d2 = squared_distance(center, {coords_.data() + i * dim_, dim_});
        if (d2 <= r2) visit(i, d2);
      }
    } else {
      stack.push_back(static_cast<std::size_t>(node.right));
      stack.push_back(static_cast<std::size_t>(node.left));
    }
  }
}

std::size_t RangeIndex::range_count(std::span<const double> center, double r) const {
  check_query(center, r);
  std::size_t count = 0;
  visit_ball(center, r * r, [&](std::size_t, double) { ++count; });
  return count;
}

std::vector<std::size_t> RangeIndex::range_query(std::span<const double> center, double r) const {
  check_query(center, r);
  std::vector<std::size_t> out;
  visit_ball(center, r * r, [&](std::size_t i, double) { out.push_back(ids_[i]); });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> RangeIndex::sorted_sq_distances(std::span<const double> center, double r) const {
  check_query(center, r);
  std::vector<double> out;
  visit_ball(center, r * r, [&](std::size_t, double d2) { out.push_back(d2); });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<double, std::size_t>> RangeIndex::nearest(std::span<const double> center,
                                                                std::size_t k) const {
  if (center.size() != dim_) fail(ErrorCode::DimensionMismatch, "query dimension");
  k = std::min(k, ids_.size());
  if (k == 0) return {};
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry> best;  // max-heap on (d2, id)
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const std::size_t id = stack.back();
    stack.pop_back();
    const double gap = box_sq_gap(id, center);
    if (best.size() == k && gap > best.top().first) continue;
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const Entry e{squared_distance(center, {coords_.data() + i * dim_, dim_}), ids_[i]};
        if (best.size() < k) {
          best.push(e);
        } else if (e < best.top()) {
          best.pop();
          best.push(e);
        }
      }
    } else {
      const auto l = static_cast<std::size_t>(node.left);
      const auto r = static_cast<std::size_t>(node.right);
      // Descend into the nearer child first.
      if (box_sq_gap(l, center) <= box_sq_gap(r, center)) {
        stack.push_back(r);
        stack.push_back(l);
      } else {
        stack.push_back(l);
        stack.push_back(r);
      }
    }
  }
  std::vector<Entry> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.push_back(best.top());
    best.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::size_t range_count(const PointCloud& cloud, std::span<const double> center, double r) {
  return RangeIndex(cloud).range_count(center, r);
}

}  // namespace embres
