#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "embres/point_cloud.hpp"

namespace embres {

/// Exact fixed-radius index over a PointCloud (kd-tree, bounding-box pruning).
///
/// Membership is decided with squared_distance(center, p) <= r*r, the same
/// expression a linear scan uses. Box lower bounds are accumulated in the same
/// coordinate order, so rounding can never prune a point the scan would keep.
/// The index owns a reordered copy of the coordinates and is safe for
/// concurrent queries.
class RangeIndex {
public:
  explicit RangeIndex(const PointCloud& cloud, std::size_t leaf_size = 16);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  /// Number of points with distance <= r (closed ball, duplicates counted).
  std::size_t range_count(std::span<const double> center, double r) const;

  /// Ids of points within the closed ball, ascending.
  std::vector<std::size_t> range_query(std::span<const double> center, double r) const;

  /// Squared distances of all points within the closed ball, ascending.
  std::vector<double> sorted_sq_distances(std::span<const double> center, double r) const;

  /// k nearest points as (squared distance, id), ascending; ties by id.
  std::vector<std::pair<double, std::size_t>> nearest(std::span<const double> center,
                                                      std::size_t k) const;

private:
  struct Node {
    std::size_t begin;
    std::size_t end;
    std::ptrdiff_t left = -1;
    std::ptrdiff_t right = -1;
  };

  std::ptrdiff_t build(std::size_t begin, std::size_t end);
  double box_sq_gap(std::size_t node, std::span<const double> q) const noexcept;
  void check_query(std::span<const double> center, double r) const;

  template <class Visit>
  void visit_ball(std::span<const double> center, double r2, Visit&& visit) const;

  std::size_t dim_;
  std::size_t leaf_size_;
  std::vector<double> coords_;  // reordered, row-major
  std::vector<std::size_t> ids_;
  std::vector<Node> nodes_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

/// range_count over a cloud; builds a throwaway index.
std::size_t range_count(const PointCloud& cloud, std::span<const double> center, double r);

}  // namespace embres
