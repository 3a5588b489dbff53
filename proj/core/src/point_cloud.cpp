#include "embres/point_cloud.hpp"

#include <cmath>

#include "embres/errors.hpp"

namespace embres {

PointCloud::PointCloud(std::size_t dim, std::vector<double> coords,
                       std::optional<std::vector<std::string>> labels)
    : dim_(dim), count_(0), coords_(std::move(coords)), labels_(std::move(labels)) {
  if (dim_ < 2) fail(ErrorCode::InvalidArgument, "ambient dimension must be >= 2");
  if (coords_.empty() || coords_.size() % dim_ != 0)
    fail(ErrorCode::DimensionMismatch,
         "coordinate buffer of length " + std::to_string(coords_.size()) +
             " is not a positive multiple of n=" + std::to_string(dim_));
  count_ = coords_.size() / dim_;
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (!std::isfinite(coords_[i]))
      fail(ErrorCode::NonFiniteValue, "row " + std::to_string(i / dim_) + ", col " +
                                          std::to_string(i % dim_));
  }
  if (labels_ && labels_->size() != count_)
    fail(ErrorCode::DimensionMismatch, "labels have length " + std::to_string(labels_->size()) +
                                           ", expected " + std::to_string(count_));
}

PointCloud PointCloud::from_rows(const std::vector<Vector>& rows,
                                 std::optional<std::vector<std::string>> labels) {
  if (rows.empty()) fail(ErrorCode::InvalidArgument, "point cloud needs at least one point");
  const std::size_t n = rows.front().size();
  std::vector<double> coords;
  coords.reserve(rows.size() * n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != n)
      fail(ErrorCode::DimensionMismatch, "row " + std::to_string(i) + " has " +
                                             std::to_string(rows[i].size()) + " coordinates, expected " +
                                             std::to_string(n));
    coords.insert(coords.end(), rows[i].begin(), rows[i].end());
  }
  return PointCloud(n, std::move(coords), std::move(labels));
}

Vector PointCloud::row(std::size_t i) const {
  auto p = point(i);
  return Vector(p.begin(), p.end());
}

PointCloud PointCloud::subset(std::span<const std::size_t> ids) const {
  std::vector<double> coords;
  coords.reserve(ids.size() * dim_);
  std::optional<std::vector<std::string>> labels;
  if (labels_) labels.emplace();
  for (std::size_t id : ids) {
    auto p = point(id);
    coords.insert(coords.end(), p.begin(), p.end());
    if (labels_) labels->push_back((*labels_)[id]);
  }
  return PointCloud(dim_, std::move(coords), std::move(labels));
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) noexcept {
  return std::sqrt(squared_distance(a, b));
}

double norm(std::span<const double> v) noexcept {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace embres
