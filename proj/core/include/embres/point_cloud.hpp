#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace embres {

using Vector = std::vector<double>;

/// Finite point set in R^n stored row-major. Immutable after construction;
/// every coordinate is finite, N >= 1 and n >= 2.
class PointCloud {
public:
  PointCloud(std::size_t dim, std::vector<double> coords,
             std::optional<std::vector<std::string>> labels = std::nullopt);

  static PointCloud from_rows(const std::vector<Vector>& rows,
                              std::optional<std::vector<std::string>> labels = std::nullopt);

  std::size_t size() const noexcept { return count_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> point(std::size_t i) const noexcept {
    return {coords_.data() + i * dim_, dim_};
  }
  Vector row(std::size_t i) const;

  std::span<const double> coords() const noexcept { return coords_; }
  const std::optional<std::vector<std::string>>& labels() const noexcept { return labels_; }

  /// New cloud holding the given rows (labels carried along).
  PointCloud subset(std::span<const std::size_t> ids) const;

  bool operator==(const PointCloud&) const = default;

private:
  std::size_t dim_;
  std::size_t count_;
  std::vector<double> coords_;
  std::optional<std::vector<std::string>> labels_;
};

// Squared Euclidean distance accumulated in coordinate order. All exact
// range/volume counting in the library goes through this one routine.
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) noexcept;
double norm(std::span<const double> v) noexcept;

}  // namespace embres
