#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "embres/point_cloud.hpp"
#include "embres/projective.hpp"
#include "embres/range_index.hpp"

namespace embres {

/// Strictly increasing positive radii; at least four entries.
class RadiusGrid {
public:
  RadiusGrid() = default;  // empty placeholder; not a valid grid
  explicit RadiusGrid(std::vector<double> radii);

  /// `count` log-spaced radii from lo to hi inclusive.
  static RadiusGrid geometric(double lo, double hi, std::size_t count);

  std::span<const double> radii() const noexcept { return radii_; }
  std::size_t size() const noexcept { return radii_.size(); }
  double operator[](std::size_t i) const noexcept { return radii_[i]; }
  double r_max() const noexcept { return radii_.back(); }

  bool operator==(const RadiusGrid&) const = default;

private:
  std::vector<double> radii_;
};

enum class EstimatorKind { TwoPoint, RegressionWindow };

struct Estimator {
  EstimatorKind kind = EstimatorKind::RegressionWindow;
  std::size_t window = 5;  // odd, >= 3; RegressionWindow only

  static Estimator two_point() { return {EstimatorKind::TwoPoint, 0}; }
  static Estimator regression(std::size_t w);

  bool operator==(const Estimator&) const = default;
};

/// Minimum ball count for a defined dim sample at the estimator level.
inline constexpr std::size_t kDefaultMinNeighbors = 10;

/// How a per-point grid is laid out when none is supplied.
struct GridPolicy {
  std::size_t points = 32;
  std::size_t knn = 5;  // grid starts at the distance to the knn-th neighbour
  // When set, each point's window ends at its distance to this neighbour
  // instead of the global r_max.
  std::optional<std::size_t> per_token_knn;

  bool operator==(const GridPolicy&) const = default;
};

struct DimensionSample {
  double r = 0.0;
  std::size_t volume = 0;
  std::optional<double> dim;  // undefined below the neighbour floor

  bool operator==(const DimensionSample&) const = default;
};

struct DimensionProfile {
  std::variant<std::size_t, BlowupPoint> subject;
  RadiusGrid grid;
  Estimator estimator;
  std::size_t min_neighbors = kDefaultMinNeighbors;
  std::vector<DimensionSample> samples;

  std::vector<double> defined_dims() const;
  std::size_t defined_count() const;
};

/// V_psi(r): points within the closed ball, the centre included when it is in
/// the cloud.
std::size_t local_volume(const RangeIndex& index, std::span<const double> psi, double r);
std::size_t local_volume(const PointCloud& cloud, std::span<const double> psi, double r);

/// Two-point log-log slope (log V(r+dr) - log V(r)) / (log(r+dr) - log r).
/// Throws InsufficientNeighbors when V(r) < min_neighbors.
double dimension_at(const RangeIndex& index, std::span<const double> psi, double r, double dr,
                    std::size_t min_neighbors = kDefaultMinNeighbors);
double dimension_at(const PointCloud& cloud, std::span<const double> psi, double r, double dr,
                    std::size_t min_neighbors = kDefaultMinNeighbors);

/// Log-spaced grid from the knn-th neighbour distance (the query's own entry
/// counts as the zeroth) to r_max.
RadiusGrid default_grid(const RangeIndex& index, std::span<const double> psi, double r_max,
                        const GridPolicy& policy = {});

/// Same layout from an ascending list of distances that includes the centre.
RadiusGrid default_grid_from_distances(std::span<const double> sorted_distances, double r_max,
                                       const GridPolicy& policy = {});

/// Profile of the point `psi` (recorded as `subject_id`) over an index.
DimensionProfile dimension_profile(const RangeIndex& index, std::span<const double> psi,
                                   std::size_t subject_id, const RadiusGrid& grid,
                                   const Estimator& estimator = {},
                                   std::size_t min_neighbors = kDefaultMinNeighbors);
DimensionProfile dimension_profile(const PointCloud& cloud, std::size_t point_id,
                                   const RadiusGrid& grid, const Estimator& estimator = {},
                                   std::size_t min_neighbors = kDefaultMinNeighbors);

/// Profile from an ascending list of (non-squared) distances to every point of
/// some finite metric space, the centre's own zero included.
DimensionProfile profile_from_distances(std::span<const double> sorted_distances,
                                        const RadiusGrid& grid, const Estimator& estimator,
                                        std::size_t min_neighbors);

/// |dim(r1) - dim(r2)| for two radii present in the profile with defined
/// samples. Throws UndefinedAtRadius otherwise.
double dimensional_variation(const DimensionProfile& profile, double r1, double r2);

/// Least-squares slope of ys on xs.
double least_squares_slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace embres
