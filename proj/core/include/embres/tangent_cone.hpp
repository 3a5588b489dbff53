#pragma once

#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "embres/dimension.hpp"
#include "embres/point_cloud.hpp"
#include "embres/projective.hpp"
#include "embres/range_index.hpp"

namespace embres {

struct LocalDirection {
  std::size_t index = 0;
  ProjectivePoint dir;
};

struct LocalDirections {
  Vector center;
  double r_loc = 0.0;
  std::vector<LocalDirection> entries;  // ascending index
  std::size_t skipped_coincident = 0;
};

/// Directions [x - s] for every x with 0 < |x - s| <= r_loc. Points closer
/// than 1e-12 to s are skipped and counted. Throws EmptyNeighborhood.
LocalDirections local_directions(const PointCloud& cloud, std::span<const double> s, double r_loc);
LocalDirections local_directions(const PointCloud& cloud, const RangeIndex& index,
                                 std::span<const double> s, double r_loc);

inline constexpr double kDefaultMergeAngle = 20.0 * std::numbers::pi / 180.0;

struct ClusterOptions {
  std::optional<std::size_t> k;              // explicit count: projective k-means
  double merge_angle = kDefaultMergeAngle;   // theta_m
  std::size_t k_max = 8;
  // Auto-k only: directions within merge_angle * link_fraction are linked
  // when both have at least min_core_neighbors such links.
  double link_fraction = 0.5;
  std::size_t min_core_neighbors = 5;
  double min_cluster_fraction = 0.05;
  double frame_energy_ratio = 0.25;  // eigenvalue cut for a cluster's frame
  std::size_t max_iterations = 200;
  std::size_t max_linkage_points = 4000;

  bool operator==(const ClusterOptions&) const = default;
};

struct ConeCluster {
  ProjectivePoint centroid;
  std::vector<Vector> frame;  // orthonormal; frame[0] is the centroid
  std::vector<std::size_t> member_ids;
  std::optional<double> dimension;  // D_j, when estimated
  double spread = 0.0;              // mean angle of members to the centroid
};

struct TangentConeEstimate {
  Vector center;
  double r_loc = 0.0;
  std::vector<ConeCluster> clusters;
  std::size_t skipped_coincident = 0;
  std::size_t iterations = 0;
  bool hit_iteration_cap = false;
};

/// Clusters directions on P^{n-1}.
///
/// With an explicit k: projective k-means seeded by farthest-point selection
/// from the lowest-index direction, run to a fixed point, then centroid pairs
/// closer than merge_angle are merged. Without k: density linkage on the
/// angular metric proposes at most k_max components (a pure k-means split
/// cannot represent a planar branch, whose directions form a great circle),
/// members are reassigned by angle to each component's principal subspace
/// until stable, and the same merge pass follows.
TangentConeEstimate cluster_directions(const LocalDirections& directions,
                                       const ClusterOptions& options = {});
TangentConeEstimate cluster_directions(std::span<const ProjectivePoint> directions,
                                       const ClusterOptions& options = {});

/// Angle from a point to a cluster's principal subspace.
double component_distance(const ProjectivePoint& p, const ConeCluster& cluster);

/// Index of the closest cluster under component_distance; lowest index on
/// ties. For one-vector frames this is the projective distance to the
/// centroid.
std::size_t nearest_divisor_component(const ProjectivePoint& p, const TangentConeEstimate& cone);

/// Median defined dim sample at the medoid of the members' sub-cloud. The
/// default grid runs from the medoid's 5th-neighbour distance to half its
/// largest member distance. Throws InsufficientNeighbors.
double estimate_cluster_dimension(const PointCloud& cloud, std::span<const std::size_t> member_ids,
                                  std::optional<RadiusGrid> grid = std::nullopt,
                                  const Estimator& estimator = {},
                                  std::size_t min_neighbors = kDefaultMinNeighbors);

/// Median distance from the centre to the clustered points.
double default_lambda(const PointCloud& cloud, const TangentConeEstimate& cone);

/// r_loc rule: the largest radius below the witness r2 at which the centre's
/// dim sample is defined; without a usable witness, 2 * fallback_r_max.
double default_r_loc(const DimensionProfile& center_profile,
                     const std::optional<double>& witness_r2, double fallback_r_max);

/// Largest principal angle between two orthonormal frames of equal size.
double max_principal_angle(const std::vector<Vector>& a, const std::vector<Vector>& b);

}  // namespace embres
