#include "embres/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "embres/errors.hpp"

namespace embres {

namespace {

double two_point_slope(std::size_t v_lo, std::size_t v_hi, double r, double r_hi) {
  return (std::log(static_cast<double>(v_hi)) - std::log(static_cast<double>(v_lo))) /
         (std::log(r_hi) - std::log(r));
}

// Shared engine: `count(r)` returns the closed-ball volume at radius r.
template <class Count>
std::vector<DimensionSample> sample_profile(const RadiusGrid& grid, const Estimator& estimator,
                                            std::size_t min_neighbors, Count&& count) {
  const std::size_t m = grid.size();
  std::vector<DimensionSample> samples(m);
  std::vector<double> log_r(m);
  std::vector<double> log_v(m);
  for (std::size_t i = 0; i < m; ++i) {
    samples[i].r = grid[i];
    samples[i].volume = count(grid[i]);
    log_r[i] = std::log(grid[i]);
    log_v[i] = samples[i].volume > 0 ? std::log(static_cast<double>(samples[i].volume)) : 0.0;
  }

  if (estimator.kind == EstimatorKind::TwoPoint) {
    for (std::size_t i = 0; i + 1 < m; ++i) {
      if (samples[i].volume < min_neighbors) continue;
      const double dr = grid[i + 1] - grid[i];
      const double r_hi = grid[i] + dr;
      samples[i].dim = two_point_slope(samples[i].volume, count(r_hi), grid[i], r_hi);
    }
    return samples;
  }

  const std::size_t half = estimator.window / 2;
  for (std::size_t i = half; i + half < m; ++i) {
    if (samples[i - half].volume < min_neighbors) continue;
    std::span<const double> xs(log_r.data() + (i - half), estimator.window);
    std::span<const double> ys(log_v.data() + (i - half), estimator.window);
    samples[i].dim = least_squares_slope(xs, ys);
  }
  return samples;
}

void check_estimator(const Estimator& estimator, std::size_t min_neighbors) {
  if (min_neighbors == 0) fail(ErrorCode::InvalidArgument, "min_neighbors must be >= 1");
  if (estimator.kind == EstimatorKind::RegressionWindow &&
      (estimator.window < 3 || estimator.window % 2 == 0))
    fail(ErrorCode::InvalidArgument, "regression window must be odd and >= 3");
}

}  // namespace

RadiusGrid::RadiusGrid(std::vector<double> radii) : radii_(std::move(radii)) {
  if (radii_.size() < 4) fail(ErrorCode::InvalidArgument, "radius grid needs at least 4 radii");
  for (std::size_t i = 0; i < radii_.size(); ++i) {
    if (!(radii_[i] > 0.0) || !std::isfinite(radii_[i]))
      fail(ErrorCode::InvalidArgument, "radii must be positive and finite");
    if (i > 0 && !(radii_[i] > radii_[i - 1]))
      fail(ErrorCode::InvalidArgument, "radii must be strictly increasing");
  }
}

RadiusGrid RadiusGrid::geometric(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo)) fail(ErrorCode::InvalidArgument, "geometric grid needs 0 < lo < hi");
  if (count < 4) fail(ErrorCode::InvalidArgument, "radius grid needs at least 4 radii");
  std::vector<double> radii(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) radii[i] = lo * std::exp(step * static_cast<double>(i));
  radii.front() = lo;
  radii.back() = hi;
  return RadiusGrid(std::move(radii));
}

Estimator Estimator::regression(std::size_t w) {
  if (w < 3 || w % 2 == 0) fail(ErrorCode::InvalidArgument, "regression window must be odd and >= 3");
  return {EstimatorKind::RegressionWindow, w};
}

std::vector<double> DimensionProfile::defined_dims() const {
  std::vector<double> out;
  for (const auto& s : samples)
    if (s.dim) out.push_back(*s.dim);
  return out;
}

std::size_t DimensionProfile::defined_count() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const auto& s) { return s.dim.has_value(); }));
}

std::size_t local_volume(const RangeIndex& index, std::span<const double> psi, double r) {
  return index.range_count(psi, r);
}

std::size_t local_volume(const PointCloud& cloud, std::span<const double> psi, double r) {
  return RangeIndex(cloud).range_count(psi, r);
}

double dimension_at(const RangeIndex& index, std::span<const double> psi, double r, double dr,
                    std::size_t min_neighbors) {
  if (!(r > 0.0) || !(dr > 0.0)) fail(ErrorCode::InvalidArgument, "dimension_at needs r > 0 and dr > 0");
  const std::size_t v_lo = index.range_count(psi, r);
  if (v_lo < min_neighbors)
    fail(ErrorCode::InsufficientNeighbors, "V(r) = " + std::to_string(v_lo) + " < " +
                                               std::to_string(min_neighbors) + " at r = " +
                                               std::to_string(r));
  const double r_hi = r + dr;
  return two_point_slope(v_lo, index.range_count(psi, r_hi), r, r_hi);
}

double dimension_at(const PointCloud& cloud, std::span<const double> psi, double r, double dr,
                    std::size_t min_neighbors) {
  return dimension_at(RangeIndex(cloud), psi, r, dr, min_neighbors);
}

RadiusGrid default_grid_from_distances(std::span<const double> sorted_distances, double r_max,
                                       const GridPolicy& policy) {
  if (!(r_max > 0.0)) fail(ErrorCode::InvalidArgument, "r_max must be positive");
  double lo = 0.0;
  if (sorted_distances.size() > policy.knn) {
    lo = sorted_distances[policy.knn];
  } else if (!sorted_distances.empty()) {
    lo = std::numeric_limits<double>::infinity();
  }
  if (!(lo > 0.0)) lo = r_max * 1e-3;         // coincident neighbours
  if (!(lo < r_max)) lo = r_max * 0.5;        // sparse: volumes stay below the floor anyway
  return RadiusGrid::geometric(lo, r_max, policy.points);
}

RadiusGrid default_grid(const RangeIndex& index, std::span<const double> psi, double r_max,
                        const GridPolicy& policy) {
  const auto nearest = index.nearest(psi, policy.knn + 1);
  std::vector<double> dists;
  dists.reserve(nearest.size());
  for (const auto& [d2, id] : nearest) dists.push_back(std::sqrt(d2));
  return default_grid_from_distances(dists, r_max, policy);
}

DimensionProfile dimension_profile(const RangeIndex& index, std::span<const double> psi,
                                   std::size_t subject_id, const RadiusGrid& grid,
                                   const Estimator& estimator, std::size_t min_neighbors) {
  check_estimator(estimator, min_neighbors);
  // Radii probed by the estimator: the grid plus the two-point upper ends.
  double reach = grid.r_max();
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) reach = std::max(reach, grid[i] + (grid[i + 1] - grid[i]));
  const auto sq = index.sorted_sq_distances(psi, reach);
  auto count = [&](double r) {
    return static_cast<std::size_t>(std::upper_bound(sq.begin(), sq.end(), r * r) - sq.begin());
  };
  DimensionProfile profile{subject_id, grid, estimator, min_neighbors, {}};
  profile.samples = sample_profile(grid, estimator, min_neighbors, count);
  return profile;
}

DimensionProfile dimension_profile(const PointCloud& cloud, std::size_t point_id,
                                   const RadiusGrid& grid, const Estimator& estimator,
                                   std::size_t min_neighbors) {
  if (point_id >= cloud.size()) fail(ErrorCode::InvalidArgument, "point id out of range");
  return dimension_profile(RangeIndex(cloud), cloud.point(point_id), point_id, grid, estimator,
                           min_neighbors);
}

DimensionProfile profile_from_distances(std::span<const double> sorted_distances,
                                        const RadiusGrid& grid, const Estimator& estimator,
                                        std::size_t min_neighbors) {
  check_estimator(estimator, min_neighbors);
  auto count = [&](double r) {
    return static_cast<std::size_t>(
        std::upper_bound(sorted_distances.begin(), sorted_distances.end(), r) -
        sorted_distances.begin());
  };
  DimensionProfile profile{std::size_t{0}, grid, estimator, min_neighbors, {}};
  profile.samples = sample_profile(grid, estimator, min_neighbors, count);
  return profile;
}

double dimensional_variation(const DimensionProfile& profile, double r1, double r2) {
  auto lookup = [&](double r) {
    for (const auto& s : profile.samples)
      if (s.r == r) {
        if (!s.dim) fail(ErrorCode::UndefinedAtRadius, "dim undefined at r = " + std::to_string(r));
        return *s.dim;
      }
    fail(ErrorCode::UndefinedAtRadius, "radius not on grid: " + std::to_string(r));
  };
  return std::abs(lookup(r1) - lookup(r2));
}

double least_squares_slope(std::span<const double> xs, std::span<const double> ys) {
  if (std::all_of(ys.begin(), ys.end(), [&](double y) { return y == ys.front(); })) return 0.0;
  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace embres
