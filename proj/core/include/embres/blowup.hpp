#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "embres/dimension.hpp"
#include "embres/point_cloud.hpp"
#include "embres/projective.hpp"
#include "embres/singularity.hpp"
#include "embres/tangent_cone.hpp"

namespace embres {

struct DivisorSampling {
  // 0: one exceptional point per cone cluster. Otherwise that many extra
  // quasi-uniform points of P^{n-1} are placed on the divisor as well.
  std::size_t dense_count = 0;
  std::uint64_t seed = 0;
};

struct BlownUpCloud {
  Vector center;
  double lambda = 1.0;
  std::vector<BlowupPoint> lifted;
  std::vector<std::size_t> origin_ids;        // lifted[i] came from cloud row origin_ids[i]
  std::vector<BlowupPoint> exceptional;
  std::vector<std::size_t> exceptional_cluster;  // cone cluster each exceptional point belongs to
  TangentConeEstimate cone;
};

/// Lifts every x != s to (x, [x - s]) and adds one exceptional point (s, c_j)
/// per cone cluster. Throws DegenerateCenter when every point equals s.
BlownUpCloud blow_up(const PointCloud& cloud, std::span<const double> s,
                     const TangentConeEstimate& cone, double lambda,
                     const DivisorSampling& sampling = {});

/// pi: the base point. Exceptional points project to the centre.
Vector project(const BlowupPoint& p);

struct IsomorphismOptions {
  double delta = 0.0;         // minimum base separation for metric pairs
  std::size_t pairs = 2000;   // random pairs for the metric check
  std::uint64_t seed = 3;
};

struct IsomorphismReport {
  bool ok = false;
  bool bijective = false;
  bool bases_equal = false;
  bool metric_ok = false;
  std::vector<std::size_t> failing_ids;  // cloud rows not hit exactly once / lifted entries off
  std::size_t pairs_checked = 0;
  double max_discrepancy = 0.0;        // at lambda
  double max_discrepancy_tenth = 0.0;  // at lambda / 10
  double shrink_factor = 0.0;
};

IsomorphismReport verify_isomorphism_away_from_center(const PointCloud& cloud,
                                                      const BlownUpCloud& blownup,
                                                      const IsomorphismOptions& options = {});

struct ExceptionalVerdict {
  std::size_t exceptional_index = 0;
  std::size_t cluster = 0;
  PointVerdict verdict;  // Regular means the check passed
  DimensionProfile profile;
  std::vector<double> purity;  // per grid radius
  std::optional<double> median_dim;
  std::optional<double> purity_break_radius;  // first radius with purity < 1
};

struct RegularizationReport {
  double lambda = 0.0;
  std::vector<ExceptionalVerdict> points;
  bool all_pass = false;
};

/// Builds the blown-up metric space (lifted and exceptional points under
/// blowup_distance), rebuilds each exceptional point's grid from those
/// distances and classifies it with the given params. params.r_max must be
/// set (call resolve first).
RegularizationReport regularization_check(const BlownUpCloud& blownup,
                                          const SingularityParams& params,
                                          std::size_t threads = 1);

}  // namespace embres
