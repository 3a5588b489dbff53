#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "embres/dimension.hpp"
#include "embres/point_cloud.hpp"
#include "embres/range_index.hpp"

namespace embres {

/// Detection defaults are deliberately more conservative than the estimator
/// defaults (floor 40 instead of 10, window 9 instead of 5): with the lighter
/// settings count quantization alone pushes the variation of flat interior
/// points past epsilon = 1.
struct SingularityParams {
  double epsilon = 1.0;
  std::optional<double> r_max;  // unset: resolved from the cloud
  GridPolicy grid;
  Estimator estimator = Estimator::regression(9);
  std::size_t min_neighbors = 40;

  bool operator==(const SingularityParams&) const = default;
};

inline constexpr double kDefaultRMaxFraction = 0.25;

/// 0.25 x median pairwise distance. Exact up to 4096 points; above that the
/// median is taken over a fixed stride subsample.
double default_r_max(const PointCloud& cloud);

/// Copy of params with r_max filled in and validated.
SingularityParams resolve(const SingularityParams& params, const PointCloud& cloud);

struct SingularityWitness {
  double r1 = 0.0;
  double r2 = 0.0;
  double dim1 = 0.0;
  double dim2 = 0.0;
  double variation = 0.0;

  bool operator==(const SingularityWitness&) const = default;
};

enum class Verdict { Regular, Singular, Undetermined };

const char* to_string(Verdict v) noexcept;

struct PointVerdict {
  Verdict verdict = Verdict::Undetermined;
  std::size_t defined_samples = 0;
  std::optional<double> max_variation;  // absent when undetermined
  std::optional<SingularityWitness> witness;
  double r_max = 0.0;  // window actually used

  bool operator==(const PointVerdict&) const = default;
};

/// Maximum-variation pair over defined samples with r1 < r2 <= r_max; returned
/// only when it exceeds epsilon. r_max defaults to the profile grid's last
/// radius when params carry none. Throws NoDefinedSamples below two samples.
std::optional<SingularityWitness> is_singular(const DimensionProfile& profile,
                                              const SingularityParams& params);

/// Non-throwing three-way version of is_singular.
PointVerdict classify(const DimensionProfile& profile, const SingularityParams& params);

struct SingularLocusReport {
  SingularityParams params;  // resolved
  std::vector<PointVerdict> verdicts;
  std::vector<std::size_t> singular_ids;  // ascending
  std::map<std::size_t, SingularityWitness> witnesses;

  std::size_t count(Verdict v) const;
  bool operator==(const SingularLocusReport&) const = default;
};

/// Window end for point i: the global r_max, or its per-token neighbour
/// distance when the grid policy asks for one.
double point_r_max(const RangeIndex& index, std::span<const double> psi,
                   const SingularityParams& resolved);

/// Profile of one cloud point under resolved params.
DimensionProfile point_profile(const RangeIndex& index, const PointCloud& cloud, std::size_t id,
                               const SingularityParams& resolved);

/// Verdict for every point. Output does not depend on `threads`.
SingularLocusReport singular_locus(const PointCloud& cloud, const SingularityParams& params,
                                   std::size_t threads = 1);
SingularLocusReport singular_locus(const PointCloud& cloud, const RangeIndex& index,
                                   const SingularityParams& params, std::size_t threads = 1);

/// Default worker count: EMBRES_THREADS if set, else 1.
std::size_t default_thread_count();

}  // namespace embres
