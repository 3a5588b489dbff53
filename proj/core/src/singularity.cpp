#include "embres/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "embres/errors.hpp"
#include "parallel.hpp"

namespace embres {

double default_r_max(const PointCloud& cloud) {
  constexpr std::size_t kExactLimit = 4096;
  const std::size_t n = cloud.size();
  const std::size_t stride = n <= kExactLimit ? 1 : (n + kExactLimit - 1) / kExactLimit;
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < n; i += stride) ids.push_back(i);
  if (ids.size() < 2) fail(ErrorCode::InvalidArgument, "r_max needs at least two points");
  std::vector<double> d;
  d.reserve(ids.size() * (ids.size() - 1) / 2);
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b)
      d.push_back(euclidean_distance(cloud.point(ids[a]), cloud.point(ids[b])));
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double median = d[mid];
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  if (!(median > 0.0)) fail(ErrorCode::InvalidArgument, "all points coincide; r_max undefined");
  return kDefaultRMaxFraction * median;
}

SingularityParams resolve(const SingularityParams& params, const PointCloud& cloud) {
  SingularityParams out = params;
  if (!(out.epsilon > 0.0)) fail(ErrorCode::InvalidArgument, "epsilon must be > 0");
  if (!out.r_max) out.r_max = default_r_max(cloud);
  if (!(*out.r_max > 0.0) || !std::isfinite(*out.r_max))
    fail(ErrorCode::InvalidArgument, "r_max must be positive and finite");
  if (out.min_neighbors == 0) fail(ErrorCode::InvalidArgument, "min_neighbors must be >= 1");
  if (out.grid.points < 4) fail(ErrorCode::InvalidArgument, "grid needs at least 4 radii");
  if (out.grid.per_token_knn && *out.grid.per_token_knn == 0)
    fail(ErrorCode::InvalidArgument, "per-token neighbour rank must be >= 1");
  return out;
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Regular: return "regular";
    case Verdict::Singular: return "singular";
    case Verdict::Undetermined: return "undetermined";
  }
  return "undetermined";
}

namespace {

struct Scan {
  std::size_t defined = 0;
  std::optional<SingularityWitness> best;
};

Scan scan_pairs(const DimensionProfile& profile, double r_max) {
  Scan scan;
  std::vector<const DimensionSample*> live;
  for (const auto& s : profile.samples)
    if (s.dim && s.r <= r_max) live.push_back(&s);
  scan.defined = live.size();
  for (std::size_t i = 0; i < live.size(); ++i) {
    for (std::size_t j = i + 1; j < live.size(); ++j) {
      const double v = std::abs(*live[i]->dim - *live[j]->dim);
      if (!scan.best || v > scan.best->variation)
        scan.best = SingularityWitness{live[i]->r, live[j]->r, *live[i]->dim, *live[j]->dim, v};
    }
  }
  return scan;
}

double window_of(const DimensionProfile& profile, const SingularityParams& params) {
  return params.r_max.value_or(profile.grid.r_max());
}

}  // namespace

std::optional<SingularityWitness> is_singular(const DimensionProfile& profile,
                                              const SingularityParams& params) {
  const Scan scan = scan_pairs(profile, window_of(profile, params));
  if (scan.defined < 2)
    fail(ErrorCode::NoDefinedSamples,
         std::to_string(scan.defined) + " defined dim samples within r_max");
  if (scan.best->variation > params.epsilon) return scan.best;
  return std::nullopt;
}

PointVerdict classify(const DimensionProfile& profile, const SingularityParams& params) {
  PointVerdict out;
  out.r_max = window_of(profile, params);
  const Scan scan = scan_pairs(profile, out.r_max);
  out.defined_samples = scan.defined;
  if (scan.defined < 2) return out;
  out.max_variation = scan.best->variation;
  if (scan.best->variation > params.epsilon) {
    out.verdict = Verdict::Singular;
    out.witness = scan.best;
  } else {
    out.verdict = Verdict::Regular;
  }
  return out;
}

std::size_t SingularLocusReport::count(Verdict v) const {
  return static_cast<std::size_t>(std::count_if(
      verdicts.begin(), verdicts.end(), [v](const PointVerdict& p) { return p.verdict == v; }));
}

double point_r_max(const RangeIndex& index, std::span<const double> psi,
                   const SingularityParams& resolved) {
  if (!resolved.grid.per_token_knn) return *resolved.r_max;
  const auto nn = index.nearest(psi, *resolved.grid.per_token_knn + 1);
  const double r = std::sqrt(nn.back().first);
  return r > 0.0 ? r : *resolved.r_max;
}

DimensionProfile point_profile(const RangeIndex& index, const PointCloud& cloud, std::size_t id,
                               const SingularityParams& resolved) {
  const auto psi = cloud.point(id);
  const double r_max = point_r_max(index, psi, resolved);
  const RadiusGrid grid = default_grid(index, psi, r_max, resolved.grid);
  return dimension_profile(index, psi, id, grid, resolved.estimator, resolved.min_neighbors);
}

SingularLocusReport singular_locus(const PointCloud& cloud, const SingularityParams& params,
                                   std::size_t threads) {
  return singular_locus(cloud, RangeIndex(cloud), params, threads);
}

SingularLocusReport singular_locus(const PointCloud& cloud, const RangeIndex& index,
                                   const SingularityParams& params, std::size_t threads) {
  SingularLocusReport report;
  report.params = resolve(params, cloud);
  report.verdicts.resize(cloud.size());
  detail::parallel_for(cloud.size(), threads, [&](std::size_t i) {
    const DimensionProfile profile = point_profile(index, cloud, i, report.params);
    SingularityParams local = report.params;
    local.r_max = profile.grid.r_max();
    report.verdicts[i] = classify(profile, local);
  });
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (report.verdicts[i].verdict != Verdict::Singular) continue;
    report.singular_ids.push_back(i);
    report.witnesses.emplace(i, *report.verdicts[i].witness);
  }
  return report;
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("EMBRES_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

}  // namespace embres
