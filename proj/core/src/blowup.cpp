#include "embres/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_set>

#include "embres/errors.hpp"
#include "embres/rng.hpp"
#include "parallel.hpp"

namespace embres {

namespace {

std::vector<ProjectivePoint> dense_divisor(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<ProjectivePoint> out;
  out.reserve(count);
  if (n == 3) {
    // Fibonacci lattice on the upper hemisphere; the lower half is the
    // antipodal copy.
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < count; ++i) {
      const double z = 1.0 - (static_cast<double>(i) + 0.5) / static_cast<double>(count);
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * static_cast<double>(i);
      const Vector v{rho * std::cos(phi), rho * std::sin(phi), z};
      out.push_back(projective_from_vector(v));
    }
    return out;
  }
  Rng rng(seed);
  Vector v(n);
  while (out.size() < count) {
    for (auto& x : v) x = rng.normal();
    if (norm(v) < 1e-6) continue;
    out.push_back(projective_from_vector(v));
  }
  return out;
}

}  // namespace

BlownUpCloud blow_up(const PointCloud& cloud, std::span<const double> s,
                     const TangentConeEstimate& cone, double lambda,
                     const DivisorSampling& sampling) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    fail(ErrorCode::NonPositiveScale, "lambda must be positive and finite");
  if (s.size() != cloud.dim()) fail(ErrorCode::DimensionMismatch, "centre dimension differs from cloud");
  if (cone.clusters.empty()) fail(ErrorCode::InvalidArgument, "tangent cone has no clusters");

  BlownUpCloud out;
  out.center.assign(s.begin(), s.end());
  out.lambda = lambda;
  out.cone = cone;
  Vector diff(s.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto x = cloud.point(i);
    bool same = true;
    for (std::size_t k = 0; k < diff.size(); ++k) {
      diff[k] = x[k] - s[k];
      same = same && x[k] == s[k];
    }
    if (same) continue;
    // Points within 1e-12 of s but not equal have no usable direction.
    if (norm(diff) < kZeroVectorTolerance) continue;
    out.lifted.push_back({Vector(x.begin(), x.end()), projective_from_vector(diff), false});
    out.origin_ids.push_back(i);
  }
  if (out.lifted.empty()) fail(ErrorCode::DegenerateCenter, "every point coincides with the centre");

  for (std::size_t j = 0; j < cone.clusters.size(); ++j) {
    out.exceptional.push_back({out.center, cone.clusters[j].centroid, true});
    out.exceptional_cluster.push_back(j);
  }
  if (sampling.dense_count > 0) {
    for (auto& dir : dense_divisor(cloud.dim(), sampling.dense_count, sampling.seed)) {
      out.exceptional_cluster.push_back(nearest_divisor_component(dir, cone));
      out.exceptional.push_back({out.center, std::move(dir), true});
    }
  }
  return out;
}

Vector project(const BlowupPoint& p) { return p.base; }

IsomorphismReport verify_isomorphism_away_from_center(const PointCloud& cloud,
                                                      const BlownUpCloud& blownup,
                                                      const IsomorphismOptions& options) {
  IsomorphismReport rep;
  const std::size_t N = cloud.size();

  // Bijectivity onto T \ {s}: every row different from s hit exactly once.
  std::vector<std::size_t> hits(N, 0);
  bool range_ok = blownup.origin_ids.size() == blownup.lifted.size();
  for (std::size_t id : blownup.origin_ids) {
    if (id >= N) {
      range_ok = false;
      continue;
    }
    ++hits[id];
  }
  for (std::size_t i = 0; i < N; ++i) {
    const auto x = cloud.point(i);
    const bool is_center = std::equal(x.begin(), x.end(), blownup.center.begin());
    const std::size_t expected = is_center ? 0 : 1;
    if (hits[i] != expected) rep.failing_ids.push_back(i);
  }
  rep.bijective = range_ok && rep.failing_ids.empty();

  rep.bases_equal = true;
  const std::size_t m = std::min(blownup.lifted.size(), blownup.origin_ids.size());
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t id = blownup.origin_ids[i];
    if (id >= N) continue;
    const auto x = cloud.point(id);
    const Vector base = project(blownup.lifted[i]);
    if (!std::equal(x.begin(), x.end(), base.begin(), base.end())) {
      rep.bases_equal = false;
      rep.failing_ids.push_back(id);
    }
  }
  std::sort(rep.failing_ids.begin(), rep.failing_ids.end());
  rep.failing_ids.erase(std::unique(rep.failing_ids.begin(), rep.failing_ids.end()),
                        rep.failing_ids.end());

  // Metric consistency on random lifted pairs.
  rep.metric_ok = true;
  const double lam = blownup.lambda;
  const double bound = lam * std::numbers::pi / 2.0;
  if (m >= 2) {
    Rng rng(options.seed);
    std::size_t attempts = 0;
    while (rep.pairs_checked < options.pairs && attempts < options.pairs * 20) {
      ++attempts;
      const std::size_t a = rng.below(m);
      const std::size_t b = rng.below(m);
      if (a == b) continue;
      const auto& pa = blownup.lifted[a];
      const auto& pb = blownup.lifted[b];
      const double base = euclidean_distance(pa.base, pb.base);
      if (base < options.delta) continue;
      const double d1 = std::abs(blowup_distance(pa, pb, lam) - base);
      const double d10 = std::abs(blowup_distance(pa, pb, lam / 10.0) - base);
      rep.max_discrepancy = std::max(rep.max_discrepancy, d1);
      rep.max_discrepancy_tenth = std::max(rep.max_discrepancy_tenth, d10);
      if (d1 > bound * (1.0 + 1e-12)) rep.metric_ok = false;
      ++rep.pairs_checked;
    }
    if (rep.max_discrepancy_tenth > 0.0) {
      rep.shrink_factor = rep.max_discrepancy / rep.max_discrepancy_tenth;
      if (rep.shrink_factor < 5.0) rep.metric_ok = false;
    } else {
      rep.shrink_factor = std::numeric_limits<double>::infinity();
    }
  }
  rep.ok = rep.bijective && rep.bases_equal && rep.metric_ok;
  return rep;
}

RegularizationReport regularization_check(const BlownUpCloud& blownup,
                                          const SingularityParams& params, std::size_t threads) {
  if (!params.r_max) fail(ErrorCode::InvalidArgument, "regularization_check needs a resolved r_max");
  RegularizationReport report;
  report.lambda = blownup.lambda;

  const TangentConeEstimate& cone = blownup.cone;
  // Cluster label of every lifted point: its cone membership when it was
  // clustered, otherwise the nearest component of its direction.
  std::vector<std::size_t> label(blownup.lifted.size());
  {
    std::vector<std::size_t> by_row;
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::size_t max_row = 0;
    for (std::size_t id : blownup.origin_ids) max_row = std::max(max_row, id);
    by_row.assign(max_row + 1, kNone);
    for (std::size_t j = 0; j < cone.clusters.size(); ++j)
      for (std::size_t id : cone.clusters[j].member_ids)
        if (id <= max_row) by_row[id] = j;
    for (std::size_t i = 0; i < blownup.lifted.size(); ++i) {
      const std::size_t row = blownup.origin_ids[i];
      label[i] = by_row[row] != kNone ? by_row[row]
                                      : nearest_divisor_component(blownup.lifted[i].dir, cone);
    }
  }

  report.points.resize(blownup.exceptional.size());
  detail::parallel_for(blownup.exceptional.size(), threads, [&](std::size_t e) {
    const BlowupPoint& se = blownup.exceptional[e];
    const std::size_t own = blownup.exceptional_cluster[e];
    // (distance, foreign?) to every point of the blown-up space.
    std::vector<std::pair<double, bool>> entries;
    entries.reserve(blownup.lifted.size() + blownup.exceptional.size());
    for (std::size_t i = 0; i < blownup.lifted.size(); ++i)
      entries.emplace_back(blowup_distance(se, blownup.lifted[i], blownup.lambda), label[i] != own);
    for (std::size_t f = 0; f < blownup.exceptional.size(); ++f)
      entries.emplace_back(f == e ? 0.0 : blowup_distance(se, blownup.exceptional[f], blownup.lambda),
                           f != e);
    std::sort(entries.begin(), entries.end());
    std::vector<double> dist(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) dist[i] = entries[i].first;

    const RadiusGrid grid = default_grid_from_distances(dist, *params.r_max, params.grid);
    DimensionProfile profile =
        profile_from_distances(dist, grid, params.estimator, params.min_neighbors);
    profile.subject = se;

    ExceptionalVerdict& out = report.points[e];
    out.exceptional_index = e;
    out.cluster = own;
    out.verdict = classify(profile, params);

    // Purity over the ball minus the exceptional point itself.
    std::size_t cursor = 0, seen = 0, foreign = 0;
    bool skipped_self = false;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      while (cursor < entries.size() && entries[cursor].first <= grid[g]) {
        if (!skipped_self && entries[cursor].first == 0.0 && !entries[cursor].second) {
          skipped_self = true;  // the centre's own zero
        } else {
          ++seen;
          foreign += entries[cursor].second ? 1 : 0;
        }
        ++cursor;
      }
      const double purity = seen == 0 ? 1.0 : 1.0 - static_cast<double>(foreign) / static_cast<double>(seen);
      out.purity.push_back(purity);
      if (purity < 1.0 && !out.purity_break_radius) out.purity_break_radius = grid[g];
    }
    auto dims = profile.defined_dims();
    if (!dims.empty()) {
      std::sort(dims.begin(), dims.end());
      const std::size_t h = dims.size() / 2;
      out.median_dim = dims.size() % 2 ? dims[h] : 0.5 * (dims[h - 1] + dims[h]);
    }
    out.profile = std::move(profile);
  });

  report.all_pass = !report.points.empty() &&
                    std::all_of(report.points.begin(), report.points.end(), [](const auto& p) {
                      return p.verdict.verdict == Verdict::Regular;
                    });
  return report;
}

}  // namespace embres
