#include "embres/tangent_cone.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "embres/errors.hpp"

namespace embres {

namespace {

struct Component {
  std::vector<std::size_t> members;  // positions into the direction list
  std::size_t frame_dim = 1;
};

struct Fitted {
  Vector centroid;             // canonical unit representative
  std::vector<Vector> frame;   // orthonormal, frame[0] parallel to centroid
};

void canonical_sign(Eigen::Ref<Eigen::VectorXd> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > kZeroVectorTolerance) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

// Principal subspace of sum u u^T over members. frame_dim == 0 picks the
// dimension from the eigenvalue ratio and writes it back.
Fitted fit(std::span<const ProjectivePoint> dirs, const std::vector<std::size_t>& members,
           std::size_t& frame_dim, double energy_ratio) {
  const auto n = static_cast<Eigen::Index>(dirs.front().dim());
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t m : members) {
    const Eigen::Map<const Eigen::VectorXd> u(dirs[m].rep().data(), n);
    scatter.noalias() += u * u.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(scatter);
  const auto& evals = solver.eigenvalues();
  if (frame_dim == 0) {
    const double top = evals[n - 1];
    std::size_t d = 0;
    for (Eigen::Index i = n - 1; i >= 0 && evals[i] >= energy_ratio * top; --i) ++d;
    frame_dim = std::max<std::size_t>(1, d);
  }
  frame_dim = std::min<std::size_t>(frame_dim, static_cast<std::size_t>(n));
  Fitted out;
  for (std::size_t k = 0; k < frame_dim; ++k) {
    Eigen::VectorXd v = solver.eigenvectors().col(n - 1 - static_cast<Eigen::Index>(k));
    canonical_sign(v);
    out.frame.emplace_back(v.data(), v.data() + n);
  }
  const ProjectivePoint c = projective_from_vector(out.frame.front());
  out.centroid.assign(c.rep().begin(), c.rep().end());
  return out;
}

struct Engine {
  std::span<const ProjectivePoint> dirs;
  const ClusterOptions& opt;
  bool subspace_mode;  // assign by principal subspace instead of centroid
  std::size_t iterations = 0;
  bool capped = false;

  std::vector<Fitted> refit(std::vector<Component>& comps) {
    std::vector<Fitted> fits;
    for (auto& c : comps) fits.push_back(fit(dirs, c.members, c.frame_dim, opt.frame_energy_ratio));
    return fits;
  }

  // Lloyd iterations from the current components until the assignment stops
  // changing. Empty components are dropped.
  std::vector<Fitted> iterate(std::vector<Component>& comps) {
    std::vector<Fitted> fits = refit(comps);
    std::vector<std::size_t> previous;
    for (std::size_t it = 0;; ++it) {
      std::vector<std::size_t> assign(dirs.size());
      std::vector<ProjectivePoint> centroids;
      for (const auto& f : fits) centroids.push_back(projective_from_vector(f.centroid));
      for (std::size_t i = 0; i < dirs.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t j = 0; j < fits.size(); ++j) {
          const double d = (subspace_mode && fits[j].frame.size() > 1)
                               ? subspace_angle(dirs[i], fits[j].frame)
                               : projective_distance(dirs[i], centroids[j]);
          if (d < best) {
            best = d;
            arg = j;
          }
        }
        assign[i] = arg;
      }
      ++iterations;
      if (assign == previous) break;
      if (it + 1 >= opt.max_iterations) {
        capped = true;
        break;
      }
      previous = assign;
      std::vector<Component> next(comps.size());
      for (std::size_t j = 0; j < comps.size(); ++j) next[j].frame_dim = comps[j].frame_dim;
      for (std::size_t i = 0; i < dirs.size(); ++i) next[assign[i]].members.push_back(i);
      std::erase_if(next, [](const Component& c) { return c.members.empty(); });
      const bool dropped = next.size() != comps.size();
      comps = std::move(next);
      fits = refit(comps);
      if (dropped) previous.clear();  // indices shifted
    }
    return fits;
  }

  // Merge the closest centroid pair below merge_angle, re-iterate, repeat.
  std::vector<Fitted> merge(std::vector<Component>& comps, std::vector<Fitted> fits) {
    for (;;) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t ba = 0, bb = 0;
      for (std::size_t a = 0; a < fits.size(); ++a) {
        for (std::size_t b = a + 1; b < fits.size(); ++b) {
          const double d = projective_distance(projective_from_vector(fits[a].centroid),
                                               projective_from_vector(fits[b].centroid));
          if (d < best) {
            best = d;
            ba = a;
            bb = b;
          }
        }
      }
      if (!(best < opt.merge_angle)) return fits;
      auto& keep = comps[ba].members;
      keep.insert(keep.end(), comps[bb].members.begin(), comps[bb].members.end());
      std::sort(keep.begin(), keep.end());
      comps[ba].frame_dim = subspace_mode ? 0 : 1;
      comps.erase(comps.begin() + static_cast<std::ptrdiff_t>(bb));
      fits = iterate(comps);
    }
  }
};

std::vector<Component> farthest_point_seeds(std::span<const ProjectivePoint> dirs, std::size_t k) {
  std::vector<std::size_t> seeds{0};
  std::vector<double> gap(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) gap[i] = projective_distance(dirs[i], dirs[0]);
  while (seeds.size() < k) {
    std::size_t arg = 0;
    double far = 0.0;
    for (std::size_t i = 0; i < dirs.size(); ++i)
      if (gap[i] > far) {
        far = gap[i];
        arg = i;
      }
    if (!(far > 0.0)) break;
    seeds.push_back(arg);
    for (std::size_t i = 0; i < dirs.size(); ++i)
      gap[i] = std::min(gap[i], projective_distance(dirs[i], dirs[arg]));
  }
  std::vector<Component> comps;
  for (std::size_t s : seeds) comps.push_back({{s}, 1});
  return comps;
}

std::vector<Component> density_components(std::span<const ProjectivePoint> dirs,
                                          const ClusterOptions& opt) {
  const std::size_t m = dirs.size();
  const std::size_t stride =
      m <= opt.max_linkage_points ? 1 : (m + opt.max_linkage_points - 1) / opt.max_linkage_points;
  std::vector<std::size_t> sample;
  for (std::size_t i = 0; i < m; i += stride) sample.push_back(i);
  const std::size_t L = sample.size();
  const double link = opt.merge_angle * opt.link_fraction;

  std::vector<std::vector<std::pair<double, std::size_t>>> adj(L);
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = a + 1; b < L; ++b) {
      const double d = projective_distance(dirs[sample[a]], dirs[sample[b]]);
      if (d <= link) {
        adj[a].emplace_back(d, b);
        adj[b].emplace_back(d, a);
      }
    }
  std::vector<char> core(L);
  for (std::size_t a = 0; a < L; ++a) core[a] = adj[a].size() >= opt.min_core_neighbors;

  std::vector<std::size_t> parent(L);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t a = 0; a < L; ++a) {
    if (!core[a]) continue;
    for (const auto& [d, b] : adj[a]) {
      if (!core[b]) continue;
      const std::size_t ra = find(a), rb = find(b);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> label(L, kNone);
  for (std::size_t a = 0; a < L; ++a) {
    if (core[a]) {
      label[a] = find(a);
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [d, b] : adj[a])
      if (core[b] && d < best) {
        best = d;
        label[a] = find(b);
      }
  }

  std::vector<std::vector<std::size_t>> groups(L);
  for (std::size_t a = 0; a < L; ++a)
    if (label[a] != kNone) groups[label[a]].push_back(sample[a]);
  const auto min_size = std::max<std::size_t>(
      opt.min_core_neighbors + 1,
      static_cast<std::size_t>(std::ceil(opt.min_cluster_fraction * static_cast<double>(L))));
  std::vector<std::vector<std::size_t>> kept;
  for (auto& g : groups)
    if (g.size() >= min_size) kept.push_back(std::move(g));
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  if (kept.size() > opt.k_max) kept.resize(opt.k_max);
  std::sort(kept.begin(), kept.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });

  std::vector<Component> comps;
  for (auto& g : kept) comps.push_back({std::move(g), 0});
  if (comps.empty()) {
    Component all{{}, 0};
    all.members.resize(m);
    std::iota(all.members.begin(), all.members.end(), 0);
    comps.push_back(std::move(all));
  }
  return comps;
}

TangentConeEstimate run(std::span<const ProjectivePoint> dirs, const ClusterOptions& opt) {
  if (dirs.empty()) fail(ErrorCode::EmptyNeighborhood, "no directions to cluster");
  if (!(opt.merge_angle >= 0.0)) fail(ErrorCode::InvalidArgument, "merge angle must be >= 0");
  if (opt.k && *opt.k == 0) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  const std::size_t n = dirs.front().dim();
  for (const auto& d : dirs)
    if (d.dim() != n) fail(ErrorCode::DimensionMismatch, "directions differ in dimension");

  Engine engine{dirs, opt, !opt.k.has_value()};
  std::vector<Component> comps;
  std::vector<Fitted> fits;
  if (opt.k) {
    comps = farthest_point_seeds(dirs, *opt.k);
    // Seeds are single directions; the first pass assigns around them.
    fits = engine.iterate(comps);
  } else {
    comps = density_components(dirs, opt);
    for (auto& c : comps) c.frame_dim = 0;
    engine.refit(comps);  // fixes each component's frame dimension
    fits = engine.iterate(comps);
  }
  fits = engine.merge(comps, std::move(fits));

  TangentConeEstimate out;
  out.iterations = engine.iterations;
  out.hit_iteration_cap = engine.capped;
  for (std::size_t j = 0; j < comps.size(); ++j) {
    std::size_t frame_dim = opt.k ? 0 : comps[j].frame_dim;
    Fitted f = opt.k ? fit(dirs, comps[j].members, frame_dim, opt.frame_energy_ratio) : fits[j];
    ConeCluster c{projective_from_vector(f.centroid), std::move(f.frame), comps[j].members,
                  std::nullopt, 0.0};
    double total = 0.0;
    for (std::size_t m : c.member_ids) total += projective_distance(dirs[m], c.centroid);
    c.spread = total / static_cast<double>(c.member_ids.size());
    out.clusters.push_back(std::move(c));
  }
  return out;
}

}  // namespace

LocalDirections local_directions(const PointCloud& cloud, std::span<const double> s, double r_loc) {
  return local_directions(cloud, RangeIndex(cloud), s, r_loc);
}

LocalDirections local_directions(const PointCloud& cloud, const RangeIndex& index,
                                 std::span<const double> s, double r_loc) {
  if (!(r_loc > 0.0)) fail(ErrorCode::InvalidArgument, "r_loc must be > 0");
  if (s.size() != cloud.dim()) fail(ErrorCode::DimensionMismatch, "centre dimension differs from cloud");
  LocalDirections out{Vector(s.begin(), s.end()), r_loc, {}, 0};
  Vector diff(s.size());
  for (std::size_t id : index.range_query(s, r_loc)) {
    const auto x = cloud.point(id);
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = x[k] - s[k];
    if (norm(diff) < kZeroVectorTolerance) {
      ++out.skipped_coincident;
      continue;
    }
    out.entries.push_back({id, projective_from_vector(diff)});
  }
  if (out.entries.empty())
    fail(ErrorCode::EmptyNeighborhood, "no points within r_loc = " + std::to_string(r_loc));
  return out;
}

TangentConeEstimate cluster_directions(std::span<const ProjectivePoint> directions,
                                       const ClusterOptions& options) {
  return run(directions, options);
}

TangentConeEstimate cluster_directions(const LocalDirections& directions,
                                       const ClusterOptions& options) {
  std::vector<ProjectivePoint> dirs;
  dirs.reserve(directions.entries.size());
  for (const auto& e : directions.entries) dirs.push_back(e.dir);
  TangentConeEstimate out = run(dirs, options);
  for (auto& c : out.clusters)
    for (auto& m : c.member_ids) m = directions.entries[m].index;
  out.center = directions.center;
  out.r_loc = directions.r_loc;
  out.skipped_coincident = directions.skipped_coincident;
  return out;
}

double component_distance(const ProjectivePoint& p, const ConeCluster& cluster) {
  if (cluster.frame.size() <= 1) return projective_distance(p, cluster.centroid);
  return subspace_angle(p, cluster.frame);
}

std::size_t nearest_divisor_component(const ProjectivePoint& p, const TangentConeEstimate& cone) {
  if (cone.clusters.empty()) fail(ErrorCode::InvalidArgument, "tangent cone has no clusters");
  std::size_t arg = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cone.clusters.size(); ++j) {
    const double d = component_distance(p, cone.clusters[j]);
    if (d < best) {
      best = d;
      arg = j;
    }
  }
  return arg;
}

double estimate_cluster_dimension(const PointCloud& cloud, std::span<const std::size_t> member_ids,
                                  std::optional<RadiusGrid> grid, const Estimator& estimator,
                                  std::size_t min_neighbors) {
  if (member_ids.size() < min_neighbors || member_ids.size() < 2)
    fail(ErrorCode::InsufficientNeighbors, std::to_string(member_ids.size()) +
                                               " members, need " + std::to_string(min_neighbors));
  const PointCloud sub = cloud.subset(member_ids);
  const std::size_t m = sub.size();
  constexpr std::size_t kMedoidCandidates = 2048;
  const std::size_t stride = m <= kMedoidCandidates ? 1 : (m + kMedoidCandidates - 1) / kMedoidCandidates;
  std::size_t medoid = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < m; c += stride) {
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) total += euclidean_distance(sub.point(c), sub.point(j));
    if (total < best) {
      best = total;
      medoid = c;
    }
  }
  const RangeIndex index(sub);
  if (!grid) {
    double far = 0.0;
    for (std::size_t j = 0; j < m; ++j) far = std::max(far, euclidean_distance(sub.point(medoid), sub.point(j)));
    if (!(far > 0.0)) fail(ErrorCode::InsufficientNeighbors, "members coincide");
    grid = default_grid(index, sub.point(medoid), 0.5 * far);
  }
  const auto profile = dimension_profile(index, sub.point(medoid), medoid, *grid, estimator, min_neighbors);
  auto dims = profile.defined_dims();
  if (dims.empty()) fail(ErrorCode::InsufficientNeighbors, "no defined dim samples at the medoid");
  std::sort(dims.begin(), dims.end());
  const std::size_t h = dims.size() / 2;
  return dims.size() % 2 ? dims[h] : 0.5 * (dims[h - 1] + dims[h]);
}

double default_lambda(const PointCloud& cloud, const TangentConeEstimate& cone) {
  std::vector<double> d;
  for (const auto& c : cone.clusters)
    for (std::size_t id : c.member_ids) d.push_back(euclidean_distance(cloud.point(id), cone.center));
  if (d.empty()) fail(ErrorCode::InvalidArgument, "tangent cone has no members");
  std::sort(d.begin(), d.end());
  const std::size_t h = d.size() / 2;
  const double med = d.size() % 2 ? d[h] : 0.5 * (d[h - 1] + d[h]);
  if (!(med > 0.0)) fail(ErrorCode::NonPositiveScale, "median member distance is zero");
  return med;
}

double default_r_loc(const DimensionProfile& center_profile, const std::optional<double>& witness_r2,
                     double fallback_r_max) {
  if (witness_r2) {
    double r = 0.0;
    for (const auto& s : center_profile.samples)
      if (s.dim && s.r < *witness_r2) r = std::max(r, s.r);
    if (r > 0.0) return r;
  }
  return 2.0 * fallback_r_max;
}

double max_principal_angle(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  if (a.empty() || a.size() != b.size())
    fail(ErrorCode::DimensionMismatch, "frames must be non-empty and of equal size");
  const auto n = static_cast<Eigen::Index>(a.front().size());
  const auto d = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd A(n, d), B(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    A.col(j) = Eigen::Map<const Eigen::VectorXd>(a[static_cast<std::size_t>(j)].data(), n);
    B.col(j) = Eigen::Map<const Eigen::VectorXd>(b[static_cast<std::size_t>(j)].data(), n);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A.transpose() * B);
  const double smin = std::clamp(svd.singularValues().minCoeff(), 0.0, 1.0);
  return std::acos(smin);
}

}  // namespace embres
