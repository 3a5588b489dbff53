#include <string>

#include "embres/errors.hpp"
#include "json_convert.hpp"

namespace embres::detail {

namespace {

const char* estimator_name(EstimatorKind k) {
  return k == EstimatorKind::TwoPoint ? "TwoPoint" : "RegressionWindow";
}

Json vec(std::span<const double> v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

Json frame_json(const std::vector<Vector>& frame) {
  Json out = Json::array();
  for (const auto& v : frame) out.push_back(vec(v));
  return out;
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  return j[key].get<T>();
}

template <class T>
std::optional<T> get_opt(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

}  // namespace

Json parse_json(std::string_view text, const char* what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("malformed ") + what + ": " + e.what());
  }
}

Json to_json(const ProjectivePoint& p) { return vec(p.rep()); }

Json to_json(const RadiusGrid& g) { return vec(g.radii()); }

Json to_json(const Estimator& e) {
  Json j{{"kind", estimator_name(e.kind)}};
  if (e.kind == EstimatorKind::RegressionWindow) j["window"] = e.window;
  return j;
}

Json to_json(const GridPolicy& g) {
  return {{"points", g.points}, {"knn", g.knn}, {"per_token_knn", optional_json(g.per_token_knn)}};
}

Json to_json(const SingularityParams& p) {
  return {{"epsilon", number(p.epsilon)},
          {"r_max", p.r_max ? number(*p.r_max) : Json(nullptr)},
          {"grid", to_json(p.grid)},
          {"estimator", to_json(p.estimator)},
          {"min_neighbors", p.min_neighbors}};
}

Json to_json(const SingularityWitness& w) {
  return {{"r1", number(w.r1)}, {"r2", number(w.r2)}, {"dim1", number(w.dim1)},
          {"dim2", number(w.dim2)}, {"variation", number(w.variation)}};
}

Json to_json(const PointVerdict& v) {
  Json j{{"verdict", to_string(v.verdict)},
         {"defined_samples", v.defined_samples},
         {"max_variation", v.max_variation ? number(*v.max_variation) : Json(nullptr)},
         {"r_max", number(v.r_max)}};
  j["witness"] = v.witness ? to_json(*v.witness) : Json(nullptr);
  return j;
}

Json to_json(const SingularLocusReport& r, bool include_verdicts) {
  Json j;
  j["params"] = to_json(r.params);
  j["counts"] = {{"regular", r.count(Verdict::Regular)},
                 {"singular", r.count(Verdict::Singular)},
                 {"undetermined", r.count(Verdict::Undetermined)},
                 {"total", r.verdicts.size()}};
  j["singular_ids"] = r.singular_ids;
  Json witnesses = Json::array();
  for (const auto& [id, w] : r.witnesses) {
    Json e = to_json(w);
    e["id"] = id;
    witnesses.push_back(std::move(e));
  }
  j["witnesses"] = std::move(witnesses);
  Json undetermined = Json::array();
  for (std::size_t i = 0; i < r.verdicts.size(); ++i)
    if (r.verdicts[i].verdict == Verdict::Undetermined) undetermined.push_back(i);
  j["undetermined_ids"] = std::move(undetermined);
  if (include_verdicts) {
    Json all = Json::array();
    for (const auto& v : r.verdicts) all.push_back(to_json(v));
    j["verdicts"] = std::move(all);
  }
  return j;
}

Json to_json(const DimensionProfile& p) {
  Json samples = Json::array();
  for (const auto& s : p.samples)
    samples.push_back({{"r", number(s.r)}, {"volume", s.volume},
                       {"dim", s.dim ? number(*s.dim) : Json(nullptr)}});
  return {{"estimator", to_json(p.estimator)}, {"min_neighbors", p.min_neighbors},
          {"samples", std::move(samples)}};
}

Json to_json(const ClusterOptions& c) {
  return {{"k", optional_json(c.k)},
          {"merge_angle", number(c.merge_angle)},
          {"k_max", c.k_max},
          {"link_fraction", number(c.link_fraction)},
          {"min_core_neighbors", c.min_core_neighbors},
          {"min_cluster_fraction", number(c.min_cluster_fraction)},
          {"frame_energy_ratio", number(c.frame_energy_ratio)},
          {"max_iterations", c.max_iterations},
          {"max_linkage_points", c.max_linkage_points}};
}

Json to_json(const TangentConeEstimate& c) {
  Json clusters = Json::array();
  for (const auto& cl : c.clusters) {
    clusters.push_back({{"centroid", to_json(cl.centroid)},
                        {"frame", frame_json(cl.frame)},
                        {"size", cl.member_ids.size()},
                        {"dimension", cl.dimension ? number(*cl.dimension) : Json(nullptr)},
                        {"spread", number(cl.spread)}});
  }
  return {{"center", vec(c.center)},
          {"r_loc", number(c.r_loc)},
          {"k", c.clusters.size()},
          {"clusters", std::move(clusters)},
          {"skipped_coincident", c.skipped_coincident},
          {"iterations", c.iterations},
          {"hit_iteration_cap", c.hit_iteration_cap}};
}

Json to_json(const IsomorphismReport& r) {
  return {{"ok", r.ok},
          {"bijective", r.bijective},
          {"bases_equal", r.bases_equal},
          {"metric_ok", r.metric_ok},
          {"failing_ids", r.failing_ids},
          {"pairs_checked", r.pairs_checked},
          {"max_discrepancy", number(r.max_discrepancy)},
          {"max_discrepancy_tenth", number(r.max_discrepancy_tenth)},
          {"shrink_factor", number(r.shrink_factor)}};
}

Json to_json(const RegularizationReport& r) {
  Json points = Json::array();
  for (const auto& p : r.points) {
    Json e = to_json(p.verdict);
    e["exceptional_index"] = p.exceptional_index;
    e["cluster"] = p.cluster;
    e["median_dim"] = p.median_dim ? number(*p.median_dim) : Json(nullptr);
    e["purity_break_radius"] = p.purity_break_radius ? number(*p.purity_break_radius) : Json(nullptr);
    e["pass"] = p.verdict.verdict == Verdict::Regular;
    Json purity = Json::array();
    for (std::size_t g = 0; g < p.purity.size(); ++g)
      purity.push_back({{"r", number(p.profile.grid[g])}, {"purity", number(p.purity[g])}});
    e["purity"] = std::move(purity);
    points.push_back(std::move(e));
  }
  return {{"lambda", number(r.lambda)}, {"all_pass", r.all_pass}, {"exceptional", std::move(points)}};
}

Json to_json(const AggregatorSpec& a) {
  if (a.kind == AggregatorSpec::Kind::Mean) return {{"kind", "Mean"}};
  return {{"kind", "SoftmaxAttention"}, {"q", vec(a.query)}, {"tau", number(a.temperature)}};
}

Json to_json(const SynthSpec& s) {
  return {{"kind", to_string(s.kind)},
          {"ambient", s.ambient},
          {"dims", s.dims},
          {"samples", s.samples},
          {"noise", s.noise ? number(*s.noise) : Json(nullptr)},
          {"radius", number(s.radius)},
          {"seed", s.seed},
          {"min_angle_deg", number(s.min_angle_deg)},
          {"cone_angle_deg", number(s.cone_angle_deg)},
          {"cap_angle_deg", number(s.cap_angle_deg)},
          {"include_center", s.include_center}};
}

Json to_json(const GroundTruth& t) {
  Json comps = Json::array();
  for (const auto& c : t.components) {
    const char* shape = c.shape == ComponentShape::Flat ? "flat" : c.shape == ComponentShape::Sphere ? "sphere" : "cone";
    comps.push_back({{"shape", shape}, {"dim", c.dim}, {"basis", frame_json(c.basis)},
                     {"radius", number(c.radius)}, {"angle", number(c.angle)}});
  }
  Json singular = Json::array();
  for (const auto& s : t.singular_points) singular.push_back(vec(s));
  return {{"ambient", t.ambient},
          {"center", vec(t.center)},
          {"singular_points", std::move(singular)},
          {"components", std::move(comps)},
          {"membership", t.membership},
          {"local_radius", vec(t.local_radius)},
          {"noise", number(t.noise)}};
}

Estimator estimator_from_json(const Json& j) {
  const auto kind = get_or<std::string>(j, "kind", "RegressionWindow");
  if (kind == "TwoPoint") return Estimator::two_point();
  if (kind == "RegressionWindow") return Estimator::regression(get_or<std::size_t>(j, "window", 9));
  fail(ErrorCode::InvalidArgument, "unknown estimator: " + kind);
}

GridPolicy grid_policy_from_json(const Json& j) {
  GridPolicy g;
  g.points = get_or<std::size_t>(j, "points", g.points);
  g.knn = get_or<std::size_t>(j, "knn", g.knn);
  g.per_token_knn = get_opt<std::size_t>(j, "per_token_knn");
  return g;
}

SingularityParams params_from_json(const Json& j) {
  SingularityParams p;
  p.epsilon = get_or<double>(j, "epsilon", p.epsilon);
  p.r_max = get_opt<double>(j, "r_max");
  if (j.contains("grid")) p.grid = grid_policy_from_json(j["grid"]);
  if (j.contains("estimator")) p.estimator = estimator_from_json(j["estimator"]);
  p.min_neighbors = get_or<std::size_t>(j, "min_neighbors", p.min_neighbors);
  return p;
}

ClusterOptions cluster_options_from_json(const Json& j) {
  ClusterOptions c;
  c.k = get_opt<std::size_t>(j, "k");
  c.merge_angle = get_or<double>(j, "merge_angle", c.merge_angle);
  c.k_max = get_or<std::size_t>(j, "k_max", c.k_max);
  c.link_fraction = get_or<double>(j, "link_fraction", c.link_fraction);
  c.min_core_neighbors = get_or<std::size_t>(j, "min_core_neighbors", c.min_core_neighbors);
  c.min_cluster_fraction = get_or<double>(j, "min_cluster_fraction", c.min_cluster_fraction);
  c.frame_energy_ratio = get_or<double>(j, "frame_energy_ratio", c.frame_energy_ratio);
  c.max_iterations = get_or<std::size_t>(j, "max_iterations", c.max_iterations);
  c.max_linkage_points = get_or<std::size_t>(j, "max_linkage_points", c.max_linkage_points);
  return c;
}

AggregatorSpec aggregator_from_json(const Json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "Mean") return AggregatorSpec::mean();
    if (kind == "SoftmaxAttention")
      return AggregatorSpec::attention(j.at("q").get<Vector>(), j.at("tau").get<double>());
    fail(ErrorCode::InvalidArgument, "unknown aggregator kind: " + kind);
  } catch (const Json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("aggregator spec: ") + e.what());
  }
}

SynthSpec synth_spec_from_json(const Json& j) {
  try {
    SynthSpec s;
    s.kind = synth_kind_from_string(get_or<std::string>(j, "kind", to_string(s.kind)));
    s.ambient = get_or<std::size_t>(j, "ambient", s.ambient);
    if (s.kind == SynthKind::CrossingLines) s.dims = {1, 1};
    if (s.kind == SynthKind::FlatPatch || s.kind == SynthKind::SpherePatch) s.dims = {2};
    if (s.kind == SynthKind::Cone) s.dims = {2};
    s.dims = get_or<std::vector<std::size_t>>(j, "dims", s.dims);
    s.samples = get_or<std::size_t>(j, "samples", s.samples);
    s.noise = get_opt<double>(j, "noise");
    s.radius = get_or<double>(j, "radius", s.radius);
    s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
    s.min_angle_deg = get_or<double>(j, "min_angle_deg", s.min_angle_deg);
    s.cone_angle_deg = get_or<double>(j, "cone_angle_deg", s.cone_angle_deg);
    s.cap_angle_deg = get_or<double>(j, "cap_angle_deg", s.cap_angle_deg);
    s.include_center = get_or<bool>(j, "include_center", s.include_center);
    s.validate();
    return s;
  } catch (const Json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("synth spec: ") + e.what());
  }
}

}  // namespace embres::detail
