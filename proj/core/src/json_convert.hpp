#pragma once

// Private JSON conversions shared by the io, report and pipeline sources.

#include <cmath>
#include <optional>

#include "json.hpp"

#include "embres/blowup.hpp"
#include "embres/context_map.hpp"
#include "embres/dimension.hpp"
#include "embres/singularity.hpp"
#include "embres/synth.hpp"
#include "embres/tangent_cone.hpp"

namespace embres::detail {

using Json = nlohmann::json;  // std::map backed: keys come out sorted

inline Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json to_json(const ProjectivePoint& p);
Json to_json(const RadiusGrid& g);
Json to_json(const Estimator& e);
Json to_json(const GridPolicy& g);
Json to_json(const SingularityParams& p);
Json to_json(const SingularityWitness& w);
Json to_json(const PointVerdict& v);
Json to_json(const SingularLocusReport& r, bool include_verdicts);
Json to_json(const DimensionProfile& p);
Json to_json(const ClusterOptions& c);
Json to_json(const TangentConeEstimate& c);
Json to_json(const IsomorphismReport& r);
Json to_json(const RegularizationReport& r);
Json to_json(const AggregatorSpec& a);
Json to_json(const SynthSpec& s);
Json to_json(const GroundTruth& t);

Estimator estimator_from_json(const Json& j);
GridPolicy grid_policy_from_json(const Json& j);
SingularityParams params_from_json(const Json& j);
ClusterOptions cluster_options_from_json(const Json& j);
AggregatorSpec aggregator_from_json(const Json& j);
SynthSpec synth_spec_from_json(const Json& j);

Json parse_json(std::string_view text, const char* what);

}  // namespace embres::detail
