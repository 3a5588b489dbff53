#include "embres/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>

#include "embres/errors.hpp"
#include "json_convert.hpp"

namespace embres {

using detail::Json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt("%.4f", *v) : "-"; }

struct LoadedCloud {
  PointCloud cloud;
  std::string path;
};

LoadedCloud load_input(const RunConfig& config) {
  if (config.inputs.empty()) fail(ErrorCode::InvalidArgument, "no input file given");
  const std::filesystem::path path = config.inputs.front();
  const CloudFormat format = config.input_format.value_or(cloud_format_from_path(path));
  return {ingest(path, format), config.inputs.front()};
}

Json cloud_json(const LoadedCloud& in) {
  return {{"path", in.path}, {"N", in.cloud.size()}, {"n", in.cloud.dim()},
          {"labelled", in.cloud.labels().has_value()}};
}

Json report_root(const RunConfig& config) {
  Json root;
  root["schema_version"] = kReportSchemaVersion;
  root["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  root["subcommand"] = to_string(config.subcommand);
  root["config"] = Json::parse(config_to_json(config));
  return root;
}

std::string label_of(const PointCloud& cloud, std::size_t id) {
  if (cloud.labels()) return (*cloud.labels())[id];
  return std::to_string(id);
}

// Singular ids ordered by decreasing witness variation, ties by id.
std::vector<std::size_t> strongest(const SingularLocusReport& locus) {
  std::vector<std::size_t> ids = locus.singular_ids;
  std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
    return locus.witnesses.at(a).variation > locus.witnesses.at(b).variation;
  });
  return ids;
}

std::string locus_summary(const SingularLocusReport& locus, const PointCloud& cloud) {
  std::ostringstream out;
  out << "points " << locus.verdicts.size() << "  regular " << locus.count(Verdict::Regular)
      << "  singular " << locus.count(Verdict::Singular) << "  undetermined "
      << locus.count(Verdict::Undetermined) << "\n";
  out << "epsilon " << fmt("%.4g", locus.params.epsilon) << "  r_max "
      << fmt("%.6g", *locus.params.r_max) << "\n";
  const auto ids = strongest(locus);
  if (!ids.empty()) {
    out << "  id        label             r1          r2          dim1     dim2     variation\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(ids.size(), 10); ++i) {
      const auto& w = locus.witnesses.at(ids[i]);
      char line[160];
      std::snprintf(line, sizeof line, "  %-9zu %-16.16s  %-10.5g  %-10.5g  %-7.3f  %-7.3f  %.3f\n",
                    ids[i], label_of(cloud, ids[i]).c_str(), w.r1, w.r2, w.dim1, w.dim2, w.variation);
      out << line;
    }
    if (ids.size() > 10) out << "  ... " << ids.size() - 10 << " more\n";
  }
  return out.str();
}

Json analysis_json(const SingularPointAnalysis& a) {
  Json j;
  j["center_id"] = a.center_id;
  j["center"] = detail::to_json(a.center_verdict);
  j["r_loc"] = detail::number(a.r_loc);
  j["cone"] = detail::to_json(a.cone);
  j["lifted"] = a.blownup.lifted.size();
  j["isomorphism"] = detail::to_json(a.isomorphism);
  j["regularization"] = detail::to_json(a.regularization);
  j["theorem_holds"] = a.theorem_holds;
  return j;
}

std::string analysis_summary(const SingularPointAnalysis& a) {
  std::ostringstream out;
  out << "centre " << a.center_id << ": " << to_string(a.center_verdict.verdict)
      << ", max variation " << fmt_opt(a.center_verdict.max_variation) << ", r_loc "
      << fmt("%.5g", a.r_loc) << ", k = " << a.cone.clusters.size() << ", lambda "
      << fmt("%.5g", a.blownup.lambda) << "\n";
  for (const auto& p : a.regularization.points) {
    const auto& c = a.cone.clusters[p.cluster];
    out << "  exceptional " << p.exceptional_index << " (cluster " << p.cluster << ", "
        << c.member_ids.size() << " members, frame " << c.frame.size() << ", D "
        << fmt_opt(c.dimension) << "): " << (p.verdict.verdict == Verdict::Regular ? "pass" : to_string(p.verdict.verdict))
        << ", variation " << fmt_opt(p.verdict.max_variation) << ", median dim "
        << fmt_opt(p.median_dim) << "\n";
  }
  out << "  isomorphism away from centre: " << (a.isomorphism.ok ? "ok" : "FAILED")
      << "; theorem property: " << (a.theorem_holds ? "holds" : "does not hold") << "\n";
  return out.str();
}

void finish(RunResult& result, Json root, Clock::time_point t0, Json timing) {
  timing["total_seconds"] = seconds_since(t0);
  root["timing"] = std::move(timing);
  result.report_json = root.dump(2) + "\n";
}

RunResult run_synth(const RunConfig& config) {
  const auto t0 = Clock::now();
  if (!config.seed) fail(ErrorCode::InvalidArgument, "synth requires --seed");
  SynthSpec spec = config.synth.value_or(SynthSpec{});
  spec.seed = *config.seed;
  const SynthResult out = generate(spec);

  RunResult result;
  const std::string cloud_name = std::string("cloud.") + to_string(config.output_format);
  if (config.output_format == CloudFormat::Csv) {
    result.files.push_back({cloud_name, to_csv(out.cloud)});
  } else {
    const auto bytes = to_raw(out.cloud, config.output_format);
    result.files.push_back({cloud_name, std::string(bytes.begin(), bytes.end())});
  }
  result.files.push_back({"truth.json", ground_truth_to_json(out.truth) + "\n"});

  Json root = report_root(config);
  Json synth;
  synth["spec"] = detail::to_json(spec);
  synth["N"] = out.cloud.size();
  synth["n"] = out.cloud.dim();
  synth["cloud_file"] = cloud_name;
  synth["truth_file"] = "truth.json";
  synth["singular_points"] = out.truth.singular_points.size();
  root["synth"] = std::move(synth);

  std::ostringstream s;
  s << "generated " << to_string(spec.kind) << ": N = " << out.cloud.size() << ", n = "
    << out.cloud.dim() << ", sigma = " << fmt("%.4g", spec.sigma()) << ", seed " << spec.seed << "\n";
  result.summary = s.str();
  finish(result, std::move(root), t0, Json::object());
  return result;
}

RunResult run_detect(const RunConfig& config) {
  const auto t0 = Clock::now();
  const LoadedCloud in = load_input(config);
  const RangeIndex index(in.cloud);
  const double t_load = seconds_since(t0);
  const auto locus = singular_locus(in.cloud, index, config.params, config.threads);

  RunResult result;
  std::vector<std::size_t> ids = strongest(locus);
  if (ids.size() > config.max_profiles) ids.resize(config.max_profiles);
  for (std::size_t id : config.profile_ids) {
    if (id >= in.cloud.size()) fail(ErrorCode::InvalidArgument, "profile id " + std::to_string(id) + " out of range");
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  }
  for (std::size_t id : ids)
    result.profiles.push_back({"point_" + std::to_string(id), point_profile(index, in.cloud, id, locus.params)});

  Json root = report_root(config);
  root["input"] = cloud_json(in);
  root["locus"] = detail::to_json(locus, true);
  Json profiles = Json::array();
  for (const auto& p : result.profiles) profiles.push_back("profiles/" + p.name + ".csv");
  root["profiles"] = std::move(profiles);
  result.summary = locus_summary(locus, in.cloud);
  finish(result, std::move(root), t0,
         {{"load_seconds", t_load}, {"locus_seconds", seconds_since(t0) - t_load}});
  return result;
}

RunResult run_blowup(const RunConfig& config, bool verify) {
  const auto t0 = Clock::now();
  const LoadedCloud in = load_input(config);
  const RangeIndex index(in.cloud);
  const auto locus = singular_locus(in.cloud, index, config.params, config.threads);
  const double t_locus = seconds_since(t0);

  std::vector<std::size_t> centers = config.centers;
  for (std::size_t c : centers)
    if (c >= in.cloud.size()) fail(ErrorCode::InvalidArgument, "centre " + std::to_string(c) + " out of range");
  if (centers.empty()) {
    centers = strongest(locus);
    if (centers.size() > config.max_centers) centers.resize(config.max_centers);
  }

  PointAnalysisOptions opt;
  opt.cone = config.cone;
  opt.r_loc = config.r_loc;
  opt.lambda = config.lambda;
  opt.dense_divisor = config.dense_divisor;
  opt.seed = config.seed.value_or(3);

  RunResult result;
  Json root = report_root(config);
  root["input"] = cloud_json(in);
  root["locus"] = detail::to_json(locus, false);
  Json points = Json::array();
  std::ostringstream summary;
  summary << locus_summary(locus, in.cloud);
  bool all_hold = !centers.empty();
  for (std::size_t c : centers) {
    const auto a = analyze_singular_point(in.cloud, index, c, locus.params, opt, config.threads);
    points.push_back(analysis_json(a));
    summary << analysis_summary(a);
    all_hold = all_hold && a.theorem_holds && a.isomorphism.ok;
    const std::string stem = "center_" + std::to_string(c);
    result.profiles.push_back({stem, a.center_profile});
    for (const auto& p : a.regularization.points)
      result.profiles.push_back({stem + "_exceptional_" + std::to_string(p.exceptional_index), p.profile});
  }
  if (centers.empty()) summary << "no singular point to analyse\n";
  root["singular_points"] = std::move(points);
  Json profiles = Json::array();
  for (const auto& p : result.profiles) profiles.push_back("profiles/" + p.name + ".csv");
  root["profiles"] = std::move(profiles);
  if (verify) {
    root["theorem1"] = {{"verified", all_hold}, {"centers", centers.size()}};
    summary << "verification: " << (all_hold ? "PASS" : "FAIL") << "\n";
    if (!all_hold) result.exit_code = kExitTheorem;
  }
  result.summary = summary.str();
  finish(result, std::move(root), t0,
         {{"locus_seconds", t_locus}, {"analysis_seconds", seconds_since(t0) - t_locus}});
  return result;
}

ContextWindow window_from_query(const Json& q, const PointCloud& table, std::size_t k) {
  if (q.contains("context")) {
    ContextWindow w;
    w.k = k;
    const auto& rows = q.at("context");
    for (std::size_t j = 0; j < rows.size(); ++j) w.right.push_back({j + 1, rows[j].get<Vector>()});
    return w;
  }
  const auto seq = q.at("sequence").get<std::vector<std::size_t>>();
  const auto pos = q.at("position").get<std::size_t>();
  if (pos >= seq.size()) fail(ErrorCode::InvalidArgument, "query position outside its sequence");
  return ContextWindow::from_tokens(table, seq, pos, k);
}

RunResult run_context_map(const RunConfig& config) {
  const auto t0 = Clock::now();
  const LoadedCloud in = load_input(config);
  const RangeIndex index(in.cloud);
  const auto locus = singular_locus(in.cloud, index, config.params, config.threads);
  const AggregatorSpec spec = config.aggregator.empty() ? AggregatorSpec::mean() : load_aggregator(config.aggregator);
  if (config.contexts.empty()) fail(ErrorCode::InvalidArgument, "context-map requires --contexts");
  const Json queries = detail::parse_json(read_text(config.contexts), "contexts file");
  const std::size_t k = queries.value("window", std::size_t{2});

  PointAnalysisOptions opt;
  opt.cone = config.cone;
  opt.r_loc = config.r_loc;
  std::map<std::size_t, TangentConeEstimate> cones;
  auto cone_at = [&](std::size_t token) -> const TangentConeEstimate& {
    auto it = cones.find(token);
    if (it != cones.end()) return it->second;
    const auto profile = point_profile(index, in.cloud, token, locus.params);
    std::optional<double> r2;
    if (auto w = locus.witnesses.find(token); w != locus.witnesses.end()) r2 = w->second.r2;
    const double r_loc = opt.r_loc.value_or(default_r_loc(profile, r2, *locus.params.r_max));
    auto cone = cluster_directions(local_directions(in.cloud, index, in.cloud.point(token), r_loc), opt.cone);
    return cones.emplace(token, std::move(cone)).first->second;
  };

  Json results = Json::array();
  std::ostringstream summary;
  summary << locus_summary(locus, in.cloud);
  std::size_t regular = 0, desing = 0, failed = 0;
  try {
    for (const auto& q : queries.at("queries")) {
      const auto token = q.at("token").get<std::size_t>();
      if (token >= in.cloud.size()) fail(ErrorCode::InvalidArgument, "token " + std::to_string(token) + " out of range");
      Json r{{"token", token}};
      try {
        const ContextWindow w = window_from_query(q, in.cloud, k);
        r["context_size"] = w.size();
        const auto rep = hybrid_embed(token, w, locus, in.cloud, spec);
        if (const auto* reg = std::get_if<RegularEmbedding>(&rep)) {
          r["kind"] = "regular";
          r["vector"] = reg->vec;
          ++regular;
        } else {
          const auto& d = std::get<DesingularizedEmbedding>(rep);
          const auto& cone = cone_at(token);
          const std::size_t comp = nearest_divisor_component(d.divisor_point, cone);
          r["kind"] = "desingularized";
          r["divisor_point"] = detail::to_json(d.divisor_point);
          r["component"] = comp;
          r["component_angle"] = detail::number(component_distance(d.divisor_point, cone.clusters[comp]));
          r["components"] = cone.clusters.size();
          ++desing;
        }
      } catch (const Error& e) {
        r["kind"] = "error";
        r["error"] = std::string(to_string(e.code()));
        r["message"] = e.what();
        ++failed;
      }
      results.push_back(std::move(r));
    }
  } catch (const Json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("contexts file: ") + e.what());
  }

  RunResult result;
  Json root = report_root(config);
  root["input"] = cloud_json(in);
  root["locus"] = detail::to_json(locus, false);
  root["aggregator"] = detail::to_json(spec);
  root["context_map"] = {{"window", k}, {"results", std::move(results)}};
  summary << "queries: " << regular << " regular, " << desing << " desingularized, " << failed << " errors\n";
  result.summary = summary.str();
  finish(result, std::move(root), t0, Json::object());
  return result;
}

RunResult run_report(const RunConfig& config) {
  if (config.inputs.empty()) fail(ErrorCode::InvalidArgument, "report needs a report.json input");
  const Json rep = detail::parse_json(read_text(config.inputs.front()), "report");
  if (!rep.is_object() || rep.value("schema_version", -1) != kReportSchemaVersion)
    fail(ErrorCode::InvalidArgument, "unsupported report schema version");
  if (!rep.contains("tool") || rep["tool"].value("name", "") != kToolName)
    fail(ErrorCode::InvalidArgument, "not an embres report");

  std::ostringstream s;
  s << "report from " << rep["tool"].value("version", "?") << ", subcommand "
    << rep.value("subcommand", "?") << "\n";
  if (rep.contains("input"))
    s << "input " << rep["input"].value("path", "?") << ": N = " << rep["input"].value("N", 0)
      << ", n = " << rep["input"].value("n", 0) << "\n";
  if (rep.contains("locus")) {
    const auto& c = rep["locus"]["counts"];
    s << "regular " << c.value("regular", 0) << ", singular " << c.value("singular", 0)
      << ", undetermined " << c.value("undetermined", 0) << "\n";
  }
  if (rep.contains("singular_points"))
    for (const auto& p : rep["singular_points"])
      s << "centre " << p.value("center_id", 0) << ": k = " << p["cone"].value("k", 0)
        << ", exceptional all pass: " << (p["regularization"].value("all_pass", false) ? "yes" : "no")
        << ", theorem property: " << (p.value("theorem_holds", false) ? "holds" : "does not hold") << "\n";
  if (rep.contains("theorem1"))
    s << "verification: " << (rep["theorem1"].value("verified", false) ? "PASS" : "FAIL") << "\n";
  if (rep.contains("synth"))
    s << "synthetic cloud: N = " << rep["synth"].value("N", 0) << ", n = " << rep["synth"].value("n", 0) << "\n";

  RunResult result;
  result.summary = s.str();
  result.report_json = rep.dump(2) + "\n";
  return result;
}

}  // namespace

const char* to_string(Subcommand s) noexcept {
  switch (s) {
    case Subcommand::Synth: return "synth";
    case Subcommand::Detect: return "detect";
    case Subcommand::Blowup: return "blowup";
    case Subcommand::VerifyTheorem1: return "verify-theorem1";
    case Subcommand::ContextMap: return "context-map";
    case Subcommand::Report: return "report";
  }
  return "detect";
}

Subcommand subcommand_from_string(const std::string& name) {
  for (auto s : {Subcommand::Synth, Subcommand::Detect, Subcommand::Blowup,
                 Subcommand::VerifyTheorem1, Subcommand::ContextMap, Subcommand::Report})
    if (name == to_string(s)) return s;
  fail(ErrorCode::InvalidArgument, "unknown subcommand: " + name);
}

std::string config_to_json(const RunConfig& c) {
  Json j;
  j["subcommand"] = to_string(c.subcommand);
  j["inputs"] = c.inputs;
  j["input_format"] = c.input_format ? Json(to_string(*c.input_format)) : Json(nullptr);
  j["out_dir"] = c.out_dir;
  j["params"] = detail::to_json(c.params);
  j["cone"] = detail::to_json(c.cone);
  j["r_loc"] = detail::optional_json(c.r_loc);
  j["lambda"] = detail::optional_json(c.lambda);
  j["seed"] = detail::optional_json(c.seed);
  j["threads"] = c.threads;
  j["centers"] = c.centers;
  j["max_centers"] = c.max_centers;
  j["profile_ids"] = c.profile_ids;
  j["max_profiles"] = c.max_profiles;
  j["dense_divisor"] = c.dense_divisor;
  j["synth"] = c.synth ? detail::to_json(*c.synth) : Json(nullptr);
  j["output_format"] = to_string(c.output_format);
  j["contexts"] = c.contexts;
  j["aggregator"] = c.aggregator;
  return j.dump(2);
}

RunConfig config_from_json(std::string_view text) {
  const Json j = detail::parse_json(text, "run config");
  try {
    RunConfig c;
    c.subcommand = subcommand_from_string(j.at("subcommand").get<std::string>());
    c.inputs = j.value("inputs", std::vector<std::string>{});
    if (j.contains("input_format") && !j["input_format"].is_null())
      c.input_format = cloud_format_from_string(j["input_format"].get<std::string>());
    c.out_dir = j.value("out_dir", c.out_dir);
    if (j.contains("params")) c.params = detail::params_from_json(j["params"]);
    if (j.contains("cone")) c.cone = detail::cluster_options_from_json(j["cone"]);
    if (j.contains("r_loc") && !j["r_loc"].is_null()) c.r_loc = j["r_loc"].get<double>();
    if (j.contains("lambda") && !j["lambda"].is_null()) c.lambda = j["lambda"].get<double>();
    if (j.contains("seed") && !j["seed"].is_null()) c.seed = j["seed"].get<std::uint64_t>();
    c.threads = j.value("threads", c.threads);
    c.centers = j.value("centers", std::vector<std::size_t>{});
    c.max_centers = j.value("max_centers", c.max_centers);
    c.profile_ids = j.value("profile_ids", std::vector<std::size_t>{});
    c.max_profiles = j.value("max_profiles", c.max_profiles);
    c.dense_divisor = j.value("dense_divisor", c.dense_divisor);
    if (j.contains("synth") && !j["synth"].is_null()) c.synth = detail::synth_spec_from_json(j["synth"]);
    if (j.contains("output_format")) c.output_format = cloud_format_from_string(j["output_format"].get<std::string>());
    c.contexts = j.value("contexts", std::string{});
    c.aggregator = j.value("aggregator", std::string{});
    return c;
  } catch (const Json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("run config: ") + e.what());
  }
}

SingularPointAnalysis analyze_singular_point(const PointCloud& cloud, const RangeIndex& index,
                                             std::size_t center_id,
                                             const SingularityParams& resolved,
                                             const PointAnalysisOptions& options,
                                             std::size_t threads) {
  if (center_id >= cloud.size()) fail(ErrorCode::InvalidArgument, "centre id out of range");
  if (!resolved.r_max) fail(ErrorCode::InvalidArgument, "analysis needs resolved params");
  SingularPointAnalysis a;
  a.center_id = center_id;
  const auto s = cloud.point(center_id);
  a.center_profile = point_profile(index, cloud, center_id, resolved);
  SingularityParams local = resolved;
  local.r_max = a.center_profile.grid.r_max();
  a.center_verdict = classify(a.center_profile, local);

  std::optional<double> r2;
  if (a.center_verdict.witness) r2 = a.center_verdict.witness->r2;
  a.r_loc = options.r_loc.value_or(default_r_loc(a.center_profile, r2, *resolved.r_max));

  a.cone = cluster_directions(local_directions(cloud, index, s, a.r_loc), options.cone);
  if (options.estimate_cluster_dims) {
    for (auto& c : a.cone.clusters) {
      try {
        c.dimension = estimate_cluster_dimension(cloud, c.member_ids);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientNeighbors) throw;
      }
    }
  }
  const double lambda = options.lambda.value_or(default_lambda(cloud, a.cone));
  a.blownup = blow_up(cloud, s, a.cone, lambda, {options.dense_divisor, options.seed});
  a.isomorphism = verify_isomorphism_away_from_center(cloud, a.blownup, {0.0, 2000, options.seed});
  a.regularization = regularization_check(a.blownup, resolved, threads);

  a.theorem_holds = a.regularization.all_pass && a.center_verdict.max_variation.has_value();
  for (const auto& p : a.regularization.points)
    a.theorem_holds = a.theorem_holds && p.verdict.max_variation &&
                      *p.verdict.max_variation < *a.center_verdict.max_variation;
  return a;
}

RunResult run(const RunConfig& config) {
  if (config.threads == 0) fail(ErrorCode::InvalidArgument, "threads must be >= 1");
  switch (config.subcommand) {
    case Subcommand::Synth: return run_synth(config);
    case Subcommand::Detect: return run_detect(config);
    case Subcommand::Blowup: return run_blowup(config, false);
    case Subcommand::VerifyTheorem1: return run_blowup(config, true);
    case Subcommand::ContextMap: return run_context_map(config);
    case Subcommand::Report: return run_report(config);
  }
  fail(ErrorCode::InvalidArgument, "unknown subcommand");
}

std::string profile_csv(const DimensionProfile& profile) {
  std::string out = "r,V,dim\n";
  char buf[96];
  for (const auto& s : profile.samples) {
    if (s.dim) {
      std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g\n", s.r, s.volume, *s.dim);
    } else {
      std::snprintf(buf, sizeof buf, "%.17g,%zu,\n", s.r, s.volume);
    }
    out += buf;
  }
  return out;
}

void emit_report(const RunResult& result, const std::filesystem::path& out_dir) {
  write_text(out_dir / "report.json", result.report_json);
  for (const auto& p : result.profiles) write_text(out_dir / "profiles" / (p.name + ".csv"), profile_csv(p.profile));
  for (const auto& f : result.files) write_text(out_dir / f.name, f.contents);
}

std::string strip_timing(const std::string& report_json) {
  Json j = detail::parse_json(report_json, "report");
  j.erase("timing");
  return j.dump(2);
}

}  // namespace embres
