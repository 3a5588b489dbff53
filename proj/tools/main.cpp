// embres command-line front end. See README.md for the flag reference.

#include <cmath>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "embres/errors.hpp"
#include "embres/io.hpp"
#include "embres/pipeline.hpp"

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Flag storage; only flags the user actually passed are applied on top of the
// base config (defaults or --config file).
struct Flags {
  std::string config_file;
  std::string input;
  std::string format;
  std::string out;
  std::size_t threads = 0;

  double epsilon = 0, r_max = 0;
  std::size_t min_neighbors = 0, grid_points = 0, grid_knn = 0, per_token_knn = 0;
  std::string estimator;
  std::size_t window = 0;

  std::size_t k = 0, max_centers = 0, dense_divisor = 0, max_profiles = 0;
  double merge_angle_deg = 0, r_loc = 0, lambda = 0;
  std::vector<std::size_t> centers, profiles;

  std::uint64_t seed = 0;
  std::string spec_file, kind, output_format;
  std::size_t ambient = 0, samples = 0;
  std::vector<std::size_t> dims;
  double noise = 0, radius = 0, min_angle = 0, cone_angle = 0, cap_angle = 0;
  bool no_center = false;

  std::string contexts, aggregator;
};

struct Options {
  CLI::Option* config_file = nullptr;
  CLI::Option* input = nullptr;
  CLI::Option* format = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* threads = nullptr;
  CLI::Option* epsilon = nullptr;
  CLI::Option* r_max = nullptr;
  CLI::Option* min_neighbors = nullptr;
  CLI::Option* grid_points = nullptr;
  CLI::Option* grid_knn = nullptr;
  CLI::Option* per_token_knn = nullptr;
  CLI::Option* estimator = nullptr;
  CLI::Option* window = nullptr;
  CLI::Option* k = nullptr;
  CLI::Option* merge_angle = nullptr;
  CLI::Option* r_loc = nullptr;
  CLI::Option* lambda = nullptr;
  CLI::Option* centers = nullptr;
  CLI::Option* max_centers = nullptr;
  CLI::Option* dense_divisor = nullptr;
  CLI::Option* profiles = nullptr;
  CLI::Option* max_profiles = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* spec_file = nullptr;
  CLI::Option* kind = nullptr;
  CLI::Option* ambient = nullptr;
  CLI::Option* dims = nullptr;
  CLI::Option* samples = nullptr;
  CLI::Option* noise = nullptr;
  CLI::Option* radius = nullptr;
  CLI::Option* min_angle = nullptr;
  CLI::Option* cone_angle = nullptr;
  CLI::Option* cap_angle = nullptr;
  CLI::Option* no_center = nullptr;
  CLI::Option* output_format = nullptr;
  CLI::Option* contexts = nullptr;
  CLI::Option* aggregator = nullptr;
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

void add_common(CLI::App* app, Flags& f, Options& o, bool needs_input) {
  o.config_file = app->add_option("--config", f.config_file, "Base RunConfig JSON (e.g. the config echoed in a report)");
  if (needs_input) {
    o.input = app->add_option("input", f.input, "Input point cloud");
    o.format = app->add_option("--format", f.format, "Input format: csv, f32, f64 (default: from extension)")
                   ->check(CLI::IsMember({"csv", "f32", "f64"}));
  }
  o.out = app->add_option("-o,--out", f.out, "Output directory (default embres-out)");
  o.threads = app->add_option("--threads", f.threads, "Worker threads (default $EMBRES_THREADS or 1)")
                  ->check(CLI::PositiveNumber);
}

void add_detection(CLI::App* app, Flags& f, Options& o) {
  o.epsilon = app->add_option("--epsilon", f.epsilon, "Variation threshold (default 1.0)")->check(CLI::PositiveNumber);
  o.r_max = app->add_option("--r-max", f.r_max, "Radius window end (default 0.25 x median pairwise distance)")
                ->check(CLI::PositiveNumber);
  o.min_neighbors = app->add_option("--min-neighbors", f.min_neighbors, "Ball count floor for a defined dim sample (default 40)")
                        ->check(CLI::PositiveNumber);
  o.grid_points = app->add_option("--grid-points", f.grid_points, "Radii per grid (default 32)")->check(CLI::Range(4, 100000));
  o.grid_knn = app->add_option("--grid-knn", f.grid_knn, "Grid starts at this neighbour's distance (default 5)");
  o.per_token_knn = app->add_option("--per-token-knn", f.per_token_knn, "Per-point window end at this neighbour's distance")
                        ->check(CLI::PositiveNumber);
  o.estimator = app->add_option("--estimator", f.estimator, "two-point or regression (default regression)")
                    ->check(CLI::IsMember({"two-point", "regression"}));
  o.window = app->add_option("--window", f.window, "Regression window, odd >= 3 (default 9)");
}

void add_cone(CLI::App* app, Flags& f, Options& o) {
  o.k = app->add_option("--k", f.k, "Fixed cluster count (default: automatic)")->check(CLI::PositiveNumber);
  o.merge_angle = app->add_option("--merge-angle", f.merge_angle_deg, "Centroid merge angle in degrees (default 20)")
                      ->check(CLI::Range(0.0, 90.0));
  o.r_loc = app->add_option("--r-loc", f.r_loc, "Locality radius for directions")->check(CLI::PositiveNumber);
}

void add_blowup(CLI::App* app, Flags& f, Options& o) {
  add_cone(app, f, o);
  o.lambda = app->add_option("--lambda", f.lambda, "Projective scale (default: median member distance)")
                 ->check(CLI::PositiveNumber);
  o.centers = app->add_option("--center", f.centers, "Centre row (repeatable; default: strongest detected points)");
  o.max_centers = app->add_option("--max-centers", f.max_centers, "Detected centres analysed (default 4)");
  o.dense_divisor = app->add_option("--dense-divisor", f.dense_divisor, "Extra quasi-uniform divisor points");
  o.seed = app->add_option("--seed", f.seed, "Seed for the metric spot check (default 3)");
}

embres::RunConfig build_config(embres::Subcommand sub, const Flags& f, const Options& o) {
  embres::RunConfig c;
  if (given(o.config_file)) c = embres::config_from_json(embres::read_text(f.config_file));
  c.subcommand = sub;
  if (!given(o.threads) && !given(o.config_file)) c.threads = embres::default_thread_count();

  if (given(o.input)) c.inputs = {f.input};
  if (given(o.format)) c.input_format = embres::cloud_format_from_string(f.format);
  if (given(o.out)) c.out_dir = f.out;
  if (given(o.threads)) c.threads = f.threads;

  if (given(o.epsilon)) c.params.epsilon = f.epsilon;
  if (given(o.r_max)) c.params.r_max = f.r_max;
  if (given(o.min_neighbors)) c.params.min_neighbors = f.min_neighbors;
  if (given(o.grid_points)) c.params.grid.points = f.grid_points;
  if (given(o.grid_knn)) c.params.grid.knn = f.grid_knn;
  if (given(o.per_token_knn)) c.params.grid.per_token_knn = f.per_token_knn;
  if (given(o.estimator) || given(o.window)) {
    const bool two = given(o.estimator) ? f.estimator == "two-point"
                                        : c.params.estimator.kind == embres::EstimatorKind::TwoPoint;
    c.params.estimator = two ? embres::Estimator::two_point()
                             : embres::Estimator::regression(given(o.window) ? f.window : c.params.estimator.window);
  }

  if (given(o.k)) c.cone.k = f.k;
  if (given(o.merge_angle)) c.cone.merge_angle = f.merge_angle_deg * kDeg;
  if (given(o.r_loc)) c.r_loc = f.r_loc;
  if (given(o.lambda)) c.lambda = f.lambda;
  if (given(o.centers)) c.centers = f.centers;
  if (given(o.max_centers)) c.max_centers = f.max_centers;
  if (given(o.dense_divisor)) c.dense_divisor = f.dense_divisor;
  if (given(o.profiles)) c.profile_ids = f.profiles;
  if (given(o.max_profiles)) c.max_profiles = f.max_profiles;
  if (given(o.seed)) c.seed = f.seed;

  if (sub == embres::Subcommand::Synth) {
    embres::SynthSpec spec = c.synth.value_or(embres::SynthSpec{});
    if (given(o.spec_file)) spec = embres::parse_synth_spec(embres::read_text(f.spec_file));
    if (given(o.kind)) {
      spec.kind = embres::synth_kind_from_string(f.kind);
      if (!given(o.dims)) {
        if (spec.kind == embres::SynthKind::CrossingLines) spec.dims = {1, 1};
        if (spec.kind == embres::SynthKind::FlatPatch || spec.kind == embres::SynthKind::SpherePatch ||
            spec.kind == embres::SynthKind::Cone)
          spec.dims = {2};
      }
    }
    if (given(o.ambient)) spec.ambient = f.ambient;
    if (given(o.dims)) spec.dims = f.dims;
    if (given(o.samples)) spec.samples = f.samples;
    if (given(o.noise)) spec.noise = f.noise;
    if (given(o.radius)) spec.radius = f.radius;
    if (given(o.min_angle)) spec.min_angle_deg = f.min_angle;
    if (given(o.cone_angle)) spec.cone_angle_deg = f.cone_angle;
    if (given(o.cap_angle)) spec.cap_angle_deg = f.cap_angle;
    if (given(o.no_center)) spec.include_center = false;
    if (c.seed) spec.seed = *c.seed;
    c.synth = spec;
    if (given(o.output_format)) c.output_format = embres::cloud_format_from_string(f.output_format);
  }
  if (given(o.contexts)) c.contexts = f.contexts;
  if (given(o.aggregator)) c.aggregator = f.aggregator;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"embres: singularity detection and blow-up analysis for embedding point clouds"};
  app.set_version_flag("--version", std::string(embres::kToolVersion));
  app.require_subcommand(1);

  Flags f;
  struct Entry {
    embres::Subcommand sub;
    CLI::App* app;
    Options opts;
  };
  std::vector<Entry> entries;
  entries.reserve(6);

  {
    auto* s = app.add_subcommand("synth", "Generate a synthetic cloud with ground truth");
    Options o;
    add_common(s, f, o, false);
    o.seed = s->add_option("--seed", f.seed, "PRNG seed (required unless the --config file has one)");
    o.spec_file = s->add_option("--spec", f.spec_file, "SynthSpec JSON file");
    o.kind = s->add_option("--kind", f.kind, "AffineSubspaceUnion, CrossingLines, Cone, SpherePatch, FlatPatch");
    o.ambient = s->add_option("--ambient", f.ambient, "Ambient dimension n");
    o.dims = s->add_option("--dims", f.dims, "Component dimensions")->delimiter(',');
    o.samples = s->add_option("--samples", f.samples, "Samples per component");
    o.noise = s->add_option("--noise", f.noise, "Gaussian noise sigma (default 0.01 x radius)")->check(CLI::NonNegativeNumber);
    o.radius = s->add_option("--radius", f.radius, "Component radius (default 1)")->check(CLI::PositiveNumber);
    o.min_angle = s->add_option("--min-angle", f.min_angle, "Minimum principal angle, degrees (default 30)");
    o.cone_angle = s->add_option("--cone-angle", f.cone_angle, "Cone half-angle, degrees (default 45)");
    o.cap_angle = s->add_option("--cap-angle", f.cap_angle, "Sphere cap polar extent, degrees (default 90)");
    o.no_center = s->add_flag("--no-center", f.no_center, "Do not include the singular point itself");
    o.output_format = s->add_option("--output-format", f.output_format, "csv, f32 or f64 (default csv)")
                          ->check(CLI::IsMember({"csv", "f32", "f64"}));
    entries.push_back({embres::Subcommand::Synth, s, o});
  }
  {
    auto* s = app.add_subcommand("detect", "Classify every point and report the singular locus");
    Options o;
    add_common(s, f, o, true);
    add_detection(s, f, o);
    o.profiles = s->add_option("--profile", f.profiles, "Also emit the profile of this row (repeatable)");
    o.max_profiles = s->add_option("--max-profiles", f.max_profiles, "Singular profiles emitted (default 64)");
    entries.push_back({embres::Subcommand::Detect, s, o});
  }
  for (auto [name, sub, help] :
       {std::tuple{"blowup", embres::Subcommand::Blowup, "Tangent cone, blow-up and exceptional-point profiles"},
        std::tuple{"verify-theorem1", embres::Subcommand::VerifyTheorem1,
                   "Blow up and require every exceptional point to be regular (exit 3 otherwise)"}}) {
    auto* s = app.add_subcommand(name, help);
    Options o;
    add_common(s, f, o, true);
    add_detection(s, f, o);
    add_blowup(s, f, o);
    entries.push_back({sub, s, o});
  }
  {
    auto* s = app.add_subcommand("context-map", "Hybrid embeddings of tokens in context");
    Options o;
    add_common(s, f, o, true);
    add_detection(s, f, o);
    add_cone(s, f, o);
    o.contexts = s->add_option("--contexts", f.contexts, "Queries JSON file");
    o.aggregator = s->add_option("--aggregator", f.aggregator, "Aggregator JSON file (default Mean)");
    entries.push_back({embres::Subcommand::ContextMap, s, o});
  }
  {
    auto* s = app.add_subcommand("report", "Validate an existing report.json and print its summary");
    Options o;
    o.input = s->add_option("input", f.input, "report.json")->required();
    o.out = s->add_option("-o,--out", f.out, "Also re-emit the report into this directory");
    entries.push_back({embres::Subcommand::Report, s, o});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? embres::kExitOk : embres::kExitValidation;
  }

  try {
    for (const auto& e : entries) {
      if (!e.app->parsed()) continue;
      const embres::RunConfig config = build_config(e.sub, f, e.opts);
      const embres::RunResult result = embres::run(config);
      if (e.sub != embres::Subcommand::Report || given(e.opts.out)) embres::emit_report(result, config.out_dir);
      std::cout << result.summary;
      if (e.sub != embres::Subcommand::Report) std::cout << "wrote " << config.out_dir << "/report.json\n";
      return result.exit_code;
    }
  } catch (const embres::Error& e) {
    std::cerr << "error [" << embres::to_string(e.code()) << "]: " << e.what() << "\n";
    return embres::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return embres::kExitOk;
}
