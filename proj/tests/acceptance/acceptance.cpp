// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "embres/blowup.hpp"
#include "embres/context_map.hpp"
#include "embres/errors.hpp"
#include "embres/io.hpp"
#include "embres/pipeline.hpp"
#include "embres/range_index.hpp"
#include "embres/singularity.hpp"
#include "embres/synth.hpp"
#include "embres/tangent_cone.hpp"
#include "oracles.hpp"

using namespace embres;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

SynthResult mixed_crossing() {
  SynthSpec spec;
  spec.ambient = 10;
  spec.dims = {1, 2};
  spec.samples = 1500;
  spec.noise = 0.01;
  spec.seed = 2;
  return generate(spec);
}

// Detector soundness on a flat 2-patch.
Outcome a1() {
  SynthSpec spec;
  spec.kind = SynthKind::FlatPatch;
  spec.ambient = 10;
  spec.dims = {2};
  spec.samples = 3000;
  spec.noise = 0.01;
  spec.seed = 1;
  const auto g = generate(spec);
  const auto t0 = Clock::now();
  const auto locus = singular_locus(g.cloud, SingularityParams{}, 1);
  const double secs = seconds_since(t0);

  const RangeIndex index(g.cloud);
  std::size_t interior = 0, regular = 0;
  std::vector<double> dims;
  for (std::size_t i = 0; i < g.cloud.size(); ++i) {
    if (g.truth.local_radius[i] >= 0.8 * spec.radius) continue;
    ++interior;
    if (locus.verdicts[i].verdict == Verdict::Regular) ++regular;
    if (i % 10 == 0) {
      const auto d = point_profile(index, g.cloud, i, locus.params).defined_dims();
      dims.insert(dims.end(), d.begin(), d.end());
    }
  }
  const double frac = double(regular) / double(interior);
  const double med = median(dims);
  Outcome o;
  o.pass = frac >= 0.95 && med >= 1.7 && med <= 2.3 && secs < 30.0;
  o.detail = "interior regular " + fmt("%.4f", frac) + " (" + std::to_string(regular) + "/" +
             std::to_string(interior) + "), median dim " + fmt("%.3f", med) + ", locus " +
             fmt("%.2f", secs) + " s";
  return o;
}

// Detector completeness at the origin of a line + plane crossing.
Outcome a2(const SynthResult& g, const SingularLocusReport& locus) {
  const auto& v0 = locus.verdicts[0];
  bool origin_ok = false;
  std::string witness = "none";
  if (v0.verdict == Verdict::Singular && v0.witness) {
    const auto& w = *v0.witness;
    const double lo = std::min(w.dim1, w.dim2), hi = std::max(w.dim1, w.dim2);
    origin_ok = lo <= 1.3 && hi >= 1.5;
    witness = "r " + fmt("%.4g", w.r1) + "->" + fmt("%.4g", w.r2) + ", dims " + fmt("%.3f", w.dim1) +
              "->" + fmt("%.3f", w.dim2);
  }
  std::size_t interior = 0, regular = 0;
  for (std::size_t i = 1; i < g.cloud.size(); ++i) {
    const double lr = g.truth.local_radius[i];
    if (lr >= 0.8 || lr <= 0.2) continue;
    ++interior;
    if (locus.verdicts[i].verdict == Verdict::Regular) ++regular;
  }
  const double frac = double(regular) / double(interior);
  Outcome o;
  o.pass = origin_ok && frac >= 0.90;
  o.detail = std::string("origin ") + to_string(v0.verdict) + " (max variation " +
             (v0.max_variation ? fmt("%.3f", *v0.max_variation) : std::string("n/a")) + ", witness " +
             witness + "), interior regular " + fmt("%.4f", frac) + " (" + std::to_string(regular) + "/" +
             std::to_string(interior) + ")";
  return o;
}

// Blow-up regularizes the origin.
Outcome a3(const SynthResult& g, const SingularLocusReport& locus, SingularPointAnalysis& out) {
  const auto t0 = Clock::now();
  const RangeIndex index(g.cloud);
  out = analyze_singular_point(g.cloud, index, 0, locus.params, PointAnalysisOptions{}, 1);
  const double secs = seconds_since(t0);
  const auto& cone = out.cone;

  bool frames_ok = cone.clusters.size() == 2;
  std::vector<int> branch_of(cone.clusters.size(), -1);
  std::string frames;
  for (std::size_t j = 0; j < cone.clusters.size(); ++j) {
    const auto& c = cone.clusters[j];
    double best = 10.0;
    for (std::size_t t = 0; t < g.truth.components.size(); ++t) {
      const auto& comp = g.truth.components[t];
      if (comp.basis.size() != c.frame.size()) continue;
      const double ang = max_principal_angle(c.frame, comp.basis);
      if (ang < best) {
        best = ang;
        branch_of[j] = static_cast<int>(t);
      }
    }
    frames += " " + fmt("%.2f", best * 180.0 / 3.14159265358979323846) + "deg";
    frames_ok = frames_ok && best <= oracle::deg(10.0);
  }
  frames_ok = frames_ok && branch_of.size() == 2 && branch_of[0] != branch_of[1];

  bool exc_ok = out.regularization.points.size() == 2;
  const double center_var = out.center_verdict.max_variation.value_or(NAN);
  std::string per;
  for (const auto& p : out.regularization.points) {
    const int t = branch_of[p.cluster];
    const double D = t >= 0 ? double(g.truth.components[t].dim) : NAN;
    const auto dims = p.profile.defined_dims();
    bool near = !dims.empty();
    for (double d : dims) near = near && std::abs(d - D) <= 0.4;
    const double var = p.verdict.max_variation.value_or(NAN);
    exc_ok = exc_ok && p.verdict.verdict == Verdict::Regular && var < 1.0 && near && var < center_var;
    per += "; exceptional " + std::to_string(p.exceptional_index) + " (D " + fmt("%.0f", D) + "): " +
           to_string(p.verdict.verdict) + ", variation " + fmt("%.3f", var) + ", dims " +
           (dims.empty() ? std::string("none")
                         : fmt("%.2f", *std::min_element(dims.begin(), dims.end())) + ".." +
                               fmt("%.2f", *std::max_element(dims.begin(), dims.end())));
  }
  Outcome o;
  o.pass = frames_ok && exc_ok && secs < 60.0;
  o.detail = "k " + std::to_string(cone.clusters.size()) + ", frame errors" + frames +
             ", centre variation " + fmt("%.3f", center_var) + per + ", " + fmt("%.2f", secs) + " s";
  return o;
}

// Unit vector within max_angle of the branch spanned by basis, oriented near ref.
Vector near_branch(Rng& rng, const std::vector<Vector>& basis, std::span<const double> ref,
                   double max_angle, std::size_t n) {
  Vector in(n, 0.0);
  for (const auto& b : basis) {
    const double c = basis.size() == 1 ? 1.0 : dot(ref, b) + 0.7 * rng.normal();
    for (std::size_t k = 0; k < n; ++k) in[k] += c * b[k];
  }
  if (dot(in, ref) < 0)
    for (auto& x : in) x = -x;
  const double len = norm(in);
  for (auto& x : in) x /= len;
  // Random direction orthogonal to the branch.
  Vector perp(n);
  for (auto& x : perp) x = rng.normal();
  for (const auto& b : basis) {
    const double c = dot(perp, b);
    for (std::size_t k = 0; k < n; ++k) perp[k] -= c * b[k];
  }
  const double plen = norm(perp);
  for (auto& x : perp) x /= plen;
  const double t = rng.uniform(0.0, max_angle);
  Vector v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = std::cos(t) * in[k] + std::sin(t) * perp[k];
  return v;
}

// Context map picks the branch the context came from.
Outcome a4(const SynthResult& g, const SingularPointAnalysis& a) {
  const std::size_t n = g.cloud.dim();
  const auto& cone = a.cone;
  if (cone.clusters.size() != 2) return {false, "cone does not have two components"};
  // Cluster belonging to each true branch, by majority membership.
  std::vector<std::size_t> cluster_of(g.truth.components.size(), 0);
  for (std::size_t t = 0; t < g.truth.components.size(); ++t) {
    std::size_t best = 0, best_hits = 0;
    for (std::size_t j = 0; j < cone.clusters.size(); ++j) {
      std::size_t hits = 0;
      for (std::size_t id : cone.clusters[j].member_ids) hits += g.truth.membership[id] == int(t);
      if (hits > best_hits) {
        best_hits = hits;
        best = j;
      }
    }
    cluster_of[t] = best;
  }

  Rng rng(5);
  std::string detail;
  bool pass = true;
  for (std::size_t t = 0; t < g.truth.components.size(); ++t) {
    const auto& basis = g.truth.components[t].basis;
    std::size_t correct = 0;
    for (int trial = 0; trial < 200; ++trial) {
      Vector ref(n, 0.0);
      for (const auto& b : basis) {
        const double c = rng.normal();
        for (std::size_t k = 0; k < n; ++k) ref[k] += c * b[k];
      }
      ContextWindow w;
      w.k = 3;
      const std::size_t count = 2 + rng.below(5);
      for (std::size_t m = 0; m < count; ++m) {
        Vector v = near_branch(rng, basis, ref, oracle::deg(10.0), n);
        const double scale = rng.uniform(0.05, 0.6);
        for (auto& x : v) x *= scale;
        w.right.push_back({m + 1, std::move(v)});
      }
      const auto p = context_map(w, AggregatorSpec::mean(), n);
      correct += nearest_divisor_component(p, cone) == cluster_of[t];
    }
    const double frac = correct / 200.0;
    pass = pass && frac >= 0.95;
    detail += (t ? ", " : "") + std::string("branch ") + std::to_string(t) + " (D " +
              std::to_string(g.truth.components[t].dim) + ") " + fmt("%.3f", frac);
  }
  return {pass, detail};
}

bool bitwise_equal(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  return true;
}

// Exact invariants.
Outcome a5(const SynthResult& g, const SingularPointAnalysis& a) {
  std::vector<std::string> broken;

  // pi o lift is the identity away from the centre.
  bool lift_ok = a.blownup.lifted.size() == g.cloud.size() - 1;
  for (std::size_t i = 0; i < a.blownup.lifted.size(); ++i)
    lift_ok = lift_ok && project(a.blownup.lifted[i]) == g.cloud.row(a.blownup.origin_ids[i]);
  for (const auto& e : a.blownup.exceptional) lift_ok = lift_ok && project(e) == g.cloud.row(0);
  if (!lift_ok) broken.push_back("lift");

  Rng rng(4);
  std::vector<ContextEntry> entries;
  for (std::size_t i = 0; i < 20; ++i) {
    Vector v(10);
    for (auto& x : v) x = rng.normal() * std::pow(10.0, rng.uniform(-4.0, 4.0));
    entries.push_back({i, std::move(v)});
  }
  ContextWindow base;
  base.k = 20;
  base.position = 20;
  base.left = entries;
  const auto ref = aggregate(base, AggregatorSpec::mean());
  bool perm_ok = true;
  for (int t = 0; t < 100; ++t) {
    auto w = base;
    rng.shuffle(w.left.begin(), w.left.end());
    perm_ok = perm_ok && bitwise_equal(aggregate(w, AggregatorSpec::mean()), ref);
  }
  if (!perm_ok) broken.push_back("permutation");

  bool scale_ok = true;
  for (int t = 0; t < 100; ++t) {
    Vector v(8);
    for (auto& x : v) x = rng.normal();
    double alpha = std::pow(10.0, rng.uniform(-3.0, 3.0));
    if (rng.uniform() < 0.5) alpha = -alpha;
    Vector w = v;
    for (auto& x : w) x *= alpha;
    scale_ok = scale_ok && projective_from_vector(v) == projective_from_vector(w);
  }
  if (!scale_ok) broken.push_back("rescaling");

  const RangeIndex index(g.cloud);
  bool range_ok = true;
  for (int t = 0; t < 1000; ++t) {
    Vector c = g.cloud.row(rng.below(g.cloud.size()));
    if (t % 2)
      for (auto& x : c) x += 0.05 * rng.normal();
    const double r = rng.uniform(0.0, 1.5);
    range_ok = range_ok && index.range_count(c, r) == oracle::naive_count(g.cloud, c, r);
  }
  if (!range_ok) broken.push_back("range_count");

  std::string detail = "lift, permutation, rescaling, range_count";
  if (!broken.empty()) {
    detail = "broken:";
    for (const auto& b : broken) detail += " " + b;
  }
  return {broken.empty(), detail};
}

// Tangent cone of xy = 0.
Outcome a6() {
  SynthSpec spec;
  spec.kind = SynthKind::CrossingLines;
  spec.ambient = 2;
  spec.samples = 200;
  spec.seed = 6;
  const auto g = generate(spec);
  const RangeIndex index(g.cloud);
  const auto params = resolve(SingularityParams{}, g.cloud);
  PointAnalysisOptions opt;
  opt.estimate_cluster_dims = false;
  const auto profile = point_profile(index, g.cloud, 0, params);
  SingularityParams local = params;
  local.r_max = profile.grid.r_max();
  const auto verdict = classify(profile, local);
  std::optional<double> r2;
  if (verdict.witness) r2 = verdict.witness->r2;
  const double r_loc = default_r_loc(profile, r2, *params.r_max);
  const auto cone = cluster_directions(local_directions(g.cloud, index, g.cloud.point(0), r_loc));
  bool pass = cone.clusters.size() == 2;
  std::string detail = "k " + std::to_string(cone.clusters.size()) + ", r_loc " + fmt("%.3f", r_loc);
  for (std::size_t axis = 0; axis < 2; ++axis) {
    Vector e{0, 0};
    e[axis] = 1;
    double best = 10.0;
    for (const auto& c : cone.clusters) best = std::min(best, oracle::line_angle(c.centroid.rep(), e));
    pass = pass && best <= oracle::deg(5.0);
    detail += ", axis " + std::to_string(axis) + " " + fmt("%.2f", best * 180.0 / 3.14159265358979323846) + "deg";
  }
  return {pass, detail};
}

// Determinism of every subcommand.
Outcome a7() {
  const fs::path dir = fs::temp_directory_path() / "embres_acceptance_a7";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::vector<std::string> mismatched;
  auto twice = [&](const RunConfig& cfg) {
    const auto a = run(cfg);
    const auto b = run(cfg);
    bool same = strip_timing(a.report_json) == strip_timing(b.report_json) &&
                a.files.size() == b.files.size() && a.profiles.size() == b.profiles.size();
    for (std::size_t i = 0; same && i < a.files.size(); ++i) same = a.files[i].contents == b.files[i].contents;
    for (std::size_t i = 0; same && i < a.profiles.size(); ++i)
      same = profile_csv(a.profiles[i].profile) == profile_csv(b.profiles[i].profile);
    if (!same) mismatched.push_back(to_string(cfg.subcommand));
    return a;
  };

  RunConfig synth;
  synth.subcommand = Subcommand::Synth;
  synth.seed = 7;
  SynthSpec spec;
  spec.ambient = 5;
  spec.dims = {1, 2};
  spec.samples = 400;
  synth.synth = spec;
  synth.output_format = CloudFormat::RawF64;
  emit_report(twice(synth), dir);

  RunConfig detect;
  detect.subcommand = Subcommand::Detect;
  detect.inputs = {(dir / "cloud.f64").string()};
  detect.threads = 4;
  emit_report(twice(detect), dir / "detect");

  RunConfig blowup = detect;
  blowup.subcommand = Subcommand::Blowup;
  blowup.centers = {0};
  blowup.dense_divisor = 8;
  twice(blowup);

  RunConfig verify = detect;
  verify.subcommand = Subcommand::VerifyTheorem1;
  verify.centers = {0};
  emit_report(twice(verify), dir / "verify");

  write_text(dir / "queries.json",
             R"({"window": 2, "queries": [{"token": 0, "context": [[0.1, 0.2, 0.0, 0.0, 0.1]]},
                                          {"token": 3, "sequence": [1, 3, 5, 7], "position": 1}]})");
  write_text(dir / "agg.json", R"({"kind": "SoftmaxAttention", "q": [1, 0, 0, 0, 0], "tau": 0.5})");
  RunConfig ctx = detect;
  ctx.subcommand = Subcommand::ContextMap;
  ctx.contexts = (dir / "queries.json").string();
  ctx.aggregator = (dir / "agg.json").string();
  twice(ctx);

  RunConfig report;
  report.subcommand = Subcommand::Report;
  report.inputs = {(dir / "verify" / "report.json").string()};
  twice(report);

  fs::remove_all(dir);
  std::string detail = "synth, detect, blowup, verify-theorem1, context-map, report";
  if (!mismatched.empty()) {
    detail = "differs:";
    for (const auto& m : mismatched) detail += " " + m;
  }
  return {mismatched.empty(), detail};
}

Outcome guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("error: ") + e.what()};
  }
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](const char* id, const Outcome& o) {
    std::printf("%s %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  };

  report("A1", guarded(a1));

  const auto g = mixed_crossing();
  SingularLocusReport locus;
  SingularPointAnalysis analysis;
  bool analysed = false;
  report("A2", guarded([&] {
           locus = singular_locus(g.cloud, SingularityParams{}, default_thread_count());
           return a2(g, locus);
         }));
  report("A3", guarded([&] {
           if (locus.verdicts.empty()) locus = singular_locus(g.cloud, SingularityParams{}, 1);
           auto o = a3(g, locus, analysis);
           analysed = true;
           return o;
         }));
  report("A4", guarded([&] { return analysed ? a4(g, analysis) : Outcome{false, "no analysis"}; }));
  report("A5", guarded([&] { return analysed ? a5(g, analysis) : Outcome{false, "no analysis"}; }));
  report("A6", guarded(a6));
  report("A7", guarded(a7));
  std::printf("%d of 7 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
