#include "doctest.h"

#include "embres/errors.hpp"
#include "embres/singularity.hpp"
#include "embres/synth.hpp"
#include "oracles.hpp"

using namespace embres;

namespace {

DimensionProfile manual_profile(const std::vector<std::optional<double>>& dims) {
  std::vector<double> radii;
  for (std::size_t i = 0; i < dims.size(); ++i) radii.push_back(0.1 * static_cast<double>(i + 1));
  DimensionProfile p{std::size_t{0}, RadiusGrid(radii), Estimator{}, 10, {}};
  for (std::size_t i = 0; i < dims.size(); ++i) p.samples.push_back({radii[i], 10 + i, dims[i]});
  return p;
}

SingularityParams eps(double e, double r_max = 10.0) {
  SingularityParams p;
  p.epsilon = e;
  p.r_max = r_max;
  return p;
}

SynthResult small_union(std::uint64_t seed) {
  SynthSpec spec;
  spec.kind = SynthKind::AffineSubspaceUnion;
  spec.ambient = 6;
  spec.dims = {1, 2};
  spec.samples = 600;
  spec.seed = seed;
  return generate(spec);
}

}  // namespace

TEST_CASE("is_singular scans every ordered pair") {
  CHECK_FALSE(is_singular(manual_profile({2.0, 2.0, 2.0, 2.0}), eps(0.5)).has_value());

  const auto w = is_singular(manual_profile({2.0, 2.2, 3.6, std::nullopt}), eps(1.0));
  REQUIRE(w.has_value());
  CHECK(w->r1 == doctest::Approx(0.1));
  CHECK(w->r2 == doctest::Approx(0.3));
  CHECK(w->dim1 == 2.0);
  CHECK(w->dim2 == 3.6);
  CHECK(w->variation == doctest::Approx(1.6));

  // The window stops at r_max.
  CHECK_FALSE(is_singular(manual_profile({2.0, 2.2, 3.6, 2.1}), eps(1.0, 0.25)).has_value());
  // Variation must strictly exceed epsilon.
  CHECK_FALSE(is_singular(manual_profile({2.0, 3.0, 2.0, 2.0}), eps(1.0)).has_value());
}

TEST_CASE("fewer than two defined samples is undetermined, not regular") {
  const auto p = manual_profile({std::nullopt, 2.0, std::nullopt, std::nullopt});
  try {
    is_singular(p, eps(1.0));
    FAIL("expected NoDefinedSamples");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoDefinedSamples);
  }
  const auto v = classify(p, eps(1.0));
  CHECK(v.verdict == Verdict::Undetermined);
  CHECK_FALSE(v.max_variation.has_value());
  CHECK(classify(manual_profile({2.0, 2.1, 2.0, 2.0}), eps(1.0)).verdict == Verdict::Regular);
}

TEST_CASE("witness grows monotonically with r_max over a fixed grid") {
  const auto p = manual_profile({2.0, 2.4, 2.9, 3.3, 4.1, 2.2});
  std::optional<double> prev;
  for (double r_max : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}) {
    const auto v = classify(p, eps(1.0, r_max));
    if (prev && v.max_variation) CHECK(*v.max_variation >= *prev);
    if (v.max_variation) prev = v.max_variation;
  }
  CHECK(classify(p, eps(1.0, 0.3)).verdict == Verdict::Regular);
  CHECK(classify(p, eps(1.0, 0.4)).verdict == Verdict::Singular);
}

TEST_CASE("default r_max is a quarter of the median pairwise distance") {
  const auto line = PointCloud::from_rows({{0, 0}, {1, 0}, {2, 0}, {3, 0}});
  // Pairwise distances 1,1,1,2,2,3 -> median 1.5.
  CHECK(default_r_max(line) == doctest::Approx(0.375));
  const auto p = resolve(SingularityParams{}, line);
  CHECK(*p.r_max == doctest::Approx(0.375));
  SingularityParams bad;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(resolve(bad, line), Error);
}

TEST_CASE("singular locus on a union: reports, witnesses and invariants") {
  const auto g = small_union(3);
  SingularityParams params;
  const auto rep = singular_locus(g.cloud, params);
  REQUIRE(rep.verdicts.size() == g.cloud.size());
  REQUIRE(rep.params.r_max.has_value());

  // singular_ids == points with a witness, and every witness recomputes.
  std::vector<std::size_t> with_witness;
  const RangeIndex index(g.cloud);
  for (std::size_t i = 0; i < rep.verdicts.size(); ++i) {
    if (!rep.verdicts[i].witness) continue;
    with_witness.push_back(i);
    const auto& w = *rep.verdicts[i].witness;
    CHECK(w.r1 < w.r2);
    CHECK(w.r2 <= *rep.params.r_max);
    const auto prof = point_profile(index, g.cloud, i, rep.params);
    CHECK(dimensional_variation(prof, w.r1, w.r2) == w.variation);
    CHECK(w.variation > rep.params.epsilon);
  }
  CHECK(with_witness == rep.singular_ids);
  CHECK(rep.witnesses.size() == rep.singular_ids.size());

  // Thread count does not change the report.
  CHECK(singular_locus(g.cloud, params, 4) == rep);
  CHECK(singular_locus(g.cloud, params, 1) == rep);
}

TEST_CASE("singular ids shrink as epsilon grows") {
  const auto g = small_union(4);
  std::vector<std::size_t> prev;
  bool first = true;
  for (double e : {0.25, 0.5, 1.0, 2.0, 1e9}) {
    SingularityParams p;
    p.epsilon = e;
    const auto rep = singular_locus(g.cloud, p, 2);
    if (!first) CHECK(std::includes(prev.begin(), prev.end(), rep.singular_ids.begin(), rep.singular_ids.end()));
    prev = rep.singular_ids;
    first = false;
    if (e == 1e9) CHECK(rep.singular_ids.empty());
  }
}

TEST_CASE("per-token window override") {
  const auto g = small_union(5);
  SingularityParams p;
  p.grid.per_token_knn = 60;
  const auto rep = singular_locus(g.cloud, p);
  const RangeIndex index(g.cloud);
  for (std::size_t id : {1u, 50u, 700u}) {
    const auto nn = index.nearest(g.cloud.point(id), 61);
    CHECK(rep.verdicts[id].r_max == doctest::Approx(std::sqrt(nn.back().first)));
  }
}
