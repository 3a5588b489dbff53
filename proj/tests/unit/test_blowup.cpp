#include "doctest.h"

#include <cmath>
#include <numbers>
#include <set>

#include "embres/blowup.hpp"
#include "embres/errors.hpp"
#include "embres/synth.hpp"
#include "oracles.hpp"

using namespace embres;

namespace {

SynthResult xy_zero(std::uint64_t seed, double noise) {
  SynthSpec spec;
  spec.kind = SynthKind::CrossingLines;
  spec.ambient = 2;
  spec.dims = {1, 1};
  spec.samples = 200;
  spec.noise = noise;
  spec.seed = seed;
  return generate(spec);
}

TangentConeEstimate two_axes_cone() {
  std::vector<ProjectivePoint> dirs{projective_from_vector(Vector{1, 0}),
                                    projective_from_vector(Vector{0, 1})};
  ClusterOptions opt;
  opt.k = 2;
  return cluster_directions(dirs, opt);
}

}  // namespace

TEST_CASE("tiny blow-up") {
  const auto cloud = PointCloud::from_rows({{1, 0}, {0, 1}, {0, 0}});
  const Vector s{0, 0};
  const auto cone = cluster_directions(local_directions(cloud, s, 2.0), ClusterOptions{.k = 2});
  REQUIRE(cone.clusters.size() == 2);
  const auto b = blow_up(cloud, s, cone, 1.0);
  CHECK(b.lifted.size() == 2);
  CHECK(b.exceptional.size() == 2);
  CHECK(b.origin_ids == std::vector<std::size_t>{0, 1});
  for (std::size_t i = 0; i < b.lifted.size(); ++i) {
    const auto& p = b.lifted[i];
    CHECK_FALSE(p.is_exceptional);
    CHECK(p.base == cloud.row(b.origin_ids[i]));
    CHECK(p.dir == projective_from_vector(p.base));
    CHECK(project(p) == cloud.row(b.origin_ids[i]));
  }
  for (const auto& e : b.exceptional) {
    CHECK(e.is_exceptional);
    CHECK(e.base == s);
    CHECK(project(e) == s);
  }
}

TEST_CASE("lifted count and errors") {
  const auto cloud = PointCloud::from_rows({{1, 0}, {0, 1}, {2, 3}});
  const auto cone = two_axes_cone();
  CHECK(blow_up(cloud, Vector{-1, -1}, cone, 0.5).lifted.size() == 3);

  const auto twice = PointCloud::from_rows({{1, 0}, {0, 0}, {0, 0}, {0, 2}});
  CHECK(blow_up(twice, Vector{0, 0}, cone, 0.5).lifted.size() == 2);

  const auto degenerate = PointCloud::from_rows({{1, 1}, {1, 1}});
  try {
    blow_up(degenerate, Vector{1, 1}, cone, 1.0);
    FAIL("expected DegenerateCenter");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateCenter);
  }
  try {
    blow_up(cloud, Vector{0, 0}, cone, 0.0);
    FAIL("expected NonPositiveScale");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveScale);
  }
  CHECK_THROWS_AS(blow_up(cloud, Vector{0, 0, 0}, cone, 1.0), Error);
}

TEST_CASE("dense divisor sampling adds divisor points") {
  const auto g = xy_zero(1, 0.01);
  const auto cone = two_axes_cone();
  const auto b = blow_up(g.cloud, Vector{0, 0}, cone, 0.3, DivisorSampling{.dense_count = 16, .seed = 2});
  CHECK(b.exceptional.size() == 18);
  for (const auto& e : b.exceptional) {
    CHECK(e.is_exceptional);
    CHECK(e.base == Vector{0, 0});
  }
  const auto again = blow_up(g.cloud, Vector{0, 0}, cone, 0.3, DivisorSampling{.dense_count = 16, .seed = 2});
  CHECK(again.exceptional == b.exceptional);
}

TEST_CASE("isomorphism away from the centre") {
  const auto g = xy_zero(2, 0.01);
  const Vector s{0, 0};
  const auto cone = cluster_directions(local_directions(g.cloud, s, 0.6));
  const double lambda = default_lambda(g.cloud, cone);
  const auto b = blow_up(g.cloud, s, cone, lambda);

  // Identity on T \ {s}, exact.
  std::set<std::size_t> hit;
  for (std::size_t i = 0; i < b.lifted.size(); ++i) {
    CHECK(project(b.lifted[i]) == g.cloud.row(b.origin_ids[i]));
    hit.insert(b.origin_ids[i]);
  }
  CHECK(hit.size() == g.cloud.size() - 1);
  CHECK_FALSE(hit.count(0));

  const auto rep = verify_isomorphism_away_from_center(g.cloud, b);
  CHECK(rep.ok);
  CHECK(rep.bijective);
  CHECK(rep.bases_equal);
  CHECK(rep.metric_ok);
  CHECK(rep.failing_ids.empty());
  CHECK(rep.pairs_checked > 0);
  CHECK(rep.max_discrepancy <= lambda * std::numbers::pi / 2);
  CHECK(rep.shrink_factor >= 5.0);

  auto tampered = b;
  const std::size_t dropped = tampered.origin_ids[7];
  tampered.lifted.erase(tampered.lifted.begin() + 7);
  tampered.origin_ids.erase(tampered.origin_ids.begin() + 7);
  const auto bad = verify_isomorphism_away_from_center(g.cloud, tampered);
  CHECK_FALSE(bad.ok);
  CHECK_FALSE(bad.bijective);
  REQUIRE(bad.failing_ids.size() == 1);
  CHECK(bad.failing_ids[0] == dropped);
}

TEST_CASE("blown-up metric oracle") {
  const auto g = xy_zero(3, 0.01);
  const auto cone = two_axes_cone();
  const auto b = blow_up(g.cloud, Vector{0, 0}, cone, 0.4);
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const auto& a = b.lifted[rng.below(b.lifted.size())];
    const auto& c = b.lifted[rng.below(b.lifted.size())];
    const double base = euclidean_distance(a.base, c.base);
    const double ang = oracle::line_angle(a.dir.rep(), c.dir.rep());
    const double expect = std::sqrt(base * base + 0.16 * ang * ang);
    CHECK(blowup_distance(a, c, 0.4) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("exceptional directions on the xy = 0 sample") {
  const auto g = xy_zero(4, 0.01);
  const Vector s{0, 0};
  const auto cone = cluster_directions(local_directions(g.cloud, s, 0.6));
  REQUIRE(cone.clusters.size() == 2);
  const auto b = blow_up(g.cloud, s, cone, default_lambda(g.cloud, cone));
  REQUIRE(b.exceptional.size() == 2);
  for (std::size_t axis = 0; axis < 2; ++axis) {
    Vector e{0, 0};
    e[axis] = 1;
    double best = 10.0;
    for (const auto& p : b.exceptional) best = std::min(best, oracle::line_angle(p.dir.rep(), e));
    CHECK(best <= oracle::deg(5.0));
  }
}

TEST_CASE("single-cluster cone has a pure exceptional ball") {
  Rng rng(11);
  std::vector<Vector> rows{{0, 0, 0}};
  for (int i = 0; i < 400; ++i) {
    const double t = rng.uniform(-1.0, 1.0);
    rows.push_back({t, 0.005 * rng.normal(), 0.005 * rng.normal()});
  }
  const auto cloud = PointCloud::from_rows(rows);
  const Vector s{0, 0, 0};
  const auto cone = cluster_directions(local_directions(cloud, s, 0.8));
  REQUIRE(cone.clusters.size() == 1);
  const auto b = blow_up(cloud, s, cone, default_lambda(cloud, cone));
  REQUIRE(b.exceptional.size() == 1);
  const auto rep = regularization_check(b, resolve(SingularityParams{}, cloud));
  REQUIRE(rep.points.size() == 1);
  CHECK_FALSE(rep.points[0].purity.empty());
  for (double p : rep.points[0].purity) CHECK(p == 1.0);
  CHECK_FALSE(rep.points[0].purity_break_radius.has_value());
}

TEST_CASE("regularization check on the xy = 0 sample") {
  SynthSpec spec;
  spec.kind = SynthKind::CrossingLines;
  spec.ambient = 2;
  spec.samples = 1500;
  spec.noise = 0.0;
  spec.seed = 12;
  const auto g = generate(spec);
  const Vector s{0, 0};
  const auto cone = cluster_directions(local_directions(g.cloud, s, 0.6));
  REQUIRE(cone.clusters.size() == 2);
  const auto b = blow_up(g.cloud, s, cone, default_lambda(g.cloud, cone));
  const auto params = resolve(SingularityParams{}, g.cloud);
  const auto rep = regularization_check(b, params, 2);
  REQUIRE(rep.points.size() == 2);
  const auto serial = regularization_check(b, params, 1);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& p = rep.points[i];
    CHECK(p.exceptional_index == i);
    CHECK(p.cluster == b.exceptional_cluster[i]);
    REQUIRE(p.median_dim.has_value());
    CHECK(std::abs(*p.median_dim - 1.0) <= 0.3);
    CHECK(p.purity == serial.points[i].purity);
    CHECK(p.verdict.verdict == serial.points[i].verdict.verdict);
  }
}
