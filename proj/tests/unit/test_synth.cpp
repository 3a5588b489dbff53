#include "doctest.h"

#include <cmath>
#include <numbers>

#include "embres/errors.hpp"
#include "embres/io.hpp"
#include "embres/synth.hpp"
#include "oracles.hpp"

using namespace embres;

namespace {

double dot(const Vector& a, const Vector& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_truth(const SynthResult& r) {
  const auto& t = r.truth;
  REQUIRE(t.membership.size() == r.cloud.size());
  REQUIRE(t.local_radius.size() == r.cloud.size());
  for (std::size_t i = 0; i < r.cloud.size(); ++i) {
    const int m = t.membership[i];
    if (m < 0) {
      CHECK(r.cloud.row(i) == t.center);
      continue;
    }
    CHECK(component_distance(t, m, r.cloud.point(i)) <= component_tolerance(t, m));
  }
  for (const auto& c : t.components)
    for (std::size_t a = 0; a < c.basis.size(); ++a)
      for (std::size_t b = 0; b < c.basis.size(); ++b)
        CHECK(dot(c.basis[a], c.basis[b]) == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12));
}

}  // namespace

TEST_CASE("same seed, same bytes") {
  for (auto kind : {SynthKind::AffineSubspaceUnion, SynthKind::CrossingLines, SynthKind::Cone,
                    SynthKind::SpherePatch, SynthKind::FlatPatch}) {
    SynthSpec spec;
    spec.kind = kind;
    spec.ambient = 6;
    spec.dims = kind == SynthKind::AffineSubspaceUnion ? std::vector<std::size_t>{1, 2}
                                                        : std::vector<std::size_t>{2};
    spec.samples = 300;
    spec.seed = 42;
    const auto a = generate(spec);
    const auto b = generate(spec);
    CHECK(to_raw(a.cloud, CloudFormat::RawF64) == to_raw(b.cloud, CloudFormat::RawF64));
    CHECK(ground_truth_to_json(a.truth) == ground_truth_to_json(b.truth));
    spec.seed = 43;
    CHECK_FALSE(generate(spec).cloud == a.cloud);
    check_truth(a);
  }
}

TEST_CASE("crossing lines lie on the axes") {
  SynthSpec spec;
  spec.kind = SynthKind::CrossingLines;
  spec.ambient = 2;
  spec.samples = 200;
  spec.noise = 0.0;
  spec.seed = 1;
  const auto g = generate(spec);
  CHECK(g.cloud.size() == 401);
  CHECK(g.cloud.row(0) == Vector{0, 0});
  CHECK(g.truth.membership[0] == -1);
  for (std::size_t i = 1; i < g.cloud.size(); ++i) {
    const auto p = g.cloud.point(i);
    const int m = g.truth.membership[i];
    CHECK(p[m == 0 ? 1 : 0] == 0.0);
    CHECK(std::abs(p[m == 0 ? 0 : 1]) <= 1.0);
    CHECK(g.truth.local_radius[i] == std::abs(p[m == 0 ? 0 : 1]));
  }
  const auto cone = oracle_tangent_cone(g.truth, Vector{0, 0});
  REQUIRE(cone.size() == 2);
  CHECK(cone[0] == std::vector<ProjectivePoint>{projective_from_vector(Vector{1, 0})});
  CHECK(cone[1] == std::vector<ProjectivePoint>{projective_from_vector(Vector{0, 1})});

  spec.include_center = false;
  const auto without = generate(spec);
  CHECK(without.cloud.size() == 400);
  CHECK(without.truth.singular_points.size() == 1);
}

TEST_CASE("union components respect the angle floor") {
  SynthSpec spec;
  spec.ambient = 10;
  spec.dims = {1, 2, 2};
  spec.samples = 100;
  spec.seed = 5;
  const auto g = generate(spec);
  REQUIRE(g.truth.components.size() == 3);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b)
      CHECK(min_principal_angle(g.truth.components[a].basis, g.truth.components[b].basis) >=
            oracle::deg(30.0) - 1e-12);
  check_truth(g);

  // Principal angle oracle on coordinate frames.
  const std::vector<Vector> e12{{1, 0, 0}, {0, 1, 0}};
  const std::vector<Vector> tilted{{0, std::cos(0.3), std::sin(0.3)}};
  CHECK(min_principal_angle(e12, tilted) == doctest::Approx(0.3));
  CHECK(min_principal_angle({{1, 0, 0}}, tilted) == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("infeasible and invalid specs") {
  SynthSpec spec;
  spec.ambient = 3;
  spec.dims = {2, 2};
  spec.seed = 1;
  try {
    generate(spec);
    FAIL("expected InfeasibleSpec");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfeasibleSpec);
  }
  spec.dims = {1, 1, 1, 1, 1, 1, 1, 1};
  spec.ambient = 2;
  spec.min_angle_deg = 60;
  CHECK_THROWS_AS(generate(spec), Error);

  SynthSpec bad;
  bad.dims = {10};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SynthSpec{};
  bad.radius = -1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SynthSpec{};
  bad.kind = SynthKind::Cone;
  bad.ambient = 2;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK(synth_kind_from_string("SpherePatch") == SynthKind::SpherePatch);
  CHECK_THROWS_AS(synth_kind_from_string("Torus"), Error);
}

TEST_CASE("oracle dimension") {
  SynthSpec spec;
  spec.ambient = 5;
  spec.dims = {1, 2};
  spec.samples = 50;
  spec.seed = 2;
  const auto g = generate(spec);
  const auto& plane = g.truth.components[1].basis;
  Vector on_plane(5, 0.0);
  for (std::size_t k = 0; k < 5; ++k) on_plane[k] = 0.4 * plane[0][k] - 0.2 * plane[1][k];
  const auto d2 = oracle_dimension(g.truth, on_plane);
  CHECK(d2.dims == std::vector<std::size_t>{2});
  CHECK_FALSE(d2.at_singular);

  Vector on_line = g.truth.components[0].basis[0];
  for (auto& x : on_line) x *= 0.7;
  CHECK(oracle_dimension(g.truth, on_line).dims == std::vector<std::size_t>{1});

  const auto at = oracle_dimension(g.truth, g.truth.center);
  CHECK(at.at_singular);
  CHECK(at.dims == std::vector<std::size_t>{1, 2});

  Vector off(5, 0.0);
  off[0] = 3.0;
  off[4] = -2.0;
  try {
    oracle_dimension(g.truth, off);
    FAIL("expected OffManifold");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OffManifold);
  }
  try {
    oracle_tangent_cone(g.truth, on_line);
    FAIL("expected UnknownSingularPoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownSingularPoint);
  }
  const auto cone = oracle_tangent_cone(g.truth, g.truth.center);
  REQUIRE(cone.size() == 2);
  CHECK(cone[0].size() == 1);
  CHECK(cone[1].size() == 2);
}

TEST_CASE("orthogonal planes frames") {
  GroundTruth t;
  t.ambient = 4;
  t.center = {0, 0, 0, 0};
  t.singular_points = {t.center};
  TruthComponent a, b;
  a.dim = b.dim = 2;
  a.basis = {{1, 0, 0, 0}, {0, 1, 0, 0}};
  b.basis = {{0, 0, 1, 0}, {0, 0, 0, 1}};
  t.components = {a, b};
  const auto cone = oracle_tangent_cone(t, t.center);
  REQUIRE(cone.size() == 2);
  CHECK(cone[0] == std::vector<ProjectivePoint>{projective_from_vector(Vector{1, 0, 0, 0}),
                                               projective_from_vector(Vector{0, 1, 0, 0})});
  CHECK(cone[1] == std::vector<ProjectivePoint>{projective_from_vector(Vector{0, 0, 1, 0}),
                                               projective_from_vector(Vector{0, 0, 0, 1})});
  CHECK(oracle_dimension(t, Vector{0, 0, 0.5, 0.1}).dims == std::vector<std::size_t>{2});
}

TEST_CASE("sphere and cone samples sit on their surfaces") {
  SynthSpec spec;
  spec.kind = SynthKind::SpherePatch;
  spec.ambient = 4;
  spec.dims = {2};
  spec.cap_angle_deg = 40;
  spec.noise = 0.0;
  spec.samples = 200;
  spec.seed = 3;
  const auto s = generate(spec);
  const auto& pole = s.truth.components[0].basis[0];
  for (std::size_t i = 0; i < s.cloud.size(); ++i) {
    CHECK(norm(s.cloud.point(i)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dot(s.cloud.row(i), pole) >= std::cos(oracle::deg(40.0)) - 1e-12);
  }

  spec.kind = SynthKind::Cone;
  spec.cone_angle_deg = 30;
  const auto c = generate(spec);
  const auto& axis = c.truth.components[0].basis[0];
  for (std::size_t i = 1; i < c.cloud.size(); ++i) {
    const auto x = c.cloud.row(i);
    const double ang = oracle::line_angle(x, axis);
    CHECK(ang == doctest::Approx(oracle::deg(30.0)).epsilon(1e-9));
    CHECK(norm(x) <= 1.0 + 1e-12);
  }
}

TEST_CASE("random orthonormal basis") {
  Rng rng(17);
  const auto b = random_orthonormal_basis(rng, 7, 4);
  REQUIRE(b.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(dot(b[i], b[j]) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
}
