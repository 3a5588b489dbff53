#include "embres/synth.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "embres/errors.hpp"

namespace embres {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

Vector unit_axis(std::size_t n, std::size_t k) {
  Vector v(n, 0.0);
  v[k] = 1.0;
  return v;
}

// Uniform point of the unit d-ball.
Vector ball_sample(Rng& rng, std::size_t d) {
  Vector g(d);
  double len = 0.0;
  do {
    for (auto& x : g) x = rng.normal();
    len = norm(g);
  } while (len < 1e-12);
  const double r = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  for (auto& x : g) x *= r / len;
  return g;
}

void add_noise(Rng& rng, Vector& x, double sigma) {
  if (sigma == 0.0) return;
  for (auto& v : x) v += sigma * rng.normal();
}

// Projection of y onto the span of an orthonormal basis, in basis coordinates.
Vector coords_in(const std::vector<Vector>& basis, std::span<const double> y) {
  Vector c(basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) c[j] = dot(basis[j], y);
  return c;
}

double off_span_sq(const std::vector<Vector>& basis, std::span<const double> y) {
  Vector r(y.begin(), y.end());
  for (const auto& b : basis) {
    const double c = dot(b, y);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] -= c * b[k];
  }
  return dot(r, r);
}

}  // namespace

const char* to_string(SynthKind kind) noexcept {
  switch (kind) {
    case SynthKind::AffineSubspaceUnion: return "AffineSubspaceUnion";
    case SynthKind::CrossingLines: return "CrossingLines";
    case SynthKind::Cone: return "Cone";
    case SynthKind::SpherePatch: return "SpherePatch";
    case SynthKind::FlatPatch: return "FlatPatch";
  }
  return "AffineSubspaceUnion";
}

SynthKind synth_kind_from_string(const std::string& name) {
  for (auto k : {SynthKind::AffineSubspaceUnion, SynthKind::CrossingLines, SynthKind::Cone,
                 SynthKind::SpherePatch, SynthKind::FlatPatch})
    if (name == to_string(k)) return k;
  fail(ErrorCode::InvalidArgument, "unknown synth kind: " + name);
}

void SynthSpec::validate() const {
  if (ambient < 2) fail(ErrorCode::InvalidArgument, "ambient dimension must be >= 2");
  if (samples == 0) fail(ErrorCode::InvalidArgument, "samples must be >= 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) fail(ErrorCode::InvalidArgument, "radius must be > 0");
  if (!(sigma() >= 0.0) || !std::isfinite(sigma())) fail(ErrorCode::InvalidArgument, "noise must be >= 0");
  switch (kind) {
    case SynthKind::AffineSubspaceUnion:
      if (dims.empty()) fail(ErrorCode::InvalidArgument, "union needs at least one component");
      for (auto d : dims)
        if (d == 0 || d >= ambient) fail(ErrorCode::InvalidArgument, "component dims must satisfy 0 < D < n");
      if (!(min_angle_deg >= 0.0 && min_angle_deg <= 90.0))
        fail(ErrorCode::InvalidArgument, "min angle must lie in [0, 90] degrees");
      break;
    case SynthKind::FlatPatch:
    case SynthKind::SpherePatch:
      if (dims.size() != 1 || dims[0] == 0 || dims[0] >= ambient ||
          (kind == SynthKind::SpherePatch && dims[0] + 1 > ambient))
        fail(ErrorCode::InvalidArgument, "patch needs exactly one dim with 0 < D < n");
      if (kind == SynthKind::SpherePatch && !(cap_angle_deg > 0.0 && cap_angle_deg <= 180.0))
        fail(ErrorCode::InvalidArgument, "cap angle must lie in (0, 180] degrees");
      break;
    case SynthKind::Cone:
      if (ambient < 3) fail(ErrorCode::InvalidArgument, "cone needs n >= 3");
      if (!(cone_angle_deg > 0.0 && cone_angle_deg < 90.0))
        fail(ErrorCode::InvalidArgument, "cone half-angle must lie in (0, 90) degrees");
      break;
    case SynthKind::CrossingLines:
      break;
  }
}

std::vector<Vector> random_orthonormal_basis(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<Vector> basis;
  while (basis.size() < d) {
    Vector v(n);
    for (auto& x : v) x = rng.normal();
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const double c = dot(b, v);
        for (std::size_t k = 0; k < n; ++k) v[k] -= c * b[k];
      }
    const double len = norm(v);
    if (len < 1e-6) continue;
    for (auto& x : v) x /= len;
    basis.push_back(std::move(v));
  }
  return basis;
}

double min_principal_angle(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  const auto n = static_cast<Eigen::Index>(a.front().size());
  Eigen::MatrixXd A(n, static_cast<Eigen::Index>(a.size()));
  Eigen::MatrixXd B(n, static_cast<Eigen::Index>(b.size()));
  for (std::size_t j = 0; j < a.size(); ++j)
    A.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(a[j].data(), n);
  for (std::size_t j = 0; j < b.size(); ++j)
    B.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(b[j].data(), n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A.transpose() * B);
  return std::acos(std::clamp(svd.singularValues().maxCoeff(), 0.0, 1.0));
}

SynthResult generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.ambient;
  const double sigma = spec.sigma();
  Rng rng(spec.seed);

  GroundTruth truth;
  truth.ambient = n;
  truth.center.assign(n, 0.0);
  truth.noise = sigma;

  std::vector<Vector> rows;
  auto emit = [&](Vector x, int member, double local) {
    add_noise(rng, x, sigma);
    rows.push_back(std::move(x));
    truth.membership.push_back(member);
    truth.local_radius.push_back(local);
  };
  auto emit_center = [&] {
    truth.singular_points.push_back(truth.center);
    if (!spec.include_center) return;
    rows.push_back(truth.center);
    truth.membership.push_back(-1);
    truth.local_radius.push_back(0.0);
  };
  auto flat_component = [&](std::vector<Vector> basis) {
    TruthComponent c;
    c.shape = ComponentShape::Flat;
    c.dim = basis.size();
    c.basis = std::move(basis);
    c.radius = spec.radius;
    truth.components.push_back(std::move(c));
  };
  auto sample_flat = [&](std::size_t j) {
    const auto& basis = truth.components[j].basis;
    for (std::size_t s = 0; s < spec.samples; ++s) {
      const Vector u = ball_sample(rng, basis.size());
      Vector x = truth.center;
      for (std::size_t a = 0; a < basis.size(); ++a)
        for (std::size_t k = 0; k < n; ++k) x[k] += spec.radius * u[a] * basis[a][k];
      emit(std::move(x), static_cast<int>(j), spec.radius * norm(u));
    }
  };

  switch (spec.kind) {
    case SynthKind::AffineSubspaceUnion: {
      const double min_angle = spec.min_angle_deg * kDeg;
      constexpr int kAttempts = 1000;
      std::vector<std::vector<Vector>> bases;
      int attempts = 0;
      while (bases.size() < spec.dims.size()) {
        if (++attempts > kAttempts)
          fail(ErrorCode::InfeasibleSpec, "cannot place " + std::to_string(spec.dims.size()) +
                                              " subspaces with principal angles >= " +
                                              std::to_string(spec.min_angle_deg) + " deg in R^" +
                                              std::to_string(n));
        auto cand = random_orthonormal_basis(rng, n, spec.dims[bases.size()]);
        const bool ok = std::all_of(bases.begin(), bases.end(), [&](const auto& b) {
          return b.size() + cand.size() <= n && min_principal_angle(b, cand) >= min_angle;
        });
        if (ok) bases.push_back(std::move(cand));
      }
      for (auto& b : bases) flat_component(std::move(b));
      emit_center();
      for (std::size_t j = 0; j < truth.components.size(); ++j) sample_flat(j);
      break;
    }
    case SynthKind::CrossingLines: {
      flat_component({unit_axis(n, 0)});
      flat_component({unit_axis(n, 1)});
      emit_center();
      for (std::size_t j = 0; j < 2; ++j) sample_flat(j);
      break;
    }
    case SynthKind::FlatPatch: {
      flat_component(random_orthonormal_basis(rng, n, spec.dims[0]));
      sample_flat(0);
      break;
    }
    case SynthKind::SpherePatch: {
      const std::size_t d = spec.dims[0];
      TruthComponent c;
      c.shape = ComponentShape::Sphere;
      c.dim = d;
      c.basis = random_orthonormal_basis(rng, n, d + 1);
      c.radius = spec.radius;
      c.angle = spec.cap_angle_deg * kDeg;
      truth.components.push_back(c);
      const double cos_cap = std::cos(c.angle);
      // Uniform on the cap by rejection from the full sphere; basis[0] is the pole.
      for (std::size_t s = 0; s < spec.samples;) {
        Vector g(d + 1);
        for (auto& x : g) x = rng.normal();
        const double len = norm(g);
        if (len < 1e-12) continue;
        for (auto& x : g) x /= len;
        if (g[0] < cos_cap) continue;
        Vector x = truth.center;
        for (std::size_t a = 0; a <= d; ++a)
          for (std::size_t k = 0; k < n; ++k) x[k] += spec.radius * g[a] * c.basis[a][k];
        emit(std::move(x), 0, spec.radius * std::acos(std::clamp(g[0], -1.0, 1.0)));
        ++s;
      }
      break;
    }
    case SynthKind::Cone: {
      TruthComponent c;
      c.shape = ComponentShape::Cone;
      c.dim = 2;
      c.basis = random_orthonormal_basis(rng, n, 3);
      c.radius = spec.radius;
      c.angle = spec.cone_angle_deg * kDeg;
      truth.components.push_back(c);
      emit_center();
      const double slope = std::tan(c.angle);
      for (std::size_t s = 0; s < spec.samples; ++s) {
        // Surface density grows linearly with the height along each nappe.
        const double h = spec.radius * std::cos(c.angle) * std::sqrt(rng.uniform());
        const double t = rng.uniform() < 0.5 ? -h : h;
        const double phi = 2.0 * std::numbers::pi * rng.uniform();
        Vector x = truth.center;
        const double rho = h * slope;
        for (std::size_t k = 0; k < n; ++k)
          x[k] += t * c.basis[0][k] + rho * (std::cos(phi) * c.basis[1][k] + std::sin(phi) * c.basis[2][k]);
        emit(std::move(x), 0, std::hypot(h, rho));
      }
      break;
    }
  }
  return {PointCloud::from_rows(rows), std::move(truth)};
}

double component_distance(const GroundTruth& truth, std::size_t component, std::span<const double> x) {
  if (component >= truth.components.size()) fail(ErrorCode::InvalidArgument, "component index out of range");
  if (x.size() != truth.ambient) fail(ErrorCode::DimensionMismatch, "point dimension differs from ground truth");
  const auto& c = truth.components[component];
  Vector y(x.size());
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = x[k] - truth.center[k];
  const double off2 = off_span_sq(c.basis, y);
  switch (c.shape) {
    case ComponentShape::Flat:
      return std::sqrt(off2);
    case ComponentShape::Sphere: {
      const double in = norm(coords_in(c.basis, y));
      return std::hypot(std::sqrt(off2), in - c.radius);
    }
    case ComponentShape::Cone: {
      const Vector p = coords_in(c.basis, y);
      const double axial = std::abs(p[0]);
      const double rho = std::hypot(p[1], p[2]);
      const double len = std::hypot(axial, rho);
      const double gap = std::abs(std::atan2(rho, axial) - c.angle);
      const double in = gap >= std::numbers::pi / 2 ? len : len * std::sin(gap);
      return std::hypot(std::sqrt(off2), in);
    }
  }
  return std::sqrt(off2);
}

double component_tolerance(const GroundTruth& truth, std::size_t component) {
  const auto& c = truth.components.at(component);
  const std::size_t normal = truth.ambient - std::min(truth.ambient - 1, c.dim);
  return 3.0 * truth.noise * std::sqrt(static_cast<double>(normal)) + 1e-9;
}

OracleDimension oracle_dimension(const GroundTruth& truth, std::span<const double> point,
                                 std::optional<double> tolerance) {
  if (point.size() != truth.ambient) fail(ErrorCode::DimensionMismatch, "point dimension differs from ground truth");
  for (const auto& s : truth.singular_points) {
    if (euclidean_distance(point, s) <= 1e-9) {
      OracleDimension out{{}, true};
      for (const auto& c : truth.components) out.dims.push_back(c.dim);
      return out;
    }
  }
  for (std::size_t j = 0; j < truth.components.size(); ++j) {
    const double tol = tolerance.value_or(component_tolerance(truth, j));
    if (component_distance(truth, j, point) <= tol) return {{truth.components[j].dim}, false};
  }
  fail(ErrorCode::OffManifold, "point lies on no component");
}

std::vector<std::vector<ProjectivePoint>> oracle_tangent_cone(const GroundTruth& truth,
                                                              std::span<const double> s) {
  const bool known = std::any_of(truth.singular_points.begin(), truth.singular_points.end(),
                                 [&](const Vector& p) { return euclidean_distance(p, s) <= 1e-9; });
  if (!known) fail(ErrorCode::UnknownSingularPoint, "not a recorded singular point");
  std::vector<std::vector<ProjectivePoint>> out;
  for (const auto& c : truth.components) {
    std::vector<ProjectivePoint> dirs;
    if (c.shape == ComponentShape::Cone) {
      dirs.push_back(projective_from_vector(c.basis[0]));
    } else {
      for (const auto& b : c.basis) dirs.push_back(projective_from_vector(b));
    }
    out.push_back(std::move(dirs));
  }
  return out;
}

}  // namespace embres
