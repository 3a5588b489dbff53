#include "embres/projective.hpp"

#include <cmath>
#include <string>

#include "embres/errors.hpp"

namespace embres {

namespace {

constexpr long double kQuantum = 4294967296.0L;  // 2^32

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

}  // namespace

ProjectivePoint projective_from_vector(std::span<const double> v) {
  if (v.empty()) fail(ErrorCode::DimensionMismatch, "empty vector");
  std::size_t peak = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!std::isfinite(v[k])) fail(ErrorCode::NonFiniteValue, "coordinate " + std::to_string(k));
    if (std::fabs(v[k]) > std::fabs(v[peak])) peak = k;
  }
  if (norm(v) < kZeroVectorTolerance)
    fail(ErrorCode::ZeroVector, "cannot project a vector of norm < 1e-12");

  const long double scale = std::fabs(static_cast<long double>(v[peak]));
  std::vector<double> q(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    q[k] = static_cast<double>(std::nearbyint(static_cast<long double>(v[k]) / scale * kQuantum));
  }
  double acc = 0.0;
  for (double x : q) acc += x * x;
  const double len = std::sqrt(acc);
  for (double& x : q) x /= len;

  for (double x : q) {
    if (std::fabs(x) > kZeroVectorTolerance) {
      if (x < 0.0)
        for (double& y : q) y = -y;
      break;
    }
  }
  for (double& x : q)
    if (x == 0.0) x = 0.0;  // drop negative zeros
  return ProjectivePoint(std::move(q));
}

ProjectivePoint projective_from_vector(std::span<const double> v, std::size_t n) {
  if (v.size() != n)
    fail(ErrorCode::DimensionMismatch,
         "vector has " + std::to_string(v.size()) + " coordinates, expected " + std::to_string(n));
  return projective_from_vector(v);
}

double projective_distance(const ProjectivePoint& a, const ProjectivePoint& b) {
  if (a.dim() != b.dim())
    fail(ErrorCode::DimensionMismatch, "projective points of dimension " + std::to_string(a.dim()) +
                                           " and " + std::to_string(b.dim()));
  const auto ra = a.rep();
  const auto rb = b.rep();
  const double sign = dot(ra, rb) >= 0.0 ? 1.0 : -1.0;
  double diff = 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    const double d = ra[k] - sign * rb[k];
    const double s = ra[k] + sign * rb[k];
    diff += d * d;
    sum += s * s;
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

double subspace_angle(const ProjectivePoint& u, const std::vector<Vector>& frame) {
  const auto r = u.rep();
  std::vector<double> proj(r.size(), 0.0);
  for (const auto& f : frame) {
    if (f.size() != r.size()) fail(ErrorCode::DimensionMismatch, "frame vector dimension");
    const double c = dot(r, f);
    for (std::size_t k = 0; k < r.size(); ++k) proj[k] += c * f[k];
  }
  double inside = 0.0;
  double outside = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    inside += proj[k] * proj[k];
    const double d = r[k] - proj[k];
    outside += d * d;
  }
  return std::atan2(std::sqrt(outside), std::sqrt(inside));
}

double blowup_distance(const BlowupPoint& a, const BlowupPoint& b, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    fail(ErrorCode::NonPositiveScale, "lambda must be a positive finite scale");
  if (a.base.size() != b.base.size() || a.dir.dim() != b.dir.dim() || a.base.size() != a.dir.dim())
    fail(ErrorCode::DimensionMismatch, "blow-up points of incompatible dimension");
  const double base_sq = squared_distance(a.base, b.base);
  const double angle = projective_distance(a.dir, b.dir);
  return std::sqrt(base_sq + lambda * lambda * angle * angle);
}

}  // namespace embres
