#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "embres/point_cloud.hpp"

namespace embres {

/// Point of real projective space P^{n-1}: a line through the origin, stored
/// as a canonical unit representative (first coordinate with magnitude above
/// 1e-12 is positive).
///
/// The representative is computed from the input's direction quantized to a
/// 2^-32 grid relative to its largest coordinate, then renormalized. Rescaling
/// the input by any nonzero factor therefore reproduces the same bits unless a
/// coordinate ratio sits within one rounding error of a grid boundary.
class ProjectivePoint {
public:
  std::span<const double> rep() const noexcept { return rep_; }
  std::size_t dim() const noexcept { return rep_.size(); }

  bool operator==(const ProjectivePoint&) const = default;

private:
  friend ProjectivePoint projective_from_vector(std::span<const double> v);
  explicit ProjectivePoint(std::vector<double> rep) : rep_(std::move(rep)) {}

  std::vector<double> rep_;
};

inline constexpr double kZeroVectorTolerance = 1e-12;

/// Canonical quotient map R^n \ {0} -> P^{n-1}. Throws ZeroVector when
/// ||v|| < 1e-12.
ProjectivePoint projective_from_vector(std::span<const double> v);
ProjectivePoint projective_from_vector(std::span<const double> v, std::size_t n);

/// Angular metric on P^{n-1}: arccos(|<a, b>|) in [0, pi/2], evaluated in the
/// half-angle atan2 form so that nearly equal points keep full precision.
double projective_distance(const ProjectivePoint& a, const ProjectivePoint& b);

/// Angle in [0, pi/2] between the line [u] and the span of an orthonormal
/// frame. With a one-vector frame this is projective_distance to that vector.
double subspace_angle(const ProjectivePoint& u, const std::vector<Vector>& frame);

/// Point of the blown-up space base x P^{n-1}.
struct BlowupPoint {
  Vector base;
  ProjectivePoint dir;
  bool is_exceptional = false;

  bool operator==(const BlowupPoint&) const = default;
};

/// Product metric sqrt(|a.base - b.base|^2 + lambda^2 d_P(a.dir, b.dir)^2).
double blowup_distance(const BlowupPoint& a, const BlowupPoint& b, double lambda);

}  // namespace embres
