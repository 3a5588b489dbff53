#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "embres/point_cloud.hpp"
#include "embres/projective.hpp"
#include "embres/rng.hpp"

namespace embres {

enum class SynthKind { AffineSubspaceUnion, CrossingLines, Cone, SpherePatch, FlatPatch };

const char* to_string(SynthKind kind) noexcept;
SynthKind synth_kind_from_string(const std::string& name);

struct SynthSpec {
  SynthKind kind = SynthKind::AffineSubspaceUnion;
  std::size_t ambient = 10;
  std::vector<std::size_t> dims{1, 2};  // per component
  std::size_t samples = 1000;           // per component
  std::optional<double> noise;          // default 0.01 * radius
  double radius = 1.0;
  std::uint64_t seed = 0;
  double min_angle_deg = 30.0;   // AffineSubspaceUnion: smallest principal angle
  double cone_angle_deg = 45.0;  // Cone: half opening angle
  double cap_angle_deg = 90.0;   // SpherePatch: polar extent of the cap
  bool include_center = true;    // unions and cones carry their singular point

  double sigma() const { return noise.value_or(0.01 * radius); }
  void validate() const;
  bool operator==(const SynthSpec&) const = default;
};

enum class ComponentShape { Flat, Sphere, Cone };

struct TruthComponent {
  ComponentShape shape = ComponentShape::Flat;
  std::vector<Vector> basis;  // orthonormal
  std::size_t dim = 0;        // analytic intrinsic dimension
  double radius = 1.0;
  double angle = 0.0;         // cone half-angle or cap angle, radians
};

struct GroundTruth {
  std::size_t ambient = 0;
  Vector center;  // common point of the components (sphere centre for SpherePatch)
  std::vector<Vector> singular_points;
  std::vector<TruthComponent> components;
  std::vector<int> membership;        // component per sample, -1 for a singular point
  std::vector<double> local_radius;   // noise-free distance from the centre in the component
  double noise = 0.0;
};

struct SynthResult {
  PointCloud cloud;
  GroundTruth truth;
};

/// Draws the cloud described by spec. Same spec, same bits.
/// Throws InfeasibleSpec when the components cannot be placed.
SynthResult generate(const SynthSpec& spec);

struct OracleDimension {
  std::vector<std::size_t> dims;  // one entry, or every component at a singular point
  bool at_singular = false;
};

/// Distance from a point to a component's analytic surface.
double component_distance(const GroundTruth& truth, std::size_t component, std::span<const double> x);

/// Default membership tolerance of a component: 3 sigma per normal
/// coordinate, i.e. 3 sigma sqrt(n - D) + 1e-9.
double component_tolerance(const GroundTruth& truth, std::size_t component);

/// Analytic dimension at a point. Throws OffManifold.
OracleDimension oracle_dimension(const GroundTruth& truth, std::span<const double> point,
                                 std::optional<double> tolerance = std::nullopt);

/// Reference directions of each component at a recorded singular point: the
/// basis lines of a flat component, the axis of a cone. Throws
/// UnknownSingularPoint.
std::vector<std::vector<ProjectivePoint>> oracle_tangent_cone(const GroundTruth& truth,
                                                              std::span<const double> s);

/// Orthonormal basis of d random directions in R^n (Gram-Schmidt on normals).
std::vector<Vector> random_orthonormal_basis(Rng& rng, std::size_t n, std::size_t d);

/// Smallest principal angle between the spans of two orthonormal frames.
double min_principal_angle(const std::vector<Vector>& a, const std::vector<Vector>& b);

}  // namespace embres
