#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "embres/point_cloud.hpp"
#include "embres/projective.hpp"
#include "embres/singularity.hpp"
#include "embres/tangent_cone.hpp"

namespace embres {

struct ContextEntry {
  std::size_t position = 0;  // index in the source sequence
  Vector vec;
};

/// Context of the token at `position`: up to k neighbours on each side.
struct ContextWindow {
  std::size_t position = 0;
  std::size_t k = 0;
  std::vector<ContextEntry> left;
  std::vector<ContextEntry> right;

  std::size_t size() const noexcept { return left.size() + right.size(); }
  bool empty() const noexcept { return size() == 0; }

  /// Window over a sequence of vectors, truncated at the ends.
  static ContextWindow from_sequence(const std::vector<Vector>& sequence, std::size_t position,
                                     std::size_t k);
  /// Window over a token-id sequence, vectors looked up in an embedding table.
  static ContextWindow from_tokens(const PointCloud& table, std::span<const std::size_t> tokens,
                                   std::size_t position, std::size_t k);
};

struct AggregatorSpec {
  enum class Kind { Mean, SoftmaxAttention };

  Kind kind = Kind::Mean;
  Vector query;              // attention only
  double temperature = 1.0;  // attention only

  static AggregatorSpec mean() { return {}; }
  static AggregatorSpec attention(Vector q, double tau);

  void validate() const;
  bool operator==(const AggregatorSpec&) const = default;
};

/// Mean or softmax-weighted sum of the context vectors. Summands are
/// accumulated in ascending source position, so any reordering of the window
/// entries yields the same bits. Throws EmptyContext.
Vector aggregate(const ContextWindow& window, const AggregatorSpec& spec);

/// p(g(window)). Throws ZeroAggregate when the aggregate has norm < 1e-12.
ProjectivePoint context_map(const ContextWindow& window, const AggregatorSpec& spec, std::size_t n);

struct RegularEmbedding {
  Vector vec;
  bool operator==(const RegularEmbedding&) const = default;
};

struct DesingularizedEmbedding {
  std::size_t token_id = 0;
  ProjectivePoint divisor_point;
  bool operator==(const DesingularizedEmbedding&) const = default;
};

using HybridRepresentation = std::variant<RegularEmbedding, DesingularizedEmbedding>;

/// Table row for tokens outside the singular locus, a divisor point chosen by
/// the context otherwise. Throws MissingContext for a singular token with an
/// empty window.
HybridRepresentation hybrid_embed(std::size_t token_id, const ContextWindow& window,
                                  const SingularLocusReport& locus, const PointCloud& table,
                                  const AggregatorSpec& spec);

}  // namespace embres
