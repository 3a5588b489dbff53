#include "embres/context_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "embres/errors.hpp"

namespace embres {

ContextWindow ContextWindow::from_sequence(const std::vector<Vector>& sequence,
                                           std::size_t position, std::size_t k) {
  if (position >= sequence.size()) fail(ErrorCode::InvalidArgument, "token position out of range");
  ContextWindow w;
  w.position = position;
  w.k = k;
  const std::size_t lo = position >= k ? position - k : 0;
  const std::size_t hi = std::min(sequence.size() - 1, position + k);
  for (std::size_t j = lo; j < position; ++j) w.left.push_back({j, sequence[j]});
  for (std::size_t j = position + 1; j <= hi; ++j) w.right.push_back({j, sequence[j]});
  return w;
}

ContextWindow ContextWindow::from_tokens(const PointCloud& table, std::span<const std::size_t> tokens,
                                         std::size_t position, std::size_t k) {
  std::vector<Vector> seq;
  seq.reserve(tokens.size());
  for (std::size_t t : tokens) {
    if (t >= table.size()) fail(ErrorCode::InvalidArgument, "token id " + std::to_string(t) + " not in table");
    seq.push_back(table.row(t));
  }
  return from_sequence(seq, position, k);
}

AggregatorSpec AggregatorSpec::attention(Vector q, double tau) {
  AggregatorSpec s{Kind::SoftmaxAttention, std::move(q), tau};
  s.validate();
  return s;
}

void AggregatorSpec::validate() const {
  if (kind != Kind::SoftmaxAttention) return;
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    fail(ErrorCode::InvalidArgument, "attention temperature must be > 0");
  if (query.empty()) fail(ErrorCode::InvalidArgument, "attention query is empty");
  for (double x : query)
    if (!std::isfinite(x)) fail(ErrorCode::NonFiniteValue, "attention query has a non-finite entry");
}

Vector aggregate(const ContextWindow& window, const AggregatorSpec& spec) {
  spec.validate();
  if (window.empty()) fail(ErrorCode::EmptyContext, "context window is empty");

  std::vector<const ContextEntry*> items;
  for (const auto& e : window.left) items.push_back(&e);
  for (const auto& e : window.right) items.push_back(&e);
  const std::size_t n = items.front()->vec.size();
  for (const auto* e : items)
    if (e->vec.size() != n) fail(ErrorCode::DimensionMismatch, "context vectors differ in dimension");
  // Canonical summation order; equal positions fall back to the values.
  std::sort(items.begin(), items.end(), [](const ContextEntry* a, const ContextEntry* b) {
    if (a->position != b->position) return a->position < b->position;
    return a->vec < b->vec;
  });

  Vector out(n, 0.0);
  if (spec.kind == AggregatorSpec::Kind::Mean) {
    for (const auto* e : items)
      for (std::size_t k = 0; k < n; ++k) out[k] += e->vec[k];
    const double m = static_cast<double>(items.size());
    for (auto& x : out) x /= m;
    return out;
  }

  if (spec.query.size() != n) fail(ErrorCode::DimensionMismatch, "attention query dimension differs");
  std::vector<double> logits(items.size());
  for (std::size_t j = 0; j < items.size(); ++j) {
    double dot = 0.0;
    for (std::size_t k = 0; k < n; ++k) dot += spec.query[k] * items[j]->vec[k];
    logits[j] = dot / spec.temperature;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t j = 0; j < items.size(); ++j) {
    const double w = std::exp(logits[j] - top);
    total += w;
    for (std::size_t k = 0; k < n; ++k) out[k] += w * items[j]->vec[k];
  }
  for (auto& x : out) x /= total;
  return out;
}

ProjectivePoint context_map(const ContextWindow& window, const AggregatorSpec& spec, std::size_t n) {
  const Vector g = aggregate(window, spec);
  if (g.size() != n) fail(ErrorCode::DimensionMismatch, "aggregate dimension differs from n");
  if (norm(g) < kZeroVectorTolerance)
    fail(ErrorCode::ZeroAggregate, "context aggregates to the zero vector");
  return projective_from_vector(g, n);
}

HybridRepresentation hybrid_embed(std::size_t token_id, const ContextWindow& window,
                                  const SingularLocusReport& locus, const PointCloud& table,
                                  const AggregatorSpec& spec) {
  if (token_id >= table.size()) fail(ErrorCode::InvalidArgument, "token id out of range");
  if (!std::binary_search(locus.singular_ids.begin(), locus.singular_ids.end(), token_id))
    return RegularEmbedding{table.row(token_id)};
  if (window.empty())
    fail(ErrorCode::MissingContext, "token " + std::to_string(token_id) + " is singular and has no context");
  return DesingularizedEmbedding{token_id, context_map(window, spec, table.dim())};
}

}  // namespace embres
