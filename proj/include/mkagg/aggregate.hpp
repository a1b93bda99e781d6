#ifndef MKAGG_AGGREGATE_HPP
#define MKAGG_AGGREGATE_HPP

#include "mkagg/types.hpp"

namespace mkagg {

/// ξ = Φ 1ₙ.
AggregateVector aggregate_sum(const EmbeddedSet& embedded);

/// ξ = Φ α for any weight vector. The method-specific wrappers check the tag.
AggregateVector aggregate_weighted(const EmbeddedSet& embedded, const WeightVector& weights);

/// Per-descriptor contribution to the self-similarity, αᵢ·[Kα]ᵢ.
VectorXd contributions(const KernelMatrix& k, const VectorXd& alpha);

inline WeightVector uniform_weights(Index n) { return {VectorXd::Ones(n), WeightMethod::uniform}; }

}  // namespace mkagg

#endif  // MKAGG_AGGREGATE_HPP
