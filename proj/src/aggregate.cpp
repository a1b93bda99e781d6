#include "mkagg/aggregate.hpp"

namespace mkagg {

AggregateVector aggregate_sum(const EmbeddedSet& embedded) {
  if (embedded.size() == 0) throw InvalidArgument("aggregate: empty embedded set");
  return AggregateVector{embedded.phi.rowwise().sum(), {Transform{}}};
}

AggregateVector aggregate_weighted(const EmbeddedSet& embedded, const WeightVector& weights) {
  if (embedded.size() == 0) throw InvalidArgument("aggregate: empty embedded set");
  if (weights.size() != embedded.size())
    throw InvalidArgument("aggregate: " + std::to_string(weights.size()) + " weights for " +
                          std::to_string(embedded.size()) + " descriptors");
  return AggregateVector{embedded.phi * weights.alpha, {Transform{}}};
}

VectorXd contributions(const KernelMatrix& k, const VectorXd& alpha) {
  return alpha.cwiseProduct(k.multiply(alpha));
}

}  // namespace mkagg
