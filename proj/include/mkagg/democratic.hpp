#ifndef MKAGG_DEMOCRATIC_HPP
#define MKAGG_DEMOCRATIC_HPP

#include "mkagg/types.hpp"

namespace mkagg {

struct DemocraticConfig {
  double gamma = 0.3;  // damping exponent, (0, 0.5]
  int n_iter = 10;
  bool clip = true;    // run on K⁺

  void validate() const;
};

/// Weights after every iteration, column t = iteration t+1.
struct DemocraticTrace {
  MatrixXd alpha_history;
  MatrixXd sigma_history;
};

/// Democratic weights by damped symmetric Sinkhorn scaling.
///
/// Starts from α = 1 and repeats, exactly cfg.n_iter times,
///   σ = diag(α) K diag(α) 1,   αᵢ := αᵢ / σᵢ^γ.
/// Block-diagonal kernels are scaled block by block. A descriptor whose
/// kernel row is entirely zero keeps weight 1 and is not updated.
///
/// Throws NumericalError when some σᵢ is not strictly positive, which only
/// happens without clipping.
WeightVector sinkhorn_weights(const KernelMatrix& k, const DemocraticConfig& cfg = {});

/// Same computation as sinkhorn_weights, keeping the per-iteration history.
DemocraticTrace sinkhorn_trace(const KernelMatrix& k, const DemocraticConfig& cfg = {});

/// ξ = Σᵢ αᵢ φ(xᵢ) for democratic weights.
AggregateVector aggregate_democratic(const EmbeddedSet& embedded, const WeightVector& weights);

}  // namespace mkagg

#endif  // MKAGG_DEMOCRATIC_HPP
