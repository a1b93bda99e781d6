#ifndef MKAGG_PIPELINE_HPP
#define MKAGG_PIPELINE_HPP

#include "mkagg/democratic.hpp"
#include "mkagg/embed.hpp"
#include "mkagg/gmp.hpp"
#include "mkagg/types.hpp"

#include <optional>
#include <string_view>

namespace mkagg {

enum class AggregationMethod { sum, democratic, gmp };

AggregationMethod parse_method(std::string_view name);
const char* to_string(AggregationMethod m);

struct AggregationConfig {
  AggregationMethod method = AggregationMethod::sum;
  DemocraticConfig democratic;
  GmpConfig gmp;
  /// Optional sparsification of the kernel before weighting. Applied after
  /// clipping when both are active.
  std::optional<double> threshold;
  /// Ignore block metadata and work on the dense kernel.
  bool force_dense = false;
};

struct AggregationResult {
  AggregateVector aggregate;
  WeightVector weights;
  std::optional<KernelMatrix> kernel;  // absent for sum pooling
};

/// Weights and aggregates an embedded set.
AggregationResult aggregate(const EmbeddedSet& embedded, const AggregationConfig& cfg);

/// Kernel as seen by the weighting step of `cfg` (dense or block, optional
/// threshold).
KernelMatrix weighting_kernel(const EmbeddedSet& embedded, const AggregationConfig& cfg);

}  // namespace mkagg

#endif  // MKAGG_PIPELINE_HPP
