#include "mkagg/pipeline.hpp"

#include "mkagg/aggregate.hpp"
#include "mkagg/kernel.hpp"

#include <string>

namespace mkagg {

AggregationMethod parse_method(std::string_view name) {
  if (name == "sum") return AggregationMethod::sum;
  if (name == "democratic") return AggregationMethod::democratic;
  if (name == "gmp") return AggregationMethod::gmp;
  throw InvalidArgument("unknown aggregation method '" + std::string(name) + "' (sum|democratic|gmp)");
}

const char* to_string(AggregationMethod m) {
  switch (m) {
    case AggregationMethod::sum: return "sum";
    case AggregationMethod::democratic: return "democratic";
    case AggregationMethod::gmp: return "gmp";
  }
  return "?";
}

KernelMatrix weighting_kernel(const EmbeddedSet& embedded, const AggregationConfig& cfg) {
  KernelMatrix k = cfg.force_dense ? gram_dense(embedded) : gram(embedded);
  if (cfg.threshold) {
    // Sinkhorn clips internally; clipping here as well fixes the order to
    // clip-then-threshold for democratic weights. GMP sees the raw kernel.
    if (cfg.method == AggregationMethod::democratic && cfg.democratic.clip) k = clip_negatives(k);
    k = threshold_sparsify(k, *cfg.threshold);
  }
  return k;
}

AggregationResult aggregate(const EmbeddedSet& embedded, const AggregationConfig& cfg) {
  if (embedded.size() == 0) throw InvalidArgument("aggregate: empty embedded set");
  switch (cfg.method) {
    case AggregationMethod::sum:
      return {aggregate_sum(embedded), uniform_weights(embedded.size()), std::nullopt};
    case AggregationMethod::democratic: {
      KernelMatrix k = weighting_kernel(embedded, cfg);
      WeightVector w = sinkhorn_weights(k, cfg.democratic);
      return {aggregate_democratic(embedded, w), std::move(w), std::move(k)};
    }
    case AggregationMethod::gmp: {
      KernelMatrix k = weighting_kernel(embedded, cfg);
      WeightVector w = gmp_weights(k, cfg.gmp);
      return {aggregate_gmp(embedded, w), std::move(w), std::move(k)};
    }
  }
  throw InvalidArgument("aggregate: unknown method");
}

}  // namespace mkagg
