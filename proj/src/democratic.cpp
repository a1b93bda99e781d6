#include "mkagg/democratic.hpp"

#include "mkagg/aggregate.hpp"
#include "mkagg/kernel.hpp"
#include "mkagg/linalg.hpp"

namespace mkagg {

void DemocraticConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 0.5)) throw InvalidArgument("democratic: gamma must lie in (0, 0.5]");
  if (n_iter < 1) throw InvalidArgument("democratic: n_iter must be >= 1");
}

namespace {

linalg::SinkhornResult<double> run_piece(const MatrixXd& k, const DemocraticConfig& cfg,
                                         const std::vector<Index>* members) {
  const Eigen::Array<bool, Eigen::Dynamic, 1> frozen = (k.array() == 0.0).colwise().all().transpose();
  auto res = linalg::symmetric_sinkhorn(k, cfg.gamma, cfg.n_iter, frozen);
  if (res.failed_row >= 0) {
    const Index row = members ? (*members)[static_cast<std::size_t>(res.failed_row)] : res.failed_row;
    throw NumericalError("sinkhorn: nonpositive row sum for descriptor " + std::to_string(row) +
                         " at iteration " + std::to_string(res.sigma_history.cols()) +
                         "; clip negative kernel entries first");
  }
  return res;
}

}  // namespace

DemocraticTrace sinkhorn_trace(const KernelMatrix& k_in, const DemocraticConfig& cfg) {
  cfg.validate();
  if (k_in.size() == 0) throw InvalidArgument("sinkhorn: empty kernel");
  const KernelMatrix k = cfg.clip ? clip_negatives(k_in) : k_in;

  if (!k.is_block()) {
    auto res = run_piece(k.dense(), cfg, nullptr);
    return {std::move(res.alpha_history), std::move(res.sigma_history)};
  }

  // Independent runs per block, scattered back to the original order.
  const auto& b = k.blocks();
  DemocraticTrace out{MatrixXd(b.order, cfg.n_iter), MatrixXd(b.order, cfg.n_iter)};
  for (std::size_t i = 0; i < b.blocks.size(); ++i) {
    const auto res = run_piece(b.blocks[i], cfg, &b.members[i]);
    out.alpha_history(b.members[i], Eigen::all) = res.alpha_history;
    out.sigma_history(b.members[i], Eigen::all) = res.sigma_history;
  }
  return out;
}

WeightVector sinkhorn_weights(const KernelMatrix& k, const DemocraticConfig& cfg) {
  auto trace = sinkhorn_trace(k, cfg);
  return {trace.alpha_history.col(cfg.n_iter - 1), WeightMethod::democratic};
}

AggregateVector aggregate_democratic(const EmbeddedSet& embedded, const WeightVector& weights) {
  if (weights.method != WeightMethod::democratic)
    throw InvalidArgument(std::string("aggregate_democratic: got ") + to_string(weights.method) + " weights");
  return aggregate_weighted(embedded, weights);
}

}  // namespace mkagg
