#include "mkagg/gmp.hpp"

#include "mkagg/aggregate.hpp"
#include "mkagg/linalg.hpp"

#include <cmath>
#include <sstream>

namespace mkagg {

void GmpConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("gmp: lambda must be finite and >= 0");
  if (!(cg_tol > 0.0)) throw InvalidArgument("gmp: cg_tol must be > 0");
  if (cg_max_iter && *cg_max_iter < 1) throw InvalidArgument("gmp: cg_max_iter must be >= 1");
}

namespace {

std::string cg_message(double residual, double target, int iterations) {
  std::ostringstream os;
  os << "gmp: conjugate gradient did not converge after " << iterations << " iterations (residual " << residual
     << ", target " << target << ")";
  return os.str();
}

}  // namespace

CgNotConverged::CgNotConverged(double residual, double target, int iterations)
    : NumericalError(cg_message(residual, target, iterations)),
      residual_(residual),
      target_(target),
      iterations_(iterations) {}

namespace {

linalg::CgResult<double> solve_piece(const MatrixXd& k, const GmpConfig& cfg) {
  const Index n = k.rows();
  const int max_iter = cfg.cg_max_iter.value_or(static_cast<int>(10 * n));
  const double target = cfg.cg_tol * std::sqrt(static_cast<double>(n));
  const double lambda = cfg.lambda;
  auto apply = [&k, lambda](const VectorXd& v) -> VectorXd { return k * v + lambda * v; };
  auto res = linalg::conjugate_gradient<double>(apply, VectorXd::Ones(n), target, max_iter);
  if (!res.converged) throw CgNotConverged(res.residual_norm, target, res.iterations);
  return res;
}

}  // namespace

WeightVector gmp_weights(const KernelMatrix& k, const GmpConfig& cfg, GmpSolveStats* stats) {
  cfg.validate();
  if (k.size() == 0) throw InvalidArgument("gmp: empty kernel");
  WeightVector out{VectorXd(k.size()), WeightMethod::gmp};
  GmpSolveStats local;
  double residual2 = 0.0;

  if (!k.is_block()) {
    auto res = solve_piece(k.dense(), cfg);
    out.alpha = std::move(res.x);
    local.iterations = res.iterations;
    residual2 = res.residual_norm * res.residual_norm;
  } else {
    const auto& b = k.blocks();
    for (std::size_t i = 0; i < b.blocks.size(); ++i) {
      auto res = solve_piece(b.blocks[i], cfg);
      out.alpha(b.members[i]) = res.x;
      local.iterations += res.iterations;
      residual2 += res.residual_norm * res.residual_norm;
    }
  }
  local.residual = std::sqrt(residual2);
  if (stats) *stats = local;
  return out;
}

AggregateVector aggregate_gmp(const EmbeddedSet& embedded, const WeightVector& weights) {
  if (weights.method != WeightMethod::gmp)
    throw InvalidArgument(std::string("aggregate_gmp: got ") + to_string(weights.method) + " weights");
  return aggregate_weighted(embedded, weights);
}

AggregateVector gmp_primal(const EmbeddedSet& embedded, const GmpConfig& cfg, Index max_dim) {
  cfg.validate();
  if (embedded.size() == 0) throw InvalidArgument("gmp_primal: empty embedded set");
  const Index dim = embedded.dim();
  if (dim > max_dim)
    throw InvalidArgument("gmp_primal: D=" + std::to_string(dim) + " exceeds the dense-solve cap " +
                          std::to_string(max_dim));
  const auto& phi = embedded.phi;
  const VectorXd ones = VectorXd::Ones(embedded.size());
  AggregateVector out;
  if (cfg.lambda == 0.0) {
    out.xi = phi.transpose().completeOrthogonalDecomposition().solve(ones);
    return out;
  }
  MatrixXd system = MatrixXd::Identity(dim, dim) * cfg.lambda;
  system.selfadjointView<Eigen::Lower>().rankUpdate(phi);
  out.xi = system.selfadjointView<Eigen::Lower>().ldlt().solve(phi * ones);
  return out;
}

VectorXd maxpool_oracle(const EmbeddedSet& embedded, const MatrixXd& q, double tol) {
  if (q.rows() != embedded.dim()) throw InvalidArgument("maxpool_oracle: codebook dimension mismatch");
  const MatrixXd gram = q.transpose() * q;
  if ((gram - MatrixXd::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff() > tol)
    throw InvalidArgument("maxpool_oracle: codebook matrix is not orthonormal");

  std::vector<bool> present(static_cast<std::size_t>(q.cols()), false);
  for (Index i = 0; i < embedded.size(); ++i) {
    bool matched = false;
    for (Index k = 0; k < q.cols() && !matched; ++k) {
      if ((embedded.phi.col(i) - q.col(k)).cwiseAbs().maxCoeff() <= tol) {
        present[static_cast<std::size_t>(k)] = true;
        matched = true;
      }
    }
    if (!matched) throw InvalidArgument("maxpool_oracle: column " + std::to_string(i) + " matches no codeword");
  }
  VectorXd out = VectorXd::Zero(q.rows());
  for (Index k = 0; k < q.cols(); ++k)
    if (present[static_cast<std::size_t>(k)]) out += q.col(k);
  return out;
}

}  // namespace mkagg
