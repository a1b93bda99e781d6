#ifndef MKAGG_GMP_HPP
#define MKAGG_GMP_HPP

#include "mkagg/types.hpp"

#include <optional>

namespace mkagg {

struct GmpConfig {
  double lambda = 1.0;
  /// CG stops once ||(K + λI)α - 1||₂ <= cg_tol·√n.
  double cg_tol = 1e-10;
  /// Defaults to 10·n when unset.
  std::optional<int> cg_max_iter;

  void validate() const;
};

/// Raised when CG exhausts its iteration budget.
class CgNotConverged : public NumericalError {
 public:
  CgNotConverged(double residual, double target, int iterations);
  double residual() const { return residual_; }
  double target() const { return target_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  double target_;
  int iterations_;
};

struct GmpSolveStats {
  int iterations = 0;  // summed over blocks
  double residual = 0.0;
};

/// GMP weights α = (K + λI)⁻¹ 1ₙ by conjugate gradient from zero, block by
/// block for block-diagonal K. With λ = 0 the iteration converges to the
/// minimum-norm solution of a consistent singular system.
WeightVector gmp_weights(const KernelMatrix& k, const GmpConfig& cfg = {}, GmpSolveStats* stats = nullptr);

/// ξ = Φ α for GMP weights.
AggregateVector aggregate_gmp(const EmbeddedSet& embedded, const WeightVector& weights);

/// Primal solve ξ = (ΦΦᵀ + λI_D)⁻¹ Φ 1ₙ, or the minimum-norm least-squares
/// solution of Φᵀξ = 1ₙ when λ = 0. Dense D×D, so D is capped.
AggregateVector gmp_primal(const EmbeddedSet& embedded, const GmpConfig& cfg = {}, Index max_dim = 4096);

/// Σ of the distinct codewords present in Φ, for embeddings drawn from an
/// orthonormal codebook Q (D×c). This is what unregularised GMP reduces to
/// on such embeddings, independently of how often each codeword occurs.
VectorXd maxpool_oracle(const EmbeddedSet& embedded, const MatrixXd& codebook_embeddings, double tol = 1e-9);

}  // namespace mkagg

#endif  // MKAGG_GMP_HPP
