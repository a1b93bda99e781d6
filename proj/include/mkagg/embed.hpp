#ifndef MKAGG_EMBED_HPP
#define MKAGG_EMBED_HPP

#include "mkagg/types.hpp"

#include <cstdint>

namespace mkagg {

enum class EmbeddingKind { bow, residual };

struct EmbeddingConfig {
  EmbeddingKind kind = EmbeddingKind::bow;
  /// Residual kind only: scale each nonzero residual to unit l2 norm.
  bool normalize_residuals = true;
};

/// Output dimensionality D: c for bow, c·d for residual.
Index embedding_dim(const EmbeddingConfig& cfg, Index clusters, Index descriptor_dim);

/// Lloyd's k-means with k-means++ seeding. Deterministic for a given seed.
/// A cluster that empties during the iterations is re-seeded with the
/// training point farthest from its current centroid.
Codebook train_codebook(const DescriptorSet& training, Index clusters, std::uint64_t seed, int max_iters = 100);

/// Sum of squared distances from each row to its nearest centroid.
double inertia(const DescriptorSet& set, const Codebook& codebook);

/// Index of the nearest centroid (squared Euclidean); ties go to the lowest
/// index.
template <typename Derived>
Index assign_hard(const Eigen::MatrixBase<Derived>& x, const Codebook& codebook) {
  if (x.size() != codebook.dim()) throw InvalidArgument("assign_hard: dimension mismatch");
  if (!x.allFinite()) throw InvalidArgument("assign_hard: non-finite descriptor");
  const auto& c = codebook.centroids();
  const VectorXd xd = x.template cast<double>();
  Index best = 0;
  double best_d2 = (c.row(0).transpose() - xd).squaredNorm();
  for (Index k = 1; k < c.rows(); ++k) {
    const double d2 = (c.row(k).transpose() - xd).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = k;
    }
  }
  return best;
}

EmbeddedSet embed_set(const DescriptorSet& set, const Codebook& codebook, const EmbeddingConfig& cfg);

}  // namespace mkagg

#endif  // MKAGG_EMBED_HPP
