#ifndef MKAGG_KERNEL_HPP
#define MKAGG_KERNEL_HPP

#include "mkagg/types.hpp"

namespace mkagg {

/// Pairwise similarities K = ΦᵀΦ. Block-sparse embeddings produce
/// block-diagonal storage, matching only descriptors that share a codeword;
/// everything else produces a dense matrix.
KernelMatrix gram(const EmbeddedSet& embedded);

/// Dense ΦᵀΦ regardless of block metadata. Reference path for the block
/// construction and for timing comparisons.
KernelMatrix gram_dense(const EmbeddedSet& embedded);

/// K⁺: negative entries replaced by 0.
KernelMatrix clip_negatives(const KernelMatrix& k);

/// Off-diagonal entries below tau set to 0. The diagonal is kept so that
/// both weighting solvers stay well posed.
KernelMatrix threshold_sparsify(const KernelMatrix& k, double tau);

/// Stored nonzeros (counting the dense expansion's entries).
Index nonzeros(const KernelMatrix& k);

}  // namespace mkagg

#endif  // MKAGG_KERNEL_HPP
