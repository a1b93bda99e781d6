#ifndef MKAGG_NORMALIZE_HPP
#define MKAGG_NORMALIZE_HPP

#include "mkagg/linalg.hpp"
#include "mkagg/types.hpp"

#include <memory>
#include <optional>
#include <span>

namespace mkagg {

struct NormalizeConfig {
  double alpha_exponent = 0.5;
  /// D×D and orthonormal; check_orthonormal once when loading it, the chain
  /// only checks the shape.
  std::shared_ptr<const MatrixXd> rotation;
  std::optional<Index> truncate_to;

  void validate(Index dim) const;
};

/// Throws InvalidArgument unless max |RᵀR - I| <= tol.
void check_orthonormal(const MatrixXd& r, double tol = 1e-6);

/// Signed power |a|^p · sign(a); 0 stays 0 for every p, so p = 0 binarises.
template <typename Derived>
auto power_law(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar exponent) {
  return linalg::signed_power(v, exponent);
}

/// v / ||v||₂. Throws InvalidArgument on the zero vector.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> l2_normalize(const Eigen::MatrixBase<Derived>& v) {
  const auto nrm = v.norm();
  if (!(nrm > 0)) throw InvalidArgument("l2_normalize: zero vector");
  return v / nrm;
}

/// D×D rotation whose leading rows are the principal directions of the
/// (centred) training vectors, sorted by decreasing variance, completed to
/// an orthonormal basis by Gram-Schmidt over the canonical axes. Each
/// principal row has its largest-magnitude entry made positive.
///
/// Uses a full eigendecomposition of the covariance up to D = 4096 and the
/// n×n Gram matrix of the training set above that.
MatrixXd rn_fit(std::span<const AggregateVector> training, Index max_eigvecs);

/// rotation → power law → truncation → l2, recording each step in the state.
AggregateVector apply_chain(const AggregateVector& v, const NormalizeConfig& cfg);

/// Dot product of two l2-normalized vectors (the normalized match kernel).
double similarity(const AggregateVector& a, const AggregateVector& b);

}  // namespace mkagg

#endif  // MKAGG_NORMALIZE_HPP
