#ifndef MKAGG_LINALG_HPP
#define MKAGG_LINALG_HPP

// Scalar-generic numerical kernels shared by the aggregation modules. They
// take Eigen expressions and know nothing about the domain types.

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace mkagg::linalg {

/// Elementwise |a|^p · sign(a), with 0 mapped to 0 for every exponent
/// (including p = 0, which binarises).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>
signed_power(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar p) {
  using Scalar = typename Derived::Scalar;
  return v.unaryExpr([p](Scalar a) -> Scalar {
    if (a == Scalar(0)) return Scalar(0);
    const Scalar mag = std::pow(std::abs(a), p);
    return a < Scalar(0) ? -mag : mag;
  });
}

template <typename Scalar>
struct CgResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  Scalar residual_norm = 0;
  int iterations = 0;
  bool converged = false;
};

/// Plain (unpreconditioned) conjugate gradient for a symmetric positive
/// semi-definite operator, started from x = 0.
///
/// Starting from zero keeps every iterate in the Krylov space of b, so on a
/// consistent singular system the limit is the minimum-norm solution.
/// Stops when ||b - A x||_2 <= abs_tol or after max_iter steps. `apply`
/// maps a vector v to A·v.
template <typename Scalar, typename Apply>
CgResult<Scalar> conjugate_gradient(Apply&& apply, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                                    Scalar abs_tol, int max_iter) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  CgResult<Scalar> out;
  out.x = Vec::Zero(b.size());
  Vec r = b;
  Vec p = r;
  Scalar rr = r.squaredNorm();
  out.residual_norm = std::sqrt(rr);
  if (out.residual_norm <= abs_tol) {
    out.converged = true;
    return out;
  }
  for (int it = 0; it < max_iter; ++it) {
    const Vec ap = apply(p);
    const Scalar pap = p.dot(ap);
    if (!(pap > Scalar(0))) break;  // direction in the null space: nothing left to gain
    const Scalar step = rr / pap;
    out.x.noalias() += step * p;
    r.noalias() -= step * ap;
    const Scalar rr_next = r.squaredNorm();
    out.iterations = it + 1;
    out.residual_norm = std::sqrt(rr_next);
    if (out.residual_norm <= abs_tol) {
      out.converged = true;
      break;
    }
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  // The recursive residual drifts from the true one on long runs.
  out.residual_norm = (b - apply(out.x)).norm();
  out.converged = out.residual_norm <= abs_tol;
  return out;
}

/// Result of one symmetric Sinkhorn run.
template <typename Scalar>
struct SinkhornResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> alpha;
  /// Row sums of diag(alpha) K diag(alpha) seen at each iteration, before the
  /// update (column it holds iteration it).
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sigma_history;
  /// Weights after each update (column it holds iteration it).
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> alpha_history;
  /// Index of the first row whose sum was nonpositive, or -1.
  Eigen::Index failed_row = -1;
};

/// Symmetric Sinkhorn scaling with a damping exponent:
///   sigma = diag(a) K diag(a) 1,  a_i := a_i / sigma_i^gamma
/// repeated exactly n_iter times from a = 1. Rows flagged in `frozen` keep
/// weight 1 and are never updated. Stops early (with failed_row set) when a
/// non-frozen row sum is not strictly positive.
template <typename Derived>
SinkhornResult<typename Derived::Scalar> symmetric_sinkhorn(
    const Eigen::MatrixBase<Derived>& k, typename Derived::Scalar gamma, int n_iter,
    const Eigen::Array<bool, Eigen::Dynamic, 1>& frozen) {
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = k.rows();
  SinkhornResult<Scalar> out;
  out.alpha = Vec::Ones(n);
  out.sigma_history.resize(n, n_iter);
  out.alpha_history.resize(n, n_iter);
  for (int it = 0; it < n_iter; ++it) {
    const Vec sigma = out.alpha.cwiseProduct(k * out.alpha);
    out.sigma_history.col(it) = sigma;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (frozen(i)) continue;
      if (!(sigma(i) > Scalar(0))) {
        out.failed_row = i;
        out.sigma_history.conservativeResize(n, it + 1);
        out.alpha_history.conservativeResize(n, it);
        return out;
      }
      out.alpha(i) /= std::pow(sigma(i), gamma);
    }
    out.alpha_history.col(it) = out.alpha;
  }
  return out;
}

}  // namespace mkagg::linalg

#endif  // MKAGG_LINALG_HPP
