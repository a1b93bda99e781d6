#include "mkagg/normalize.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace mkagg {

namespace {

constexpr Index kFullEigenMaxDim = 4096;

void fix_sign(Eigen::Ref<VectorXd> v) {
  Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
}

// Appends canonical axes, orthogonalised against the rows already in
// `basis`, until it has D rows.
void complete_basis(MatrixXd& basis, Index filled) {
  const Index dim = basis.cols();
  for (Index axis = 0; axis < dim && filled < dim; ++axis) {
    VectorXd v = VectorXd::Unit(dim, axis);
    for (int pass = 0; pass < 2; ++pass) {
      const auto done = basis.topRows(filled);
      v -= done.transpose() * (done * v);
    }
    const double nrm = v.norm();
    if (nrm < 1e-6) continue;
    basis.row(filled++) = v / nrm;
  }
  if (filled != dim) throw NumericalError("rn_fit: could not complete the orthonormal basis");
}

}  // namespace

void NormalizeConfig::validate(Index dim) const {
  if (!(alpha_exponent >= 0.0 && alpha_exponent <= 1.0))
    throw InvalidArgument("normalize: power-law exponent must lie in [0, 1]");
  if (rotation) {
    if (rotation->rows() != dim || rotation->cols() != dim)
      throw InvalidArgument("normalize: rotation is " + std::to_string(rotation->rows()) + "x" +
                            std::to_string(rotation->cols()) + ", vector has D=" + std::to_string(dim));
  }
  if (truncate_to && (*truncate_to < 1 || *truncate_to > dim))
    throw InvalidArgument("normalize: truncation target must lie in [1, D]");
}

void check_orthonormal(const MatrixXd& r, double tol) {
  if (r.rows() != r.cols()) throw InvalidArgument("rotation must be square");
  const MatrixXd gram = r.transpose() * r;
  const double err = (gram - MatrixXd::Identity(r.rows(), r.cols())).cwiseAbs().maxCoeff();
  if (err > tol) throw InvalidArgument("rotation is not orthonormal (max |RᵀR - I| = " + std::to_string(err) + ")");
}

MatrixXd rn_fit(std::span<const AggregateVector> training, Index max_eigvecs) {
  if (training.size() < 2) throw InvalidArgument("rn_fit: need at least 2 training vectors");
  if (max_eigvecs < 0) throw InvalidArgument("rn_fit: max_eigvecs must be >= 0");
  const Index dim = training.front().dim();
  const auto count = static_cast<Index>(training.size());
  MatrixXd x(count, dim);
  for (Index i = 0; i < count; ++i) {
    const auto& v = training[static_cast<std::size_t>(i)];
    if (v.dim() != dim)
      throw InvalidArgument("rn_fit: vector " + std::to_string(i) + " has D=" + std::to_string(v.dim()) +
                            ", expected " + std::to_string(dim));
    x.row(i) = v.xi.transpose();
  }
  x.rowwise() -= x.colwise().mean();

  // Principal directions as columns, with their variances, descending.
  MatrixXd directions;
  VectorXd variances;
  if (dim <= kFullEigenMaxDim) {
    MatrixXd cov = MatrixXd::Zero(dim, dim);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / static_cast<double>(count - 1));
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    directions = eig.eigenvectors().rowwise().reverse();
    variances = eig.eigenvalues().reverse();
  } else {
    MatrixXd g = MatrixXd::Zero(count, count);
    g.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / static_cast<double>(count - 1));
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(g);
    variances = eig.eigenvalues().reverse();
    directions = x.transpose() * eig.eigenvectors().rowwise().reverse();
    for (Index j = 0; j < directions.cols(); ++j) {
      const double nrm = directions.col(j).norm();
      if (nrm > 0.0) directions.col(j) /= nrm;
    }
  }

  // Directions with (numerically) zero variance are not determined by the
  // data; the completion step handles that part of the space.
  const double top = variances.size() > 0 ? std::max(variances(0), 0.0) : 0.0;
  Index keep = 0;
  const Index limit = std::min({max_eigvecs, dim, variances.size()});
  while (keep < limit && variances(keep) > 1e-12 * top && top > 0.0) ++keep;

  MatrixXd rotation(dim, dim);
  for (Index r = 0; r < keep; ++r) {
    VectorXd row = directions.col(r);
    fix_sign(row);
    rotation.row(r) = row.transpose();
  }
  complete_basis(rotation, keep);
  return rotation;
}

AggregateVector apply_chain(const AggregateVector& v, const NormalizeConfig& cfg) {
  cfg.validate(v.dim());
  AggregateVector out = v;
  if (cfg.rotation) {
    out.xi = *cfg.rotation * out.xi;
    out.state.push_back({TransformKind::rotated, 0.0});
  }
  out.xi = power_law(out.xi, cfg.alpha_exponent);
  out.state.push_back({TransformKind::power, cfg.alpha_exponent});
  if (cfg.truncate_to) {
    out.xi = out.xi.head(*cfg.truncate_to).eval();
    out.state.push_back({TransformKind::truncated, static_cast<double>(*cfg.truncate_to)});
  }
  out.xi = l2_normalize(out.xi);
  out.state.push_back({TransformKind::l2, 0.0});
  return out;
}

double similarity(const AggregateVector& a, const AggregateVector& b) {
  if (!a.normalized() || !b.normalized())
    throw InvalidArgument("similarity: both vectors must be l2-normalized");
  if (a.dim() != b.dim())
    throw InvalidArgument("similarity: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()) + ")");
  return a.xi.dot(b.xi);
}

}  // namespace mkagg
