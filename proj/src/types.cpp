#include "mkagg/types.hpp"

#include <cmath>
#include <sstream>

namespace mkagg {

namespace {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entry");
}

}  // namespace

DescriptorSet::DescriptorSet(RowMatrixXf data) : data_(std::move(data)) {
  if (data_.cols() < 1) throw InvalidArgument("DescriptorSet: dimension must be >= 1");
  require_finite(data_, "DescriptorSet");
}

DescriptorSet::DescriptorSet(Index n, Index d) : DescriptorSet(RowMatrixXf::Zero(n, d)) {}

Codebook::Codebook(MatrixXd centroids) : centroids_(std::move(centroids)) {
  if (centroids_.rows() < 1 || centroids_.cols() < 1)
    throw InvalidArgument("Codebook: need at least one centroid of dimension >= 1");
  require_finite(centroids_, "Codebook");
  for (Index a = 0; a < centroids_.rows(); ++a)
    for (Index b = a + 1; b < centroids_.rows(); ++b)
      if (centroids_.row(a) == centroids_.row(b))
        throw InvalidArgument("Codebook: centroids " + std::to_string(a) + " and " +
                              std::to_string(b) + " coincide");
}

void EmbeddedSet::validate() const {
  require_finite(phi, "EmbeddedSet");
  if (assignment.has_value() != block_layout.has_value())
    throw InvalidArgument("EmbeddedSet: assignment and block_layout must be set together");
  if (assignment) {
    if (static_cast<Index>(assignment->size()) != size())
      throw InvalidArgument("EmbeddedSet: assignment length differs from column count");
    for (const auto& r : *block_layout)
      if (r.offset < 0 || r.size < 0 || r.offset + r.size > dim())
        throw InvalidArgument("EmbeddedSet: block range outside [0, D)");
    for (Index i = 0; i < size(); ++i) {
      const Index k = (*assignment)[static_cast<std::size_t>(i)];
      if (k < 0 || k >= static_cast<Index>(block_layout->size()))
        throw InvalidArgument("EmbeddedSet: assignment index out of range");
      const BlockRange r = (*block_layout)[static_cast<std::size_t>(k)];
      const auto col = phi.col(i);
      if (!col.head(r.offset).isZero(0.0) || !col.tail(dim() - r.offset - r.size).isZero(0.0))
        throw InvalidArgument("EmbeddedSet: column " + std::to_string(i) +
                              " has entries outside its block");
    }
  }
  if (unit_norm_columns) {
    for (Index i = 0; i < size(); ++i) {
      const double nrm = phi.col(i).norm();
      // Zero columns are tolerated: a descriptor sitting exactly on its
      // centroid has no residual direction.
      if (nrm != 0.0 && std::abs(nrm - 1.0) > 1e-6)
        throw InvalidArgument("EmbeddedSet: column " + std::to_string(i) + " is not unit norm");
    }
  }
}

KernelMatrix::KernelMatrix(MatrixXd dense) : storage_(std::move(dense)) {
  const auto& k = std::get<MatrixXd>(storage_);
  if (k.rows() != k.cols()) throw InvalidArgument("KernelMatrix: not square");
}

KernelMatrix::KernelMatrix(BlockDiagonal blocks) : storage_(std::move(blocks)) {
  const auto& b = std::get<BlockDiagonal>(storage_);
  if (b.blocks.size() != b.members.size())
    throw InvalidArgument("KernelMatrix: block/member count mismatch");
  Index total = 0;
  for (std::size_t i = 0; i < b.blocks.size(); ++i) {
    const Index m = static_cast<Index>(b.members[i].size());
    if (b.blocks[i].rows() != m || b.blocks[i].cols() != m)
      throw InvalidArgument("KernelMatrix: block shape does not match its member list");
    total += m;
  }
  if (total != b.order) throw InvalidArgument("KernelMatrix: blocks do not cover the order");
}

Index KernelMatrix::size() const {
  return is_block() ? blocks().order : dense().rows();
}

MatrixXd KernelMatrix::to_dense() const {
  if (!is_block()) return dense();
  const auto& b = blocks();
  MatrixXd out = MatrixXd::Zero(b.order, b.order);
  for (std::size_t k = 0; k < b.blocks.size(); ++k) {
    const auto& idx = b.members[k];
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < idx.size(); ++c)
        out(idx[r], idx[c]) = b.blocks[k](static_cast<Index>(r), static_cast<Index>(c));
  }
  return out;
}

VectorXd KernelMatrix::multiply(const VectorXd& v) const {
  if (v.size() != size()) throw InvalidArgument("KernelMatrix::multiply: length mismatch");
  if (!is_block()) return dense() * v;
  const auto& b = blocks();
  VectorXd out = VectorXd::Zero(b.order);
  for (std::size_t k = 0; k < b.blocks.size(); ++k) {
    const auto& idx = b.members[k];
    const VectorXd local = v(idx);
    out(idx) = b.blocks[k] * local;
  }
  return out;
}

const char* to_string(WeightMethod m) {
  switch (m) {
    case WeightMethod::uniform: return "uniform";
    case WeightMethod::democratic: return "democratic";
    case WeightMethod::gmp: return "gmp";
  }
  return "?";
}

std::string to_string(const Transform& t) {
  std::ostringstream os;
  switch (t.kind) {
    case TransformKind::raw: os << "raw"; break;
    case TransformKind::power: os << "power(" << t.parameter << ")"; break;
    case TransformKind::rotated: os << "rotated"; break;
    case TransformKind::l2: os << "l2"; break;
    case TransformKind::truncated: os << "truncated(" << static_cast<long long>(t.parameter) << ")"; break;
  }
  return os.str();
}

}  // namespace mkagg
