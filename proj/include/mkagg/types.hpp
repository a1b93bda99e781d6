#ifndef MKAGG_TYPES_HPP
#define MKAGG_TYPES_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mkagg {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using RowMatrixXf = RowMatrix<float>;

// ---------------------------------------------------------------------------
// Errors. The CLI maps each family onto an exit code.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or violated preconditions on the caller's side.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A solver could not produce a valid result (non-convergence, nonpositive
/// row sums, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Domain types

/// An image's local descriptors, one per row. Stored in single precision;
/// every consumer widens to double before doing arithmetic.
class DescriptorSet {
 public:
  DescriptorSet() = default;
  explicit DescriptorSet(RowMatrixXf data);
  DescriptorSet(Index n, Index d);

  const RowMatrixXf& data() const { return data_; }
  Index size() const { return data_.rows(); }
  Index dim() const { return data_.cols(); }
  bool empty() const { return data_.rows() == 0; }

  /// Row i widened to double.
  VectorXd row(Index i) const { return data_.row(i).transpose().cast<double>(); }

 private:
  RowMatrixXf data_;
};

/// Visual vocabulary: c centroids in R^d, one per row.
class Codebook {
 public:
  Codebook() = default;
  explicit Codebook(MatrixXd centroids);

  const MatrixXd& centroids() const { return centroids_; }
  Index size() const { return centroids_.rows(); }
  Index dim() const { return centroids_.cols(); }

 private:
  MatrixXd centroids_;
};

/// Contiguous index range [offset, offset + size) of one codeword's block.
struct BlockRange {
  Index offset = 0;
  Index size = 0;
};

/// Per-descriptor embeddings, one column per descriptor.
///
/// When `assignment` is set, column i is exactly zero outside
/// `block_layout[assignment[i]]`. Kernel construction relies on this to
/// build the Gram matrix block by block.
struct EmbeddedSet {
  MatrixXd phi;
  std::optional<std::vector<Index>> assignment;
  std::optional<std::vector<BlockRange>> block_layout;
  bool unit_norm_columns = false;

  Index size() const { return phi.cols(); }
  Index dim() const { return phi.rows(); }
  bool block_sparse() const { return assignment.has_value() && block_layout.has_value(); }

  /// Throws InvalidArgument when the block-sparsity or unit-norm contract is
  /// violated.
  void validate() const;
};

/// Block-diagonal storage: block b holds the Gram sub-matrix of the
/// descriptors listed in members[b] (original row indices, ascending).
struct BlockDiagonal {
  std::vector<MatrixXd> blocks;
  std::vector<std::vector<Index>> members;
  Index order = 0;
};

/// Gram matrix of an embedded set, either dense or block-diagonal.
class KernelMatrix {
 public:
  KernelMatrix() = default;
  explicit KernelMatrix(MatrixXd dense);
  explicit KernelMatrix(BlockDiagonal blocks);

  Index size() const;
  bool is_block() const { return std::holds_alternative<BlockDiagonal>(storage_); }
  const MatrixXd& dense() const { return std::get<MatrixXd>(storage_); }
  const BlockDiagonal& blocks() const { return std::get<BlockDiagonal>(storage_); }

  /// Dense n×n expansion (a copy for dense storage).
  MatrixXd to_dense() const;
  /// K·v without expanding block storage.
  VectorXd multiply(const VectorXd& v) const;

  /// Applies f to every stored dense piece. Each piece is a principal
  /// sub-matrix, so its diagonal is part of the full diagonal.
  template <typename F>
  KernelMatrix transformed(F&& f) const {
    if (is_block()) {
      BlockDiagonal out = blocks();
      for (auto& b : out.blocks) f(b);
      return KernelMatrix(std::move(out));
    }
    MatrixXd out = dense();
    f(out);
    return KernelMatrix(std::move(out));
  }

 private:
  std::variant<MatrixXd, BlockDiagonal> storage_;
};

enum class WeightMethod { uniform, democratic, gmp };

const char* to_string(WeightMethod m);

struct WeightVector {
  VectorXd alpha;
  WeightMethod method = WeightMethod::uniform;

  Index size() const { return alpha.size(); }
};

enum class TransformKind { raw, power, rotated, l2, truncated };

struct Transform {
  TransformKind kind = TransformKind::raw;
  double parameter = 0.0;  // exponent for power, D' for truncated

  friend bool operator==(const Transform&, const Transform&) = default;
};

std::string to_string(const Transform& t);

/// Image-level vector together with the ordered list of transforms that
/// produced it.
struct AggregateVector {
  VectorXd xi;
  std::vector<Transform> state{Transform{}};

  Index dim() const { return xi.size(); }
  bool normalized() const { return !state.empty() && state.back().kind == TransformKind::l2; }
};

}  // namespace mkagg

#endif  // MKAGG_TYPES_HPP
