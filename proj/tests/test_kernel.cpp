#include "mkagg/democratic.hpp"
#include "mkagg/gmp.hpp"
#include "mkagg/kernel.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace mkagg;

TEST_CASE("bow kernel of the [4,1] set is block-diagonal with blocks of ones") {
  const KernelMatrix k = gram(oracle::bow_embedding({0, 0, 0, 0, 1}, 2));
  REQUIRE(k.is_block());
  const auto& b = k.blocks();
  REQUIRE(b.blocks.size() == 2);
  CHECK(b.blocks[0] == MatrixXd::Ones(4, 4));
  CHECK(b.blocks[1] == MatrixXd::Ones(1, 1));
  CHECK(b.members[1] == std::vector<Index>{4});
  MatrixXd expected = MatrixXd::Zero(5, 5);
  expected.topLeftCorner(4, 4).setOnes();
  expected(4, 4) = 1;
  CHECK(k.to_dense() == expected);
}

TEST_CASE("single unit descriptor has kernel [1]") {
  EmbeddedSet e;
  e.phi = Eigen::Vector3d(0, 0.6, 0.8);
  e.unit_norm_columns = true;
  const KernelMatrix k = gram(e);
  CHECK_FALSE(k.is_block());
  CHECK(k.size() == 1);
  CHECK(k.dense()(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  e.phi.resize(3, 0);
  CHECK_THROWS_AS(gram(e), InvalidArgument);
}

TEST_CASE("block path expands to the dense product") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 10; ++t) {
    const EmbeddedSet e = oracle::random_block_embedding(50, 7, 4, rng);
    const KernelMatrix block = gram(e);
    REQUIRE(block.is_block());
    const MatrixXd oracle_k = oracle::naive_gram(e.phi);
    CHECK((block.to_dense() - oracle_k).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((gram_dense(e).dense() - oracle_k).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((block.to_dense().diagonal().array() - 1.0).abs().maxCoeff() <= 1e-6);
    const VectorXd v = oracle::random_matrix(50, 1, rng);
    CHECK((block.multiply(v) - oracle_k * v).norm() <= 1e-10);
  }
}

TEST_CASE("block and dense kernels give the same downstream weights") {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 5; ++t) {
    const EmbeddedSet e = oracle::random_block_embedding(60, 5, 3, rng);
    const KernelMatrix b = gram(e), d = gram_dense(e);
    CHECK((sinkhorn_weights(b).alpha - sinkhorn_weights(d).alpha).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((gmp_weights(b).alpha - gmp_weights(d).alpha).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("kernels are positive semi-definite") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 10; ++t) {
    const EmbeddedSet e = oracle::random_dense_embedding(40, 12, rng);
    const MatrixXd k = gram(e).dense();
    const double lo = Eigen::SelfAdjointEigenSolver<MatrixXd>(k, Eigen::EigenvaluesOnly).eigenvalues()(0);
    CHECK(lo >= -1e-8 * k.norm());
    CHECK((k - k.transpose()).norm() == 0.0);
  }
}

TEST_CASE("clip_negatives") {
  MatrixXd m(2, 2);
  m << 1, -0.3, -0.3, 1;
  CHECK(clip_negatives(KernelMatrix(m)).dense() == MatrixXd::Identity(2, 2));

  MatrixXd pos(2, 2);
  pos << 1, 0.2, 0.2, 1;
  CHECK(clip_negatives(KernelMatrix(pos)).dense() == pos);

  std::mt19937_64 rng(24);
  for (int t = 0; t < 20; ++t) {
    const MatrixXd r = oracle::random_matrix(15, 15, rng);
    const MatrixXd sym = r + r.transpose();
    const MatrixXd out = clip_negatives(KernelMatrix(sym)).dense();
    double min_in = sym(0, 0);
    for (Index i = 0; i < sym.size(); ++i) min_in = std::min(min_in, sym.data()[i]);
    CHECK(out.minCoeff() == (min_in >= 0 ? min_in : 0.0));
    for (Index i = 0; i < sym.size(); ++i)
      CHECK(out.data()[i] == (sym.data()[i] < 0 ? 0.0 : sym.data()[i]));
    CHECK(out == out.transpose());
  }
}

TEST_CASE("threshold_sparsify") {
  MatrixXd m(2, 2);
  m << 1, 0.05, 0.05, 1;
  CHECK(threshold_sparsify(KernelMatrix(m), 0.1).dense() == MatrixXd::Identity(2, 2));
  CHECK(threshold_sparsify(KernelMatrix(m), 0.0).dense() == m);
  CHECK_THROWS_AS(threshold_sparsify(KernelMatrix(m), -0.1), InvalidArgument);

  MatrixXd small_diag = MatrixXd::Identity(2, 2) * 0.01;
  CHECK(threshold_sparsify(KernelMatrix(small_diag), 0.5).dense() == small_diag);

  std::mt19937_64 rng(25);
  for (int t = 0; t < 20; ++t) {
    const MatrixXd k = gram(oracle::random_dense_embedding(30, 6, rng)).dense();
    Index expected = 0;
    for (Index i = 0; i < 30; ++i)
      for (Index j = 0; j < 30; ++j)
        if (i == j ? k(i, j) != 0.0 : k(i, j) >= 0.2) ++expected;
    const KernelMatrix out = threshold_sparsify(KernelMatrix(k), 0.2);
    CHECK(nonzeros(out) == expected);
    CHECK(out.dense() == out.dense().transpose());
  }

  // Block storage keeps its blocks and thresholds within them.
  std::mt19937_64 rng2(26);
  const KernelMatrix b = gram(oracle::random_block_embedding(40, 4, 3, rng2));
  const KernelMatrix bt = threshold_sparsify(b, 0.3);
  CHECK(bt.is_block());
  CHECK(bt.to_dense() == threshold_sparsify(KernelMatrix(b.to_dense()), 0.3).dense());
}
