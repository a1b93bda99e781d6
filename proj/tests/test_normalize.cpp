#include "mkagg/aggregate.hpp"
#include "mkagg/democratic.hpp"
#include "mkagg/kernel.hpp"
#include "mkagg/normalize.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <memory>

using namespace mkagg;

namespace {

AggregateVector raw(const VectorXd& v) {
  AggregateVector a;
  a.xi = v;
  return a;
}

NormalizeConfig chain(double alpha, std::shared_ptr<const MatrixXd> r = nullptr,
                      std::optional<Index> truncate = std::nullopt) {
  return NormalizeConfig{alpha, std::move(r), truncate};
}

}  // namespace

TEST_CASE("power law") {
  const VectorXd sq = power_law(Eigen::Vector2d(-4, 0.25), 0.5);
  CHECK(sq == Eigen::Vector2d(-2, 0.5));
  const VectorXd bin = power_law(Eigen::Vector3d(-3, 0, 2), 0.0);
  CHECK(bin == Eigen::Vector3d(-1, 0, 1));
  std::mt19937_64 rng(51);
  const VectorXd v = oracle::random_matrix(20, 1, rng);
  CHECK(VectorXd(power_law(v, 1.0)) == v);
  const VectorXd p = power_law(v, 0.3);
  for (Index i = 0; i < 20; ++i) CHECK(p(i) == doctest::Approx(std::copysign(std::pow(std::abs(v(i)), 0.3), v(i))));
}

TEST_CASE("l2 normalization") {
  CHECK((l2_normalize(Eigen::Vector2d(3, 4)) - Eigen::Vector2d(0.6, 0.8)).norm() <= 1e-15);
  CHECK(l2_normalize(Eigen::Vector3d(0, 1, 0)) == Eigen::Vector3d(0, 1, 0));
  CHECK_THROWS_AS(l2_normalize(Eigen::Vector2d(0, 0)), InvalidArgument);
  std::mt19937_64 rng(52);
  for (int t = 0; t < 20; ++t) {
    const VectorXd v = oracle::random_matrix(13, 1, rng);
    const VectorXd out = l2_normalize(v);
    double sq = 0.0;
    for (Index i = 0; i < out.size(); ++i) sq += out(i) * out(i);
    CHECK(std::abs(std::sqrt(sq) - 1.0) <= 1e-12);
    CHECK(oracle::cosine(out, v) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("rn_fit on vectors along e3 puts +e3 first") {
  std::vector<AggregateVector> train;
  for (double s : {-2.0, 1.0, 3.0, 5.5}) train.push_back(raw(Eigen::Vector3d(0, 0, s)));
  const MatrixXd r = rn_fit(train, 1000);
  REQUIRE(r.rows() == 3);
  CHECK((r.row(0).transpose() - Eigen::Vector3d(0, 0, 1)).norm() <= 1e-12);
  CHECK((r.transpose() * r - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("rn_fit leading rows match a covariance eigensolver") {
  std::mt19937_64 rng(53);
  // Anisotropic data so the top eigenvalues are well separated.
  VectorXd scale(16);
  for (Index j = 0; j < 16; ++j) scale(j) = 16.0 - j;
  const MatrixXd basis = oracle::random_orthonormal(16, rng);
  std::vector<AggregateVector> train;
  MatrixXd x(100, 16);
  for (Index i = 0; i < 100; ++i) {
    x.row(i) = (basis * scale.cwiseProduct(oracle::random_matrix(16, 1, rng))).transpose();
    train.push_back(raw(x.row(i).transpose()));
  }
  const MatrixXd centered = x.rowwise() - x.colwise().mean();
  const MatrixXd cov = centered.transpose() * centered / 99.0;
  // Eigenvectors via SVD of the centred data, independent of the library's
  // eigensolver path.
  Eigen::JacobiSVD<MatrixXd> svd(centered, Eigen::ComputeThinV);
  const MatrixXd r = rn_fit(train, 4);
  for (Index k = 0; k < 4; ++k) {
    const VectorXd ref = svd.matrixV().col(k);
    const double sign = ref.dot(r.row(k).transpose()) < 0 ? -1.0 : 1.0;
    CHECK((r.row(k).transpose() - sign * ref).cwiseAbs().maxCoeff() <= 1e-8);
    Index arg;
    r.row(k).cwiseAbs().maxCoeff(&arg);
    CHECK(r(k, arg) > 0);
    // Rayleigh quotients descend.
    if (k > 0) CHECK(r.row(k) * cov * r.row(k).transpose() <= r.row(k - 1) * cov * r.row(k - 1).transpose());
  }
  CHECK((r.transpose() * r - MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff() <= 1e-9);
  for (const auto& v : train) CHECK(std::abs((r * v.xi).norm() - v.xi.norm()) <= 1e-9 * v.xi.norm());

  CHECK_THROWS_AS(rn_fit(std::span(train).first(1), 4), InvalidArgument);
  std::vector<AggregateVector> mixed{raw(VectorXd::Ones(3)), raw(VectorXd::Ones(4))};
  CHECK_THROWS_AS(rn_fit(mixed, 4), InvalidArgument);
}

TEST_CASE("rn_fit on rank-deficient data completes an orthonormal basis") {
  std::mt19937_64 rng(54);
  std::vector<AggregateVector> train;
  for (int i = 0; i < 5; ++i) train.push_back(raw(oracle::random_matrix(30, 1, rng)));
  const MatrixXd r = rn_fit(train, 1000);
  CHECK((r.transpose() * r - MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("apply_chain") {
  SUBCASE("plain l2") {
    const AggregateVector out = apply_chain(raw(Eigen::Vector2d(3, 4)), chain(1.0));
    CHECK((out.xi - Eigen::Vector2d(0.6, 0.8)).norm() <= 1e-15);
    CHECK(out.normalized());
  }
  SUBCASE("identity rotation with square root") {
    auto eye = std::make_shared<const MatrixXd>(MatrixXd::Identity(2, 2));
    const AggregateVector out = apply_chain(raw(Eigen::Vector2d(4, 0)), chain(0.5, eye));
    CHECK(out.xi == Eigen::Vector2d(1, 0));
    REQUIRE(out.state.size() == 4);
    CHECK(out.state[1].kind == TransformKind::rotated);
    CHECK(out.state[2] == Transform{TransformKind::power, 0.5});
    CHECK(out.state[3].kind == TransformKind::l2);
  }
  SUBCASE("rotation, power, truncation, l2 step by step") {
    std::mt19937_64 rng(55);
    for (int t = 0; t < 10; ++t) {
      auto r = std::make_shared<const MatrixXd>(oracle::random_orthonormal(8, rng));
      const VectorXd v = oracle::random_matrix(8, 1, rng);
      const AggregateVector out = apply_chain(raw(v), chain(0.5, r, 4));
      VectorXd step = *r * v;
      for (Index i = 0; i < 8; ++i) step(i) = std::copysign(std::sqrt(std::abs(step(i))), step(i));
      VectorXd head = step.head(4);
      head /= head.norm();
      CHECK((out.xi - head).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(std::abs(out.xi.norm() - 1.0) <= 1e-6);
      CHECK(out.state[3] == Transform{TransformKind::truncated, 4});
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(apply_chain(raw(VectorXd::Zero(3)), chain(0.5)), InvalidArgument);
    CHECK_THROWS_AS(apply_chain(raw(VectorXd::Ones(3)), chain(1.5)), InvalidArgument);
    CHECK_THROWS_AS(apply_chain(raw(VectorXd::Ones(3)), chain(0.5, nullptr, 4)), InvalidArgument);
    auto wrong = std::make_shared<const MatrixXd>(MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS(apply_chain(raw(VectorXd::Ones(3)), chain(0.5, wrong)), InvalidArgument);
    CHECK_THROWS_AS(check_orthonormal(2.0 * MatrixXd::Identity(3, 3)), InvalidArgument);
  }
}

TEST_CASE("square-rooted bow sum equals democratic aggregation after l2") {
  std::mt19937_64 rng(56);
  for (int t = 0; t < 20; ++t) {
    const Index c = oracle::uniform_int(rng, 1, 10);
    std::vector<Index> words(static_cast<std::size_t>(oracle::uniform_int(rng, 1, 40)));
    for (auto& w : words) w = oracle::uniform_int(rng, 0, c - 1);
    const EmbeddedSet e = oracle::bow_embedding(words, c);
    const AggregateVector a = apply_chain(aggregate_sum(e), chain(0.5));
    const AggregateVector b = apply_chain(aggregate_democratic(e, sinkhorn_weights(gram(e), {0.5, 10, true})), chain(1.0));
    CHECK((a.xi - b.xi).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("similarity") {
  const AggregateVector a = apply_chain(raw(Eigen::Vector2d(1, 2)), chain(1.0));
  const AggregateVector b = apply_chain(raw(Eigen::Vector2d(-2, 1)), chain(1.0));
  CHECK(similarity(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(similarity(a, b)) <= 1e-15);
  CHECK_THROWS_AS(similarity(a, raw(Eigen::Vector2d(1, 0))), InvalidArgument);
  std::mt19937_64 rng(57);
  for (int t = 0; t < 20; ++t) {
    const VectorXd x = oracle::random_matrix(9, 1, rng), y = oracle::random_matrix(9, 1, rng);
    const double s = similarity(apply_chain(raw(x), chain(1.0)), apply_chain(raw(y), chain(1.0)));
    CHECK(std::abs(s - oracle::cosine(x, y)) <= 1e-12);
  }
}
