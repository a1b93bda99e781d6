#include "mkagg/aggregate.hpp"
#include "mkagg/democratic.hpp"
#include "mkagg/kernel.hpp"
#include "mkagg/normalize.hpp"
#include "mkagg/retrieval.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cstring>
#include <sstream>

using namespace mkagg;

namespace {

AggregateVector unit(const VectorXd& v) {
  AggregateVector a;
  a.xi = v.normalized();
  a.state.push_back({TransformKind::l2, 0});
  return a;
}

Ranking ranking_of(std::initializer_list<const char*> ids) {
  Ranking r;
  double s = 1.0;
  for (const char* id : ids) r.push_back({id, s -= 0.01});
  return r;
}

QueryTruth truth_of(std::set<std::string> rel, std::set<std::string> junk = {}) {
  return QueryTruth{std::move(rel), std::move(junk)};
}

}  // namespace

TEST_CASE("rank") {
  const std::vector<IndexedVector> idx{{"q", unit(Eigen::Vector2d(1, 0))}, {"o", unit(Eigen::Vector2d(0, 1))}};
  const Ranking r = rank(unit(Eigen::Vector2d(1, 0)), idx);
  REQUIRE(r.size() == 2);
  CHECK(r[0].id == "q");
  CHECK(r[0].score == doctest::Approx(1.0));
  CHECK(rank(unit(Eigen::Vector2d(1, 0)), {}).empty());

  // Equal scores fall back to ascending id.
  const std::vector<IndexedVector> tied{{"b", unit(Eigen::Vector2d(1, 1))}, {"a", unit(Eigen::Vector2d(1, -1))}};
  const Ranking t = rank(unit(Eigen::Vector2d(1, 0)), tied);
  CHECK(t[0].id == "a");

  AggregateVector raw;
  raw.xi = Eigen::Vector2d(1, 0);
  CHECK_THROWS_AS(rank(raw, idx), InvalidArgument);
  CHECK_THROWS_AS(rank(unit(Eigen::Vector3d(1, 0, 0)), idx), InvalidArgument);

  std::mt19937_64 rng(61);
  std::vector<IndexedVector> many;
  for (int i = 0; i < 100; ++i) many.push_back({"v" + std::to_string(1000 + i), unit(oracle::random_matrix(12, 1, rng))});
  const VectorXd q = oracle::random_matrix(12, 1, rng);
  const Ranking got = rank(unit(q), many);
  std::vector<std::pair<double, std::string>> scan;
  for (const auto& v : many) scan.emplace_back(-oracle::cosine(q, v.vector.xi), v.id);
  std::sort(scan.begin(), scan.end());
  for (std::size_t i = 0; i < scan.size(); ++i) CHECK(got[i].id == scan[i].second);
}

TEST_CASE("average precision hand cases") {
  CHECK(average_precision(ranking_of({"a", "x", "b", "y"}), truth_of({"a", "b"})) ==
        doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-15));
  CHECK(average_precision(ranking_of({"a", "b", "x"}), truth_of({"a", "b"})) == 1.0);
  CHECK(average_precision(ranking_of({"j", "a", "x"}), truth_of({"a"}, {"j"})) == 1.0);
  CHECK(average_precision(ranking_of({"x", "a"}), truth_of({"a"})) == 0.5);
  CHECK(average_precision(ranking_of({"x", "a"}), truth_of({"a", "missing"})) == 0.25);
  CHECK_THROWS_AS(average_precision(ranking_of({"x"}), truth_of({})), InvalidArgument);
}

TEST_CASE("mean average precision") {
  GroundTruth gt;
  gt["q1"] = truth_of({"a"});
  gt["q2"] = truth_of({"b", "gone"}, {"a"});
  std::map<std::string, Ranking> rankings;
  rankings["q1"] = ranking_of({"x", "a"});
  rankings["q2"] = ranking_of({"a", "b"});
  const MapReport rep = evaluate_map(rankings, gt);
  CHECK(rep.average_precision.at("q1") == 0.5);
  CHECK(rep.average_precision.at("q2") == 1.0);
  CHECK(rep.map == 0.75);
  REQUIRE(rep.warnings.size() == 1);
  CHECK(rep.warnings[0].find("gone") != std::string::npos);

  SUBCASE("exclude self") {
    GroundTruth g;
    g["q"] = truth_of({"q", "a"});
    std::map<std::string, Ranking> r;
    r["q"] = ranking_of({"q", "x", "a"});
    CHECK(evaluate_map(r, g, {true}).map == 0.5);
    CHECK(evaluate_map(r, g, {false}).map == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
    g["q"] = truth_of({"q"});
    CHECK_THROWS_AS(evaluate_map(r, g, {true}), InvalidArgument);
  }
  SUBCASE("query without ground truth") {
    std::map<std::string, Ranking> r;
    r["nobody"] = ranking_of({"a"});
    CHECK_THROWS_AS(evaluate_map(r, gt), InvalidArgument);
  }
  SUBCASE("perfect rankings score one and every mAP stays in [0,1]") {
    std::mt19937_64 rng(62);
    for (int t = 0; t < 30; ++t) {
      std::vector<std::string> ids;
      for (int i = 0; i < 10; ++i) ids.push_back("i" + std::to_string(i));
      std::shuffle(ids.begin(), ids.end(), rng);
      std::set<std::string> rel(ids.begin(), ids.begin() + oracle::uniform_int(rng, 1, 5));
      Ranking perfect;
      double s = 10.0;
      for (const auto& id : rel) perfect.push_back({id, s -= 1});
      for (const auto& id : ids)
        if (!rel.count(id)) perfect.push_back({id, s -= 1});
      CHECK(average_precision(perfect, truth_of(rel)) == 1.0);
      std::shuffle(perfect.begin(), perfect.end(), rng);
      const double ap = average_precision(perfect, truth_of(rel));
      CHECK(ap > 0.0);
      CHECK(ap <= 1.0);
    }
  }
}

TEST_CASE("synthetic generator") {
  SyntheticSpec spec;
  const SyntheticDataset a = generate_synthetic(spec);
  const SyntheticDataset b = generate_synthetic(spec);
  REQUIRE(a.images.size() == 20);
  for (std::size_t i = 0; i < a.images.size(); ++i) {
    CHECK(a.images[i].size() == 33);
    CHECK(a.images[i].dim() == 16);
    CHECK(std::memcmp(a.images[i].data().data(), b.images[i].data().data(), sizeof(float) * 33 * 16) == 0);
  }
  CHECK(a.ids[0] == "img00");
  CHECK(a.truth.at("img00").relevant == std::set<std::string>{"img01", "img02", "img03"});

  spec.seed = 8;
  CHECK(generate_synthetic(spec).images[0].data() != a.images[0].data());

  spec.noise_sigma = 0.0;
  const SyntheticDataset clean = generate_synthetic(spec);
  for (const auto& img : clean.images)
    for (Index r = 1; r < spec.burst_size; ++r) CHECK(img.data().row(r) == img.data().row(0));
  // Images of one object share their distinctive rows exactly, and are
  // mutually relevant.
  CHECK(clean.images[0].data().bottomRows(3) == clean.images[1].data().bottomRows(3));
  CHECK(clean.truth.at("img01").relevant.count("img00") == 1);
  CHECK(clean.truth.at("img04").relevant.count("img00") == 0);

  spec.burst_size = 0;
  CHECK_THROWS_AS(generate_synthetic(spec), InvalidArgument);
}

TEST_CASE("weight export") {
  std::mt19937_64 rng(63);
  const EmbeddedSet e = oracle::random_dense_embedding(9, 4, rng);
  const DescriptorSet set(9, 4);
  const KernelMatrix k = clip_negatives(gram(e));
  const MatrixXd kd = k.to_dense();

  const WeightTable uni = export_weights(set, k, uniform_weights(9));
  CHECK((uni.contribution - kd.rowwise().sum()).cwiseAbs().maxCoeff() <= 1e-12);

  const WeightVector w = sinkhorn_weights(k);
  const WeightTable t = export_weights(set, k, w);
  CHECK((t.contribution - w.alpha.asDiagonal() * kd * w.alpha).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(t.weight == w.alpha);

  const EmbeddedSet bow = oracle::bow_embedding({0, 0, 0, 0, 1}, 2);
  const KernelMatrix kb = gram(bow);
  const WeightTable tb = export_weights(DescriptorSet(5, 1), kb, sinkhorn_weights(kb, {0.5, 10, true}));
  CHECK((tb.contribution.array() - 1.0).abs().maxCoeff() <= 1e-12);

  MatrixXd pos(9, 2);
  pos.setZero();
  pos(3, 0) = 1.5;
  std::ostringstream out;
  write_weight_table(out, export_weights(set, k, w, pos));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "idx\tweight\tcontribution\tx\ty");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 9);

  CHECK_THROWS_AS(export_weights(DescriptorSet(8, 4), k, w), InvalidArgument);
  CHECK_THROWS_AS(export_weights(set, k, w, MatrixXd::Zero(9, 3)), InvalidArgument);
}
