#include "mkagg/retrieval.hpp"

#include "mkagg/aggregate.hpp"
#include "mkagg/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace mkagg {

Ranking rank(const AggregateVector& query, std::span<const IndexedVector> index) {
  Ranking out;
  out.reserve(index.size());
  for (const auto& entry : index) out.push_back({entry.id, similarity(query, entry.vector)});
  std::sort(out.begin(), out.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return out;
}

double average_precision(const Ranking& ranking, const QueryTruth& truth) {
  if (truth.relevant.empty()) throw InvalidArgument("average_precision: query has no relevant item");
  double sum = 0.0;
  Index position = 0;
  Index hits = 0;
  for (const auto& r : ranking) {
    if (truth.junk.count(r.id)) continue;
    ++position;
    if (truth.relevant.count(r.id)) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(position);
    }
  }
  return sum / static_cast<double>(truth.relevant.size());
}

MapReport evaluate_map(const std::map<std::string, Ranking>& rankings, const GroundTruth& truth,
                       const MapOptions& options) {
  MapReport report;
  for (const auto& [qid, _] : truth)
    if (!rankings.count(qid)) report.warnings.push_back("query '" + qid + "' has ground truth but no ranking");
  if (rankings.empty()) throw InvalidArgument("mAP: no queries to evaluate");

  double total = 0.0;
  for (const auto& [qid, ranking] : rankings) {
    auto it = truth.find(qid);
    if (it == truth.end()) throw InvalidArgument("mAP: query '" + qid + "' has no relevant item");

    Ranking effective;
    effective.reserve(ranking.size());
    std::set<std::string> present;
    for (const auto& r : ranking) {
      if (options.exclude_self && r.id == qid) continue;
      effective.push_back(r);
      present.insert(r.id);
    }

    QueryTruth q = it->second;
    if (options.exclude_self) q.relevant.erase(qid);
    for (auto rel = q.relevant.begin(); rel != q.relevant.end();) {
      if (present.count(*rel)) {
        ++rel;
        continue;
      }
      report.warnings.push_back("query '" + qid + "': relevant id '" + *rel + "' is not in the index");
      rel = q.relevant.erase(rel);
    }
    if (q.relevant.empty())
      throw InvalidArgument("mAP: query '" + qid + "' has no relevant item" +
                            (options.exclude_self ? " after excluding itself" : ""));

    const double ap = average_precision(effective, q);
    report.average_precision[qid] = ap;
    total += ap;
  }
  report.map = total / static_cast<double>(rankings.size());
  return report;
}

// ---------------------------------------------------------------------------

void SyntheticSpec::validate() const {
  if (n_images < 1 || burst_size < 1 || n_distinct < 1 || d < 1 || images_per_object < 1 || n_burst_modes < 1)
    throw InvalidArgument("synthetic: all counts must be >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw InvalidArgument("synthetic: noise_sigma must be finite and >= 0");
}

namespace {

// Box-Muller over raw 64-bit draws; std::normal_distribution output is
// implementation-defined.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do u1 = uniform(); while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t index(std::uint64_t bound) { return rng_() % bound; }

 private:
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Gaussian g(spec.seed);
  const Index n_objects = (spec.n_images + spec.images_per_object - 1) / spec.images_per_object;

  MatrixXd modes(spec.n_burst_modes, spec.d);
  for (Index i = 0; i < modes.size(); ++i) modes.data()[i] = g();
  std::vector<MatrixXd> distinct(static_cast<std::size_t>(n_objects));
  for (auto& m : distinct) {
    m.resize(spec.n_distinct, spec.d);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = g();
  }

  SyntheticDataset out;
  const int width = static_cast<int>(std::to_string(spec.n_images - 1).size());
  for (Index img = 0; img < spec.n_images; ++img) {
    const Index object = img / spec.images_per_object;
    const auto mode = static_cast<Index>(g.index(static_cast<std::uint64_t>(spec.n_burst_modes)));
    RowMatrixXf data(spec.burst_size + spec.n_distinct, spec.d);
    // Row-major draw order keeps the byte stream independent of layout.
    for (Index r = 0; r < spec.burst_size; ++r)
      for (Index c = 0; c < spec.d; ++c)
        data(r, c) = static_cast<float>(modes(mode, c) + spec.noise_sigma * g());
    const auto& dist = distinct[static_cast<std::size_t>(object)];
    for (Index r = 0; r < spec.n_distinct; ++r)
      for (Index c = 0; c < spec.d; ++c)
        data(spec.burst_size + r, c) = static_cast<float>(dist(r, c) + spec.noise_sigma * g());

    std::ostringstream id;
    id << "img" << std::setw(width) << std::setfill('0') << img;
    out.ids.push_back(id.str());
    out.images.emplace_back(std::move(data));
    out.object_of.push_back(object);
    out.burst_mode_of.push_back(mode);
  }
  for (Index a = 0; a < spec.n_images; ++a) {
    auto& q = out.truth[out.ids[static_cast<std::size_t>(a)]];
    for (Index b = 0; b < spec.n_images; ++b)
      if (a != b && out.object_of[static_cast<std::size_t>(a)] == out.object_of[static_cast<std::size_t>(b)])
        q.relevant.insert(out.ids[static_cast<std::size_t>(b)]);
  }
  return out;
}

// ---------------------------------------------------------------------------

WeightTable export_weights(const DescriptorSet& set, const KernelMatrix& k, const WeightVector& weights,
                           const std::optional<MatrixXd>& positions) {
  if (weights.size() != set.size() || k.size() != set.size())
    throw InvalidArgument("export_weights: set has " + std::to_string(set.size()) + " descriptors, weights " +
                          std::to_string(weights.size()) + ", kernel " + std::to_string(k.size()));
  if (positions && (positions->rows() != set.size() || positions->cols() != 2))
    throw InvalidArgument("export_weights: positions must be n×2");
  return {weights.alpha, contributions(k, weights.alpha), positions};
}

void write_weight_table(std::ostream& out, const WeightTable& table) {
  out << "idx\tweight\tcontribution";
  if (table.positions) out << "\tx\ty";
  out << '\n';
  const auto old_precision = out.precision(17);
  for (Index i = 0; i < table.weight.size(); ++i) {
    out << i << '\t' << table.weight(i) << '\t' << table.contribution(i);
    if (table.positions) out << '\t' << (*table.positions)(i, 0) << '\t' << (*table.positions)(i, 1);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace mkagg
