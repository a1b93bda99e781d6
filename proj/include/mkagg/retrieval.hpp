#ifndef MKAGG_RETRIEVAL_HPP
#define MKAGG_RETRIEVAL_HPP

#include "mkagg/io.hpp"
#include "mkagg/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace mkagg {

using io::GroundTruth;
using io::QueryTruth;

struct IndexedVector {
  std::string id;
  AggregateVector vector;
};

struct Ranked {
  std::string id;
  double score = 0.0;

  friend bool operator==(const Ranked&, const Ranked&) = default;
};

using Ranking = std::vector<Ranked>;

/// Index entries by decreasing similarity to the query; equal scores are
/// ordered by ascending id.
Ranking rank(const AggregateVector& query, std::span<const IndexedVector> index);

struct MapOptions {
  /// Drop the query's own id from its ranking and from its relevant set
  /// (Holidays-style protocol).
  bool exclude_self = false;
};

struct MapReport {
  double map = 0.0;
  std::map<std::string, double> average_precision;
  /// Ground-truth ids that never appear in the corresponding ranking, and
  /// ground-truth queries without a ranking.
  std::vector<std::string> warnings;
};

/// Average precision of one ranking: junk ids are deleted first, then AP is
/// the mean over relevant items of the precision at their rank (0 for
/// relevant items that are never retrieved).
double average_precision(const Ranking& ranking, const QueryTruth& truth);

/// mAP over every ranked query. Relevant ids absent from a query's ranking
/// are dropped with a warning. Throws InvalidArgument for a query left with
/// no relevant item.
MapReport evaluate_map(const std::map<std::string, Ranking>& rankings, const GroundTruth& truth,
                       const MapOptions& options = {});

inline double mean_average_precision(const std::map<std::string, Ranking>& rankings, const GroundTruth& truth,
                                     const MapOptions& options = {}) {
  return evaluate_map(rankings, truth, options).map;
}

// ---------------------------------------------------------------------------
// Synthetic bursty data

/// Images are grouped into objects. Every image of an object carries the
/// object's `n_distinct` distinctive descriptors plus a burst of
/// `burst_size` near-duplicates of one of `n_burst_modes` modes shared by
/// the whole collection, so that bursts are uninformative about relevance.
struct SyntheticSpec {
  Index n_images = 20;
  Index burst_size = 30;
  Index n_distinct = 3;
  Index d = 16;
  double noise_sigma = 0.05;
  std::uint64_t seed = 7;
  Index images_per_object = 4;
  Index n_burst_modes = 3;

  void validate() const;
};

struct SyntheticDataset {
  std::vector<std::string> ids;
  std::vector<DescriptorSet> images;
  std::vector<Index> object_of;
  std::vector<Index> burst_mode_of;
  /// Each image is a query; its relevant items are the other images of the
  /// same object.
  GroundTruth truth;
};

SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

// ---------------------------------------------------------------------------
// Weight export

struct WeightTable {
  VectorXd weight;
  VectorXd contribution;        // αᵢ·[Kα]ᵢ
  std::optional<MatrixXd> positions;  // n×2
};

WeightTable export_weights(const DescriptorSet& set, const KernelMatrix& k, const WeightVector& weights,
                           const std::optional<MatrixXd>& positions = std::nullopt);

/// TSV with header `idx weight contribution [x y]`.
void write_weight_table(std::ostream& out, const WeightTable& table);

}  // namespace mkagg

#endif  // MKAGG_RETRIEVAL_HPP
