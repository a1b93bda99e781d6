#include "mkagg/embed.hpp"

#include <limits>
#include <random>

namespace mkagg {

namespace {

// Portable uniform double in [0, 1); std distributions are
// implementation-defined and would break cross-platform determinism.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Assignment {
  std::vector<Index> label;
  VectorXd dist2;
};

Assignment assign_all(const MatrixXd& points, const MatrixXd& centroids) {
  const Index n = points.rows();
  Assignment a{std::vector<Index>(static_cast<std::size_t>(n)), VectorXd(n)};
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    double best_d2 = (centroids.row(0) - points.row(i)).squaredNorm();
    for (Index k = 1; k < centroids.rows(); ++k) {
      const double d2 = (centroids.row(k) - points.row(i)).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = k;
      }
    }
    a.label[static_cast<std::size_t>(i)] = best;
    a.dist2(i) = best_d2;
  }
  return a;
}

MatrixXd kmeans_pp_seed(const MatrixXd& points, Index clusters, std::mt19937_64& rng) {
  const Index n = points.rows();
  MatrixXd centroids(clusters, points.cols());
  const auto first = static_cast<Index>(rng() % static_cast<std::uint64_t>(n));
  centroids.row(0) = points.row(first);
  VectorXd d2 = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (Index k = 1; k < clusters; ++k) {
    const double total = d2.sum();
    if (!(total > 0.0))
      throw InvalidArgument("train_codebook: fewer distinct training points than clusters");
    const double target = uniform01(rng) * total;
    double acc = 0.0;
    Index pick = -1;
    for (Index i = 0; i < n; ++i) {
      if (d2(i) <= 0.0) continue;
      acc += d2(i);
      pick = i;
      if (acc > target) break;
    }
    centroids.row(k) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - centroids.row(k)).rowwise().squaredNorm());
  }
  return centroids;
}

}  // namespace

Index embedding_dim(const EmbeddingConfig& cfg, Index clusters, Index descriptor_dim) {
  return cfg.kind == EmbeddingKind::bow ? clusters : clusters * descriptor_dim;
}

Codebook train_codebook(const DescriptorSet& training, Index clusters, std::uint64_t seed, int max_iters) {
  if (clusters < 1) throw InvalidArgument("train_codebook: cluster count must be >= 1");
  if (training.size() < clusters)
    throw InvalidArgument("train_codebook: need n >= c training descriptors (n=" +
                          std::to_string(training.size()) + ", c=" + std::to_string(clusters) + ")");
  if (max_iters < 1) throw InvalidArgument("train_codebook: max_iters must be >= 1");

  const MatrixXd points = training.data().cast<double>();
  std::mt19937_64 rng(seed);
  MatrixXd centroids = kmeans_pp_seed(points, clusters, rng);

  for (int it = 0; it < max_iters; ++it) {
    const Assignment a = assign_all(points, centroids);
    MatrixXd sums = MatrixXd::Zero(clusters, points.cols());
    VectorXd counts = VectorXd::Zero(clusters);
    for (Index i = 0; i < points.rows(); ++i) {
      const Index k = a.label[static_cast<std::size_t>(i)];
      sums.row(k) += points.row(i);
      counts(k) += 1.0;
    }
    MatrixXd next(clusters, points.cols());
    VectorXd taken_dist = a.dist2;
    for (Index k = 0; k < clusters; ++k) {
      if (counts(k) > 0.0) {
        next.row(k) = sums.row(k) / counts(k);
        continue;
      }
      Index far = 0;
      taken_dist.maxCoeff(&far);
      next.row(k) = points.row(far);
      taken_dist(far) = -1.0;
    }
    if (next == centroids) break;
    centroids = std::move(next);
  }
  return Codebook(std::move(centroids));
}

double inertia(const DescriptorSet& set, const Codebook& codebook) {
  if (set.dim() != codebook.dim()) throw InvalidArgument("inertia: dimension mismatch");
  return assign_all(set.data().cast<double>(), codebook.centroids()).dist2.sum();
}

EmbeddedSet embed_set(const DescriptorSet& set, const Codebook& codebook, const EmbeddingConfig& cfg) {
  if (set.empty()) throw InvalidArgument("embed_set: empty descriptor set");
  if (set.dim() != codebook.dim())
    throw InvalidArgument("embed_set: descriptor dimension " + std::to_string(set.dim()) +
                          " does not match codebook dimension " + std::to_string(codebook.dim()));
  const Index n = set.size();
  const Index c = codebook.size();
  const Index d = set.dim();

  EmbeddedSet out;
  out.phi = MatrixXd::Zero(embedding_dim(cfg, c, d), n);
  out.assignment.emplace(static_cast<std::size_t>(n));
  out.block_layout.emplace(static_cast<std::size_t>(c));

  if (cfg.kind == EmbeddingKind::bow) {
    for (Index k = 0; k < c; ++k) (*out.block_layout)[static_cast<std::size_t>(k)] = {k, 1};
    for (Index i = 0; i < n; ++i) {
      const Index k = assign_hard(set.data().row(i), codebook);
      (*out.assignment)[static_cast<std::size_t>(i)] = k;
      out.phi(k, i) = 1.0;
    }
    out.unit_norm_columns = true;
    return out;
  }

  for (Index k = 0; k < c; ++k) (*out.block_layout)[static_cast<std::size_t>(k)] = {k * d, d};
  for (Index i = 0; i < n; ++i) {
    const VectorXd x = set.row(i);
    const Index k = assign_hard(x, codebook);
    (*out.assignment)[static_cast<std::size_t>(i)] = k;
    VectorXd residual = x - codebook.centroids().row(k).transpose();
    if (cfg.normalize_residuals) {
      const double nrm = residual.norm();
      if (nrm > 0.0) residual /= nrm;
    }
    out.phi.block(k * d, i, d, 1) = residual;
  }
  out.unit_norm_columns = cfg.normalize_residuals;
  return out;
}

}  // namespace mkagg
