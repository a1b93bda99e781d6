#ifndef MKAGG_TOOLS_CLI_HPP
#define MKAGG_TOOLS_CLI_HPP

#include "mkagg/types.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace mkagg::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kDataFormat = 3, kNumerical = 4 };

/// Runs one command line (args[0] is the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------
// Two-dimensional pooling demo: a tight cluster of unit vectors pooled with
// one distinctive vector, for two different distinctive vectors A and B.

struct Demo2dMethod {
  std::string method;
  Eigen::Vector2d aggregate_a;  // l2-normalized
  Eigen::Vector2d aggregate_b;
  double similarity = 0.0;      // between the two normalized aggregates
};

struct Demo2dResult {
  MatrixXd cluster;             // 2×m
  Eigen::Vector2d distinct_a;
  Eigen::Vector2d distinct_b;
  std::vector<Demo2dMethod> methods;  // sum, democratic, gmp
};

Demo2dResult demo2d(double lambda = 1.0);
void write_demo2d(std::ostream& out, const Demo2dResult& r);

// ---------------------------------------------------------------------------
// Timing harness: dense vs block-diagonal kernel paths on residual
// embeddings of random descriptors.

struct BenchConfig {
  std::vector<Index> sizes{500, 1000, 2000};
  std::vector<Index> clusters{16};
  Index dim = 32;
  std::uint64_t seed = 1;
  double gamma = 0.3;
  int iters = 10;
  double lambda = 1.0;
};

struct BenchTiming {
  double wall = 0.0;
  double cpu = 0.0;
};

struct BenchRow {
  Index n = 0;
  Index c = 0;
  BenchTiming embed, sum;
  BenchTiming gram_dense, gram_block;
  BenchTiming democratic_dense, democratic_block;
  BenchTiming gmp_dense, gmp_block;
  /// Max abs difference between block and dense outputs (kernel entries,
  /// democratic weights, GMP weights).
  double max_diff = 0.0;

  double dense_total() const { return gram_dense.wall + democratic_dense.wall + gmp_dense.wall; }
  double block_total() const { return gram_block.wall + democratic_block.wall + gmp_block.wall; }
};

std::vector<BenchRow> bench(const BenchConfig& cfg);
void write_bench(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace mkagg::cli

#endif  // MKAGG_TOOLS_CLI_HPP
