#include "cli.hpp"

#include "mkagg/aggregate.hpp"
#include "mkagg/io.hpp"
#include "mkagg/kernel.hpp"
#include "mkagg/normalize.hpp"
#include "mkagg/pipeline.hpp"
#include "mkagg/retrieval.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <thread>

namespace mkagg::cli {

namespace fs = std::filesystem;

namespace {

/// Runs body(i) for i in [0, count) on up to `threads` workers. Results must
/// be written to per-index slots so output order never depends on
/// scheduling.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

unsigned default_threads() {
  if (const char* env = std::getenv("MKAGG_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return 1;
}

std::ofstream open_text(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

// --- train-codebook ---------------------------------------------------------

struct TrainCodebookArgs {
  std::string input, output;
  Index clusters = 0;
  std::uint64_t seed = 0;
  int max_iters = 100;
};

void train_codebook_cmd(const TrainCodebookArgs& a, std::ostream& out) {
  const DescriptorSet training = io::read_descriptors(a.input);
  if (a.clusters > training.size())
    throw InvalidArgument("--clusters (" + std::to_string(a.clusters) + ") must not exceed the number of training descriptors (" +
                          std::to_string(training.size()) + ")");
  const Codebook cb = train_codebook(training, a.clusters, a.seed, a.max_iters);
  io::write_codebook(a.output, cb);
  out << "codebook\t" << cb.size() << "x" << cb.dim() << "\tinertia\t" << inertia(training, cb) << '\n';
}

// --- aggregate ----------------------------------------------------------------

struct AggregateArgs {
  std::string descriptors, codebook, output, dump_weights, positions;
  std::string embedding = "bow";
  std::string method = "sum";
  double gamma = 0.3;
  int iters = 10;
  double lambda = 1.0;
  double threshold = -1.0;
  bool no_clip = false;
  bool raw_residuals = false;
  bool dense = false;
};

void aggregate_cmd(const AggregateArgs& a, std::ostream& out) {
  const DescriptorSet set = io::read_descriptors(a.descriptors);
  const Codebook cb = io::read_codebook(a.codebook);
  if (set.dim() != cb.dim())
    throw FormatError("descriptor dimension " + std::to_string(set.dim()) + " does not match codebook dimension " +
                      std::to_string(cb.dim()));
  if (set.empty()) throw FormatError(a.descriptors + ": descriptor set is empty");

  EmbeddingConfig ecfg;
  ecfg.kind = a.embedding == "residual" ? EmbeddingKind::residual : EmbeddingKind::bow;
  ecfg.normalize_residuals = !a.raw_residuals;

  AggregationConfig cfg;
  cfg.method = parse_method(a.method);
  cfg.democratic = DemocraticConfig{a.gamma, a.iters, !a.no_clip};
  cfg.democratic.validate();
  cfg.gmp.lambda = a.lambda;
  cfg.gmp.validate();
  if (a.threshold >= 0.0) cfg.threshold = a.threshold;
  cfg.force_dense = a.dense;

  const EmbeddedSet embedded = embed_set(set, cb, ecfg);
  const AggregationResult result = aggregate(embedded, cfg);
  io::write_vector(a.output, result.aggregate);

  if (!a.dump_weights.empty()) {
    std::optional<MatrixXd> positions;
    if (!a.positions.empty()) {
      const DescriptorSet pos = io::read_descriptors(a.positions);
      if (pos.size() != set.size() || pos.dim() != 2)
        throw FormatError(a.positions + ": expected an n×2 position matrix");
      positions = pos.data().cast<double>();
    }
    const KernelMatrix k = result.kernel ? *result.kernel : weighting_kernel(embedded, cfg);
    auto tsv = open_text(a.dump_weights);
    write_weight_table(tsv, export_weights(set, k, result.weights, positions));
  }
  out << "aggregate\t" << to_string(cfg.method) << "\tD=" << result.aggregate.dim() << "\tn=" << set.size() << '\n';
}

// --- normalize ----------------------------------------------------------------

struct NormalizeArgs {
  std::string input, output, rn;
  double alpha = 0.5;
  Index truncate = 0;
};

void normalize_cmd(const NormalizeArgs& a, std::ostream& out) {
  const AggregateVector v = io::read_vector(a.input);
  NormalizeConfig cfg;
  cfg.alpha_exponent = a.alpha;
  if (!a.rn.empty()) {
    auto r = std::make_shared<MatrixXd>(io::read_rotation(a.rn));
    try {
      check_orthonormal(*r, 1e-5);
    } catch (const InvalidArgument& e) {
      throw FormatError(a.rn + ": " + e.what());
    }
    if (r->rows() != v.dim())
      throw FormatError("rotation is " + std::to_string(r->rows()) + "x" + std::to_string(r->cols()) +
                        " but the vector has D=" + std::to_string(v.dim()));
    cfg.rotation = std::move(r);
  }
  if (a.truncate > 0) cfg.truncate_to = a.truncate;
  const AggregateVector result = apply_chain(v, cfg);
  io::write_vector(a.output, result);
  out << "normalize\tD=" << result.dim() << "\tstate";
  for (const auto& t : result.state) out << ' ' << to_string(t);
  out << '\n';
}

// --- rn-fit -------------------------------------------------------------------

struct RnFitArgs {
  std::string vectors, output;
  Index max_eigvecs = 1000;
};

void rn_fit_cmd(const RnFitArgs& a, std::ostream& out) {
  const auto manifest = io::read_manifest(a.vectors);
  std::vector<AggregateVector> training;
  training.reserve(manifest.size());
  for (const auto& e : manifest) training.push_back(io::read_vector(e.path));
  if (training.size() < 2) throw FormatError(a.vectors + ": need at least 2 training vectors");
  for (const auto& t : training)
    if (t.dim() != training.front().dim()) throw FormatError(a.vectors + ": vectors differ in dimension");
  const MatrixXd r = rn_fit(training, a.max_eigvecs);
  io::write_rotation(a.output, r);
  out << "rotation\t" << r.rows() << "x" << r.cols() << '\n';
}

// --- eval ---------------------------------------------------------------------

struct EvalArgs {
  std::string index, queries, truth;
  bool exclude_self = false;
  unsigned threads = 1;
};

std::vector<IndexedVector> load_vectors(const std::string& manifest_path) {
  std::vector<IndexedVector> out;
  for (const auto& e : io::read_manifest(manifest_path)) out.push_back({e.id, io::read_vector(e.path, true)});
  return out;
}

void eval_cmd(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const auto index = load_vectors(a.index);
  const auto queries = load_vectors(a.queries);
  const GroundTruth truth = io::read_ground_truth(a.truth);
  if (queries.empty()) throw FormatError(a.queries + ": no queries");
  for (const auto& v : index)
    if (v.vector.dim() != queries.front().vector.dim()) throw FormatError("index and query dimensions differ");

  std::vector<Ranking> ranked(queries.size());
  parallel_for(queries.size(), a.threads, [&](std::size_t i) { ranked[i] = rank(queries[i].vector, index); });
  std::map<std::string, Ranking> rankings;
  for (std::size_t i = 0; i < queries.size(); ++i) rankings.emplace(queries[i].id, std::move(ranked[i]));

  const MapReport report = evaluate_map(rankings, truth, MapOptions{a.exclude_self});
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  out << std::setprecision(6) << std::fixed;
  for (const auto& [qid, ap] : report.average_precision) out << "ap\t" << qid << '\t' << ap << '\n';
  out << "map\t" << report.map << '\n';
}

// --- synth --------------------------------------------------------------------

struct SynthArgs {
  SyntheticSpec spec;
  std::string output_dir;
};

void synth_cmd(const SynthArgs& a, std::ostream& out) {
  const SyntheticDataset ds = generate_synthetic(a.spec);
  fs::create_directories(a.output_dir);
  std::vector<io::ManifestEntry> manifest;
  for (std::size_t i = 0; i < ds.images.size(); ++i) {
    const fs::path file = ds.ids[i] + ".mkds";
    io::write_descriptors(fs::path(a.output_dir) / file, ds.images[i]);
    manifest.push_back({ds.ids[i], file});
  }
  io::write_manifest(fs::path(a.output_dir) / "descriptors.tsv", manifest);
  auto truth = open_text(fs::path(a.output_dir) / "truth.tsv");
  io::write_ground_truth(truth, ds.truth);
  out << "synth\t" << ds.images.size() << " images\t" << a.output_dir << '\n';
}

// --- bench / demo2d -------------------------------------------------------------

void bench_cmd(const BenchConfig& cfg, std::ostream& out) {
  const auto rows = bench(cfg);
  write_bench(out, rows);
  for (const auto& r : rows)
    if (!(r.max_diff <= 1e-6))
      throw NumericalError("bench: block and dense paths differ by " + std::to_string(r.max_diff) + " at n=" +
                           std::to_string(r.n) + ", c=" + std::to_string(r.c));
}

void demo2d_cmd(const std::string& output, double lambda, std::ostream& out) {
  const Demo2dResult r = demo2d(lambda);
  if (output.empty() || output == "-") {
    write_demo2d(out, r);
  } else {
    auto tsv = open_text(output);
    write_demo2d(tsv, r);
  }
  for (const auto& m : r.methods) out << "similarity\t" << m.method << '\t' << m.similarity << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Descriptor aggregation with democratic and generalized max pooling"};
  app.require_subcommand(1);
  unsigned threads = default_threads();
  app.add_option("--threads", threads, "Worker threads (default: MKAGG_THREADS or 1)")->check(CLI::Range(1u, 1024u));

  std::function<void()> action;

  TrainCodebookArgs tc;
  auto* tc_cmd = app.add_subcommand("train-codebook", "k-means visual vocabulary from an MKDS file");
  tc_cmd->add_option("--input", tc.input, "Training descriptors (MKDS)")->required()->check(CLI::ExistingFile);
  tc_cmd->add_option("--clusters", tc.clusters, "Number of centroids")->required()->check(CLI::PositiveNumber);
  tc_cmd->add_option("--seed", tc.seed, "k-means++ seed");
  tc_cmd->add_option("--max-iters", tc.max_iters, "Lloyd iterations")->check(CLI::PositiveNumber);
  tc_cmd->add_option("--output", tc.output, "Output codebook (MKCB)")->required();
  tc_cmd->callback([&] { action = [&] { train_codebook_cmd(tc, out); }; });

  AggregateArgs ag;
  auto* ag_cmd = app.add_subcommand("aggregate", "Embed and aggregate one descriptor set");
  ag_cmd->add_option("--descriptors", ag.descriptors, "Descriptor set (MKDS)")->required()->check(CLI::ExistingFile);
  ag_cmd->add_option("--codebook", ag.codebook, "Codebook (MKCB)")->required()->check(CLI::ExistingFile);
  ag_cmd->add_option("--embedding", ag.embedding, "bow | residual")->check(CLI::IsMember({"bow", "residual"}));
  ag_cmd->add_flag("--raw-residuals", ag.raw_residuals, "Do not l2-normalize residual embeddings");
  ag_cmd->add_option("--method", ag.method, "sum | democratic | gmp")->check(CLI::IsMember({"sum", "democratic", "gmp"}));
  ag_cmd->add_option("--gamma", ag.gamma, "Sinkhorn damping exponent in (0, 0.5]");
  ag_cmd->add_option("--iters", ag.iters, "Sinkhorn iterations");
  ag_cmd->add_option("--lambda", ag.lambda, "GMP regularization");
  ag_cmd->add_flag("--no-clip", ag.no_clip, "Keep negative kernel entries for Sinkhorn");
  ag_cmd->add_option("--threshold", ag.threshold, "Zero off-diagonal kernel entries below this value");
  ag_cmd->add_flag("--dense", ag.dense, "Ignore block structure");
  ag_cmd->add_option("--output", ag.output, "Output aggregate (MKVC)")->required();
  ag_cmd->add_option("--dump-weights", ag.dump_weights, "Per-descriptor weight TSV");
  ag_cmd->add_option("--positions", ag.positions, "n×2 keypoint positions (MKDS) for the weight TSV");
  ag_cmd->callback([&] { action = [&] { aggregate_cmd(ag, out); }; });

  NormalizeArgs nm;
  auto* nm_cmd = app.add_subcommand("normalize", "Rotation, power law, truncation and l2 normalization");
  nm_cmd->add_option("--input", nm.input, "Aggregate (MKVC)")->required()->check(CLI::ExistingFile);
  nm_cmd->add_option("--alpha", nm.alpha, "Power-law exponent in [0, 1]")->check(CLI::Range(0.0, 1.0));
  nm_cmd->add_option("--rn", nm.rn, "Rotation matrix (MKRT)")->check(CLI::ExistingFile);
  nm_cmd->add_option("--truncate", nm.truncate, "Keep the first D' components")->check(CLI::PositiveNumber);
  nm_cmd->add_option("--output", nm.output, "Output vector (MKVC)")->required();
  nm_cmd->callback([&] { action = [&] { normalize_cmd(nm, out); }; });

  RnFitArgs rf;
  auto* rf_cmd = app.add_subcommand("rn-fit", "Learn the PCA rotation used before the power law");
  rf_cmd->add_option("--vectors", rf.vectors, "Manifest of training vectors")->required()->check(CLI::ExistingFile);
  rf_cmd->add_option("--max-eigvecs", rf.max_eigvecs, "Leading eigenvectors to keep")->check(CLI::NonNegativeNumber);
  rf_cmd->add_option("--output", rf.output, "Output rotation (MKRT)")->required();
  rf_cmd->callback([&] { action = [&] { rn_fit_cmd(rf, out); }; });

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "Rank an index for each query and report mAP");
  ev_cmd->add_option("--index", ev.index, "Manifest of database vectors")->required()->check(CLI::ExistingFile);
  ev_cmd->add_option("--queries", ev.queries, "Manifest of query vectors")->required()->check(CLI::ExistingFile);
  ev_cmd->add_option("--truth", ev.truth, "Ground truth TSV")->required()->check(CLI::ExistingFile);
  ev_cmd->add_flag("--exclude-self", ev.exclude_self, "Remove each query from its own ranking");
  ev_cmd->callback([&] {
    ev.threads = threads;
    action = [&] { eval_cmd(ev, out, err); };
  });

  SynthArgs sy;
  auto* sy_cmd = app.add_subcommand("synth", "Write a synthetic bursty dataset");
  sy_cmd->add_option("--output-dir", sy.output_dir, "Destination directory")->required();
  sy_cmd->add_option("--images", sy.spec.n_images)->check(CLI::PositiveNumber);
  sy_cmd->add_option("--burst", sy.spec.burst_size)->check(CLI::PositiveNumber);
  sy_cmd->add_option("--distinct", sy.spec.n_distinct)->check(CLI::PositiveNumber);
  sy_cmd->add_option("--dim", sy.spec.d)->check(CLI::PositiveNumber);
  sy_cmd->add_option("--noise", sy.spec.noise_sigma)->check(CLI::NonNegativeNumber);
  sy_cmd->add_option("--per-object", sy.spec.images_per_object)->check(CLI::PositiveNumber);
  sy_cmd->add_option("--burst-modes", sy.spec.n_burst_modes)->check(CLI::PositiveNumber);
  sy_cmd->add_option("--seed", sy.spec.seed);
  sy_cmd->callback([&] { action = [&] { synth_cmd(sy, out); }; });

  std::string demo_output;
  double demo_lambda = 1.0;
  auto* demo_cmd = app.add_subcommand("demo2d", "Two-dimensional pooling demo as TSV");
  demo_cmd->add_option("--output", demo_output, "TSV path ('-' for stdout)");
  demo_cmd->add_option("--lambda", demo_lambda, "GMP regularization")->check(CLI::NonNegativeNumber);
  demo_cmd->callback([&] { action = [&] { demo2d_cmd(demo_output, demo_lambda, out); }; });

  BenchConfig bc;
  auto* bench_sub = app.add_subcommand("bench", "Time dense vs block-diagonal aggregation");
  bench_sub->add_option("--sizes", bc.sizes, "Descriptor counts")->delimiter(',');
  bench_sub->add_option("--clusters", bc.clusters, "Codebook sizes")->delimiter(',');
  bench_sub->add_option("--dim", bc.dim, "Descriptor dimension")->check(CLI::PositiveNumber);
  bench_sub->add_option("--seed", bc.seed);
  bench_sub->callback([&] { action = [&] { bench_cmd(bc, out); }; });

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    action();
    return kOk;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kDataFormat;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataFormat;
  }
}

}  // namespace mkagg::cli
