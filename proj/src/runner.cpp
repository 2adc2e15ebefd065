#include "simplicity/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

#include "simplicity/optimizer.hpp"

namespace simplicity {
namespace {

ExperimentConfig make_config(int index, ActivationKind act, std::vector<std::size_t> hidden,
                             double lr) {
  ExperimentConfig c;
  c.index = index;
  c.activation = act;
  c.hidden = std::move(hidden);
  c.lr = lr;
  c.seed = static_cast<std::uint64_t>(index);
  return c;
}

// Independent generator streams for initialisation, shuffling and probing.
struct ExperimentStreams {
  Prng init;
  Prng shuffle;
  Prng probe;

  // Members initialise in declaration order, each taking the next root draw.
  explicit ExperimentStreams(Prng root)
      : init(root.next()), shuffle(root.next()), probe(root.next()) {}
};

}  // namespace

std::vector<ExperimentConfig> default_experiments() {
  return {
      make_config(1, ActivationKind::relu(), {64, 64}, 1e-3),
      make_config(2, ActivationKind::tanh(), {64, 64}, 1e-3),
      make_config(3, ActivationKind::leaky_relu(0.01), {64, 64, 128}, 1e-3),
      make_config(4, ActivationKind::sigmoid(), {64, 64}, 1e-3),
      make_config(5, ActivationKind::relu(), {128, 128}, 1e-3),
      make_config(6, ActivationKind::relu(), {64, 64}, 0.1),
      make_config(7, ActivationKind::relu(), {64, 64, 128}, 1e-3),
  };
}

void validate(const ExperimentConfig& c) {
  const std::string where = "experiment " + std::to_string(c.index) + ": ";
  if (c.index < 1 || c.index > 7) throw ConfigError(where + "index must lie in 1..7");
  if (c.epochs < 1) throw ConfigError(where + "epochs must be >= 1");
  if (!(c.lr > 0.0)) throw ConfigError(where + "lr must be positive");
  if (c.batch_size < 1) throw ConfigError(where + "batch_size must be >= 1");
  if (!(c.sensitivity_epsilon > 0.0)) {
    throw ConfigError(where + "sensitivity_epsilon must be positive");
  }
  if (c.sensitivity_samples < 1) throw ConfigError(where + "sensitivity_samples must be >= 1");
  for (std::size_t w : c.hidden) {
    if (w < 1) throw ConfigError(where + "hidden widths must be >= 1");
  }
  if (c.activation.tag == Activation::kLeakyReLU &&
      !(c.activation.slope > 0.0 && c.activation.slope < 1.0)) {
    throw ConfigError(where + "leaky_relu slope must lie in (0, 1)");
  }
}

void validate(std::span<const ExperimentConfig> configs) {
  if (configs.empty()) throw ConfigError("no experiments");
  std::set<int> seen;
  for (const auto& c : configs) {
    validate(c);
    if (!seen.insert(c.index).second) {
      throw ConfigError("experiment index " + std::to_string(c.index) + " appears twice");
    }
  }
}

ExperimentOutcome run_experiment(const ExperimentConfig& c, const Dataset& train,
                                 const Dataset& test, const EpochCallback& on_epoch) {
  validate(c);
  if (train.size() == 0 || test.size() == 0) {
    throw ConfigError("experiment " + std::to_string(c.index) + ": empty dataset");
  }
  if (train.images.cols() != kImagePixels || test.images.cols() != kImagePixels) {
    throw ConfigError("experiment " + std::to_string(c.index) + ": images must have 784 columns");
  }
  if (c.batch_size > train.size()) {
    throw ConfigError("experiment " + std::to_string(c.index) + ": batch_size " +
                      std::to_string(c.batch_size) + " exceeds " +
                      std::to_string(train.size()) + " training samples");
  }
  if (c.sensitivity_samples > test.size()) {
    throw ConfigError("experiment " + std::to_string(c.index) + ": sensitivity_samples " +
                      std::to_string(c.sensitivity_samples) + " exceeds " +
                      std::to_string(test.size()) + " test samples");
  }

  const auto started = std::chrono::steady_clock::now();
  ExperimentStreams streams{Prng(c.seed)};
  ExperimentOutcome out;
  out.config = c;
  out.model = build_mlp(c.hidden, c.activation, streams.init);
  AdamState adam = adam_init(out.model, c.lr);

  for (std::size_t epoch = 1; epoch <= c.epochs; ++epoch) {
    const BatchPlan plan = plan_batches(train.size(), c.batch_size, streams.shuffle);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < plan.batch_count(); ++b) {
      const Batch batch = gather_batch(train, plan.batch(b));
      const ForwardTrace trace = forward_trace(out.model, batch.images);
      const LossResult loss = softmax_cross_entropy(trace.logits(), batch.labels);
      loss_sum += loss.loss;
      if (!std::isfinite(loss.loss)) continue;
      adam_step(out.model, backward(out.model, trace, loss.dlogits), adam);
    }
    MetricsRecord rec{c.index, epoch, loss_sum / static_cast<double>(plan.batch_count()),
                      accuracy(out.model, test)};
    out.metrics.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }

  out.stream = output_stream(out.model, test, c.stream_mode);
  const ComplexityReport cx = complexity(out.stream.bytes);
  out.sensitivity = sensitivity(out.model, test, c.sensitivity_epsilon, c.sensitivity_samples,
                                streams.probe, c.sensitivity_output);

  out.row.index = c.index;
  out.row.final_test_accuracy = out.metrics.back().test_accuracy;
  out.row.lz76_phrases = cx.lz76_phrases;
  out.row.lzss_bytes = cx.lzss_bytes;
  out.row.sensitivity_mean_l2 = out.sensitivity.mean_l2;
  out.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  out.row.wall_seconds = out.elapsed_seconds;
  return out;
}

DataPaths DataPaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte",
          dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte"};
}

std::vector<std::filesystem::path> DataPaths::all() const {
  return {train_images, train_labels, test_images, test_labels};
}

std::vector<ResultRow> SuiteResult::rows() const {
  std::vector<ResultRow> out;
  for (const auto& o : outcomes) {
    if (o.ok()) out.push_back(o.row);
  }
  return out;
}

std::vector<MetricsRecord> SuiteResult::records() const {
  std::vector<MetricsRecord> out;
  for (const auto& o : outcomes) out.insert(out.end(), o.metrics.begin(), o.metrics.end());
  return out;
}

bool SuiteResult::all_ok() const {
  return std::all_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.ok(); });
}

SuiteResult run_suite(std::span<const ExperimentConfig> configs, const Dataset& train,
                      const Dataset& test, const SuiteOptions& options) {
  validate(configs);
  SuiteResult result;
  result.outcomes.resize(configs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      ExperimentOutcome& slot = result.outcomes[i];
      try {
        slot = run_experiment(configs[i], train, test, options.on_epoch);
      } catch (const std::exception& e) {
        slot = ExperimentOutcome{};
        slot.config = configs[i];
        slot.row.index = configs[i].index;
        slot.error = e.what();
      }
      if (options.deterministic_output) slot.row.wall_seconds = 0.0;
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(options.parallelism, 1, configs.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  if (options.out_dir) {
    if (result.rows().empty()) {
      // Nothing to chart; keep the per-experiment errors on disk.
      std::filesystem::create_directories(*options.out_dir);
      std::ofstream(*options.out_dir / "results.json") << results_json(result.outcomes);
    } else {
      write_reports(result.outcomes, *options.out_dir);
    }
  }
  return result;
}

SuiteResult run_suite(std::span<const ExperimentConfig> configs, const DataPaths& paths,
                      const SuiteOptions& options) {
  validate(configs);
  std::string missing;
  for (const auto& p : paths.all()) {
    if (!std::filesystem::is_regular_file(p)) missing += "\n  " + p.string();
  }
  if (!missing.empty()) throw ConfigError("missing MNIST data files:" + missing);
  const Dataset train = load_dataset(paths.train_images, paths.train_labels);
  const Dataset test = load_dataset(paths.test_images, paths.test_labels);
  return run_suite(configs, train, test, options);
}

}  // namespace simplicity
