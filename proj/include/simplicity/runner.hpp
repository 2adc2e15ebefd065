#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "simplicity/mnist_io.hpp"
#include "simplicity/network.hpp"
#include "simplicity/probes.hpp"

namespace simplicity {

/// Bad configuration or command line; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  int index = 1;
  ActivationKind activation;
  std::vector<std::size_t> hidden;
  double lr = 1e-3;
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;
  double sensitivity_epsilon = 1e-5;
  std::size_t sensitivity_samples = 1000;
  StreamMode stream_mode = StreamMode::kLabels;
  SensitivityOutput sensitivity_output = SensitivityOutput::kLogits;
};

/// The seven studied configurations, seed = index.
std::vector<ExperimentConfig> default_experiments();

/// Throws ConfigError on the first violated field constraint.
void validate(const ExperimentConfig& c);
void validate(std::span<const ExperimentConfig> configs);

struct MetricsRecord {
  int index = 0;
  std::size_t epoch = 0;
  double mean_train_loss = 0.0;
  double test_accuracy = 0.0;
};

struct ResultRow {
  int index = 0;
  double final_test_accuracy = 0.0;
  std::size_t lz76_phrases = 0;
  std::size_t lzss_bytes = 0;
  double sensitivity_mean_l2 = 0.0;
  double wall_seconds = 0.0;
};

/// Everything one experiment produced, including the trained network and
/// the raw probe outputs.
struct ExperimentOutcome {
  ExperimentConfig config;
  ResultRow row;
  std::vector<MetricsRecord> metrics;
  OutputStream stream;
  SensitivityReport sensitivity;
  Mlp model;
  double elapsed_seconds = 0.0;  // measured even when reports zero wall_seconds
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

using EpochCallback = std::function<void(const MetricsRecord&)>;

/// Trains, evaluates and probes one configuration. A non-finite batch loss
/// is recorded and that batch's update is skipped; training goes on.
ExperimentOutcome run_experiment(const ExperimentConfig& c, const Dataset& train,
                                 const Dataset& test, const EpochCallback& on_epoch = {});

struct DataPaths {
  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  std::filesystem::path test_images;
  std::filesystem::path test_labels;

  static DataPaths in_directory(const std::filesystem::path& dir);
  std::vector<std::filesystem::path> all() const;
};

struct SuiteOptions {
  std::size_t parallelism = 1;
  bool deterministic_output = false;
  std::optional<std::filesystem::path> out_dir;
  EpochCallback on_epoch;  // called from worker threads when parallelism > 1
};

struct SuiteResult {
  std::vector<ExperimentOutcome> outcomes;  // config order

  std::vector<ResultRow> rows() const;
  std::vector<MetricsRecord> records() const;
  bool all_ok() const;
};

/// Runs every experiment (up to `parallelism` at once); results are in
/// config order and independent of the parallelism level. Writes reports
/// when an output directory is set.
SuiteResult run_suite(std::span<const ExperimentConfig> configs, const Dataset& train,
                      const Dataset& test, const SuiteOptions& options);
SuiteResult run_suite(std::span<const ExperimentConfig> configs, const DataPaths& paths,
                      const SuiteOptions& options);

// Reports --------------------------------------------------------------------

std::string format_real(double v);  // 9 significant digits
std::string metrics_csv(std::span<const MetricsRecord> records);
std::string results_csv(std::span<const ResultRow> rows);
std::string results_json(std::span<const ExperimentOutcome> outcomes);
std::string loss_curves_svg(std::span<const MetricsRecord> records);
std::string accuracy_svg(std::span<const ResultRow> rows);
std::string complexity_sensitivity_svg(std::span<const ResultRow> rows);

/// Writes metrics.csv, results.csv, results.json and the three SVG charts.
void write_reports(std::span<const ExperimentOutcome> outcomes,
                   const std::filesystem::path& out_dir);

// Configuration files and CLI ------------------------------------------------

std::vector<ExperimentConfig> parse_configs(const std::string& json_text);
std::vector<ExperimentConfig> load_configs(const std::filesystem::path& path);

/// `run [--config FILE] [--data-dir DIR] [--out DIR] [--only I[,I...]]
/// [--parallelism N] [--seed-offset K] [--stream-mode labels|probs]
/// [--deterministic-output]`. Returns 0 on success, 1 if any experiment
/// failed, 2 on usage or configuration errors.
int cli_main(int argc, const char* const* argv);

}  // namespace simplicity
