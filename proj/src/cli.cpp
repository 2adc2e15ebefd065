#include <cstdlib>
#include <iostream>
#include <mutex>

#include <CLI11.hpp>

#include "simplicity/runner.hpp"

namespace simplicity {

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Train MLP classifiers on MNIST and probe output complexity and sensitivity",
               "simplicity_probe"};
  app.require_subcommand(1);

  std::string config_path;
  std::string data_dir;
  std::string out_dir = "results";
  std::vector<int> only;
  std::size_t parallelism = 1;
  std::uint64_t seed_offset = 0;
  std::string stream_mode;
  bool deterministic = false;

  CLI::App* run = app.add_subcommand("run", "Run the experiment suite");
  run->add_option("--config", config_path, "JSON array of experiment configs");
  run->add_option("--data-dir", data_dir,
                  "Directory with the uncompressed MNIST IDX files "
                  "(falls back to $SIMPLICITY_PROBE_DATA)");
  run->add_option("--out", out_dir, "Output directory for CSV, JSON and SVG reports")
      ->capture_default_str();
  run->add_option("--only", only, "Comma-separated experiment indices")->delimiter(',');
  run->add_option("--parallelism", parallelism, "Experiments run concurrently")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run->add_option("--seed-offset", seed_offset, "Added to every experiment seed");
  run->add_option("--stream-mode", stream_mode, "Output stream for complexity: labels|probs")
      ->check(CLI::IsMember({"labels", "probs"}));
  run->add_flag("--deterministic-output", deterministic, "Zero wall_seconds in reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::cout << app.help();
      return 0;
    }
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  SuiteResult result;
  try {
    std::vector<ExperimentConfig> configs =
        config_path.empty() ? default_experiments() : load_configs(config_path);
    if (!only.empty()) {
      std::vector<ExperimentConfig> picked;
      for (int index : only) {
        auto it = std::find_if(configs.begin(), configs.end(),
                               [&](const auto& c) { return c.index == index; });
        if (it == configs.end()) {
          throw ConfigError("--only: no experiment with index " + std::to_string(index));
        }
        picked.push_back(*it);
      }
      configs = std::move(picked);
    }
    for (auto& c : configs) {
      c.seed += seed_offset;
      if (!stream_mode.empty()) c.stream_mode = parse_stream_mode(stream_mode);
    }
    validate(configs);

    if (data_dir.empty()) {
      if (const char* env = std::getenv("SIMPLICITY_PROBE_DATA")) data_dir = env;
    }
    if (data_dir.empty()) {
      throw ConfigError("no data directory: pass --data-dir or set SIMPLICITY_PROBE_DATA");
    }

    std::mutex log_mutex;
    SuiteOptions options;
    options.parallelism = parallelism;
    options.deterministic_output = deterministic;
    options.out_dir = out_dir;
    options.on_epoch = [&](const MetricsRecord& r) {
      std::lock_guard lock(log_mutex);
      std::cerr << "[index " << r.index << "] epoch " << r.epoch
                << " loss=" << format_real(r.mean_train_loss)
                << " test_acc=" << format_real(r.test_accuracy) << "\n";
    };
    result = run_suite(configs, DataPaths::in_directory(data_dir), options);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  std::cout << results_csv(result.rows());
  for (const auto& o : result.outcomes) {
    if (!o.ok()) std::cerr << "experiment " << o.row.index << " failed: " << *o.error << "\n";
  }
  std::cerr << "reports written to " << out_dir << "\n";
  return result.all_ok() ? 0 : 1;
}

}  // namespace simplicity
