#include <fstream>
#include <set>
#include <sstream>

#include "config_json.hpp"
#include "simplicity/runner.hpp"

namespace simplicity {
namespace detail {

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["index"] = c.index;
  j["activation"] = to_string(c.activation);
  if (c.activation.tag == Activation::kLeakyReLU) j["leaky_slope"] = c.activation.slope;
  j["hidden"] = c.hidden;
  j["lr"] = c.lr;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["sensitivity_epsilon"] = c.sensitivity_epsilon;
  j["sensitivity_samples"] = c.sensitivity_samples;
  j["stream_mode"] = to_string(c.stream_mode);
  j["sensitivity_output"] =
      c.sensitivity_output == SensitivityOutput::kLogits ? "logits" : "probabilities";
  return j;
}

}  // namespace detail

namespace {

const std::set<std::string> kKnownKeys = {
    "index",      "activation", "leaky_slope",         "hidden",
    "lr",         "epochs",     "batch_size",          "seed",
    "sensitivity_epsilon",      "sensitivity_samples", "stream_mode",
    "sensitivity_output"};

template <typename T>
T field(const nlohmann::json& obj, const char* key, const T& fallback, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + "field '" + key + "': " + e.what());
  }
}

ExperimentConfig config_from_json(const nlohmann::json& obj, std::size_t position) {
  const std::string where = "config entry " + std::to_string(position) + ": ";
  if (!obj.is_object()) throw ConfigError(where + "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!kKnownKeys.contains(key)) throw ConfigError(where + "unknown field '" + key + "'");
  }
  if (!obj.contains("index")) throw ConfigError(where + "missing required field 'index'");
  const int index = field<int>(obj, "index", 0, where);
  if (index < 1 || index > 7) throw ConfigError(where + "index must lie in 1..7");

  // Unspecified fields come from the matching default experiment.
  ExperimentConfig c = default_experiments()[static_cast<std::size_t>(index - 1)];
  try {
    if (obj.contains("activation") || obj.contains("leaky_slope")) {
      const double slope = field<double>(obj, "leaky_slope", c.activation.slope, where);
      c.activation = parse_activation(
          field<std::string>(obj, "activation", to_string(c.activation), where), slope);
    }
    c.hidden = field<std::vector<std::size_t>>(obj, "hidden", c.hidden, where);
    c.lr = field<double>(obj, "lr", c.lr, where);
    c.epochs = field<std::size_t>(obj, "epochs", c.epochs, where);
    c.batch_size = field<std::size_t>(obj, "batch_size", c.batch_size, where);
    c.seed = field<std::uint64_t>(obj, "seed", c.seed, where);
    c.sensitivity_epsilon = field<double>(obj, "sensitivity_epsilon", c.sensitivity_epsilon, where);
    c.sensitivity_samples = field<std::size_t>(obj, "sensitivity_samples", c.sensitivity_samples,
                                               where);
    c.stream_mode =
        parse_stream_mode(field<std::string>(obj, "stream_mode", to_string(c.stream_mode), where));
    const auto output = field<std::string>(obj, "sensitivity_output", "logits", where);
    if (output == "logits") {
      c.sensitivity_output = SensitivityOutput::kLogits;
    } else if (output == "probabilities") {
      c.sensitivity_output = SensitivityOutput::kProbabilities;
    } else {
      throw ConfigError(where + "sensitivity_output must be logits|probabilities");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + e.what());
  }
  validate(c);
  return c;
}

}  // namespace

std::vector<ExperimentConfig> parse_configs(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ConfigError("config file must hold a JSON array of experiments");
  std::vector<ExperimentConfig> out;
  for (std::size_t i = 0; i < doc.size(); ++i) out.push_back(config_from_json(doc[i], i));
  validate(out);
  return out;
}

std::vector<ExperimentConfig> load_configs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_configs(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace simplicity
