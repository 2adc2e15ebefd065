#pragma once

#include <json.hpp>

#include "simplicity/runner.hpp"

namespace simplicity::detail {

nlohmann::ordered_json config_to_json(const ExperimentConfig& c);

}  // namespace simplicity::detail
