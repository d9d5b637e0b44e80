#pragma once

#include <filesystem>

#include "json.hpp"

#include "fgl/engine/config.h"

namespace fgl {

// Builds a config from JSON. Omitted keys take the scenario defaults; Scaffold
// defaults to plain SGD unless train.optimizer is given. Unknown keys and
// wrongly typed values throw kConfig naming the JSON path. The result is
// validated.
ExperimentConfig ParseConfig(const nlohmann::json& doc);

// Throws kIo when unreadable and kParse on malformed JSON.
ExperimentConfig ParseConfigFile(const std::filesystem::path& path);

// Every field written explicitly, so ParseConfig(SerializeConfig(c)) == c.
nlohmann::json SerializeConfig(const ExperimentConfig& cfg);

}  // namespace fgl
