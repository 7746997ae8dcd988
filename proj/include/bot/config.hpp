#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bot/dqn.hpp"
#include "bot/models.hpp"

namespace bot {

struct AppConfig {
    ScenarioConfig scenario;
    Hyperparams dqn;
};

// Defaults overlaid with the optional JSON file. Sections "scenario" and
// "dqn"; keys are the struct field names. Unknown sections or keys are
// rejected.
AppConfig load_config(const std::string& path);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Every command echoes the fully resolved configuration it runs with.
void print_effective_config(std::ostream& os, const std::string& command,
                            const AppConfig& cfg, const KeyValues& extras);

}  // namespace bot
