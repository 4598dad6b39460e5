#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/core/version.hpp"

namespace forge {

/// What produced an artifact: subcommand, its arguments, config file and seed.
/// Written into every manifest and report so a run can be repeated.
struct CommandSpec {
  std::string subcommand;
  std::vector<std::string> args;
  std::string config;  // empty when no config file was used
  std::optional<std::uint64_t> seed;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["subcommand"] = subcommand;
    j["args"] = args;
    j["config"] = config.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(config);
    j["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
    return j;
  }

  static CommandSpec from_json(const nlohmann::json& j) {
    CommandSpec c;
    c.subcommand = j.value("subcommand", "");
    if (j.contains("args")) c.args = j.at("args").get<std::vector<std::string>>();
    if (j.contains("config") && j.at("config").is_string()) c.config = j.at("config").get<std::string>();
    if (j.contains("seed") && j.at("seed").is_number_unsigned()) c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  }
};

inline nlohmann::ordered_json tool_json() {
  nlohmann::ordered_json j;
  j["name"] = kToolName;
  j["version"] = kToolVersion;
  return j;
}

}  // namespace forge
