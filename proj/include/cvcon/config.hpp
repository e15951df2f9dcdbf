#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cvcon/harness.hpp"

namespace cvcon {

/// Bad config file: unknown key, wrong type, unreadable file. `line` is 0
/// when no position is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& file, std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

/// Every accepted key with its default, in documentation order.
const std::vector<ConfigKey>& config_keys();

/// Parses a flat TOML (or, by .json extension, JSON) file. Unknown keys and
/// type mismatches raise ConfigError before anything is computed.
ExperimentSpec load_spec(const std::string& path);
ExperimentSpec parse_spec_toml(const std::string& text, const std::string& source = "<string>");
ExperimentSpec parse_spec_json(const std::string& text, const std::string& source = "<string>");

}  // namespace cvcon
