#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "apm/drl/train.hpp"
#include "apm/popa.hpp"
#include "apm/scenario.hpp"

namespace apm::harness {

enum class SweepAxis { LambdaBar, PopaBar };
enum class Method { EquilibriumDerived, EquilibriumPaperForm, Drl, Random, Greedy };

std::string_view to_string(SweepAxis axis);
std::string_view to_string(Method method);

struct ExperimentConfig {
  Scenario scenario;
  AvatarAttributeProfile profile{100000, kDefaultShapeTotal, 400, kDefaultTextureTotal, 9, 4};
  drl::TrainConfig train;
  int eval_episodes = 100;
  SweepAxis axis = SweepAxis::LambdaBar;
  std::vector<double> sweep_values{1.0, 1.25, 1.5, 1.75, 2.0};
  std::vector<Method> methods{Method::EquilibriumDerived};
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output = "sweep.csv";
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax problem; message carries the line number.
class ConfigParseError : public ConfigError {
 public:
  ConfigParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Well-formed value that breaks an invariant; message names the key.
class ConfigValidationError : public ConfigError {
 public:
  ConfigValidationError(std::string key, const std::string& what);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// `key = value` lines; `#` starts a comment; `[section]` headers are
/// accepted for readability but keys are global. Unknown keys are errors,
/// missing keys keep their defaults. Lists are comma separated.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

void validate(const ExperimentConfig& config);

/// Every key `parse_config` accepts, in documentation order.
const std::vector<std::string_view>& config_keys();

}  // namespace apm::harness
