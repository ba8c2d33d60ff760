#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace rehf::verify {

enum class Level { Fast, Full };

struct SuiteOptions {
  Level level = Level::Fast;
  /// Multiplies the tabulated multiplier used by the solver and the linear-response
  /// comparison. Values other than 1 are for fault injection.
  double m_scale = 1.0;
};

struct Check {
  std::string group;
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double threshold = 0.0;
  std::string relation;  // how observed is compared with threshold
  std::string detail;
  double seconds = 0.0;
};

struct Verdict {
  Level level = Level::Fast;
  double m_scale = 1.0;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, double>> constants;

  bool all_passed() const;
  const Check* find(const std::string& name) const;
  nlohmann::ordered_json to_json() const;
  std::string to_text() const;
};

/// Runs every property check in a fixed order; a failing check is recorded, never fatal.
Verdict run_suite(const SuiteOptions& options);

}  // namespace rehf::verify
