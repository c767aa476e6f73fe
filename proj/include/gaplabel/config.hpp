#pragma once

// Experiment configuration: a JSON document validated strictly against
// schema/experiment.schema.json (unknown keys are rejected).

#include "gaplabel/jacobi.hpp"
#include "gaplabel/schwartzman.hpp"
#include "gaplabel/systems.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaplabel {

inline constexpr int config_schema_version = 1;

/// Malformed, unreadable or schema-invalid configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  std::size_t n = 1000;
  Boundary boundary = Boundary::Auto;
  double eigen_tol = 1e-10;
  std::optional<double> min_width;
  std::optional<double> label_tol;
  std::int64_t coeff_bound = 10;
  std::vector<std::uint64_t> seeds{1};
};

struct ScanConfig {
  std::vector<std::size_t> n_schedule{1000, 2000, 4000};
  std::size_t samples = 3;
  std::uint64_t seed = 1;
  std::optional<double> min_width;
};

struct EstimateConfig {
  CharacterVector character;
  double beta = 0.0;
  double t_max = 1000.0;
  double dt = 0.01;
  std::uint64_t seed = 1;
};

struct IdsConfig {
  std::size_t points = 401;
  std::optional<double> lower;
  std::optional<double> upper;
};

struct OutputConfig {
  std::string dir = "out";
  std::vector<std::string> formats{"csv", "json"};
};

struct ExperimentConfig {
  std::string name;
  DynamicalSystem system;
  CoefficientSpec coefficients;
  SolverConfig solver;
  std::optional<ScanConfig> scan;
  std::optional<EstimateConfig> estimate;
  IdsConfig ids;
  OutputConfig outputs;
};

/// Throws ConfigError with a JSON-pointer style location on any violation.
auto parse_config(const nlohmann::json &document) -> ExperimentConfig;
auto load_config(const std::string &path) -> ExperimentConfig;

} // namespace gaplabel
