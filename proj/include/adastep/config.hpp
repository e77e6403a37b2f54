// Experiment configuration: a single strictly-validated JSON document.
// Unknown keys are rejected everywhere so a typo cannot silently change an
// experiment.

#ifndef ADASTEP_CONFIG_HPP
#define ADASTEP_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adastep/noise.hpp"
#include "adastep/objective.hpp"
#include "adastep/stepsize.hpp"

namespace adastep {

inline constexpr const char* kVersion = "0.1.0";

struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::Quadratic;
  int dim = 1;
  // quadratic
  Vector eigenvalues;
  Vector x_star;
  std::uint64_t rotation_seed = 0;
  // logistic
  int n_samples = 0;
  std::uint64_t data_seed = 0;

  ObjectivePtr build() const;
};

struct RunSection {
  Vector x0;
  std::int64_t horizon = 1;
  std::uint64_t seed = 0;
  std::int64_t record_stride = 1;
};

enum class SweepMetric { FGapAverage, MinGradNormSq };

std::string to_string(SweepMetric metric);

struct SweepSection {
  std::vector<double> sigmas;
  std::vector<std::uint64_t> seeds;       // explicit list ...
  std::optional<int> seed_count;          // ... or 1..n (exactly one of the two)
  std::vector<std::int64_t> horizons;     // strictly increasing
  SweepMetric metric = SweepMetric::FGapAverage;
  Vector x0;

  std::vector<std::uint64_t> resolved_seeds() const;
};

struct ExperimentConfig {
  ObjectiveConfig objective;
  NoiseModel noise;
  StepsizeConfig stepsize;
  std::optional<RunSection> run;
  std::optional<SweepSection> sweep;
  std::string output_dir = ".";
  std::optional<int> workers;
};

/// Parses and validates; throws ConfigError naming the offending key.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

nlohmann::json config_to_json(const ExperimentConfig& config);

/// FNV-1a hash of the canonical serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Worker-count resolution: ADASTEP_WORKERS env var, then the config value,
/// then hardware concurrency.
int resolve_workers(const ExperimentConfig& config);

}  // namespace adastep

#endif  // ADASTEP_CONFIG_HPP
