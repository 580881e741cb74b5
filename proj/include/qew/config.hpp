#ifndef QEW_CONFIG_HPP
#define QEW_CONFIG_HPP

// JSON experiment configuration: one document per run, one block per command.
// Every numeric constraint of the underlying modules is validated here with a
// field-level message, so the CLI can fail fast with exit code 2.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qew/bound.hpp"
#include "qew/disorder.hpp"
#include "qew/dynamics.hpp"

namespace qew::config {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimulateConfig {
  dynamics::SimConfig sim;            // sim.field_seed is overridden per entry of seeds
  std::vector<std::uint64_t> seeds;
  std::optional<double> lambda;       // enables the reference lower bound in the summary
};

struct BoundConfig {
  double lambda = 1.0;
  std::optional<double> beta;         // direct value ...
  std::optional<disorder::ObstacleDistribution> distribution;  // ... or closed form
  int d = 1;
  std::vector<double> F_grid;
};

struct EnumerateConfig {
  int k = 1;
  int d = 1;
  long long A = 1;
  long long F = 1;
  std::uint64_t seed = 1;
  disorder::ObstacleDistribution distribution = disorder::ObstacleDistribution::zero();
  double lambda = 1.0;
  double mu = 2.0;
};

struct VerifyInstance {
  int k = 1;
  int d = 1;
  long long A = 1;
  long long F = 1;
  double lambda = 1.0;
  double mu = 2.0;
  std::uint64_t seed = 1;
  disorder::ObstacleDistribution distribution = disorder::ObstacleDistribution::zero();
};

struct VerifyConfig {
  std::uint64_t seed = 1;
  std::size_t resamples = 400;
  bool corrupt_divergence = false;    // fault hook: the divergence check must then fail
  std::vector<VerifyInstance> instances;  // defaulted when absent from the JSON
};

struct SweepConfig {
  SimulateConfig base;                // base.sim.F is replaced by each grid value
  std::vector<double> F_grid;
  double lambda = 1.0;
};

// Parsers take the whole config document and read their own block.  All throw
// ConfigError with a "block.field: reason" message.
disorder::ObstacleDistribution parse_distribution(const nlohmann::json& j,
                                                  const std::string& where);
SimulateConfig parse_simulate(const nlohmann::json& root);
BoundConfig parse_bound(const nlohmann::json& root);
EnumerateConfig parse_enumerate(const nlohmann::json& root);
VerifyConfig parse_verify(const nlohmann::json& root);
SweepConfig parse_sweep(const nlohmann::json& root);

// Echo helpers so emitted summaries are self-describing.
nlohmann::json distribution_to_json(const disorder::ObstacleDistribution& dist);
nlohmann::json simulate_to_json(const SimulateConfig& c);

}  // namespace qew::config

#endif
