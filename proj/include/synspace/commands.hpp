#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "synspace/catalog.hpp"
#include "synspace/metrics.hpp"
#include "synspace/tta.hpp"

namespace synspace {

/// Every knob shared by the pipeline subcommands. A JSON config file may set
/// any of these keys; command-line flags take precedence.
struct PipelineConfig {
  std::string epsilon_mode = "fixed";  // fixed | auto | none
  double epsilon = 0.9;
  std::string metric = "local-center";
  std::size_t local_n = kDefaultNeighborhood;
  std::size_t subspace_d = 0;  // 0: min(8, |S0| - 1)
  bool renormalize_mean = false;
  double tau = 100.0;
  double rho = 0.1;
  double lr = 5e-4;
  std::size_t views = 64;
  std::uint64_t seed = 7;
  std::string lexicon;
  std::string embeddings;
  std::string catalog;
  std::string queries;
  std::string episodes;
  std::string report;
};

/// Parses a JSON config; unknown keys raise InvalidConfig. `explicit_keys`
/// receives the keys present in the document.
PipelineConfig parse_pipeline_config(const std::string& json_text, std::set<std::string>* explicit_keys = nullptr);
std::string pipeline_config_json(const PipelineConfig& config);
void validate(const PipelineConfig& config);

FilterConfig filter_config(const PipelineConfig& config);
MetricConfig metric_config(const PipelineConfig& config);
TtaConfig tta_config(const PipelineConfig& config);

/// Entry point of the `synspace` command. Returns 0 on success, 1 on usage
/// errors and 2 on data errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace synspace
