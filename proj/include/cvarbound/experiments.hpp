#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cvarbound/distributions.hpp"

namespace cvarbound::experiments {

enum class ExperimentKind { SurrogateConvergence, Timing, Coincidence, Coverage };

const char* to_string(ExperimentKind kind) noexcept;
ExperimentKind parse_experiment(const std::string& name);  // throws ValidationError

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Coverage;
  double alpha = 0.2;
  double delta = 0.05;
  std::vector<std::size_t> n_grid;
  int repetitions = 1;
  std::uint64_t master_seed = 0;
  std::vector<dist::DistributionSpec> distributions;
  std::string output_path;

  int bins = 10000;                         // discrepancy grid on the target's support
  std::optional<double> b_truncation;       // upper support for unbounded kinds
  int workers = 0;                          // 0: hardware concurrency
  std::optional<double> eps_model_override; // surrogate experiments only
  int timing_repeats = 30;
  int true_cvar_nodes = 1000000;

  void validate() const;
};

// Protocol defaults for each experiment (alpha 0.2, delta 0.05, the grid and
// distributions used by each study).
ExperimentConfig default_config(ExperimentKind kind);

// Overlays the fields present in `j` onto `base`.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct ResultRow {
  std::string experiment;
  std::string distribution;
  std::size_t n = 0;
  int repetition = 0;
  std::optional<std::uint64_t> seed;
  std::string bound_kind;
  std::optional<double> lower;
  std::optional<double> upper;
  std::optional<double> estimate;
  std::optional<double> true_value;
  std::optional<double> baseline;
  std::optional<double> gap;
  std::optional<bool> violated_lower;
  std::optional<bool> violated_upper;
  std::optional<std::int64_t> nanoseconds;
  std::optional<double> ratio;
  std::string note;
};

// Seed of cell (distribution index, n, repetition); row seeds are derived
// from it with derive_seed(cell_seed, k).
std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t dist_index, std::size_t n, int repetition);

std::vector<ResultRow> run_surrogate_convergence(const ExperimentConfig& config);
std::vector<ResultRow> run_timing(const ExperimentConfig& config);
std::vector<ResultRow> run_coincidence(const ExperimentConfig& config);
std::vector<ResultRow> run_coverage(const ExperimentConfig& config);
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

struct CoverageSummary {
  std::string distribution;
  std::size_t n = 0;
  std::size_t runs = 0;
  double lower_violation_rate = 0.0;
  double upper_violation_rate = 0.0;
  double lower_half_width = 0.0;  // 95% normal-approximation binomial half-width
  double upper_half_width = 0.0;
};

std::vector<CoverageSummary> summarize_coverage(const std::vector<ResultRow>& rows);

// Per-experiment aggregates written into the manifest.
nlohmann::json summarize(const ExperimentConfig& config, const std::vector<ResultRow>& rows);

const std::vector<std::string>& csv_columns();
std::string to_csv(const std::vector<ResultRow>& rows);

// Writes the CSV to config.output_path, plus "<stem>.manifest.json" (config,
// git hash, schema version, summary) and "<stem>.meta.json" (timestamps).
void write_outputs(const ExperimentConfig& config, const std::vector<ResultRow>& rows);

inline constexpr const char* kSchemaVersion = "1";
const char* git_hash() noexcept;

}  // namespace cvarbound::experiments
