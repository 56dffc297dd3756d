#pragma once

// Reproducible experiment drivers behind the command-line front end. Each
// command resolves a dataset, runs the evaluation protocol and writes
// self-describing artifacts (every file embeds the resolved configuration
// and master seed).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "csol/algorithm.hpp"
#include "csol/data.hpp"
#include "csol/evaluation.hpp"

namespace csol {

enum class DataFormat { kCsv, kSparse };

struct DataSource {
  std::string path;  // empty when generating synthetically
  DataFormat format = DataFormat::kSparse;
  CsvSchema schema;
  std::optional<std::size_t> dim;
  std::optional<SyntheticSpec> synthetic;
  bool scale = false;  // min-max scaler fit on the validation prefix
};

struct ExperimentConfig {
  DataSource data;
  std::vector<Algorithm> algorithms{Algorithm::kPerceptron};
  std::optional<Task> task;  // inferred from labels when unset
  TrialConfig trial;         // algorithm field is overwritten per algorithm
  std::vector<double> grid;  // tune, or select before run/bench when non-empty
  std::string cost_file;
  std::string out_dir = ".";
};

/// Task inferred from labels: binary iff every label is ±1.
Task infer_task(const Dataset& data);

/// Loads or generates the dataset, applies scaling, resolves the task.
Dataset load_dataset(const ExperimentConfig& config, Task& task);

nlohmann::ordered_json to_json(const ExperimentConfig& config);
nlohmann::ordered_json to_json(const MetricSummary& summary);
nlohmann::ordered_json to_json(const MetricSnapshot& snap);
nlohmann::ordered_json to_json(const Hyperparams& params);
nlohmann::ordered_json summary_json(const TrialReport& report);

/// Learning curve: one row per snapshot of the trial-mean curve.
std::string curve_csv(const TrialReport& report, const nlohmann::ordered_json& config);

struct RunArtifacts {
  std::string summary_path;
  std::string curve_path;
  std::string timing_path;
};

RunArtifacts cmd_run(const ExperimentConfig& config);

struct BenchRow {
  Algorithm algorithm;
  std::optional<TrialReport> report;
  std::string error;
};

/// Writes bench.csv and bench.json; a failing algorithm is recorded and
/// the rest continue.
std::vector<BenchRow> cmd_bench(const ExperimentConfig& config);

/// Writes tune.json for the first configured algorithm.
GridResult cmd_tune(const ExperimentConfig& config);

/// Writes the synthetic dataset in sparse format plus `<out>.json` with the
/// spec and class counts.
Dataset cmd_gen(const SyntheticSpec& spec, const std::string& out_path);

/// Master seed precedence: flag, then the CSOL_SEED environment variable,
/// then 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag);

inline constexpr const char* kSeedEnvVar = "CSOL_SEED";

}  // namespace csol
