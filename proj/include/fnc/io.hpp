#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fnc/calibration.hpp"
#include "fnc/experiment.hpp"
#include "fnc/two_stage.hpp"

namespace fnc {

// Malformed input file; line is 1-based.
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& message, std::size_t line)
      : std::runtime_error(message + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Plain comma-separated rows, no quoting; blank lines skipped.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

// Statistics input: rows of `id,value` or bare `value`, with an optional
// header naming the value column `p` or `z` (that fixes the scale). Without
// a header the scale comes from the override, or is inferred: everything in
// (0, 1] reads as p-values, anything else as z-scores.
StatisticVector read_statistics_csv(const std::string& path,
                                    std::optional<Scale> scale_override,
                                    Sidedness sidedness);

// Null ensemble: one row per set, m columns of p-values; optional header
// `set_id,p_1,...,p_m` and optional leading id column, both auto-detected.
NullEnsemble read_ensemble_csv(const std::string& path);
std::string ensemble_csv(const NullEnsemble& ensemble);

// Writes content to path via a temp file plus rename, so concurrent runs
// never observe a partial file.
void atomic_write_file(const std::string& path, const std::string& content);

// FNV-1a 64-bit digest of the file bytes, as hex.
std::string file_digest_hex(const std::string& path);

nlohmann::json to_json(const BoundingSequences& bounds);
BoundingSequences bounding_sequences_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CovarianceModel& model);
CovarianceModel covariance_model_from_json(const nlohmann::json& j);

// Compact model grammar for the command line:
//   identity | ar:<lambda> | block:<k>:<r> | factor:<tau>[:<h_seed>] |
//   randblocks:<n>:<min>:<max>:<r>[:<seed>]
CovarianceModel parse_model_spec(const std::string& spec, std::size_t m);

nlohmann::json to_json(const MethodSpec& spec);
MethodSpec method_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TwoStageConfig& config);
TwoStageConfig two_stage_config_from_json(const nlohmann::json& j);

// Summary CSV: one row per method with means, SDs and Monte Carlo standard
// errors.
std::string replication_summary_csv(const ReplicationSummary& summary);
// Full provenance: config echo plus per-replication records.
nlohmann::json replication_summary_json(const ExperimentConfig& config,
                                        const ReplicationSummary& summary);

std::string two_stage_summary_csv(const TwoStageResult& result);
nlohmann::json two_stage_detail_json(const TwoStageConfig& config,
                                     const TwoStageResult& result);
// One stage-2 p-value per row across replications (histogram fodder).
std::string two_stage_histogram_csv(const TwoStageResult& result);

// Written next to every command's output; rerunning with the recorded seed
// and inputs reproduces the outputs bit for bit.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  bool seed_from_entropy = false;
  std::string version;
  std::map<std::string, std::string> input_digests;
  double wall_seconds = 0.0;
};
nlohmann::json to_json(const RunManifest& manifest);

}  // namespace fnc
