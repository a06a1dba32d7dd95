#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gamelab/serialize.hpp"
#include "gamelab/stats.hpp"

namespace gamelab {

inline constexpr const char* kToolVersion = "0.1.0";

// Stable identifier for a game inside datasets and reports.
std::string game_id(const GameSpec& s);

std::string file_sha256(const std::string& path);

// Snapshot of everything that determines a run. The hash covers the tool
// version, seed, config, and input content hashes; created_at is
// informational and excluded so replays hash identically.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  Json config = Json::object();
  std::map<std::string, std::string> input_hashes;
  std::string created_at;

  std::string hash() const;
};

Json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const Json& j);

struct FilterReport {
  int out_of_range = 0;
  int not_whole = 0;
  std::vector<std::string> errors;  // malformed rows, with line numbers
};

struct HumanDataset {
  std::string source;
  std::map<std::string, std::vector<int>> responses;  // game id -> actions
  FilterReport filters;

  int total_responses() const;
};

struct IngestOptions {
  bool range_filter = true;
  bool whole_number_filter = true;
};

// CSV with header game_id,subject_id,action. Rows failing an enabled filter
// are dropped and counted; malformed rows are reported with line numbers;
// duplicate (game_id, subject_id) pairs are a hard failure.
HumanDataset ingest_human_csv(
    const std::string& path,
    const std::map<std::string, std::vector<int>>& action_sets,
    const IngestOptions& filters = {});

Json dataset_to_json(const HumanDataset& d);
HumanDataset dataset_from_json(const Json& j);

// Per-game model distributions, as stored in a model file.
struct ModelDistributions {
  std::string name;
  std::map<std::string, std::vector<int>> actions;      // game id -> action set
  std::map<std::string, std::vector<double>> probs;     // game id -> distribution
};

Json model_to_json(const ModelDistributions& m);
ModelDistributions model_from_json(const Json& j);

// One model pair evaluated over one response dataset.
struct ComparisonTask {
  std::string label;
  HumanDataset humans;
  ModelDistributions model_a;
  ModelDistributions model_b;
  // Games without a resolved equilibrium, excluded (and counted) when set.
  bool exclude_unresolved = false;
  std::set<std::string> unresolved_games;
  // Optional game metadata enabling the subgroup regression.
  std::map<std::string, GameSpec> specs;
};

struct EvaluationConfig {
  std::vector<double> epsilons = {0.05, 0.1, 0.2, 0.3};
  int bootstrap_draws = 10000;
  int permutation_iterations = 100000;
  std::uint64_t seed = 0;
  bool coverage = true;
};

struct RegressionTable {
  std::vector<std::string> terms;
  OlsResult fit;
};

// Design: intercept plus categorical dummies for the requested grouping
// columns. Reference categories: the plain points rule and the
// coordinate-low bonus rule.
RegressionTable subgroup_regression(
    const std::vector<GameComparison>& comparisons,
    const std::map<std::string, GameSpec>& specs,
    const std::vector<std::string>& by);

struct ComparisonBlock {
  std::string label;
  std::string model_a, model_b;
  double epsilon = 0;
  int games_used = 0;
  int games_excluded = 0;
  ComparisonReport report;
  std::vector<GameComparison> comparisons;
  std::optional<RegressionTable> regression;
};

struct CoverageBlock {
  std::string label;
  std::string model;
  CoverageSummary summary;
  int games_used = 0;
  int games_excluded = 0;
};

struct EvaluationBundle {
  std::vector<ComparisonBlock> blocks;     // task-major, epsilon-minor
  std::vector<CoverageBlock> coverage;     // unsmoothed, per task and model
  std::string manifest_hash;
};

EvaluationBundle run_evaluation(const std::vector<ComparisonTask>& tasks,
                                const EvaluationConfig& config,
                                const std::string& manifest_hash);

Json bundle_to_json(const EvaluationBundle& b);
std::string bundle_to_markdown(const EvaluationBundle& b);
std::string bundle_to_csv(const EvaluationBundle& b);

// Reads a manifest file, loads every referenced input, runs the evaluation,
// and writes report.json / report.md / report.csv into out_dir. Relative
// input paths resolve against the manifest's directory. Returns the files
// written. Byte-identical across repeated runs of the same manifest.
struct RunResult {
  std::string manifest_hash;
  std::vector<std::string> outputs;
};

RunResult run_from_manifest(const std::string& manifest_path,
                            const std::string& out_dir);

}  // namespace gamelab
