#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kpa/corpus.hpp"
#include "kpa/embedding.hpp"
#include "kpa/evalkit.hpp"
#include "kpa/kp_graph.hpp"
#include "kpa/matcher.hpp"

namespace kpa::pipeline {

namespace fs = std::filesystem;

// Matching quality of the fine-tuned transformer matcher on the shared-task
// test topics; evaluation reports print their delta to these.
inline constexpr double kReferenceStrictMap = 0.789;
inline constexpr double kReferenceRelaxedMap = 0.927;

struct DataPaths {
  fs::path arguments;
  fs::path key_points;
  std::optional<fs::path> labels;
};

struct EncoderOptions {
  std::optional<fs::path> embeddings;  // JSONL; lexical encoder when absent
  embedding::EncoderConfig lexical;
};

std::unique_ptr<embedding::Encoder> make_encoder(const EncoderOptions& opts);

/// Runs fn(i) for i in [0, n) on at most `jobs` threads (0 = hardware).
/// The first exception is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

// ---- train ---------------------------------------------------------------

struct TrainOptions {
  DataPaths data;
  EncoderOptions encoder;
  matcher::TrainConfig train;
  int folds = 5;
  std::uint64_t seed = 0;
  unsigned jobs = 0;
  fs::path out_dir;
};

struct TrainSummary {
  std::vector<fs::path> model_files;
  fs::path manifest;
  std::vector<matcher::TrainLog> logs;
  std::map<std::string, int> fold_of_topic;
};

/// Builds labeled embedding pairs (Ambiguous excluded), partitions topics
/// into folds and trains one head per fold on the other folds' topics (all
/// topics when folds == 1). Writes model_fold<i>.json, manifest.json and
/// train_log.json into out_dir.
TrainSummary run_train(const TrainOptions& opts);

struct Manifest {
  std::vector<fs::path> members;  // absolute or relative to the manifest
  std::uint64_t seed = 0;
  std::string encoder;
};

Manifest load_manifest(const fs::path& path);
matcher::Ensemble load_ensemble(const fs::path& manifest_path);

// ---- match ---------------------------------------------------------------

struct MatchOptions {
  DataPaths data;
  EncoderOptions encoder;
  std::optional<fs::path> manifest;  // identity head when absent
  fs::path out;                      // predictions JSON; a .meta.json sidecar is written next to it
};

/// Scores every same-topic same-stance (argument, key point) pair. Throws
/// DataError naming an argument that has no such key point.
matcher::ScoreTable score_all(const corpus::Dataset& d, const embedding::Encoder& encoder,
                              const matcher::Ensemble& ensemble);
matcher::ScoreTable run_match(const MatchOptions& opts);

// ---- generate ------------------------------------------------------------

enum class Generator { Graph, Aspect };

struct GenerateOptions {
  fs::path arguments;
  std::optional<fs::path> quality;   // sentence_id,quality sidecar
  std::optional<fs::path> aspects;   // arg_id,aspect
  EncoderOptions encoder;
  std::optional<fs::path> manifest;  // identity head when absent
  Generator generator = Generator::Graph;
  kp_graph::RankParams rank;
  int clusters = 15;
  double dedup_threshold = 0.65;
  std::uint64_t seed = 0;
  unsigned jobs = 0;
  std::optional<fs::path> out;
};

struct GroupOutcome {
  corpus::GroupKey group;
  std::size_t arguments = 0;
  std::size_t pool = 0;  // candidates eligible for selection
  std::size_t emitted = 0;
  std::string warning;
};

struct GenerationResult {
  std::vector<kp_graph::GeneratedKeyPoint> key_points;
  std::vector<GroupOutcome> groups;
  std::size_t failed_groups = 0;
  std::vector<std::string> metadata;  // written as CSV comment lines
};

GenerationResult generate(const corpus::Dataset& d, const GenerateOptions& opts);
GenerationResult run_generate(const GenerateOptions& opts);

// ---- evaluate ------------------------------------------------------------

struct EvaluateOptions {
  DataPaths gold;
  std::optional<fs::path> predictions;
  std::optional<fs::path> generated;
  double keep_fraction = 0.5;
  std::optional<fs::path> out;
};

nlohmann::json evaluate(const corpus::Dataset& gold, const std::optional<matcher::ScoreTable>& scores,
                        const std::optional<std::vector<kp_graph::GeneratedKeyPoint>>& generated,
                        double keep_fraction);
nlohmann::json run_evaluate(const EvaluateOptions& opts);

nlohmann::json stats_json(const corpus::StatisticsReport& r);

}  // namespace kpa::pipeline
