#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kpa/corpus.hpp"
#include "kpa/embedding.hpp"
#include "kpa/kp_graph.hpp"

namespace kpa::kp_aspect {

using embedding::EmbeddingVector;
using kp_graph::PairScorer;
using kp_graph::SentenceCandidate;

struct AspectPhrase {
  std::string text;
  std::string source_arg_id;
  EmbeddingVector embedding;  // empty until embed_aspects()
};

struct AspectCluster {
  int id = 0;
  EmbeddingVector centroid;
  std::vector<std::size_t> members;  // indices into the clustered points
};

/// Stopwords for the heuristic aspect fallback: function words plus common
/// argumentative verbs and modals (e.g. "should", "prevent", "cause").
const std::set<std::string, std::less<>>& aspect_stopwords();

/// Maximal runs of non-stopword tokens (length >= 3 chars, not numeric),
/// runs longer than two tokens cut into consecutive chunks of at most two.
/// Distinct phrases in order of first occurrence.
std::vector<std::string> heuristic_aspects(std::string_view text);

/// Aspects from an `arg_id,aspect` CSV when given, otherwise the heuristic
/// applied to every argument. File aspects for unknown arguments are a
/// DataError.
std::vector<AspectPhrase> acquire_aspects(const corpus::Dataset& d,
                                          const std::optional<std::filesystem::path>& aspects_path = std::nullopt);

/// Aspect phrases of a subset of arguments (one topic-stance group).
std::vector<AspectPhrase> heuristic_aspects_for(std::span<const corpus::Argument* const> arguments);

/// Id used to look an aspect up in a precomputed embedding file:
/// "<arg_id>/aspect/<index within the argument>".
std::string aspect_id(const AspectPhrase& a, std::size_t index_in_argument);
void embed_aspects(std::vector<AspectPhrase>& aspects, const embedding::Encoder& encoder);

struct ClusteringResult {
  std::vector<AspectCluster> clusters;
  std::vector<int> assignment;        // point -> cluster id
  std::vector<double> wcss_history;   // within-cluster sum of squares after each assignment step
  int iterations = 0;
};

/// Lloyd's k-means, Euclidean distance. Initialization: a seeded first
/// centroid, then repeatedly the point farthest from the chosen centroids
/// (ties to the lowest index). k is lowered to the number of distinct points.
/// Runs until centroid movement < 1e-6 or 100 iterations; the returned
/// assignment is nearest-centroid against the final centroids.
ClusteringResult cluster_points(std::span<const EmbeddingVector> points, int k, std::uint64_t seed);
ClusteringResult cluster_aspects(std::span<const AspectPhrase> aspects, int k, std::uint64_t seed);

/// For every candidate, the ids of clusters whose aspect phrases occur in it
/// as a contiguous token sequence.
std::vector<std::set<int>> map_sentences_to_clusters(std::span<const SentenceCandidate> cands,
                                                     std::span<const AspectPhrase> aspects,
                                                     std::span<const int> assignment);

struct GreedySelection {
  std::vector<std::size_t> selected;  // candidate indices in selection order
  std::vector<std::size_t> gains;     // newly covered clusters per pick
  std::set<int> covered;
};

/// Greedy set cover: repeatedly pick the candidate covering the most new
/// clusters, ties to the least overlap with the covered set, then to the
/// smallest id. Stops at full coverage of `cluster_count` clusters, at
/// k_max picks, or when no candidate adds coverage.
GreedySelection greedy_select(std::span<const SentenceCandidate> cands,
                              std::span<const std::set<int>> sentence_to_clusters, std::size_t cluster_count,
                              std::size_t k_max);

/// Streaming filter: keep an item when its max similarity to the items
/// already kept is below `threshold`. Input and output are candidate indices.
std::vector<std::size_t> dedup(std::span<const std::size_t> selected, std::span<const SentenceCandidate> cands,
                               const PairScorer& similarity, double threshold = 0.65);

}  // namespace kpa::kp_aspect
