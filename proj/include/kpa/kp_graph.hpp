#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kpa/corpus.hpp"
#include "kpa/embedding.hpp"
#include "kpa/matcher.hpp"

namespace kpa::kp_graph {

using embedding::EmbeddingVector;

struct SentenceCandidate {
  std::string id;  // "<arg_id>#<sentence index>"
  std::string text;
  std::string source_arg_id;
  std::size_t token_count = 0;
  std::optional<double> quality;
  EmbeddingVector embedding;  // empty until embed_candidates()
};

struct RawSentence {
  std::string id;
  std::string text;
  std::string source_arg_id;
  std::optional<double> quality;
};

struct RankParams {
  double d = 0.2;
  double quality_threshold = 0.8;
  double match_threshold = 0.4;
  double redundancy_threshold = 0.8;
  int max_iters = 100;
  double tol = 1e-8;
  int k_min = 5;
  int k_max = 10;

  /// Throws Error when a field is out of range.
  void validate() const;
};

inline constexpr std::size_t kMinTokens = 5;
inline constexpr std::size_t kMaxTokens = 20;

/// i you he she it we they me him her us them this that these those there
const std::set<std::string, std::less<>>& default_pronouns();

/// Token-range and pronoun rule shared by both generators.
bool passes_sentence_rules(std::string_view sentence, const std::set<std::string, std::less<>>& pronouns);

/// Splits every argument into sentences (ids "<arg_id>#<k>", k counted
/// before filtering), keeps those passing the sentence rules. Sentences
/// inherit the argument's quality score when it has one.
std::vector<SentenceCandidate> split_and_filter(std::span<const corpus::Argument> arguments,
                                                const std::set<std::string, std::less<>>& pronouns);
std::vector<SentenceCandidate> split_and_filter(std::span<const corpus::Argument* const> arguments,
                                                const std::set<std::string, std::less<>>& pronouns);

/// Same filter over sentences produced by an external splitter.
std::vector<SentenceCandidate> filter_sentences(std::span<const RawSentence> sentences,
                                                const std::set<std::string, std::less<>>& pronouns);

/// sentence_id,quality sidecar.
std::map<std::string, double> load_quality_sidecar(const std::filesystem::path& path);
/// Overrides candidate qualities with sidecar values; returns how many matched.
std::size_t apply_quality(std::vector<SentenceCandidate>& cands, const std::map<std::string, double>& qualities);

void embed_candidates(std::vector<SentenceCandidate>& cands, const embedding::Encoder& encoder);

/// Symmetric pairwise match score in [0, 1].
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual double score(const SentenceCandidate& a, const SentenceCandidate& b) const = 0;
};

/// Matcher ensemble over sentence embeddings. Projections are computed once
/// per candidate; score = mean over members of (1 + cos) / 2.
class EnsembleScorer final : public PairScorer {
 public:
  EnsembleScorer(const matcher::Ensemble& ensemble, std::span<const SentenceCandidate> cands);
  double score(const SentenceCandidate& a, const SentenceCandidate& b) const override;

 private:
  std::size_t members_ = 0;
  // candidate id -> concatenated unit-norm projections, one per member
  std::map<std::string, std::vector<double>, std::less<>> projected_;
  std::vector<std::size_t> dims_;
};

struct Edge {
  std::size_t to = 0;
  double weight = 0.0;
};

struct KPGraph {
  std::vector<SentenceCandidate> nodes;
  std::vector<double> quality;             // resolved per node, used by rank()
  std::vector<std::vector<Edge>> adjacency;  // symmetric, sorted by `to`, no self-edges
  bool quality_filter_applied = false;

  std::size_t edge_count() const;
  /// 0 when no edge.
  double weight(std::size_t i, std::size_t j) const;
};

/// Keeps candidates with quality >= quality_threshold (skipped when no
/// candidate has a known quality) and connects pairs whose score is
/// >= match_threshold. Unknown qualities among known ones take the mean of
/// the known values and bypass the filter.
KPGraph build_graph(std::span<const SentenceCandidate> cands, const PairScorer& scorer, const RankParams& p);

struct RankResult {
  std::vector<double> scores;  // aligned with KPGraph::nodes
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;  // L1 change per iteration
  std::vector<double> mass_history;      // sum of scores after each iteration
};

/// Fixed-point iteration of
///   P(i) = (1-d) * sum_{j != i} w(i,j) / S(j) * P(j) + d * q(i) / sum_k q(k)
/// from uniform 1/n, where S(j) is the total edge weight at j. Nodes without
/// edges pass on no mass. Stops when the L1 change drops below tol or after
/// max_iters iterations.
RankResult rank(const KPGraph& g, const RankParams& p);

struct RankedCandidate {
  SentenceCandidate candidate;
  double score = 0.0;
};

/// Greedy diversity filter over nodes in descending score order (ties by
/// id). A node is admitted when its max score against the admitted set is
/// below redundancy_threshold, up to k_max. If fewer than k_min are admitted,
/// the remaining nodes are appended in score order up to k_min.
std::vector<RankedCandidate> select_key_points(const RankResult& r, const KPGraph& g, const PairScorer& scorer,
                                               const RankParams& p);

// ---- generated key point file -------------------------------------------

struct GeneratedKeyPoint {
  std::string id;
  std::string text;
  std::string topic;
  corpus::Stance stance = corpus::Stance::Pro;
  double score = 0.0;

  bool operator==(const GeneratedKeyPoint&) const = default;
};

/// kp_<topic-slug>_<pro|con>_<rank>, rank 1-based.
std::string key_point_id(std::string_view topic, corpus::Stance stance, std::size_t rank);

/// key_point_id,key_point,topic,stance,score with `comments` as leading
/// "# " lines.
void write_key_points(std::ostream& out, std::span<const GeneratedKeyPoint> kps,
                      std::span<const std::string> comments = {});
std::vector<GeneratedKeyPoint> read_key_points(const std::filesystem::path& path);

}  // namespace kpa::kp_graph
