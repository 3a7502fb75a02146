#include "kpa/kp_aspect.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <tuple>

#include "kpa/csv.hpp"
#include "kpa/error.hpp"
#include "kpa/simd.hpp"
#include "kpa/text.hpp"

namespace kpa::kp_aspect {

namespace {

bool is_content(const std::string& tok) {
  if (tok.size() < 3) return false;
  if (tok.find('\'') != std::string::npos) return false;
  if (std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; })) {
    return false;
  }
  return aspect_stopwords().count(tok) == 0;
}

bool contains_sequence(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

const std::set<std::string, std::less<>>& aspect_stopwords() {
  static const std::set<std::string, std::less<>> kStop = {
      // function words
      "a", "about", "above", "after", "again", "against", "all", "also", "although", "always", "among", "an", "and",
      "any", "are", "around", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
      "but", "by", "did", "does", "doing", "done", "down", "during", "each", "either", "else", "enough", "even",
      "ever", "every", "few", "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers",
      "herself", "him", "himself", "his", "how", "however", "i", "if", "in", "into", "is", "it", "its", "itself",
      "just", "least", "less", "like", "many", "me", "more", "most", "much", "my", "myself", "neither", "never",
      "no", "nor", "not", "nothing", "now", "of", "off", "often", "on", "once", "only", "or", "other", "others",
      "our", "ours", "ourselves", "out", "over", "own", "rather", "same", "she", "since", "so", "some", "something",
      "still", "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there", "therefore",
      "these", "they", "this", "those", "though", "through", "thus", "to", "too", "under", "until", "up", "upon",
      "us", "very", "was", "we", "were", "what", "when", "where", "whether", "which", "while", "who", "whom", "whose",
      "why", "with", "within", "without", "yes", "yet", "you", "your", "yours", "yourself", "yourselves",
      // modals and auxiliaries
      "can", "cannot", "could", "may", "might", "must", "shall", "should", "will", "would", "ought",
      // generic argumentative verbs
      "allow", "allows", "allowed", "become", "becomes", "believe", "bring", "brings", "cause", "causes", "caused",
      "create", "creates", "do", "get", "gets", "getting", "give", "gives", "go", "goes", "going", "help", "helps",
      "keep", "keeps", "know", "lead", "leads", "let", "make", "makes", "making", "made", "mean", "means", "need",
      "needs", "prevent", "prevents", "provide", "provides", "put", "say", "says", "see", "seem", "seems", "take",
      "takes", "think", "use", "used", "uses", "want", "wants", "ensure", "ensures", "stop", "stops", "reduce",
      "reduces", "increase", "increases", "result", "results",
      // generic nouns and qualifiers
      "people", "person", "thing", "things", "way", "ways", "lot", "lots", "one", "ones", "well", "really",
      "important", "good", "bad", "better", "worse", "best", "worst", "able", "new", "certain",
      "option", "reason", "reasons"};
  return kStop;
}

std::vector<std::string> heuristic_aspects(std::string_view text) {
  const auto tokens = text::tokenize(text);
  std::vector<std::string> out;
  auto push = [&](std::string phrase) {
    if (std::find(out.begin(), out.end(), phrase) == out.end()) out.push_back(std::move(phrase));
  };
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (!is_content(tokens[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < tokens.size() && is_content(tokens[j])) ++j;
    for (std::size_t s = i; s < j; s += 2) {
      if (s + 1 < j) {
        push(tokens[s] + " " + tokens[s + 1]);
      } else {
        push(tokens[s]);
      }
    }
    i = j;
  }
  return out;
}

std::vector<AspectPhrase> heuristic_aspects_for(std::span<const corpus::Argument* const> arguments) {
  std::vector<AspectPhrase> out;
  for (const auto* a : arguments) {
    for (auto& phrase : heuristic_aspects(a->text)) out.push_back({std::move(phrase), a->id, {}});
  }
  return out;
}

std::vector<AspectPhrase> acquire_aspects(const corpus::Dataset& d,
                                          const std::optional<std::filesystem::path>& aspects_path) {
  std::vector<AspectPhrase> out;
  if (!aspects_path) {
    std::vector<const corpus::Argument*> all;
    for (const auto& a : d.arguments()) all.push_back(&a);
    return heuristic_aspects_for(all);
  }
  const csv::Table t = csv::read(*aspects_path);
  const std::size_t c_arg = t.column("arg_id");
  const std::size_t c_aspect = t.column("aspect");
  for (const auto& r : t.records()) {
    const std::string ctx = t.source() + ": row " + std::to_string(r.line) + ": ";
    const std::string& arg = r.fields[c_arg];
    const std::string phrase(text::trim(r.fields[c_aspect]));
    if (!d.find_argument(arg)) throw DataError(ctx + "unknown arg_id " + arg);
    if (phrase.empty()) throw DataError(ctx + "empty aspect");
    out.push_back({phrase, arg, {}});
  }
  return out;
}

std::string aspect_id(const AspectPhrase& a, std::size_t index_in_argument) {
  return a.source_arg_id + "/aspect/" + std::to_string(index_in_argument);
}

void embed_aspects(std::vector<AspectPhrase>& aspects, const embedding::Encoder& encoder) {
  std::map<std::string, std::size_t> per_arg;
  for (auto& a : aspects) {
    const std::size_t idx = per_arg[a.source_arg_id]++;
    a.embedding = encoder.embed(aspect_id(a, idx), a.text);
  }
}

ClusteringResult cluster_points(std::span<const EmbeddingVector> points, int k, std::uint64_t seed) {
  if (points.empty()) throw Error("cluster_aspects: no points");
  if (k < 1) throw Error("cluster_aspects: k must be >= 1");
  const std::size_t n = points.size();
  const std::size_t dim = points.front().dim();
  for (const auto& p : points) {
    if (p.dim() != dim) throw NumericError("cluster_aspects: points have mixed dims");
  }

  std::vector<std::vector<double>> distinct;
  for (const auto& p : points) distinct.emplace_back(p.values().begin(), p.values().end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const std::size_t kk = std::min(static_cast<std::size_t>(k), distinct.size());

  // farthest-point initialization
  std::vector<std::vector<double>> centroids;
  std::mt19937_64 rng(seed);
  const std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  centroids.emplace_back(points[first].values().begin(), points[first].values().end());
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (centroids.size() < kk) {
    const auto& last = centroids.back();
    std::size_t pick = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], simd::squared_distance(points[i].values(), last));
      if (nearest[i] > best) {
        best = nearest[i];
        pick = i;
      }
    }
    centroids.emplace_back(points[pick].values().begin(), points[pick].values().end());
  }

  ClusteringResult r;
  std::vector<int> assign(n, 0);
  auto assign_all = [&]() {
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (std::size_t c = 0; c < kk; ++c) {
        const double dist = simd::squared_distance(points[i].values(), centroids[c]);
        if (dist < best) {
          best = dist;
          arg = static_cast<int>(c);
        }
      }
      assign[i] = arg;
      wcss += best;
    }
    r.wcss_history.push_back(wcss);
  };

  constexpr int kMaxIters = 100;
  constexpr double kMoveTol = 1e-6;
  for (int it = 1; it <= kMaxIters; ++it) {
    assign_all();
    std::vector<std::vector<double>> sums(kk, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(kk, 0);
    for (std::size_t i = 0; i < n; ++i) {
      simd::axpy(1.0, points[i].values(), sums[static_cast<std::size_t>(assign[i])]);
      ++counts[static_cast<std::size_t>(assign[i])];
    }
    double movement = 0.0;
    for (std::size_t c = 0; c < kk; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (double& v : sums[c]) v /= static_cast<double>(counts[c]);
      movement = std::max(movement, std::sqrt(simd::squared_distance(sums[c], centroids[c])));
      centroids[c] = std::move(sums[c]);
    }
    r.iterations = it;
    if (movement < kMoveTol) break;
  }
  assign_all();

  r.assignment = assign;
  r.clusters.resize(kk);
  for (std::size_t c = 0; c < kk; ++c) {
    r.clusters[c].id = static_cast<int>(c);
    r.clusters[c].centroid = EmbeddingVector(centroids[c]);
  }
  for (std::size_t i = 0; i < n; ++i) r.clusters[static_cast<std::size_t>(assign[i])].members.push_back(i);
  return r;
}

ClusteringResult cluster_aspects(std::span<const AspectPhrase> aspects, int k, std::uint64_t seed) {
  std::vector<EmbeddingVector> points;
  points.reserve(aspects.size());
  for (const auto& a : aspects) {
    if (a.embedding.dim() == 0) throw Error("cluster_aspects: aspect '" + a.text + "' has no embedding");
    points.push_back(a.embedding);
  }
  return cluster_points(points, k, seed);
}

std::vector<std::set<int>> map_sentences_to_clusters(std::span<const SentenceCandidate> cands,
                                                     std::span<const AspectPhrase> aspects,
                                                     std::span<const int> assignment) {
  if (assignment.size() != aspects.size()) throw Error("map_sentences_to_clusters: assignment size mismatch");
  std::map<std::vector<std::string>, std::set<int>> phrase_clusters;
  for (std::size_t i = 0; i < aspects.size(); ++i) {
    auto toks = text::tokenize(aspects[i].text);
    if (!toks.empty()) phrase_clusters[std::move(toks)].insert(assignment[i]);
  }
  std::vector<std::set<int>> out(cands.size());
  for (std::size_t c = 0; c < cands.size(); ++c) {
    const auto toks = text::tokenize(cands[c].text);
    for (const auto& [phrase, clusters] : phrase_clusters) {
      if (contains_sequence(toks, phrase)) out[c].insert(clusters.begin(), clusters.end());
    }
  }
  return out;
}

GreedySelection greedy_select(std::span<const SentenceCandidate> cands,
                              std::span<const std::set<int>> sentence_to_clusters, std::size_t cluster_count,
                              std::size_t k_max) {
  if (sentence_to_clusters.size() != cands.size()) throw Error("greedy_select: cluster map size mismatch");
  GreedySelection g;
  std::vector<bool> used(cands.size(), false);
  while (g.selected.size() < k_max && g.covered.size() < cluster_count) {
    std::optional<std::size_t> best;
    std::size_t best_gain = 0;
    std::size_t best_overlap = 0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (used[i]) continue;
      std::size_t gain = 0;
      std::size_t overlap = 0;
      for (const int c : sentence_to_clusters[i]) {
        if (g.covered.count(c)) {
          ++overlap;
        } else {
          ++gain;
        }
      }
      if (gain == 0) continue;
      const bool better = !best || gain > best_gain || (gain == best_gain && overlap < best_overlap) ||
                          (gain == best_gain && overlap == best_overlap && cands[i].id < cands[*best].id);
      if (better) {
        best = i;
        best_gain = gain;
        best_overlap = overlap;
      }
    }
    if (!best) break;
    used[*best] = true;
    g.selected.push_back(*best);
    g.gains.push_back(best_gain);
    g.covered.insert(sentence_to_clusters[*best].begin(), sentence_to_clusters[*best].end());
  }
  return g;
}

std::vector<std::size_t> dedup(std::span<const std::size_t> selected, std::span<const SentenceCandidate> cands,
                               const PairScorer& similarity, double threshold) {
  std::vector<std::size_t> kept;
  for (const std::size_t i : selected) {
    double worst = 0.0;
    for (const std::size_t k : kept) worst = std::max(worst, similarity.score(cands[i], cands[k]));
    if (kept.empty() || worst < threshold) kept.push_back(i);
  }
  return kept;
}

}  // namespace kpa::kp_aspect
