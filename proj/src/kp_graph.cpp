#include "kpa/kp_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "kpa/csv.hpp"
#include "kpa/error.hpp"
#include "kpa/simd.hpp"
#include "kpa/text.hpp"

namespace kpa::kp_graph {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view s, const std::string& ctx) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw DataError(ctx + "not a number: '" + std::string(s) + "'");
  return v;
}

template <typename ArgRange>
std::vector<SentenceCandidate> split_impl(const ArgRange& arguments,
                                          const std::set<std::string, std::less<>>& pronouns) {
  std::vector<RawSentence> raw;
  for (const corpus::Argument& a : arguments) {
    const auto sentences = text::split_sentences(a.text);
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      raw.push_back({a.id + "#" + std::to_string(k), sentences[k], a.id, a.quality});
    }
  }
  return filter_sentences(raw, pronouns);
}

}  // namespace

void RankParams::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(d)) throw Error("damping factor d must be in [0,1]");
  if (!unit(quality_threshold) || !unit(match_threshold) || !unit(redundancy_threshold)) {
    throw Error("thresholds must be in [0,1]");
  }
  if (max_iters < 1) throw Error("max_iters must be >= 1");
  if (!(tol > 0.0)) throw Error("tol must be positive");
  if (k_min < 0 || k_max < 1 || k_min > k_max) throw Error("need 0 <= k_min <= k_max and k_max >= 1");
}

const std::set<std::string, std::less<>>& default_pronouns() {
  static const std::set<std::string, std::less<>> kPronouns = {
      "i",   "you",  "he",   "she",  "it",    "we",    "they",  "me",   "him",
      "her", "us",   "them", "this", "that",  "these", "those", "there"};
  return kPronouns;
}

bool passes_sentence_rules(std::string_view sentence, const std::set<std::string, std::less<>>& pronouns) {
  const auto tokens = text::tokenize(sentence);
  if (tokens.size() < kMinTokens || tokens.size() > kMaxTokens) return false;
  return pronouns.find(tokens.front()) == pronouns.end();
}

std::vector<SentenceCandidate> split_and_filter(std::span<const corpus::Argument> arguments,
                                                const std::set<std::string, std::less<>>& pronouns) {
  return split_impl(arguments, pronouns);
}

std::vector<SentenceCandidate> split_and_filter(std::span<const corpus::Argument* const> arguments,
                                                const std::set<std::string, std::less<>>& pronouns) {
  std::vector<std::reference_wrapper<const corpus::Argument>> refs;
  refs.reserve(arguments.size());
  for (const auto* a : arguments) refs.emplace_back(*a);
  return split_impl(refs, pronouns);
}

std::vector<SentenceCandidate> filter_sentences(std::span<const RawSentence> sentences,
                                                const std::set<std::string, std::less<>>& pronouns) {
  std::vector<SentenceCandidate> out;
  for (const auto& s : sentences) {
    const auto tokens = text::tokenize(s.text);
    if (tokens.size() < kMinTokens || tokens.size() > kMaxTokens) continue;
    if (pronouns.count(tokens.front())) continue;
    SentenceCandidate c;
    c.id = s.id;
    c.text = s.text;
    c.source_arg_id = s.source_arg_id;
    c.token_count = tokens.size();
    c.quality = s.quality;
    out.push_back(std::move(c));
  }
  return out;
}

std::map<std::string, double> load_quality_sidecar(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  const std::size_t c_id = t.column("sentence_id");
  const std::size_t c_q = t.column("quality");
  std::map<std::string, double> out;
  for (const auto& r : t.records()) {
    const std::string ctx = t.source() + ": row " + std::to_string(r.line) + ": ";
    const double q = parse_double(r.fields[c_q], ctx);
    if (!(q >= 0.0 && q <= 1.0)) throw DataError(ctx + "quality outside [0,1]");
    if (!out.emplace(r.fields[c_id], q).second) throw DataError(ctx + "duplicate sentence_id " + r.fields[c_id]);
  }
  return out;
}

std::size_t apply_quality(std::vector<SentenceCandidate>& cands, const std::map<std::string, double>& qualities) {
  std::size_t hits = 0;
  for (auto& c : cands) {
    auto it = qualities.find(c.id);
    if (it == qualities.end()) it = qualities.find(c.text);
    if (it != qualities.end()) {
      c.quality = it->second;
      ++hits;
    }
  }
  return hits;
}

void embed_candidates(std::vector<SentenceCandidate>& cands, const embedding::Encoder& encoder) {
  for (auto& c : cands) c.embedding = encoder.embed(c.id, c.text);
}

EnsembleScorer::EnsembleScorer(const matcher::Ensemble& ensemble, std::span<const SentenceCandidate> cands)
    : members_(ensemble.members.size()) {
  if (ensemble.members.empty()) throw Error("EnsembleScorer: empty ensemble");
  for (const auto& m : ensemble.members) dims_.push_back(m.dim_out());
  for (const auto& c : cands) {
    if (c.embedding.dim() == 0) throw Error("EnsembleScorer: candidate " + c.id + " has no embedding");
    std::vector<double> all;
    for (const auto& m : ensemble.members) {
      auto p = m.project(c.embedding.values());
      const double n = std::sqrt(simd::dot(p, p));
      if (n == 0.0) throw NumericError("EnsembleScorer: zero projection for " + c.id);
      for (double& v : p) v /= n;
      all.insert(all.end(), p.begin(), p.end());
    }
    projected_[c.id] = std::move(all);
  }
}

double EnsembleScorer::score(const SentenceCandidate& a, const SentenceCandidate& b) const {
  auto ia = projected_.find(a.id);
  auto ib = projected_.find(b.id);
  if (ia == projected_.end() || ib == projected_.end()) {
    throw Error("EnsembleScorer: unknown candidate in pair (" + a.id + ", " + b.id + ")");
  }
  double sum = 0.0;
  std::size_t off = 0;
  for (const std::size_t dim : dims_) {
    const double c = std::clamp(simd::dot(std::span<const double>(ia->second.data() + off, dim),
                                          std::span<const double>(ib->second.data() + off, dim)),
                                -1.0, 1.0);
    sum += 0.5 * (1.0 + c);
    off += dim;
  }
  return sum / static_cast<double>(members_);
}

std::size_t KPGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& adj : adjacency) n += adj.size();
  return n / 2;
}

double KPGraph::weight(std::size_t i, std::size_t j) const {
  const auto& adj = adjacency.at(i);
  auto it = std::lower_bound(adj.begin(), adj.end(), j, [](const Edge& e, std::size_t v) { return e.to < v; });
  return (it != adj.end() && it->to == j) ? it->weight : 0.0;
}

KPGraph build_graph(std::span<const SentenceCandidate> cands, const PairScorer& scorer, const RankParams& p) {
  p.validate();
  KPGraph g;
  std::size_t known = 0;
  double known_sum = 0.0;
  for (const auto& c : cands) {
    if (c.quality) {
      ++known;
      known_sum += *c.quality;
    }
  }
  g.quality_filter_applied = known > 0;
  const double fallback = known ? known_sum / static_cast<double>(known) : 1.0;
  for (const auto& c : cands) {
    if (c.quality && *c.quality < p.quality_threshold) continue;
    g.nodes.push_back(c);
    g.quality.push_back(c.quality.value_or(fallback));
  }

  const std::size_t n = g.nodes.size();
  g.adjacency.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double w = 0.0;
      try {
        w = scorer.score(g.nodes[i], g.nodes[j]);
      } catch (const std::exception& e) {
        throw Error("scoring pair (" + g.nodes[i].id + ", " + g.nodes[j].id + ") failed: " + e.what());
      }
      if (!(w >= 0.0 && w <= 1.0)) {
        throw NumericError("score for pair (" + g.nodes[i].id + ", " + g.nodes[j].id + ") outside [0,1]");
      }
      if (w >= p.match_threshold) {
        g.adjacency[i].push_back({j, w});
        g.adjacency[j].push_back({i, w});
      }
    }
  }
  for (auto& adj : g.adjacency) {
    std::sort(adj.begin(), adj.end(), [](const Edge& a, const Edge& b) { return a.to < b.to; });
  }
  return g;
}

RankResult rank(const KPGraph& g, const RankParams& p) {
  p.validate();
  const std::size_t n = g.nodes.size();
  if (n == 0) throw Error("rank: graph has no nodes");
  if (g.quality.size() != n || g.adjacency.size() != n) throw Error("rank: inconsistent graph");

  const double qsum = std::accumulate(g.quality.begin(), g.quality.end(), 0.0);
  if (p.d > 0.0 && !(qsum > 0.0)) throw NumericError("rank: quality scores sum to zero with d > 0");
  std::vector<double> teleport(n, 0.0);
  if (p.d > 0.0) {
    for (std::size_t i = 0; i < n; ++i) teleport[i] = p.d * g.quality[i] / qsum;
  }
  std::vector<double> strength(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (const auto& e : g.adjacency[j]) strength[j] += e.weight;
  }

  RankResult r;
  std::vector<double> cur(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  std::vector<double> share(n);
  for (int it = 1; it <= p.max_iters; ++it) {
    for (std::size_t j = 0; j < n; ++j) share[j] = strength[j] > 0.0 ? cur[j] / strength[j] : 0.0;
    double residual = 0.0;
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double flow = 0.0;
      for (const auto& e : g.adjacency[i]) flow += e.weight * share[e.to];
      next[i] = (1.0 - p.d) * flow + teleport[i];
      residual += std::abs(next[i] - cur[i]);
      mass += next[i];
    }
    cur.swap(next);
    r.iterations = it;
    r.residual = residual;
    r.residual_history.push_back(residual);
    r.mass_history.push_back(mass);
    if (residual < p.tol) break;
  }
  r.scores = std::move(cur);
  return r;
}

std::vector<RankedCandidate> select_key_points(const RankResult& r, const KPGraph& g, const PairScorer& scorer,
                                               const RankParams& p) {
  p.validate();
  const std::size_t n = g.nodes.size();
  if (r.scores.size() != n) throw Error("select_key_points: rank result does not cover the graph");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (r.scores[a] != r.scores[b]) return r.scores[a] > r.scores[b];
    return g.nodes[a].id < g.nodes[b].id;
  });

  const auto k_max = static_cast<std::size_t>(p.k_max);
  const auto k_min = static_cast<std::size_t>(p.k_min);
  std::vector<std::size_t> picked;
  std::vector<bool> taken(n, false);
  for (const std::size_t i : order) {
    if (picked.size() >= k_max) break;
    double worst = 0.0;
    for (const std::size_t s : picked) worst = std::max(worst, scorer.score(g.nodes[i], g.nodes[s]));
    if (picked.empty() || worst < p.redundancy_threshold) {
      picked.push_back(i);
      taken[i] = true;
    }
  }
  for (const std::size_t i : order) {
    if (picked.size() >= k_min) break;
    if (!taken[i]) {
      picked.push_back(i);
      taken[i] = true;
    }
  }

  std::vector<RankedCandidate> out;
  out.reserve(picked.size());
  for (const std::size_t i : picked) out.push_back({g.nodes[i], r.scores[i]});
  return out;
}

std::string key_point_id(std::string_view topic, corpus::Stance stance, std::size_t rank) {
  return "kp_" + text::slugify(topic) + "_" + std::string(corpus::stance_name(stance)) + "_" + std::to_string(rank);
}

void write_key_points(std::ostream& out, std::span<const GeneratedKeyPoint> kps, std::span<const std::string> comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  csv::write_row(out, {"key_point_id", "key_point", "topic", "stance", "score"});
  for (const auto& k : kps) {
    csv::write_row(out, {k.id, k.text, k.topic, std::to_string(corpus::stance_value(k.stance)), format_double(k.score)});
  }
}

std::vector<GeneratedKeyPoint> read_key_points(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  const std::size_t c_id = t.column("key_point_id");
  const std::size_t c_text = t.column("key_point");
  const std::size_t c_topic = t.column("topic");
  const std::size_t c_stance = t.column("stance");
  const auto c_score = t.find_column("score");
  std::vector<GeneratedKeyPoint> out;
  for (const auto& r : t.records()) {
    const std::string ctx = t.source() + ": row " + std::to_string(r.line) + ": ";
    GeneratedKeyPoint k;
    k.id = r.fields[c_id];
    k.text = r.fields[c_text];
    k.topic = r.fields[c_topic];
    try {
      k.stance = corpus::parse_stance(r.fields[c_stance]);
    } catch (const DataError& e) {
      throw DataError(ctx + e.what());
    }
    if (c_score && !r.fields[*c_score].empty()) k.score = parse_double(r.fields[*c_score], ctx);
    out.push_back(std::move(k));
  }
  return out;
}

}  // namespace kpa::kp_graph
