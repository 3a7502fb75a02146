// Acceptance suite: one PASS / FAIL / SKIP line per criterion. Tolerances
// are fixed here and never relaxed to make a line pass. Exit status is 1 if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kpa/corpus.hpp"
#include "kpa/embedding.hpp"
#include "kpa/evalkit.hpp"
#include "kpa/kp_aspect.hpp"
#include "kpa/kp_graph.hpp"
#include "kpa/matcher.hpp"
#include "kpa/pipeline.hpp"
#include "kpa/simd.hpp"
#include "kpa/text.hpp"
#include "map_fixture.hpp"
#include "oracles.hpp"
#include "scorers.hpp"
#include "synthetic.hpp"
#include "tmpdir.hpp"

using namespace kpa;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// ---- tolerances --------------------------------------------------------------
constexpr double kGradientRelTol = 1e-4;
constexpr double kGradientStep = 1e-5;
constexpr int kGradientTrials = 100;
constexpr double kGradientSeconds = 10.0;
constexpr double kMassTol = 1e-9;
constexpr double kResidualTol = 1e-8;
constexpr int kRankIterations = 100;
constexpr double kUniformTol = 1e-9;
constexpr int kMapInstances = 1000;
constexpr double kMapTol = 1e-12;
constexpr double kRougeTol = 1e-9;
constexpr int kRougeSequences = 1000;
constexpr double kGenerationSeconds = 60.0;
constexpr int kLearningSeeds = 5;
constexpr int kLearningWins = 4;
constexpr std::size_t kArgKpArguments = 6515;
constexpr std::size_t kArgKpKeyPoints = 243;
constexpr std::size_t kArgKpPairs = 24093;
constexpr double kArgKpMatchRate = 0.207;
constexpr double kArgKpMatchRateTol = 0.001;
constexpr double kRealEmbeddingFloor = 0.55;

int failures = 0;

void report(const std::string& status, const std::string& name, const std::string& detail) {
  std::cout << status << "  " << name << "  " << detail << std::endl;
  if (status == "FAIL") ++failures;
}

void verdict(bool ok, const std::string& name, const std::string& detail) { report(ok ? "PASS" : "FAIL", name, detail); }

std::string fmt(double v, int precision = 3) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// ---- criteria ------------------------------------------------------------------

void gradient_check() {
  std::mt19937_64 rng(20240101);
  const auto start = Clock::now();
  double worst = 0.0;
  for (int t = 0; t < kGradientTrials; ++t) {
    const std::size_t din = 2 + rng() % 15, dout = 2 + rng() % 15;
    const auto w = gaussian(rng, din * dout);
    const auto a = gaussian(rng, din), b = gaussian(rng, din);
    const int y = static_cast<int>(rng() % 2);
    const auto lg = matcher::loss_and_gradient(matcher::ProjectionHead(dout, din, w), a, b, y, 1e-7);
    const auto fd = oracle::fd_gradient(w, dout, din, a, b, y, 1e-7, kGradientStep);
    worst = std::max(worst, oracle::relative_error(lg.grad, fd));
  }
  const double secs = seconds_since(start);
  verdict(worst < kGradientRelTol && secs < kGradientSeconds, "gradient-check",
          std::to_string(kGradientTrials) + " trials, max relative error " + fmt(worst) + " (< " + fmt(kGradientRelTol) +
              "), " + fmt(secs) + " s (< " + fmt(kGradientSeconds) + " s)");
}

kp_graph::KPGraph graph_from(const std::vector<std::vector<std::pair<std::size_t, double>>>& adj,
                             const std::vector<double>& q) {
  kp_graph::KPGraph g;
  for (std::size_t i = 0; i < q.size(); ++i) g.nodes.push_back(testing::candidate("n" + std::to_string(i)));
  g.quality = q;
  g.adjacency.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (const auto& [j, w] : adj[i]) g.adjacency[i].push_back({j, w});
    std::sort(g.adjacency[i].begin(), g.adjacency[i].end(),
              [](const kp_graph::Edge& x, const kp_graph::Edge& y) { return x.to < y.to; });
  }
  return g;
}

void ranking_fixed_point() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  kp_graph::RankParams p;
  double worst_mass = 0.0;
  int worst_iters = 0;
  int unconverged = 0;
  int graphs = 0;
  for (std::size_t n : {2u, 3u, 10u, 50u, 100u, 250u, 500u}) {
    for (int rep = 0; rep < 4; ++rep) {
      std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
      std::set<std::pair<std::size_t, std::size_t>> seen;
      auto add = [&](std::size_t i, std::size_t j, double w) {
        if (i == j || !seen.insert({std::min(i, j), std::max(i, j)}).second) return;
        adj[i].push_back({j, w});
        adj[j].push_back({i, w});
      };
      const double density = rep == 0 ? 0.0 : (rep == 1 ? 0.01 : (rep == 2 ? 0.1 : 0.5));
      for (std::size_t i = 0; i < n; ++i) add(i, (i + 1) % n, p.match_threshold + (1.0 - p.match_threshold) * u(rng));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (u(rng) < density) add(i, j, p.match_threshold + (1.0 - p.match_threshold) * u(rng));
        }
      }
      std::vector<double> q(n);
      for (auto& x : q) x = p.quality_threshold + (1.0 - p.quality_threshold) * u(rng);
      auto params = p;
      params.max_iters = kRankIterations;
      params.tol = kResidualTol;
      const auto r = kp_graph::rank(graph_from(adj, q), params);
      for (double m : r.mass_history) worst_mass = std::max(worst_mass, std::abs(m - 1.0));
      worst_iters = std::max(worst_iters, r.iterations);
      if (!(r.residual < kResidualTol)) ++unconverged;
      ++graphs;
    }
  }

  double worst_uniform = 0.0;
  for (std::size_t n : {2u, 7u, 100u, 500u}) {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) adj[i].push_back({j, 0.75});
      }
    }
    const auto r = kp_graph::rank(graph_from(adj, std::vector<double>(n, 0.9)), p);
    for (double s : r.scores) worst_uniform = std::max(worst_uniform, std::abs(s - 1.0 / static_cast<double>(n)));
  }

  bool isolated_exact = true;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng() % 20;
    std::vector<double> q(n);
    for (auto& x : q) x = 0.01 + u(rng);
    const double qs = std::accumulate(q.begin(), q.end(), 0.0);
    auto params = p;
    params.d = u(rng);
    if (params.d == 0.0) params.d = 0.5;
    const auto r = kp_graph::rank(graph_from(std::vector<std::vector<std::pair<std::size_t, double>>>(n), q), params);
    for (std::size_t i = 0; i < n; ++i) isolated_exact = isolated_exact && r.scores[i] == params.d * q[i] / qs;
  }

  const bool ok = worst_mass <= kMassTol && unconverged == 0 && worst_uniform <= kUniformTol && isolated_exact;
  verdict(ok, "ranking-fixed-point",
          "mass max |sum-1| " + fmt(worst_mass) + " over " + std::to_string(graphs) + " connected graphs (n<=500); " +
              std::to_string(unconverged) + " unconverged, max " + std::to_string(worst_iters) +
              " iterations; complete-graph max |P-1/n| " + fmt(worst_uniform) + "; isolated P == d*q/sum(q) " +
              (isolated_exact ? "exact" : "NOT exact"));
}

void map_oracle() {
  std::mt19937_64 rng(4242);
  int mismatches = 0;
  int violations = 0;
  std::string example;
  for (int t = 0; t < kMapInstances; ++t) {
    const auto c = testing::random_map_case(rng);
    const double keep = (t % 3 == 0) ? 0.5 : (t % 3 == 1 ? 1.0 : 0.25);
    const auto got = evalkit::strict_relaxed_map(c.sets, c.gold, keep);
    const auto [s, r] = oracle::brute_force_map(c.plain, keep);
    if (std::abs(got.strict - s) > kMapTol || std::abs(got.relaxed - r) > kMapTol) ++mismatches;
    if (got.relaxed < got.strict) {
      ++violations;
      if (example.empty()) {
        example = "instance " + std::to_string(t) + ": strict " + fmt(got.strict, 6) + " > relaxed " + fmt(got.relaxed, 6);
      }
    }
  }
  std::string detail = std::to_string(kMapInstances - mismatches) + "/" + std::to_string(kMapInstances) +
                       " instances equal the brute-force pipeline (tol " + fmt(kMapTol) + "); relaxed >= strict on " +
                       std::to_string(kMapInstances - violations) + "/" + std::to_string(kMapInstances);
  if (violations) {
    detail += " (" + example +
              "; AP is not monotone in added relevant items: [1,0,0,0] scores 1.0 but [1,0,0,1] scores 0.75)";
  }
  verdict(mismatches == 0 && violations == 0, "map-oracle", detail);
}

void rouge_oracles() {
  struct Hand {
    const char* cand;
    const char* ref;
    int n;  // 0 = ROUGE-L
    double expect;
  };
  const std::vector<Hand> hand{{"vaccines protect children", "vaccines protect all children", 1, 6.0 / 7.0},
                               {"a b c d", "a c", 0, 2.0 / 3.0},
                               {"a b c", "c b a", 0, 1.0 / 3.0},
                               {"vaccines protect children", "vaccines protect children", 1, 1.0},
                               {"vaccines protect children", "vaccines protect children", 2, 1.0},
                               {"vaccines protect children", "vaccines protect children", 0, 1.0},
                               {"alpha beta", "gamma delta", 1, 0.0},
                               {"alpha beta", "gamma delta", 2, 0.0},
                               {"alpha beta", "gamma delta", 0, 0.0}};
  double worst_hand = 0.0;
  for (const auto& h : hand) {
    const double got = h.n == 0 ? evalkit::rouge_l(h.cand, h.ref) : evalkit::rouge_n(h.cand, h.ref, h.n);
    worst_hand = std::max(worst_hand, std::abs(got - h.expect));
  }

  std::mt19937_64 rng(9);
  int identical_bad = 0, disjoint_bad = 0, lcs_bad = 0;
  for (int t = 0; t < kRougeSequences; ++t) {
    const std::size_t len = 2 + rng() % 15;  // >= 2 tokens so bigrams exist
    std::vector<std::string> a, b, c;
    for (std::size_t i = 0; i < len; ++i) a.push_back("w" + std::to_string(rng() % 12));
    const std::size_t lb = 2 + rng() % 15;
    for (std::size_t i = 0; i < lb; ++i) b.push_back("v" + std::to_string(rng() % 12));
    for (std::size_t i = 0; i < lb; ++i) c.push_back("w" + std::to_string(rng() % 12));
    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& x : v) s += (s.empty() ? "" : " ") + x;
      return s;
    };
    const std::string sa = join(a), sb = join(b), sc = join(c);
    if (evalkit::rouge_n(sa, sa, 1) != 1.0 || evalkit::rouge_n(sa, sa, 2) != 1.0 || evalkit::rouge_l(sa, sa) != 1.0) {
      ++identical_bad;
    }
    if (evalkit::rouge_n(sa, sb, 1) != 0.0 || evalkit::rouge_n(sa, sb, 2) != 0.0 || evalkit::rouge_l(sa, sb) != 0.0) {
      ++disjoint_bad;
    }
    const double l = static_cast<double>(oracle::lcs(a, c));
    const double p = l / static_cast<double>(a.size()), r = l / static_cast<double>(c.size());
    const double expect = l == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    if (std::abs(evalkit::rouge_l(sa, sc) - expect) > kRougeTol) ++lcs_bad;
  }
  verdict(worst_hand <= kRougeTol && identical_bad == 0 && disjoint_bad == 0 && lcs_bad == 0, "rouge-oracles",
          "hand values max error " + fmt(worst_hand) + " (tol " + fmt(kRougeTol) + "); " +
              std::to_string(kRougeSequences) + " random sequences: identical!=1 " + std::to_string(identical_bad) +
              ", disjoint!=0 " + std::to_string(disjoint_bad) + ", ROUGE-L vs recursive LCS mismatches " +
              std::to_string(lcs_bad));
}

std::vector<std::set<int>> sets_from(const std::vector<std::uint32_t>& masks, int k) {
  std::vector<std::set<int>> out;
  for (const auto m : masks) {
    std::set<int> s;
    for (int b = 0; b < k; ++b) {
      if (m & (1u << b)) s.insert(b);
    }
    out.push_back(s);
  }
  return out;
}

bool greedy_agrees(const std::vector<std::string>& ids, const std::vector<std::uint32_t>& masks, int k,
                   std::size_t kmax) {
  std::vector<kp_graph::SentenceCandidate> c;
  for (const auto& id : ids) c.push_back(testing::candidate(id));
  const auto sets = sets_from(masks, k);
  return kp_aspect::greedy_select(c, sets, static_cast<std::size_t>(k), kmax).selected ==
         oracle::brute_force_greedy(ids, masks, k, kmax);
}

void greedy_cover() {
  long exhaustive = 0, random = 0, mismatches = 0;
  // Every assignment of cluster subsets to candidates, for the sizes where
  // that is enumerable: (64^8 instances at the largest size is not).
  auto enumerate = [&](std::size_t n, int k) {
    const std::uint64_t subsets = 1ull << k;
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= subsets;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("s" + std::to_string(n - i));  // id order reverses index order
    for (std::uint64_t code = 0; code < total; ++code) {
      std::vector<std::uint32_t> masks(n);
      std::uint64_t rest = code;
      for (std::size_t i = 0; i < n; ++i) {
        masks[i] = static_cast<std::uint32_t>(rest % subsets);
        rest /= subsets;
      }
      for (std::size_t kmax : {std::size_t{1}, std::size_t{2}, std::size_t{10}}) {
        if (!greedy_agrees(ids, masks, k, kmax)) ++mismatches;
        ++exhaustive;
      }
    }
  };
  for (int k = 1; k <= 6; ++k) {
    for (std::size_t n = 1; n <= 8; ++n) {
      double total = 1;
      for (std::size_t i = 0; i < n; ++i) total *= static_cast<double>(1u << k);
      if (total <= 300000) enumerate(n, k);
    }
  }
  std::mt19937_64 rng(5150);
  for (int t = 0; t < 200000; ++t) {
    const std::size_t n = 1 + rng() % 8;
    const int k = 1 + static_cast<int>(rng() % 6);
    std::vector<int> labels(64);
    std::iota(labels.begin(), labels.end(), 0);
    std::shuffle(labels.begin(), labels.end(), rng);
    std::vector<std::string> ids;
    std::vector<std::uint32_t> masks;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back("c" + std::to_string(labels[i]));
      masks.push_back(static_cast<std::uint32_t>(rng() % (1u << k)));
    }
    if (!greedy_agrees(ids, masks, k, 1 + rng() % 10)) ++mismatches;
    ++random;
  }
  verdict(mismatches == 0, "greedy-set-cover",
          std::to_string(exhaustive) + " enumerated instances (every size with <= 300k assignments) + " +
              std::to_string(random) + " random instances up to 8 candidates x 6 clusters; " +
              std::to_string(mismatches) + " trace mismatches");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void generation_contract() {
  testing::TempDir dir;
  int bad_count = 0, bad_rule = 0, not_identical = 0, groups = 0, emitted = 0;
  double slowest = 0.0;
  struct Corpus {
    std::uint64_t seed;
    std::size_t topics;
    std::size_t per_group;
  };
  // The last corpus is the 500-argument timing run.
  const std::vector<Corpus> corpora{{1, 1, 1}, {2, 2, 3}, {3, 3, 8}, {4, 4, 20}, {5, 10, 25}};
  for (const auto& spec : corpora) {
    const auto d = testing::generation_corpus(spec.seed, spec.topics, spec.per_group);
    corpus::save_dataset(d, dir / "a.csv", dir / "k.csv", dir / "l.csv");
    for (const auto gen : {pipeline::Generator::Graph, pipeline::Generator::Aspect}) {
      pipeline::GenerateOptions o;
      o.arguments = dir / "a.csv";
      o.generator = gen;
      o.seed = spec.seed;
      o.out = dir / "first.csv";
      const auto start = Clock::now();
      const auto r = pipeline::run_generate(o);
      if (spec.topics * spec.per_group * 2 == 500) slowest = std::max(slowest, seconds_since(start));
      for (const auto& g : r.groups) {
        ++groups;
        if (g.emitted < std::min<std::size_t>(5, g.pool) || g.emitted > 10) ++bad_count;
      }
      for (const auto& kp : r.key_points) {
        ++emitted;
        const auto n = text::tokenize(kp.text).size();
        if (n < kp_graph::kMinTokens || n > kp_graph::kMaxTokens ||
            !kp_graph::passes_sentence_rules(kp.text, kp_graph::default_pronouns())) {
          ++bad_rule;
        }
      }
      o.out = dir / "second.csv";
      o.jobs = 1;
      pipeline::run_generate(o);
      if (slurp(dir / "first.csv") != slurp(dir / "second.csv")) ++not_identical;
    }
  }
  verdict(bad_count == 0 && bad_rule == 0 && not_identical == 0 && slowest < kGenerationSeconds,
          "generation-contract",
          std::to_string(groups) + " groups (graph + aspect): " + std::to_string(bad_count) +
              " outside [min(5,pool),10]; " + std::to_string(emitted) + " key points, " + std::to_string(bad_rule) +
              " breaking token/pronoun rules; " + std::to_string(not_identical) +
              " non-identical reruns; 500-argument run " + fmt(slowest) + " s (< " + fmt(kGenerationSeconds) + " s)");
}

double strict_map(const corpus::Dataset& d, const embedding::Encoder& enc, const matcher::Ensemble& e) {
  const auto preds = matcher::match_arguments(pipeline::score_all(d, enc, e));
  return evalkit::strict_relaxed_map(evalkit::group_predictions(preds, d), d).strict;
}

void learning_signal() {
  // Training corpus: 2 topics x 3 key points x 11 arguments, each argument
  // paired with the 3 key points of its topic = 198 pairs. Held-out corpus
  // from the same generator with a different seed.
  const embedding::LexicalEncoder enc({});
  int wins = 0;
  std::string detail;
  for (int seed = 0; seed < kLearningSeeds; ++seed) {
    const auto train = testing::separable_corpus(100 + seed, 11, "tr");
    const auto test = testing::separable_corpus(900 + seed, 20, "te");
    std::vector<matcher::TrainingPair> pairs;
    for (const auto& p : train.pairs()) {
      const auto* a = train.find_argument(p.argument_id);
      const auto* k = train.find_key_point(p.key_point_id);
      const auto [at, kt] = matcher::pair_inputs(*a, *k);
      pairs.push_back({enc.embed(a->id, at), enc.embed(k->id, kt), p.label == corpus::MatchLabel::Match ? 1 : 0});
    }
    matcher::TrainConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const auto head = matcher::train_projection(pairs, cfg);
    const double identity = strict_map(test, enc, {{matcher::ProjectionHead::identity(enc.dim())}});
    const double trained = strict_map(test, enc, {{head}});
    if (trained > identity) ++wins;
    detail += (detail.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) + " " + fmt(identity) + "->" +
              fmt(trained);
  }
  verdict(wins >= kLearningWins, "learning-signal",
          std::to_string(wins) + "/" + std::to_string(kLearningSeeds) + " seeds trained > identity (need " +
              std::to_string(kLearningWins) + "); held-out strict mAP " + detail);
}

std::optional<fs::path> env_dir(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return fs::path(v);
}

void dataset_statistics() {
  const auto dir = env_dir("KPA_ARGKP_DIR");
  if (!dir) {
    report("SKIP", "dataset-statistics",
           "public corpus not supplied; set KPA_ARGKP_DIR to the folder with {arguments,key_points,labels}_{train,dev}.csv");
    return;
  }
  const auto train = corpus::load_dataset(*dir / "arguments_train.csv", *dir / "key_points_train.csv",
                                          *dir / "labels_train.csv");
  const auto dev = corpus::load_dataset(*dir / "arguments_dev.csv", *dir / "key_points_dev.csv",
                                        *dir / "labels_dev.csv", corpus::Split::Validation);
  const auto s = corpus::dataset_stats(corpus::merge(train, dev));
  const bool ok = s.arguments == kArgKpArguments && s.key_points == kArgKpKeyPoints && s.pairs == kArgKpPairs &&
                  std::abs(s.match_rate - kArgKpMatchRate) <= kArgKpMatchRateTol;
  verdict(ok, "dataset-statistics",
          std::to_string(s.arguments) + " arguments, " + std::to_string(s.key_points) + " key points, " +
              std::to_string(s.pairs) + " pairs, " + fmt(100.0 * s.match_rate, 4) + "% matching (expected " +
              std::to_string(kArgKpArguments) + ", " + std::to_string(kArgKpKeyPoints) + ", " +
              std::to_string(kArgKpPairs) + ", 20.7% +/- 0.1pp)");
}

void real_embedding_map() {
  const auto dir = env_dir("KPA_ARGKP_TEST_DIR");
  const auto emb = env_dir("KPA_EMBEDDINGS");
  if (!dir || !emb) {
    report("SKIP", "real-embedding-map (informational)",
           "set KPA_ARGKP_TEST_DIR (arguments/key_points/labels_test.csv) and KPA_EMBEDDINGS (JSON Lines) to run");
    return;
  }
  const auto gold = corpus::load_dataset(*dir / "arguments_test.csv", *dir / "key_points_test.csv",
                                         *dir / "labels_test.csv", corpus::Split::Test);
  const embedding::PrecomputedEncoder enc(embedding::load_embeddings(*emb), emb->string());
  const auto preds = matcher::match_arguments(
      pipeline::score_all(gold, enc, {{matcher::ProjectionHead::identity(enc.dim())}}));
  const auto r = evalkit::strict_relaxed_map(evalkit::group_predictions(preds, gold), gold);
  verdict(r.strict >= kRealEmbeddingFloor, "real-embedding-map (informational)",
          "strict " + fmt(r.strict) + " (floor " + fmt(kRealEmbeddingFloor) + ", delta to 0.789: " +
              fmt(r.strict - pipeline::kReferenceStrictMap) + "), relaxed " + fmt(r.relaxed) + " (delta to 0.927: " +
              fmt(r.relaxed - pipeline::kReferenceRelaxedMap) + ")");
}

template <typename F>
void guarded(const char* name, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report("FAIL", name, std::string("threw: ") + e.what());
  }
}

}  // namespace

int main() {
  std::cout << "kernels: " << simd::name(simd::active_level()) << std::endl;
  guarded("gradient-check", gradient_check);
  guarded("ranking-fixed-point", ranking_fixed_point);
  guarded("map-oracle", map_oracle);
  guarded("rouge-oracles", rouge_oracles);
  guarded("greedy-set-cover", greedy_cover);
  guarded("generation-contract", generation_contract);
  guarded("learning-signal", learning_signal);
  guarded("dataset-statistics", dataset_statistics);
  guarded("real-embedding-map (informational)", real_embedding_map);
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << std::endl;
  return failures ? 1 : 0;
}
