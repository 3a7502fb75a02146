#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "kpa/error.hpp"
#include "kpa/kp_graph.hpp"
#include "oracles.hpp"
#include "scorers.hpp"
#include "tmpdir.hpp"

using namespace kpa;
using namespace kpa::kp_graph;
using testing::candidate;
using testing::TableScorer;

namespace {

/// Graph with explicit weights and qualities, bypassing build_graph.
KPGraph make_graph(const std::vector<std::vector<double>>& w, const std::vector<double>& q) {
  KPGraph g;
  const std::size_t n = q.size();
  for (std::size_t i = 0; i < n; ++i) g.nodes.push_back(candidate("n" + std::to_string(i)));
  g.quality = q;
  g.adjacency.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && w[i][j] > 0.0) g.adjacency[i].push_back({j, w[i][j]});
    }
  }
  return g;
}

}  // namespace

TEST_CASE("sentence rules") {
  const auto& pr = default_pronouns();
  CHECK_FALSE(passes_sentence_rules("It is clearly very bad today.", pr));
  CHECK_FALSE(passes_sentence_rules("Vaccines protect young children.", pr));
  CHECK(passes_sentence_rules("Vaccines protect all young children.", pr));
  CHECK_FALSE(passes_sentence_rules("\"They\" say vaccines are very harmful.", pr));
  std::string twenty, twentyone;
  for (int i = 0; i < 20; ++i) twenty += "word ";
  twentyone = twenty + "extra";
  CHECK(passes_sentence_rules(twenty, pr));
  CHECK_FALSE(passes_sentence_rules(twentyone, pr));
}

TEST_CASE("split and filter keeps ids and sources") {
  const std::vector<corpus::Argument> args{
      {"arg7", "It is a disaster for us all. Short one. Vaccines protect children from many diseases.", "T",
       corpus::Stance::Pro, 0.9}};
  const auto c = split_and_filter(args, default_pronouns());
  REQUIRE(c.size() == 1);
  CHECK(c[0].id == "arg7#2");
  CHECK(c[0].source_arg_id == "arg7");
  CHECK(c[0].token_count == 6);
  CHECK(c[0].quality == 0.9);
}

TEST_CASE("quality sidecar") {
  testing::TempDir dir;
  { std::ofstream(dir / "q.csv") << "sentence_id,quality\na#0,0.3\nb#1,0.95\n"; }
  const auto q = load_quality_sidecar(dir / "q.csv");
  CHECK(q.size() == 2);
  std::vector<SentenceCandidate> c{candidate("a#0", 0.9), candidate("x#0")};
  CHECK(apply_quality(c, q) == 1);
  CHECK(c[0].quality == 0.3);
  CHECK_FALSE(c[1].quality.has_value());
  { std::ofstream(dir / "bad.csv") << "sentence_id,quality\na#0,1.5\n"; }
  CHECK_THROWS_AS(load_quality_sidecar(dir / "bad.csv"), DataError);
}

TEST_CASE("edge threshold is inclusive") {
  const std::vector<SentenceCandidate> c{candidate("a"), candidate("b")};
  RankParams p;
  TableScorer below;
  below.set("a", "b", 0.39);
  CHECK(build_graph(c, below, p).edge_count() == 0);
  TableScorer at;
  at.set("a", "b", 0.40);
  const auto g = build_graph(c, at, p);
  CHECK(g.edge_count() == 1);
  CHECK(g.weight(0, 1) == 0.40);
  CHECK(g.weight(1, 0) == 0.40);
  TableScorer broken;
  broken.set("a", "b", 1.5);
  CHECK_THROWS_AS(build_graph(c, broken, p), NumericError);
}

TEST_CASE("quality filter") {
  RankParams p;
  TableScorer s;
  const auto g = build_graph(std::vector<SentenceCandidate>{candidate("a", 0.9), candidate("b", 0.7)}, s, p);
  CHECK(g.nodes.size() == 1);
  CHECK(g.quality_filter_applied);
  const auto u = build_graph(std::vector<SentenceCandidate>{candidate("a"), candidate("b")}, s, p);
  CHECK(u.nodes.size() == 2);
  CHECK_FALSE(u.quality_filter_applied);
  CHECK(u.quality == std::vector<double>{1.0, 1.0});
  const auto m = build_graph(std::vector<SentenceCandidate>{candidate("a", 0.9), candidate("b"), candidate("c", 0.8)}, s, p);
  CHECK(m.nodes.size() == 3);
  CHECK(m.quality[1] == doctest::Approx(0.85));
}

TEST_CASE("rank closed forms") {
  RankParams p;
  SUBCASE("isolated nodes") {
    const auto g = make_graph({{0, 0}, {0, 0}}, {3.0, 1.0});
    const auto r = rank(g, p);
    CHECK(r.scores[0] == p.d * 3.0 / 4.0);
    CHECK(r.scores[1] == p.d * 1.0 / 4.0);
    CHECK(r.scores[0] == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(r.scores[1] == doctest::Approx(0.05).epsilon(1e-15));
  }
  SUBCASE("complete uniform graph") {
    for (std::size_t n : {2u, 5u, 37u}) {
      std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.6));
      const auto r = rank(make_graph(w, std::vector<double>(n, 0.9)), p);
      for (double s : r.scores) CHECK(std::abs(s - 1.0 / static_cast<double>(n)) <= 1e-9);
    }
  }
  SUBCASE("path graph against long-run iteration") {
    const std::vector<std::vector<double>> w{{0, 0.5, 0}, {0.5, 0, 0.5}, {0, 0.5, 0}};
    const std::vector<double> q{1, 1, 1};
    const auto r = rank(make_graph(w, q), p);
    const auto ref = oracle::long_run_rank(w, q, p.d, 10000);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(r.scores[i] - ref[i]) <= 1e-8);
    CHECK(r.residual < p.tol);
  }
  SUBCASE("no quality mass") {
    CHECK_THROWS_AS(rank(make_graph({{0, 1}, {1, 0}}, {0.0, 0.0}), p), NumericError);
  }
}

TEST_CASE("rank properties on random graphs") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RankParams p;
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (u(rng) < 0.3) w[i][j] = w[j][i] = 0.4 + 0.6 * u(rng);
      }
      const std::size_t j = (i + 1) % n;  // a ring keeps every node connected
      if (w[i][j] == 0.0) w[i][j] = w[j][i] = 0.4 + 0.6 * u(rng);
    }
    std::vector<double> q(n);
    for (auto& x : q) x = 0.05 + u(rng);
    const auto r = rank(make_graph(w, q), p);
    for (double m : r.mass_history) CHECK(std::abs(m - 1.0) <= 1e-9);
    for (std::size_t k = 1; k < r.residual_history.size(); ++k) {
      CHECK(r.residual_history[k] <= (1.0 - p.d) * r.residual_history[k - 1] + 1e-12);
    }
    auto q2 = q;
    for (auto& x : q2) x *= 7.5;
    const auto r2 = rank(make_graph(w, q2), p);
    for (std::size_t i = 0; i < n; ++i) CHECK(r2.scores[i] == doctest::Approx(r.scores[i]).epsilon(1e-12));
    const auto ref = oracle::long_run_rank(w, q, p.d, 500);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(r.scores[i] - ref[i]) <= 1e-8);
  }
}

TEST_CASE("select key points") {
  RankParams p;
  SUBCASE("mutually redundant candidates") {
    TableScorer s(0.9);
    const auto g = make_graph({{0, 0.9, 0.9}, {0.9, 0, 0.9}, {0.9, 0.9, 0}}, {1, 1, 1});
    RankResult r;
    r.scores = {0.2, 0.5, 0.3};
    auto one = p;
    one.k_min = 1;
    const auto a = select_key_points(r, g, s, one);
    REQUIRE(a.size() == 1);
    CHECK(a[0].candidate.id == "n1");
    const auto b = select_key_points(r, g, s, p);
    REQUIRE(b.size() == 3);
    CHECK(b[1].candidate.id == "n2");
    CHECK(b[2].candidate.id == "n0");
  }
  SUBCASE("cap at k_max") {
    TableScorer s(0.1);
    std::vector<std::vector<double>> w(12, std::vector<double>(12, 0.0));
    const auto g = make_graph(w, std::vector<double>(12, 1.0));
    RankResult r;
    for (int i = 0; i < 12; ++i) r.scores.push_back(1.0 / (i + 1));
    CHECK(select_key_points(r, g, s, p).size() == 10);
  }
  SUBCASE("hand trace") {
    // scores: n0 .4, n1 .3, n2 .2, n3 .1
    // n0 admitted; n1 vs n0 .85 -> rejected; n2 vs n0 .5 -> admitted;
    // n3 vs n2 .9 -> rejected. Backfill to k_min=3 adds n1.
    TableScorer s(0.0);
    s.set("n0", "n1", 0.85);
    s.set("n0", "n2", 0.5);
    s.set("n0", "n3", 0.2);
    s.set("n1", "n2", 0.3);
    s.set("n2", "n3", 0.9);
    std::vector<std::vector<double>> w(4, std::vector<double>(4, 0.0));
    const auto g = make_graph(w, {1, 1, 1, 1});
    RankResult r;
    r.scores = {0.4, 0.3, 0.2, 0.1};
    auto q = p;
    q.k_min = 3;
    const auto out = select_key_points(r, g, s, q);
    REQUIRE(out.size() == 3);
    CHECK(out[0].candidate.id == "n0");
    CHECK(out[1].candidate.id == "n2");
    CHECK(out[2].candidate.id == "n1");
    CHECK(out[2].score == 0.3);
  }
}

TEST_CASE("key point file") {
  CHECK(key_point_id("Routine child vaccinations should be mandatory", corpus::Stance::Con, 3) ==
        "kp_routine-child-vaccinations-should-be-mandatory_con_3");
  testing::TempDir dir;
  const std::vector<GeneratedKeyPoint> kps{{"kp_t_pro_1", "Text, with \"comma\"", "T", corpus::Stance::Pro, 0.125},
                                           {"kp_t_con_1", "Other text", "T", corpus::Stance::Con, 0.0625}};
  const std::vector<std::string> comments{"generator=graph", "seed=3"};
  {
    std::ofstream out(dir / "k.csv");
    write_key_points(out, kps, comments);
  }
  CHECK(read_key_points(dir / "k.csv") == kps);
  std::ifstream in(dir / "k.csv");
  std::string first;
  std::getline(in, first);
  CHECK(first == "# generator=graph");
}
