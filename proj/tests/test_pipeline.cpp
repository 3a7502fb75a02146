#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "kpa/error.hpp"
#include "kpa/matcher.hpp"
#include "kpa/pipeline.hpp"
#include "kpa/text.hpp"
#include "synthetic.hpp"
#include "tmpdir.hpp"

using namespace kpa;
using namespace kpa::pipeline;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

DataPaths save(const corpus::Dataset& d, const testing::TempDir& dir) {
  corpus::save_dataset(d, dir / "arguments.csv", dir / "key_points.csv", dir / "labels.csv");
  return {dir / "arguments.csv", dir / "key_points.csv", dir / "labels.csv"};
}

corpus::Dataset three_topics() {
  auto base = testing::separable_corpus(1, 2, "x");
  auto args = base.arguments();
  args.push_back({"extra", "a third topic argument text", "Third topic", corpus::Stance::Pro, {}});
  auto kps = base.key_points();
  kps.push_back({"kp_extra", "third topic key point", "Third topic", corpus::Stance::Pro});
  auto pairs = base.pairs();
  pairs.push_back({"extra", "kp_extra", corpus::MatchLabel::Match});
  return corpus::Dataset(args, kps, pairs);
}

}  // namespace

TEST_CASE("train") {
  testing::TempDir dir;
  TrainOptions o;
  o.data = save(three_topics(), dir);
  o.encoder.lexical.dim = 32;
  o.train.epochs = 2;
  o.seed = 5;
  o.jobs = 2;
  SUBCASE("more folds than topics") {
    o.folds = 5;
    o.out_dir = dir / "m5";
    CHECK_THROWS_AS(run_train(o), DataError);
  }
  SUBCASE("single fold") {
    o.folds = 1;
    o.out_dir = dir / "m1";
    const auto s = run_train(o);
    CHECK(s.model_files.size() == 1);
    CHECK(load_manifest(s.manifest).members.size() == 1);
    CHECK(load_manifest(s.manifest).seed == 5);
    CHECK(fs::exists(dir / "m1" / "train_log.json"));
  }
  SUBCASE("two-fold ensemble scores are fold means") {
    o.folds = 2;
    o.out_dir = dir / "m2";
    const auto s = run_train(o);
    REQUIRE(s.model_files.size() == 2);
    const auto e = load_ensemble(s.manifest);
    const auto h0 = matcher::load_head(s.model_files[0]).head;
    const auto h1 = matcher::load_head(s.model_files[1]).head;
    CHECK_FALSE(h0 == h1);
    const auto d = corpus::load_dataset(o.data.arguments, o.data.key_points, o.data.labels);
    const auto enc = make_encoder(o.encoder);
    const auto table = score_all(d, *enc, e);
    for (const auto& [arg_id, row] : table) {
      const auto* a = d.find_argument(arg_id);
      const auto ea = enc->embed(a->id, a->text);
      for (const auto& [kp_id, score] : row) {
        const auto* k = d.find_key_point(kp_id);
        const auto ek = enc->embed(k->id, matcher::pair_inputs(*a, *k).second);
        const double mean = 0.5 * (matcher::score_pair(h0, ea, ek) + matcher::score_pair(h1, ea, ek));
        CHECK(score == doctest::Approx(mean).epsilon(1e-12));
      }
    }
    // reruns are reproducible
    o.out_dir = dir / "m2b";
    const auto again = run_train(o);
    CHECK(slurp(again.model_files[0]) == slurp(s.model_files[0]));
  }
}

TEST_CASE("match") {
  testing::TempDir dir;
  MatchOptions o;
  o.data = save(testing::separable_corpus(2, 2, "m"), dir);
  o.encoder.lexical.dim = 32;
  o.out = dir / "pred.json";
  const auto table = run_match(o);
  const auto d = corpus::load_dataset(o.data.arguments, o.data.key_points);
  CHECK(table.size() == d.arguments().size());
  for (const auto& [arg, row] : table) CHECK(row.size() == 3);
  CHECK(matcher::load_scores(o.out) == table);
  const auto meta = nlohmann::json::parse(slurp(dir / "pred.meta.json"));
  CHECK(meta["manifest"] == "identity");

  const corpus::Dataset lonely({{"a1", "text", "T", corpus::Stance::Pro, {}}, {"a2", "text", "T", corpus::Stance::Con, {}}},
                               {{"k1", "key point", "T", corpus::Stance::Pro}}, {});
  const embedding::LexicalEncoder enc(o.encoder.lexical);
  try {
    score_all(lonely, enc, {{matcher::ProjectionHead::identity(32)}});
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("a2") != std::string::npos);
  }
}

TEST_CASE("graph generation contract") {
  const auto d = testing::generation_corpus(3, 3, 12);
  GenerateOptions o;
  o.encoder.lexical.dim = 64;
  o.jobs = 1;
  const auto r = generate(d, o);
  CHECK(r.groups.size() == 6);
  for (const auto& g : r.groups) {
    CHECK(g.emitted >= std::min<std::size_t>(5, g.pool));
    CHECK(g.emitted <= 10);
  }
  for (const auto& kp : r.key_points) {
    const auto n = text::tokenize(kp.text).size();
    CHECK(n >= 5);
    CHECK(n <= 20);
    CHECK(kp_graph::passes_sentence_rules(kp.text, kp_graph::default_pronouns()));
  }
  auto o4 = o;
  o4.jobs = 4;
  const auto r4 = generate(d, o4);
  CHECK(r4.key_points == r.key_points);
  CHECK(r4.metadata == r.metadata);
}

TEST_CASE("generation writes identical files on rerun") {
  testing::TempDir dir;
  corpus::save_dataset(testing::generation_corpus(4, 2, 10), dir / "a.csv", dir / "k.csv", dir / "l.csv");
  for (const auto gen : {Generator::Graph, Generator::Aspect}) {
    GenerateOptions o;
    o.arguments = dir / "a.csv";
    o.generator = gen;
    o.encoder.lexical.dim = 64;
    o.seed = 11;
    o.out = dir / "g1.csv";
    run_generate(o);
    o.out = dir / "g2.csv";
    o.jobs = 3;
    run_generate(o);
    const auto first = slurp(dir / "g1.csv");
    CHECK(first == slurp(dir / "g2.csv"));
    CHECK(first.find("# seed=11") != std::string::npos);
    CHECK(kp_graph::read_key_points(dir / "g1.csv").size() > 0);
  }
}

TEST_CASE("groups without candidates are reported, not fatal") {
  const corpus::Dataset d({{"a1", "Too short.", "T", corpus::Stance::Pro, {}},
                           {"a2", "Vaccines protect children from many serious diseases.", "T", corpus::Stance::Con, {}}},
                          {}, {});
  GenerateOptions o;
  o.encoder.lexical.dim = 32;
  const auto r = generate(d, o);
  CHECK(r.failed_groups == 1);
  CHECK(r.key_points.size() == 1);
  CHECK(r.key_points[0].stance == corpus::Stance::Con);
  bool noted = false;
  for (const auto& m : r.metadata) noted = noted || m.find("failed_groups=1") != std::string::npos;
  CHECK(noted);
}

TEST_CASE("aspect generator hand trace") {
  // Aspect clusters: {public health}, {money}, {freedom}. Sentence coverage:
  // a1#0 -> {public health, money}, a2#0 -> {public health}, a3#0 -> {freedom}.
  // Greedy: a1#0 (2 new), a3#0 (1 new), full coverage. Backfill to k_min adds
  // a2#0.
  testing::TempDir dir;
  const corpus::Dataset d({{"a1", "Vaccines protect public health and save money.", "T", corpus::Stance::Pro, {}},
                           {"a2", "Public health improves when vaccines reach everyone.", "T", corpus::Stance::Pro, {}},
                           {"a3", "Freedom of choice belongs to every single parent.", "T", corpus::Stance::Pro, {}}},
                          {}, {});
  { std::ofstream(dir / "asp.csv") << "arg_id,aspect\na1,public health\na1,money\na2,public health\na3,freedom\n"; }
  GenerateOptions o;
  o.generator = Generator::Aspect;
  o.aspects = dir / "asp.csv";
  o.encoder.lexical.dim = 64;
  const auto r = generate(d, o);
  REQUIRE(r.key_points.size() == 3);
  CHECK(r.key_points[0].text == "Vaccines protect public health and save money.");
  CHECK(r.key_points[1].text == "Freedom of choice belongs to every single parent.");
  CHECK(r.key_points[2].text == "Public health improves when vaccines reach everyone.");
  CHECK(r.key_points[0].id == "kp_t_pro_1");
}

TEST_CASE("evaluate") {
  auto base = testing::separable_corpus(3, 2, "e");
  matcher::ScoreTable perfect;
  for (const auto& p : base.pairs()) perfect[p.argument_id][p.key_point_id] = p.label == corpus::MatchLabel::Match ? 0.9 : 0.1;
  std::vector<kp_graph::GeneratedKeyPoint> gold_kps;
  for (const auto& k : base.key_points()) gold_kps.push_back({k.id, k.text, k.topic, k.stance, 1.0});
  const auto report = evaluate(base, perfect, gold_kps, 0.5);
  CHECK(report["matching"]["strict_map"] == 1.0);
  CHECK(report["matching"]["relaxed_map"] == 1.0);
  CHECK(report["matching"]["delta"]["strict_map"].get<double>() == doctest::Approx(1.0 - 0.789));
  CHECK(report["generation"]["rouge1"] == 1.0);
  CHECK(report["generation"]["rouge2"] == 1.0);
  CHECK(report["generation"]["rougeL"] == 1.0);
  CHECK(report["config"]["tokenizer"] == "lower-ws-strip-punct-v1");
  matcher::ScoreTable stray = perfect;
  stray["nobody"]["kp_0_0"] = 0.5;
  CHECK_THROWS_AS(evaluate(base, stray, std::nullopt, 0.5), DataError);
}

#ifdef KPA_CLI_PATH
namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(KPA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("command line") {
  testing::TempDir dir;
  save(testing::separable_corpus(4, 2, "c"), dir);
  const std::string inputs =
      "--arguments " + (dir / "arguments.csv").string() + " --key-points " + (dir / "key_points.csv").string();
  const std::string data = inputs + " --labels " + (dir / "labels.csv").string();
  CHECK(run("--help") == 0);
  CHECK(run("stats " + data) == 0);
  CHECK(run("train " + data + " --folds 2 --epochs 1 --dim 32 --out " + (dir / "model").string()) == 0);
  CHECK(fs::exists(dir / "model" / "manifest.json"));
  CHECK(run("match " + inputs + " --dim 32 --model " + (dir / "model" / "manifest.json").string() + " --out " +
            (dir / "pred.json").string()) == 0);
  CHECK(run("--simd scalar generate --arguments " + (dir / "arguments.csv").string() + " --dim 32 --out " +
            (dir / "gen.csv").string()) == 0);
  CHECK(run("evaluate " + data + " --predictions " + (dir / "pred.json").string() + " --generated " +
            (dir / "gen.csv").string() + " --out " + (dir / "report.json").string()) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report.contains("matching"));
  CHECK(report.contains("generation"));
  CHECK(run("train " + data + " --folds 5 --out " + (dir / "bad").string()) == 1);
  CHECK(run("stats --arguments " + (dir / "missing.csv").string()) != 0);
}
#endif
