// kpa: key point analysis toolkit.
//
//   kpa train     --labels ... --folds 5 --out models/
//   kpa match     --model models/manifest.json --out predictions.json
//   kpa generate  --generator graph --out key_points_generated.csv
//   kpa evaluate  --predictions predictions.json --generated kps.csv --out report.json
//   kpa stats
//
// Data paths default to $KPA_DATA_DIR/{arguments,key_points,labels}.csv.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "kpa/corpus.hpp"
#include "kpa/error.hpp"
#include "kpa/pipeline.hpp"
#include "kpa/simd.hpp"

namespace fs = std::filesystem;
using namespace kpa;

namespace {

struct DataFlags {
  std::string arguments;
  std::string key_points;
  std::string labels;
};

fs::path default_path(const std::string& given, const char* file) {
  if (!given.empty()) return given;
  if (const char* dir = std::getenv("KPA_DATA_DIR")) return fs::path(dir) / file;
  throw Error(std::string("no path given for ") + file + " and KPA_DATA_DIR is not set");
}

pipeline::DataPaths resolve(const DataFlags& f, bool need_labels, bool want_labels) {
  pipeline::DataPaths p;
  p.arguments = default_path(f.arguments, "arguments.csv");
  p.key_points = default_path(f.key_points, "key_points.csv");
  if (!f.labels.empty()) {
    p.labels = f.labels;
  } else if (want_labels) {
    if (const char* dir = std::getenv("KPA_DATA_DIR"); dir && fs::exists(fs::path(dir) / "labels.csv")) {
      p.labels = fs::path(dir) / "labels.csv";
    }
  }
  if (need_labels && !p.labels) throw Error("a labels file is required (--labels or KPA_DATA_DIR/labels.csv)");
  return p;
}

void add_data_flags(CLI::App* cmd, DataFlags& f, bool with_key_points = true, bool with_labels = true) {
  cmd->add_option("--arguments", f.arguments, "arguments CSV: arg_id,argument,topic,stance[,quality]")
      ->check(CLI::ExistingFile);
  if (with_key_points) {
    cmd->add_option("--key-points", f.key_points, "key points CSV: key_point_id,key_point,topic,stance")
        ->check(CLI::ExistingFile);
  }
  if (with_labels) {
    cmd->add_option("--labels", f.labels, "labels CSV: arg_id,key_point_id,label[,ambiguous]")
        ->check(CLI::ExistingFile);
  }
}

void add_encoder_flags(CLI::App* cmd, std::string& embeddings, embedding::EncoderConfig& lex) {
  cmd->add_option("--embeddings", embeddings, "precomputed embeddings (JSON Lines); lexical encoder when omitted")
      ->check(CLI::ExistingFile);
  cmd->add_option("--dim", lex.dim, "lexical encoder dimension")->capture_default_str();
  cmd->add_option("--ngram-min", lex.ngram_min, "lexical encoder shortest character n-gram")->capture_default_str();
  cmd->add_option("--ngram-max", lex.ngram_max, "lexical encoder longest character n-gram")->capture_default_str();
  cmd->add_option("--encoder-seed", lex.seed, "lexical encoder hashing seed")->capture_default_str();
}

pipeline::EncoderOptions encoder_options(const std::string& embeddings, const embedding::EncoderConfig& lex) {
  pipeline::EncoderOptions e;
  if (!embeddings.empty()) e.embeddings = embeddings;
  e.lexical = lex;
  return e;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Key point analysis: argument/key point matching, key point generation and evaluation"};
  app.require_subcommand(1);
  std::string simd_level;
  app.add_option("--simd", simd_level, "kernel variant: scalar or avx2 (default: best available)");

  // train
  auto* train = app.add_subcommand("train", "train projection heads over topic folds");
  DataFlags train_data;
  std::string train_emb;
  embedding::EncoderConfig train_lex;
  pipeline::TrainOptions train_opts;
  std::string train_out = "models";
  add_data_flags(train, train_data);
  add_encoder_flags(train, train_emb, train_lex);
  train->add_option("--folds", train_opts.folds, "topic folds; one head per fold")->capture_default_str();
  train->add_option("--epochs", train_opts.train.epochs, "epochs per head")->capture_default_str();
  train->add_option("--batch-size", train_opts.train.batch_size, "mini-batch size")->capture_default_str();
  train->add_option("--lr", train_opts.train.learning_rate, "learning rate")->capture_default_str();
  train->add_option("--clamp-epsilon", train_opts.train.clamp_epsilon, "score clamp for the loss")
      ->capture_default_str();
  train->add_option("--seed", train_opts.seed, "seed for folds, initialization and shuffling")->capture_default_str();
  train->add_option("--jobs", train_opts.jobs, "worker threads (0 = all cores)")->capture_default_str();
  train->add_option("--out", train_out, "output directory")->capture_default_str();

  // match
  auto* match = app.add_subcommand("match", "score arguments against same-topic same-stance key points");
  DataFlags match_data;
  std::string match_emb;
  embedding::EncoderConfig match_lex;
  std::string match_model;
  std::string match_out = "predictions.json";
  add_data_flags(match, match_data, true, false);
  add_encoder_flags(match, match_emb, match_lex);
  match->add_option("--model", match_model, "ensemble manifest from `train` (identity projection when omitted)")
      ->check(CLI::ExistingFile);
  match->add_option("--out", match_out, "predictions JSON")->capture_default_str();

  // generate
  auto* gen = app.add_subcommand("generate", "generate key points per topic and stance");
  DataFlags gen_data;
  std::string gen_emb;
  embedding::EncoderConfig gen_lex;
  std::string gen_model;
  std::string gen_quality;
  std::string gen_aspects;
  std::string gen_kind = "graph";
  std::string gen_out = "key_points_generated.csv";
  pipeline::GenerateOptions gen_opts;
  add_data_flags(gen, gen_data, false, false);
  add_encoder_flags(gen, gen_emb, gen_lex);
  gen->add_option("--model", gen_model, "ensemble manifest used as the sentence scorer")->check(CLI::ExistingFile);
  gen->add_option("--generator", gen_kind, "graph or aspect")
      ->check(CLI::IsMember({"graph", "aspect"}))
      ->capture_default_str();
  gen->add_option("--quality", gen_quality, "sentence quality sidecar CSV: sentence_id,quality")
      ->check(CLI::ExistingFile);
  gen->add_option("--aspects", gen_aspects, "aspect CSV: arg_id,aspect (heuristic aspects when omitted)")
      ->check(CLI::ExistingFile);
  gen->add_option("--d", gen_opts.rank.d, "damping factor towards the quality prior")->capture_default_str();
  gen->add_option("--quality-threshold", gen_opts.rank.quality_threshold, "minimum sentence quality")
      ->capture_default_str();
  gen->add_option("--match-threshold", gen_opts.rank.match_threshold, "minimum score for a graph edge")
      ->capture_default_str();
  gen->add_option("--redundancy-threshold", gen_opts.rank.redundancy_threshold,
                  "reject a sentence scoring at least this against a selected one")
      ->capture_default_str();
  gen->add_option("--max-iters", gen_opts.rank.max_iters, "ranking iteration cap")->capture_default_str();
  gen->add_option("--tol", gen_opts.rank.tol, "ranking L1 convergence tolerance")->capture_default_str();
  gen->add_option("--k-min", gen_opts.rank.k_min, "minimum key points per group")->capture_default_str();
  gen->add_option("--k-max", gen_opts.rank.k_max, "maximum key points per group")->capture_default_str();
  gen->add_option("--clusters", gen_opts.clusters, "aspect clusters per group")->capture_default_str();
  gen->add_option("--dedup-threshold", gen_opts.dedup_threshold, "aspect generator redundancy threshold")
      ->capture_default_str();
  gen->add_option("--seed", gen_opts.seed, "clustering seed")->capture_default_str();
  gen->add_option("--jobs", gen_opts.jobs, "worker threads (0 = all cores)")->capture_default_str();
  gen->add_option("--out", gen_out, "output CSV")->capture_default_str();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "strict/relaxed mAP and ROUGE against gold data");
  DataFlags eval_data;
  std::string eval_pred;
  std::string eval_gen;
  std::string eval_out;
  double keep_fraction = 0.5;
  add_data_flags(eval, eval_data);
  eval->add_option("--predictions", eval_pred, "predictions JSON from `match`")->check(CLI::ExistingFile);
  eval->add_option("--generated", eval_gen, "key point CSV from `generate`")->check(CLI::ExistingFile);
  eval->add_option("--keep-fraction", keep_fraction, "fraction of most confident predictions kept per group")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  eval->add_option("--out", eval_out, "report JSON (stdout when omitted)");

  // stats
  auto* stats = app.add_subcommand("stats", "dataset statistics");
  DataFlags stats_data;
  add_data_flags(stats, stats_data);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!simd_level.empty()) simd::set_active_level(simd::parse_level(simd_level));

    if (*train) {
      train_opts.data = resolve(train_data, true, true);
      train_opts.encoder = encoder_options(train_emb, train_lex);
      train_opts.out_dir = train_out;
      const auto summary = pipeline::run_train(train_opts);
      for (std::size_t f = 0; f < summary.logs.size(); ++f) {
        const auto& log = summary.logs[f];
        std::cerr << "fold " << f << ": loss " << log.epoch_loss.front() << " -> " << log.epoch_loss[log.best_epoch]
                  << " (best epoch " << log.best_epoch << ")\n";
      }
      std::cout << summary.manifest.string() << '\n';
    } else if (*match) {
      pipeline::MatchOptions opts;
      opts.data = resolve(match_data, false, false);
      opts.encoder = encoder_options(match_emb, match_lex);
      if (!match_model.empty()) opts.manifest = match_model;
      opts.out = match_out;
      const auto scores = pipeline::run_match(opts);
      std::cerr << "scored " << scores.size() << " arguments\n";
      std::cout << opts.out.string() << '\n';
    } else if (*gen) {
      gen_opts.arguments = default_path(gen_data.arguments, "arguments.csv");
      gen_opts.encoder = encoder_options(gen_emb, gen_lex);
      if (!gen_model.empty()) gen_opts.manifest = gen_model;
      if (!gen_quality.empty()) gen_opts.quality = gen_quality;
      if (!gen_aspects.empty()) gen_opts.aspects = gen_aspects;
      gen_opts.generator = gen_kind == "aspect" ? pipeline::Generator::Aspect : pipeline::Generator::Graph;
      gen_opts.out = gen_out;
      const auto result = pipeline::run_generate(gen_opts);
      for (const auto& g : result.groups) {
        if (!g.warning.empty()) {
          std::cerr << "warning: " << g.group.topic << " / " << corpus::stance_name(g.group.stance) << ": "
                    << g.warning << '\n';
        }
      }
      std::cerr << result.key_points.size() << " key points for " << result.groups.size() << " groups ("
                << result.failed_groups << " failed)\n";
      std::cout << gen_out << '\n';
    } else if (*eval) {
      pipeline::EvaluateOptions opts;
      opts.gold = resolve(eval_data, false, true);
      if (!eval_pred.empty()) opts.predictions = eval_pred;
      if (!eval_gen.empty()) opts.generated = eval_gen;
      if (!eval_out.empty()) opts.out = eval_out;
      opts.keep_fraction = keep_fraction;
      const auto report = pipeline::run_evaluate(opts);
      if (report.contains("matching")) {
        const auto& m = report["matching"];
        std::cerr << "strict mAP " << m["strict_map"].get<double>() << " (delta "
                  << m["delta"]["strict_map"].get<double>() << " vs " << pipeline::kReferenceStrictMap
                  << "), relaxed mAP " << m["relaxed_map"].get<double>() << " (delta "
                  << m["delta"]["relaxed_map"].get<double>() << " vs " << pipeline::kReferenceRelaxedMap << ")\n";
      }
      if (report.contains("generation")) {
        const auto& g = report["generation"];
        std::cerr << "ROUGE-1 " << g["rouge1"].get<double>() << ", ROUGE-2 " << g["rouge2"].get<double>()
                  << ", ROUGE-L " << g["rougeL"].get<double>() << '\n';
      }
      if (!opts.out) std::cout << report.dump(2) << '\n';
    } else if (*stats) {
      const auto d = corpus::load_dataset(default_path(stats_data.arguments, "arguments.csv"),
                                          default_path(stats_data.key_points, "key_points.csv"),
                                          resolve(stats_data, false, true).labels);
      std::cout << pipeline::stats_json(corpus::dataset_stats(d)).dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
