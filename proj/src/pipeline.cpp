#include "kpa/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "kpa/error.hpp"
#include "kpa/kp_aspect.hpp"
#include "kpa/simd.hpp"

namespace kpa::pipeline {

namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(10);
  ss << v;
  return ss.str();
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << j.dump(2) << '\n';
}

corpus::Dataset load(const DataPaths& p) {
  return corpus::load_dataset(p.arguments, p.key_points, p.labels);
}

matcher::Ensemble ensemble_or_identity(const std::optional<fs::path>& manifest, std::size_t dim) {
  if (manifest) return load_ensemble(*manifest);
  matcher::Ensemble e;
  e.members.push_back(matcher::ProjectionHead::identity(dim));
  return e;
}

void check_dims(const matcher::Ensemble& e, std::size_t dim) {
  for (const auto& m : e.members) {
    if (m.dim_in() != dim) {
      throw DataError("model expects embeddings of dim " + std::to_string(m.dim_in()) + " but encoder produces " +
                      std::to_string(dim));
    }
  }
}

// Unit-norm projections of a vector under every ensemble member.
std::vector<double> project_all(const matcher::Ensemble& e, const embedding::EmbeddingVector& v) {
  std::vector<double> out;
  for (const auto& m : e.members) {
    auto p = m.project(v.values());
    const double n = std::sqrt(simd::dot(p, p));
    if (n == 0.0) throw NumericError("projected embedding is zero");
    for (double& x : p) x /= n;
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

double mean_score(const matcher::Ensemble& e, const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  std::size_t off = 0;
  for (const auto& m : e.members) {
    const std::size_t dim = m.dim_out();
    const double c = std::clamp(
        simd::dot(std::span<const double>(a.data() + off, dim), std::span<const double>(b.data() + off, dim)), -1.0,
        1.0);
    sum += 0.5 * (1.0 + c);
    off += dim;
  }
  return sum / static_cast<double>(e.members.size());
}

std::string encoder_text(const corpus::KeyPoint& k) { return k.topic + " " + k.text; }

}  // namespace

std::unique_ptr<embedding::Encoder> make_encoder(const EncoderOptions& opts) {
  if (opts.embeddings) {
    return std::make_unique<embedding::PrecomputedEncoder>(embedding::load_embeddings(*opts.embeddings),
                                                           opts.embeddings->filename().string());
  }
  return std::make_unique<embedding::LexicalEncoder>(opts.lexical);
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(jobs, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

// ---- train ---------------------------------------------------------------

TrainSummary run_train(const TrainOptions& opts) {
  if (!opts.data.labels) throw DataError("train: a labels file is required");
  const corpus::Dataset d = load(opts.data);
  const auto encoder = make_encoder(opts.encoder);

  std::map<std::string, embedding::EmbeddingVector> arg_vec;
  std::map<std::string, embedding::EmbeddingVector> kp_vec;
  struct Labeled {
    std::string topic;
    matcher::TrainingPair pair;
  };
  std::vector<Labeled> all;
  for (const auto& p : d.pairs()) {
    if (p.label == corpus::MatchLabel::Ambiguous) continue;
    const corpus::Argument& a = *d.find_argument(p.argument_id);
    const corpus::KeyPoint& k = *d.find_key_point(p.key_point_id);
    const auto [arg_text, kp_text] = matcher::pair_inputs(a, k);
    auto ai = arg_vec.find(a.id);
    if (ai == arg_vec.end()) ai = arg_vec.emplace(a.id, encoder->embed(a.id, arg_text)).first;
    auto ki = kp_vec.find(k.id);
    if (ki == kp_vec.end()) ki = kp_vec.emplace(k.id, encoder->embed(k.id, kp_text)).first;
    all.push_back({a.topic, {ai->second, ki->second, p.label == corpus::MatchLabel::Match ? 1 : 0}});
  }
  if (all.empty()) throw DataError("train: no Match/NoMatch pairs to train on");

  std::set<std::string> topics;
  for (const auto& l : all) topics.insert(l.topic);
  TrainSummary summary;
  if (opts.folds == 1) {
    for (const auto& t : topics) summary.fold_of_topic[t] = 0;
  } else {
    summary.fold_of_topic = matcher::assign_folds(topics, opts.folds, opts.seed);
  }

  const auto folds = static_cast<std::size_t>(opts.folds);
  std::vector<std::optional<matcher::ProjectionHead>> heads(folds);
  summary.logs.resize(folds);
  parallel_for(folds, opts.jobs, [&](std::size_t f) {
    std::vector<matcher::TrainingPair> pairs;
    for (const auto& l : all) {
      if (folds == 1 || summary.fold_of_topic.at(l.topic) != static_cast<int>(f)) pairs.push_back(l.pair);
    }
    matcher::TrainConfig cfg = opts.train;
    cfg.seed = opts.seed + f;
    heads[f] = matcher::train_projection(pairs, cfg, &summary.logs[f]);
  });

  fs::create_directories(opts.out_dir);
  nlohmann::json manifest;
  manifest["members"] = nlohmann::json::array();
  nlohmann::json log = nlohmann::json::array();
  for (std::size_t f = 0; f < folds; ++f) {
    const fs::path file = opts.out_dir / ("model_fold" + std::to_string(f) + ".json");
    matcher::save_head(file, {*heads[f], opts.seed + f, static_cast<int>(f)});
    summary.model_files.push_back(file);
    manifest["members"].push_back(file.filename().string());
    log.push_back({{"fold", f},
                   {"epoch_loss", summary.logs[f].epoch_loss},
                   {"best_epoch", summary.logs[f].best_epoch}});
  }
  manifest["seed"] = opts.seed;
  manifest["folds"] = summary.fold_of_topic;
  manifest["encoder"] = encoder->describe();
  manifest["dim"] = encoder->dim();
  manifest["train"] = {{"epochs", opts.train.epochs},
                       {"batch_size", opts.train.batch_size},
                       {"learning_rate", opts.train.learning_rate},
                       {"clamp_epsilon", opts.train.clamp_epsilon}};
  summary.manifest = opts.out_dir / "manifest.json";
  write_json(summary.manifest, manifest);
  write_json(opts.out_dir / "train_log.json", {{"seed", opts.seed}, {"folds", log}});
  return summary;
}

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open model manifest");
  Manifest m;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& member : j.at("members")) {
      fs::path p = member.get<std::string>();
      if (p.is_relative()) p = path.parent_path() / p;
      m.members.push_back(p);
    }
    m.seed = j.value("seed", std::uint64_t{0});
    m.encoder = j.value("encoder", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": invalid manifest: " + e.what());
  }
  if (m.members.empty()) throw DataError(path.string() + ": manifest lists no models");
  return m;
}

matcher::Ensemble load_ensemble(const fs::path& manifest_path) {
  matcher::Ensemble e;
  for (const auto& file : load_manifest(manifest_path).members) e.members.push_back(matcher::load_head(file).head);
  for (const auto& m : e.members) {
    if (m.dim_in() != e.members.front().dim_in() || m.dim_out() != e.members.front().dim_out()) {
      throw DataError(manifest_path.string() + ": ensemble members have different dims");
    }
  }
  return e;
}

// ---- match ---------------------------------------------------------------

matcher::ScoreTable score_all(const corpus::Dataset& d, const embedding::Encoder& encoder,
                              const matcher::Ensemble& ensemble) {
  check_dims(ensemble, encoder.dim());
  const auto kp_groups = d.key_point_groups();
  std::map<std::string, std::vector<double>> kp_proj;
  for (const auto& k : d.key_points()) kp_proj[k.id] = project_all(ensemble, encoder.embed(k.id, encoder_text(k)));

  matcher::ScoreTable out;
  for (const auto& a : d.arguments()) {
    auto g = kp_groups.find({a.topic, a.stance});
    if (g == kp_groups.end() || g->second.empty()) {
      throw DataError("argument " + a.id + " has no key point with the same topic and stance");
    }
    const auto ap = project_all(ensemble, encoder.embed(a.id, a.text));
    auto& row = out[a.id];
    for (const auto* k : g->second) row[k->id] = mean_score(ensemble, ap, kp_proj.at(k->id));
  }
  return out;
}

matcher::ScoreTable run_match(const MatchOptions& opts) {
  DataPaths data = opts.data;
  data.labels.reset();
  const corpus::Dataset d = load(data);
  const auto encoder = make_encoder(opts.encoder);
  const matcher::Ensemble ensemble = ensemble_or_identity(opts.manifest, encoder->dim());
  auto scores = score_all(d, *encoder, ensemble);
  matcher::save_scores(opts.out, scores);
  nlohmann::json meta{{"command", "match"},
                      {"encoder", encoder->describe()},
                      {"ensemble_size", ensemble.members.size()},
                      {"manifest", opts.manifest ? opts.manifest->string() : std::string("identity")},
                      {"seed", opts.manifest ? load_manifest(*opts.manifest).seed : 0},
                      {"simd", std::string(simd::name(simd::active_level()))}};
  write_json(fs::path(opts.out).replace_extension(".meta.json"), meta);
  return scores;
}

// ---- generate ------------------------------------------------------------

namespace {

struct GroupJob {
  corpus::GroupKey key;
  std::vector<const corpus::Argument*> arguments;
};

struct GroupOutput {
  std::vector<kp_graph::GeneratedKeyPoint> kps;
  GroupOutcome outcome;
};

std::vector<kp_graph::RankedCandidate> graph_select(std::vector<kp_graph::SentenceCandidate>& cands,
                                                    const matcher::Ensemble& ensemble, const GenerateOptions& opts,
                                                    std::size_t& pool) {
  const kp_graph::EnsembleScorer scorer(ensemble, cands);
  const auto g = kp_graph::build_graph(cands, scorer, opts.rank);
  pool = g.nodes.size();
  if (g.nodes.empty()) return {};
  const auto r = kp_graph::rank(g, opts.rank);
  return kp_graph::select_key_points(r, g, scorer, opts.rank);
}

std::vector<kp_graph::RankedCandidate> aspect_select(std::vector<kp_graph::SentenceCandidate>& cands,
                                                     std::vector<kp_aspect::AspectPhrase> aspects,
                                                     const embedding::Encoder& encoder,
                                                     const matcher::Ensemble& ensemble, const GenerateOptions& opts) {
  const kp_graph::EnsembleScorer scorer(ensemble, cands);
  std::vector<std::set<int>> cover(cands.size());
  std::size_t cluster_count = 0;
  if (!aspects.empty()) {
    kp_aspect::embed_aspects(aspects, encoder);
    const auto clusters = kp_aspect::cluster_aspects(aspects, opts.clusters, opts.seed);
    cluster_count = clusters.clusters.size();
    cover = kp_aspect::map_sentences_to_clusters(cands, aspects, clusters.assignment);
  }
  const auto k_max = static_cast<std::size_t>(opts.rank.k_max);
  const auto k_min = static_cast<std::size_t>(opts.rank.k_min);
  const auto greedy = kp_aspect::greedy_select(cands, cover, cluster_count, k_max);
  const auto kept = kp_aspect::dedup(greedy.selected, cands, scorer, opts.dedup_threshold);

  std::vector<kp_graph::RankedCandidate> out;
  std::vector<bool> taken(cands.size(), false);
  for (const std::size_t i : kept) {
    const auto pos = static_cast<std::size_t>(std::find(greedy.selected.begin(), greedy.selected.end(), i) -
                                              greedy.selected.begin());
    out.push_back({cands[i], static_cast<double>(greedy.gains[pos])});
    taken[i] = true;
  }
  if (out.size() < k_min) {
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (!taken[i]) rest.push_back(i);
    }
    std::sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
      if (cover[a].size() != cover[b].size()) return cover[a].size() > cover[b].size();
      return cands[a].id < cands[b].id;
    });
    for (const std::size_t i : rest) {
      if (out.size() >= k_min) break;
      out.push_back({cands[i], 0.0});
    }
  }
  return out;
}

}  // namespace

GenerationResult generate(const corpus::Dataset& d, const GenerateOptions& opts) {
  opts.rank.validate();
  if (opts.clusters < 1) throw Error("generate: clusters must be >= 1");
  const auto encoder = make_encoder(opts.encoder);
  const matcher::Ensemble ensemble = ensemble_or_identity(opts.manifest, encoder->dim());
  check_dims(ensemble, encoder->dim());
  const auto qualities =
      opts.quality ? std::optional(kp_graph::load_quality_sidecar(*opts.quality)) : std::nullopt;

  std::vector<kp_aspect::AspectPhrase> file_aspects;
  if (opts.generator == Generator::Aspect && opts.aspects) file_aspects = kp_aspect::acquire_aspects(d, opts.aspects);

  std::vector<GroupJob> jobs;
  for (auto& [key, args] : d.argument_groups()) jobs.push_back({key, args});

  std::vector<GroupOutput> outputs(jobs.size());
  parallel_for(jobs.size(), opts.jobs, [&](std::size_t gi) {
    const GroupJob& job = jobs[gi];
    GroupOutput& out = outputs[gi];
    out.outcome.group = job.key;
    out.outcome.arguments = job.arguments.size();
    try {
      auto cands = kp_graph::split_and_filter(job.arguments, kp_graph::default_pronouns());
      if (qualities) kp_graph::apply_quality(cands, *qualities);
      if (cands.empty()) {
        out.outcome.warning = "no sentence passed the 5-20 token and pronoun rules";
        return;
      }
      kp_graph::embed_candidates(cands, *encoder);
      std::vector<kp_graph::RankedCandidate> picked;
      if (opts.generator == Generator::Graph) {
        picked = graph_select(cands, ensemble, opts, out.outcome.pool);
        if (out.outcome.pool == 0) {
          out.outcome.warning = "no sentence reached the quality threshold";
          return;
        }
      } else {
        out.outcome.pool = cands.size();
        std::vector<kp_aspect::AspectPhrase> aspects;
        if (opts.aspects) {
          std::set<std::string> ids;
          for (const auto* a : job.arguments) ids.insert(a->id);
          for (const auto& a : file_aspects) {
            if (ids.count(a.source_arg_id)) aspects.push_back(a);
          }
        } else {
          aspects = kp_aspect::heuristic_aspects_for(job.arguments);
        }
        picked = aspect_select(cands, std::move(aspects), *encoder, ensemble, opts);
      }
      for (std::size_t r = 0; r < picked.size(); ++r) {
        out.kps.push_back({kp_graph::key_point_id(job.key.topic, job.key.stance, r + 1), picked[r].candidate.text,
                           job.key.topic, job.key.stance, picked[r].score});
      }
      out.outcome.emitted = out.kps.size();
    } catch (const Error& e) {
      out.kps.clear();
      out.outcome.warning = e.what();
    }
  });

  GenerationResult result;
  for (auto& o : outputs) {
    if (!o.outcome.warning.empty()) ++result.failed_groups;
    result.key_points.insert(result.key_points.end(), o.kps.begin(), o.kps.end());
    result.groups.push_back(std::move(o.outcome));
  }

  const std::string quality_source = opts.quality ? "sidecar" : "argument-column-or-uniform";
  result.metadata = {
      "kpa generate",
      std::string("generator=") + (opts.generator == Generator::Graph ? "graph" : "aspect"),
      "seed=" + std::to_string(opts.seed),
      "encoder=" + encoder->describe(),
      "model=" + (opts.manifest ? opts.manifest->filename().string() : std::string("identity")),
      "d=" + fmt(opts.rank.d) + " quality_threshold=" + fmt(opts.rank.quality_threshold) +
          " match_threshold=" + fmt(opts.rank.match_threshold) +
          " redundancy_threshold=" + fmt(opts.rank.redundancy_threshold),
      "k_min=" + std::to_string(opts.rank.k_min) + " k_max=" + std::to_string(opts.rank.k_max) +
          " clusters=" + std::to_string(opts.clusters) + " dedup_threshold=" + fmt(opts.dedup_threshold),
      "quality_source=" + quality_source,
      "groups=" + std::to_string(result.groups.size()) + " failed_groups=" + std::to_string(result.failed_groups)};
  for (const auto& g : result.groups) {
    if (!g.warning.empty()) {
      result.metadata.push_back("warning: " + g.group.topic + " / " + std::string(corpus::stance_name(g.group.stance)) +
                                ": " + g.warning);
    }
  }
  return result;
}

GenerationResult run_generate(const GenerateOptions& opts) {
  const corpus::Dataset args_only = corpus::load_arguments(opts.arguments);
  GenerationResult result = generate(args_only, opts);
  if (opts.out) {
    if (opts.out->has_parent_path()) fs::create_directories(opts.out->parent_path());
    std::ofstream out(*opts.out, std::ios::binary);
    if (!out) throw DataError(opts.out->string() + ": cannot open for writing");
    kp_graph::write_key_points(out, result.key_points, result.metadata);
  }
  return result;
}

// ---- evaluate ------------------------------------------------------------

nlohmann::json stats_json(const corpus::StatisticsReport& r) {
  return {{"topics", r.topics},
          {"arguments", r.arguments},
          {"key_points", r.key_points},
          {"pairs", r.pairs},
          {"match_pairs", r.match_pairs},
          {"ambiguous_pairs", r.ambiguous_pairs},
          {"match_rate", r.match_rate},
          {"buckets",
           {{"unmatched", r.unmatched}, {"single", r.single}, {"multiple", r.multiple}, {"ambiguous", r.ambiguous}}}};
}

nlohmann::json evaluate(const corpus::Dataset& gold, const std::optional<matcher::ScoreTable>& scores,
                        const std::optional<std::vector<kp_graph::GeneratedKeyPoint>>& generated,
                        double keep_fraction) {
  nlohmann::json report;
  report["config"] = {{"keep_fraction", keep_fraction}, {"tokenizer", std::string(evalkit::kTokenizerId)}};
  if (scores) {
    for (const auto& [arg, kps] : *scores) {
      const corpus::Argument* a = gold.find_argument(arg);
      if (!a) throw DataError("predictions reference unknown argument " + arg);
      for (const auto& [kp, s] : kps) {
        const corpus::KeyPoint* k = gold.find_key_point(kp);
        if (!k) throw DataError("predictions reference unknown key point " + kp);
        if (!(s >= 0.0 && s <= 1.0)) throw DataError("score for (" + arg + ", " + kp + ") outside [0,1]");
      }
    }
    const auto preds = matcher::match_arguments(*scores);
    const auto sets = evalkit::group_predictions(preds, gold);
    const auto ap = evalkit::strict_relaxed_map(sets, gold, keep_fraction);
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : ap.groups) {
      groups.push_back({{"topic", g.group.topic},
                        {"stance", corpus::stance_value(g.group.stance)},
                        {"strict_ap", g.strict},
                        {"relaxed_ap", g.relaxed},
                        {"kept", g.kept}});
    }
    report["matching"] = {{"strict_map", ap.strict},
                          {"relaxed_map", ap.relaxed},
                          {"kept", ap.kept_count},
                          {"groups", groups},
                          {"reference", {{"strict_map", kReferenceStrictMap}, {"relaxed_map", kReferenceRelaxedMap}}},
                          {"delta",
                           {{"strict_map", ap.strict - kReferenceStrictMap},
                            {"relaxed_map", ap.relaxed - kReferenceRelaxedMap}}}};
  }
  if (generated) {
    const auto rouge = evalkit::evaluate_generation(*generated, gold);
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : rouge.groups) {
      groups.push_back({{"topic", g.group.topic},
                        {"stance", corpus::stance_value(g.group.stance)},
                        {"generated", g.generated},
                        {"rouge1", g.score.r1},
                        {"rouge2", g.score.r2},
                        {"rougeL", g.score.rl}});
    }
    report["generation"] = {
        {"rouge1", rouge.mean.r1}, {"rouge2", rouge.mean.r2}, {"rougeL", rouge.mean.rl}, {"groups", groups}};
  }
  return report;
}

nlohmann::json run_evaluate(const EvaluateOptions& opts) {
  if (!opts.predictions && !opts.generated) throw Error("evaluate: give --predictions and/or --generated");
  const corpus::Dataset gold = load(opts.gold);
  std::optional<matcher::ScoreTable> scores;
  if (opts.predictions) scores = matcher::load_scores(*opts.predictions);
  std::optional<std::vector<kp_graph::GeneratedKeyPoint>> generated;
  if (opts.generated) generated = kp_graph::read_key_points(*opts.generated);
  auto report = evaluate(gold, scores, generated, opts.keep_fraction);
  report["config"]["predictions"] = opts.predictions ? opts.predictions->string() : "";
  report["config"]["generated"] = opts.generated ? opts.generated->string() : "";
  if (opts.out) write_json(*opts.out, report);
  return report;
}

}  // namespace kpa::pipeline
