#include "kpa/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "kpa/error.hpp"
#include "kpa/simd.hpp"

namespace kpa::matcher {

ProjectionHead::ProjectionHead(std::size_t dim_out, std::size_t dim_in, std::vector<double> weight)
    : dim_out_(dim_out), dim_in_(dim_in), weight_(std::move(weight)) {
  if (dim_out_ == 0 || dim_in_ == 0) throw Error("projection head dims must be positive");
  if (weight_.size() != dim_out_ * dim_in_) throw Error("projection head weight has wrong size");
  for (const double w : weight_) {
    if (!std::isfinite(w)) throw NumericError("projection head has a non-finite weight");
  }
}

ProjectionHead ProjectionHead::identity(std::size_t dim) {
  std::vector<double> w(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) w[i * dim + i] = 1.0;
  return ProjectionHead(dim, dim, std::move(w));
}

ProjectionHead ProjectionHead::identity_with_noise(std::size_t dim, std::uint64_t seed, double sigma) {
  ProjectionHead h = identity(dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& w : h.weight_) w += noise(rng);
  return h;
}

std::vector<double> ProjectionHead::project(std::span<const double> x) const {
  if (x.size() != dim_in_) {
    throw NumericError("projection: input dim " + std::to_string(x.size()) + " != head dim " + std::to_string(dim_in_));
  }
  std::vector<double> y(dim_out_);
  simd::gemv(weight_, dim_out_, dim_in_, x, y);
  return y;
}

std::pair<std::string, std::string> pair_inputs(const corpus::Argument& a, const corpus::KeyPoint& kp) {
  if (a.topic != kp.topic) {
    throw DataError("pair_inputs: argument " + a.id + " and key point " + kp.id + " have different topics");
  }
  if (a.text.empty()) throw DataError("pair_inputs: argument " + a.id + " has empty text");
  if (kp.text.empty()) throw DataError("pair_inputs: key point " + kp.id + " has empty text");
  return {a.text, kp.topic + " " + kp.text};
}

double score_pair(const ProjectionHead& head, const EmbeddingVector& argument, const EmbeddingVector& key_point) {
  const auto u = head.project(argument.values());
  const auto v = head.project(key_point.values());
  return 0.5 * (1.0 + embedding::cosine(u, v));
}

double contrastive_loss(double score, int y, double clamp_epsilon) {
  const double s = std::clamp(score, clamp_epsilon, 1.0 - clamp_epsilon);
  return y ? -std::log(s) : -std::log1p(-s);
}

LossGradient loss_and_gradient(const ProjectionHead& head, std::span<const double> argument,
                               std::span<const double> key_point, int y, double clamp_epsilon) {
  const auto u = head.project(argument);
  const auto v = head.project(key_point);
  const double uu = simd::dot(u, u);
  const double vv = simd::dot(v, v);
  if (uu == 0.0 || vv == 0.0) throw NumericError("projected embedding is zero");
  const double nu = std::sqrt(uu);
  const double nv = std::sqrt(vv);
  const double cos = std::clamp(simd::dot(u, v) / (nu * nv), -1.0, 1.0);
  const double score = 0.5 * (1.0 + cos);

  LossGradient out;
  out.loss = contrastive_loss(score, y, clamp_epsilon);
  out.grad.assign(head.dim_out() * head.dim_in(), 0.0);
  if (score <= clamp_epsilon || score >= 1.0 - clamp_epsilon) return out;

  const double dl_ds = y ? -1.0 / score : 1.0 / (1.0 - score);
  const double dl_dc = 0.5 * dl_ds;
  const double inv_uv = 1.0 / (nu * nv);
  // d cos / d u = v/(|u||v|) - cos u/|u|^2, symmetric for v
  const std::size_t rows = head.dim_out();
  const std::size_t cols = head.dim_in();
  for (std::size_t r = 0; r < rows; ++r) {
    const double gu = dl_dc * (v[r] * inv_uv - cos * u[r] / uu);
    const double gv = dl_dc * (u[r] * inv_uv - cos * v[r] / vv);
    std::span<double> row(out.grad.data() + r * cols, cols);
    simd::axpy(gu, argument, row);
    simd::axpy(gv, key_point, row);
  }
  return out;
}

double mean_loss(const ProjectionHead& head, std::span<const TrainingPair> pairs, double clamp_epsilon) {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& p : pairs) {
    total += contrastive_loss(score_pair(head, p.argument, p.key_point), p.label, clamp_epsilon);
  }
  return total / static_cast<double>(pairs.size());
}

ProjectionHead train_projection(std::span<const TrainingPair> pairs, const TrainConfig& cfg, TrainLog* log,
                                std::optional<ProjectionHead> init) {
  if (pairs.empty()) throw Error("train_projection: no training pairs");
  if (cfg.epochs < 1) throw Error("train_projection: epochs must be >= 1");
  if (cfg.batch_size < 1) throw Error("train_projection: batch_size must be >= 1");
  if (!(cfg.learning_rate >= 0.0)) throw Error("train_projection: learning rate must be non-negative");
  const std::size_t dim = pairs.front().argument.dim();
  for (const auto& p : pairs) {
    if (p.argument.dim() != dim || p.key_point.dim() != dim) throw NumericError("train_projection: mixed dims");
    if (p.label != 0 && p.label != 1) throw Error("train_projection: labels must be 0 or 1");
  }

  ProjectionHead head = init ? std::move(*init) : ProjectionHead::identity_with_noise(dim, cfg.seed);
  if (head.dim_in() != dim) throw NumericError("train_projection: initial head dim mismatch");

  TrainLog local;
  local.epoch_loss.push_back(mean_loss(head, pairs, cfg.clamp_epsilon));
  ProjectionHead best = head;
  double best_loss = local.epoch_loss.back();

  std::mt19937_64 rng(cfg.seed ^ 0x5DEECE66Dull);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(head.weight().size());
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        const auto& p = pairs[order[i]];
        const auto lg = loss_and_gradient(head, p.argument.values(), p.key_point.values(), p.label, cfg.clamp_epsilon);
        if (!std::isfinite(lg.loss)) {
          throw NumericError("train_projection: non-finite loss at epoch " + std::to_string(epoch));
        }
        simd::axpy(1.0, lg.grad, grad);
      }
      const double step = -cfg.learning_rate / static_cast<double>(end - start);
      simd::axpy(step, grad, head.weight());
    }
    for (const double w : head.weight()) {
      if (!std::isfinite(w)) throw NumericError("train_projection: non-finite weight at epoch " + std::to_string(epoch));
    }
    const double loss = mean_loss(head, pairs, cfg.clamp_epsilon);
    if (!std::isfinite(loss)) throw NumericError("train_projection: non-finite loss at epoch " + std::to_string(epoch));
    local.epoch_loss.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best = head;
      local.best_epoch = static_cast<std::size_t>(epoch);
    }
  }
  if (log) *log = std::move(local);
  return best;
}

double ensemble_score(const Ensemble& e, const EmbeddingVector& argument, const EmbeddingVector& key_point) {
  if (e.members.empty()) throw Error("ensemble_score: empty ensemble");
  double sum = 0.0;
  for (const auto& m : e.members) sum += score_pair(m, argument, key_point);
  return sum / static_cast<double>(e.members.size());
}

std::vector<Prediction> match_arguments(const ScoreTable& scores) {
  std::vector<Prediction> out;
  out.reserve(scores.size());
  for (const auto& [arg, candidates] : scores) {
    if (candidates.empty()) throw DataError("argument " + arg + " has no candidate key points");
    // map order is ascending by id, so strict > keeps the smallest id on ties
    auto best = candidates.begin();
    for (auto it = std::next(candidates.begin()); it != candidates.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    out.push_back({arg, best->first, best->second});
  }
  return out;
}

std::map<std::string, int> assign_folds(const std::set<std::string>& topics, int folds, std::uint64_t seed) {
  if (folds < 1) throw DataError("fold count must be >= 1");
  if (topics.size() < static_cast<std::size_t>(folds)) {
    throw DataError("cannot build " + std::to_string(folds) + " topic folds from " + std::to_string(topics.size()) +
                    " topics");
  }
  std::vector<std::string> order(topics.begin(), topics.end());
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < order.size(); ++i) out[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  return out;
}

void save_head(const std::filesystem::path& path, const HeadFile& file) {
  nlohmann::json j;
  j["dim_in"] = file.head.dim_in();
  j["dim_out"] = file.head.dim_out();
  j["weight"] = std::vector<double>(file.head.weight().begin(), file.head.weight().end());
  j["seed"] = file.seed;
  j["fold"] = file.fold;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << j.dump() << '\n';
}

HeadFile load_head(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open model file");
  try {
    const auto j = nlohmann::json::parse(in);
    ProjectionHead head(j.at("dim_out").get<std::size_t>(), j.at("dim_in").get<std::size_t>(),
                        j.at("weight").get<std::vector<double>>());
    return {std::move(head), j.value("seed", std::uint64_t{0}), j.value("fold", 0)};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": invalid model file: " + e.what());
  }
}

void save_scores(const std::filesystem::path& path, const ScoreTable& scores) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [arg, kps] : scores) {
    nlohmann::json inner = nlohmann::json::object();
    for (const auto& [kp, s] : kps) inner[kp] = s;
    j[arg] = std::move(inner);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << j.dump(1) << '\n';
}

ScoreTable load_scores(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open predictions file");
  ScoreTable out;
  try {
    const auto j = nlohmann::json::parse(in);
    if (!j.is_object()) throw DataError(path.string() + ": predictions must be a JSON object");
    for (const auto& [arg, kps] : j.items()) {
      if (!kps.is_object()) throw DataError(path.string() + ": entry for " + arg + " is not an object");
      auto& row = out[arg];
      for (const auto& [kp, s] : kps.items()) {
        if (!s.is_number()) throw DataError(path.string() + ": score for (" + arg + ", " + kp + ") is not a number");
        row[kp] = s.get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": invalid predictions JSON: " + e.what());
  }
  return out;
}

}  // namespace kpa::matcher
