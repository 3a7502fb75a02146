#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kpa/corpus.hpp"
#include "kpa/embedding.hpp"

namespace kpa::matcher {

using embedding::EmbeddingVector;

/// Linear map applied to both towers (shared weights). Row-major
/// dim_out x dim_in.
class ProjectionHead {
 public:
  ProjectionHead(std::size_t dim_out, std::size_t dim_in, std::vector<double> weight);

  static ProjectionHead identity(std::size_t dim);
  /// Identity plus N(0, sigma^2) noise on every entry, seeded.
  static ProjectionHead identity_with_noise(std::size_t dim, std::uint64_t seed, double sigma = 0.01);

  std::size_t dim_in() const { return dim_in_; }
  std::size_t dim_out() const { return dim_out_; }
  std::span<const double> weight() const { return weight_; }
  std::span<double> weight() { return weight_; }

  std::vector<double> project(std::span<const double> x) const;

  bool operator==(const ProjectionHead&) const = default;

 private:
  std::size_t dim_out_;
  std::size_t dim_in_;
  std::vector<double> weight_;
};

struct TrainConfig {
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
  double clamp_epsilon = 1e-7;
};

/// (argument text, topic + " " + key point text). Throws DataError when the
/// topics differ or either text is empty.
std::pair<std::string, std::string> pair_inputs(const corpus::Argument& a, const corpus::KeyPoint& kp);

/// (1 + cos(W a, W k)) / 2, in [0, 1].
double score_pair(const ProjectionHead& head, const EmbeddingVector& argument, const EmbeddingVector& key_point);

/// Binary cross-entropy on the clamped score: -[y log s + (1-y) log(1-s)].
double contrastive_loss(double score, int y, double clamp_epsilon);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d W, same layout as the weight
};

/// Loss of one pair and its analytic gradient through the rescaled-cosine
/// chain. Where the clamp is active the gradient is zero.
LossGradient loss_and_gradient(const ProjectionHead& head, std::span<const double> argument,
                               std::span<const double> key_point, int y, double clamp_epsilon);

struct TrainingPair {
  EmbeddingVector argument;
  EmbeddingVector key_point;
  int label = 0;  // 1 match, 0 no match
};

struct TrainLog {
  /// Mean training loss; entry 0 is the initial head, entry e after epoch e.
  std::vector<double> epoch_loss;
  std::size_t best_epoch = 0;
};

double mean_loss(const ProjectionHead& head, std::span<const TrainingPair> pairs, double clamp_epsilon);

/// Mini-batch gradient descent on the mean contrastive loss. Starts from
/// `init` or identity-plus-noise seeded by cfg.seed; returns the head with the
/// lowest full-set loss seen (the initial head included).
ProjectionHead train_projection(std::span<const TrainingPair> pairs, const TrainConfig& cfg, TrainLog* log = nullptr,
                                std::optional<ProjectionHead> init = std::nullopt);

struct Ensemble {
  std::vector<ProjectionHead> members;
};

/// Mean of member scores.
double ensemble_score(const Ensemble& e, const EmbeddingVector& argument, const EmbeddingVector& key_point);

struct Prediction {
  std::string argument_id;
  std::string key_point_id;
  double score = 0.0;

  bool operator==(const Prediction&) const = default;
};

/// argument id -> key point id -> score, the prediction file layout.
using ScoreTable = std::map<std::string, std::map<std::string, double>>;

/// Best key point per argument, ties to the smallest key point id. Throws
/// DataError for an argument with no candidates.
std::vector<Prediction> match_arguments(const ScoreTable& scores);

/// Shuffles the sorted topic list with `seed` and deals topics round-robin
/// into `folds` folds. Throws DataError when there are fewer topics than folds.
std::map<std::string, int> assign_folds(const std::set<std::string>& topics, int folds, std::uint64_t seed);

struct HeadFile {
  ProjectionHead head;
  std::uint64_t seed = 0;
  int fold = 0;
};

void save_head(const std::filesystem::path& path, const HeadFile& file);
HeadFile load_head(const std::filesystem::path& path);

void save_scores(const std::filesystem::path& path, const ScoreTable& scores);
ScoreTable load_scores(const std::filesystem::path& path);

}  // namespace kpa::matcher
