#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kpa/corpus.hpp"
#include "kpa/kp_graph.hpp"
#include "kpa/matcher.hpp"

namespace kpa::evalkit {

using matcher::Prediction;

/// Best-pair predictions of one topic-stance group.
struct PredictionSet {
  corpus::GroupKey group;
  std::vector<Prediction> entries;
};

/// Groups per-argument predictions by the gold argument's topic and stance.
/// Throws DataError for an unknown argument id.
std::vector<PredictionSet> group_predictions(std::span<const Prediction> predictions, const corpus::Dataset& gold);

/// Mean of precision@k over relevant positions; 0 when nothing is relevant.
double average_precision(std::span<const int> ranked_relevance);

struct GroupAP {
  corpus::GroupKey group;
  double strict = 0.0;
  double relaxed = 0.0;
  std::size_t kept = 0;
};

struct APResult {
  double strict = 0.0;
  double relaxed = 0.0;
  std::size_t kept_count = 0;
  std::vector<GroupAP> groups;
};

/// Per group: sort by score descending (ties by argument id), keep the top
/// ceil(keep_fraction * n), label strict (Match -> 1) and relaxed
/// (Match or Ambiguous -> 1), take AP of each. mAP is the mean over groups.
APResult strict_relaxed_map(std::span<const PredictionSet> predictions, const corpus::Dataset& gold,
                            double keep_fraction = 0.5);

/// ROUGE-N F1 with clipped n-gram counts over text::tokenize tokens.
/// 0 when either side has no n-grams.
double rouge_n(std::string_view candidate, std::string_view reference, int n);
/// ROUGE-L F1 from the longest common token subsequence.
double rouge_l(std::string_view candidate, std::string_view reference);

struct RougeScore {
  double r1 = 0.0;
  double r2 = 0.0;
  double rl = 0.0;
};

struct GroupRouge {
  corpus::GroupKey group;
  RougeScore score;
  std::size_t generated = 0;
};

struct RougeResult {
  RougeScore mean;
  std::vector<GroupRouge> groups;
};

/// Per gold topic-stance group, generated key points (file order) and gold
/// key points are each joined with spaces and compared; scores are averaged
/// over gold groups, a group with nothing generated scoring 0. A generated
/// group with no gold key points is a DataError.
RougeResult evaluate_generation(std::span<const kp_graph::GeneratedKeyPoint> generated, const corpus::Dataset& gold);

inline constexpr std::string_view kTokenizerId = "lower-ws-strip-punct-v1";

}  // namespace kpa::evalkit
