#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kpa::corpus {

enum class Stance { Pro, Con };

/// +1 / -1, the file encoding.
int stance_value(Stance s);
Stance parse_stance(std::string_view field);
std::string_view stance_name(Stance s);

struct Argument {
  std::string id;
  std::string text;
  std::string topic;
  Stance stance = Stance::Pro;
  std::optional<double> quality;

  bool operator==(const Argument&) const = default;
};

struct KeyPoint {
  std::string id;
  std::string text;
  std::string topic;
  Stance stance = Stance::Pro;

  bool operator==(const KeyPoint&) const = default;
};

enum class MatchLabel { Match, NoMatch, Ambiguous };

struct LabeledPair {
  std::string argument_id;
  std::string key_point_id;
  MatchLabel label = MatchLabel::NoMatch;

  bool operator==(const LabeledPair&) const = default;
};

enum class Split { Train, Validation, Test };

/// A topic-stance combination; the unit of matching evaluation and generation.
struct GroupKey {
  std::string topic;
  Stance stance = Stance::Pro;

  auto operator<=>(const GroupKey&) const = default;
};

/// Validated, immutable collection of arguments, key points and labeled pairs.
class Dataset {
 public:
  Dataset() = default;
  /// Throws DataError on duplicate ids, empty texts, dangling pair references,
  /// duplicate pairs, or pairs whose argument and key point disagree on
  /// topic or stance.
  Dataset(std::vector<Argument> arguments, std::vector<KeyPoint> key_points, std::vector<LabeledPair> pairs,
          Split split = Split::Train);

  const std::vector<Argument>& arguments() const { return arguments_; }
  const std::vector<KeyPoint>& key_points() const { return key_points_; }
  const std::vector<LabeledPair>& pairs() const { return pairs_; }
  Split split() const { return split_; }

  const Argument* find_argument(std::string_view id) const;
  const KeyPoint* find_key_point(std::string_view id) const;
  /// Label of an (argument, key point) pair; nullopt when the pair is absent.
  std::optional<MatchLabel> label(std::string_view argument_id, std::string_view key_point_id) const;

  std::set<std::string> topics() const;
  /// Arguments per topic-stance group, in dataset order.
  std::map<GroupKey, std::vector<const Argument*>> argument_groups() const;
  std::map<GroupKey, std::vector<const KeyPoint*>> key_point_groups() const;

  bool operator==(const Dataset& other) const;

 private:
  std::vector<Argument> arguments_;
  std::vector<KeyPoint> key_points_;
  std::vector<LabeledPair> pairs_;
  Split split_ = Split::Train;
  std::unordered_map<std::string, std::size_t> argument_index_;
  std::unordered_map<std::string, std::size_t> key_point_index_;
  std::unordered_map<std::string, MatchLabel> label_index_;
};

/// Reads the three corpus CSVs. Errors carry the file and row number.
Dataset load_dataset(const std::filesystem::path& arguments_path, const std::filesystem::path& key_points_path,
                     const std::optional<std::filesystem::path>& labels_path = std::nullopt,
                     Split split = Split::Train);

/// Arguments file only; no key points or pairs.
Dataset load_arguments(const std::filesystem::path& arguments_path, Split split = Split::Train);

/// Writes the three CSVs in the same layout load_dataset reads. The quality
/// and ambiguous columns are emitted only when some row needs them.
void save_dataset(const Dataset& d, const std::filesystem::path& arguments_path,
                  const std::filesystem::path& key_points_path, const std::filesystem::path& labels_path);

/// Union of two datasets (e.g. train + dev files of the public corpus).
Dataset merge(const Dataset& a, const Dataset& b);

struct StatisticsReport {
  std::size_t topics = 0;
  std::size_t arguments = 0;
  std::size_t key_points = 0;
  std::size_t pairs = 0;
  std::size_t match_pairs = 0;
  std::size_t ambiguous_pairs = 0;
  double match_rate = 0.0;  // match_pairs / pairs, 0 for no pairs
  // per-argument multiplicity buckets; they sum to `arguments`
  std::size_t unmatched = 0;
  std::size_t single = 0;
  std::size_t multiple = 0;
  std::size_t ambiguous = 0;
};

StatisticsReport dataset_stats(const Dataset& d);

struct SplitResult {
  Dataset train;
  Dataset validation;
  Dataset test;
  /// e.g. listed topics that do not occur in the data
  std::vector<std::string> warnings;
};

/// Partitions by topic. Throws DataError if the sets overlap or a topic in
/// the data is not listed in any set.
SplitResult split_by_topics(const Dataset& d, const std::set<std::string>& train_topics,
                            const std::set<std::string>& validation_topics,
                            const std::set<std::string>& test_topics);

}  // namespace kpa::corpus
