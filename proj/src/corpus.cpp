#include "kpa/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kpa/csv.hpp"
#include "kpa/error.hpp"

namespace kpa::corpus {

namespace {

std::string pair_key(std::string_view a, std::string_view k) {
  std::string key;
  key.reserve(a.size() + k.size() + 1);
  key.append(a);
  key.push_back('\x1f');
  key.append(k);
  return key;
}

std::string where(const csv::Table& t, const csv::Record& r) {
  return t.source() + ": row " + std::to_string(r.line) + ": ";
}

double parse_double(std::string_view s, const std::string& ctx) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw DataError(ctx + "not a number: '" + std::string(s) + "'");
  return v;
}

bool parse_flag(std::string_view s, const std::string& ctx) {
  const double v = parse_double(s, ctx);
  if (v == 1.0) return true;
  if (v == 0.0) return false;
  throw DataError(ctx + "expected 0 or 1, got '" + std::string(s) + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << content;
}

}  // namespace

int stance_value(Stance s) { return s == Stance::Pro ? 1 : -1; }

Stance parse_stance(std::string_view field) {
  double v = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec == std::errc() && ptr == last) {
    if (v == 1.0) return Stance::Pro;
    if (v == -1.0) return Stance::Con;
  }
  throw DataError("invalid stance '" + std::string(field) + "' (expected 1 or -1)");
}

std::string_view stance_name(Stance s) { return s == Stance::Pro ? "pro" : "con"; }

Dataset::Dataset(std::vector<Argument> arguments, std::vector<KeyPoint> key_points, std::vector<LabeledPair> pairs,
                 Split split)
    : arguments_(std::move(arguments)), key_points_(std::move(key_points)), pairs_(std::move(pairs)), split_(split) {
  for (std::size_t i = 0; i < arguments_.size(); ++i) {
    const auto& a = arguments_[i];
    if (a.id.empty()) throw DataError("argument with empty id");
    if (a.text.empty()) throw DataError("argument " + a.id + ": empty text");
    if (a.quality && !(*a.quality >= 0.0 && *a.quality <= 1.0)) {
      throw DataError("argument " + a.id + ": quality outside [0,1]");
    }
    if (!argument_index_.emplace(a.id, i).second) throw DataError("duplicate argument id " + a.id);
  }
  for (std::size_t i = 0; i < key_points_.size(); ++i) {
    const auto& k = key_points_[i];
    if (k.id.empty()) throw DataError("key point with empty id");
    if (k.text.empty()) throw DataError("key point " + k.id + ": empty text");
    if (!key_point_index_.emplace(k.id, i).second) throw DataError("duplicate key point id " + k.id);
  }
  for (const auto& p : pairs_) {
    const Argument* a = find_argument(p.argument_id);
    const KeyPoint* k = find_key_point(p.key_point_id);
    if (!a) throw DataError("pair references unknown argument " + p.argument_id);
    if (!k) throw DataError("pair references unknown key point " + p.key_point_id);
    if (a->topic != k->topic || a->stance != k->stance) {
      throw DataError("pair (" + p.argument_id + ", " + p.key_point_id + ") crosses topic or stance");
    }
    if (!label_index_.emplace(pair_key(p.argument_id, p.key_point_id), p.label).second) {
      throw DataError("duplicate pair (" + p.argument_id + ", " + p.key_point_id + ")");
    }
  }
}

const Argument* Dataset::find_argument(std::string_view id) const {
  auto it = argument_index_.find(std::string(id));
  return it == argument_index_.end() ? nullptr : &arguments_[it->second];
}

const KeyPoint* Dataset::find_key_point(std::string_view id) const {
  auto it = key_point_index_.find(std::string(id));
  return it == key_point_index_.end() ? nullptr : &key_points_[it->second];
}

std::optional<MatchLabel> Dataset::label(std::string_view argument_id, std::string_view key_point_id) const {
  auto it = label_index_.find(pair_key(argument_id, key_point_id));
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

std::set<std::string> Dataset::topics() const {
  std::set<std::string> out;
  for (const auto& a : arguments_) out.insert(a.topic);
  for (const auto& k : key_points_) out.insert(k.topic);
  return out;
}

std::map<GroupKey, std::vector<const Argument*>> Dataset::argument_groups() const {
  std::map<GroupKey, std::vector<const Argument*>> out;
  for (const auto& a : arguments_) out[{a.topic, a.stance}].push_back(&a);
  return out;
}

std::map<GroupKey, std::vector<const KeyPoint*>> Dataset::key_point_groups() const {
  std::map<GroupKey, std::vector<const KeyPoint*>> out;
  for (const auto& k : key_points_) out[{k.topic, k.stance}].push_back(&k);
  return out;
}

bool Dataset::operator==(const Dataset& other) const {
  return arguments_ == other.arguments_ && key_points_ == other.key_points_ && pairs_ == other.pairs_ &&
         split_ == other.split_;
}

namespace {

std::vector<Argument> read_arguments(const std::filesystem::path& arguments_path) {
  std::vector<Argument> arguments;
  std::unordered_map<std::string, std::size_t> arg_rows;
  {
    const csv::Table t = csv::read(arguments_path);
    const std::size_t c_id = t.column("arg_id");
    const std::size_t c_text = t.column("argument");
    const std::size_t c_topic = t.column("topic");
    const std::size_t c_stance = t.column("stance");
    const auto c_quality = t.find_column("quality");
    for (const auto& r : t.records()) {
      const std::string ctx = where(t, r);
      Argument a;
      a.id = r.fields[c_id];
      a.text = r.fields[c_text];
      a.topic = r.fields[c_topic];
      if (a.id.empty()) throw DataError(ctx + "empty arg_id");
      if (a.text.empty()) throw DataError(ctx + "empty argument text");
      try {
        a.stance = parse_stance(r.fields[c_stance]);
      } catch (const DataError& e) {
        throw DataError(ctx + e.what());
      }
      if (c_quality && !r.fields[*c_quality].empty()) {
        const double q = parse_double(r.fields[*c_quality], ctx);
        if (!(q >= 0.0 && q <= 1.0)) throw DataError(ctx + "quality outside [0,1]");
        a.quality = q;
      }
      if (!arg_rows.emplace(a.id, arguments.size()).second) throw DataError(ctx + "duplicate arg_id " + a.id);
      arguments.push_back(std::move(a));
    }
  }
  return arguments;
}

}  // namespace

Dataset load_arguments(const std::filesystem::path& arguments_path, Split split) {
  return Dataset(read_arguments(arguments_path), {}, {}, split);
}

Dataset load_dataset(const std::filesystem::path& arguments_path, const std::filesystem::path& key_points_path,
                     const std::optional<std::filesystem::path>& labels_path, Split split) {
  std::vector<Argument> arguments = read_arguments(arguments_path);
  std::unordered_map<std::string, std::size_t> arg_rows;
  for (std::size_t i = 0; i < arguments.size(); ++i) arg_rows.emplace(arguments[i].id, i);

  std::vector<KeyPoint> key_points;
  std::unordered_map<std::string, std::size_t> kp_rows;
  {
    const csv::Table t = csv::read(key_points_path);
    const std::size_t c_id = t.column("key_point_id");
    const std::size_t c_text = t.column("key_point");
    const std::size_t c_topic = t.column("topic");
    const std::size_t c_stance = t.column("stance");
    for (const auto& r : t.records()) {
      const std::string ctx = where(t, r);
      KeyPoint k;
      k.id = r.fields[c_id];
      k.text = r.fields[c_text];
      k.topic = r.fields[c_topic];
      if (k.id.empty()) throw DataError(ctx + "empty key_point_id");
      if (k.text.empty()) throw DataError(ctx + "empty key point text");
      try {
        k.stance = parse_stance(r.fields[c_stance]);
      } catch (const DataError& e) {
        throw DataError(ctx + e.what());
      }
      if (!kp_rows.emplace(k.id, key_points.size()).second) throw DataError(ctx + "duplicate key_point_id " + k.id);
      key_points.push_back(std::move(k));
    }
  }

  std::vector<LabeledPair> pairs;
  if (labels_path) {
    const csv::Table t = csv::read(*labels_path);
    const std::size_t c_arg = t.column("arg_id");
    const std::size_t c_kp = t.column("key_point_id");
    const std::size_t c_label = t.column("label");
    const auto c_amb = t.find_column("ambiguous");
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& r : t.records()) {
      const std::string ctx = where(t, r);
      LabeledPair p;
      p.argument_id = r.fields[c_arg];
      p.key_point_id = r.fields[c_kp];
      auto ai = arg_rows.find(p.argument_id);
      auto ki = kp_rows.find(p.key_point_id);
      if (ai == arg_rows.end()) throw DataError(ctx + "unknown arg_id " + p.argument_id);
      if (ki == kp_rows.end()) throw DataError(ctx + "unknown key_point_id " + p.key_point_id);
      const Argument& a = arguments[ai->second];
      const KeyPoint& k = key_points[ki->second];
      if (a.topic != k.topic || a.stance != k.stance) {
        throw DataError(ctx + "argument " + a.id + " and key point " + k.id + " differ in topic or stance");
      }
      const bool ambiguous = c_amb && !r.fields[*c_amb].empty() && parse_flag(r.fields[*c_amb], ctx);
      if (ambiguous) {
        p.label = MatchLabel::Ambiguous;
      } else {
        p.label = parse_flag(r.fields[c_label], ctx) ? MatchLabel::Match : MatchLabel::NoMatch;
      }
      if (!seen.emplace(pair_key(p.argument_id, p.key_point_id), r.line).second) {
        throw DataError(ctx + "duplicate pair (" + p.argument_id + ", " + p.key_point_id + ")");
      }
      pairs.push_back(std::move(p));
    }
  }
  return Dataset(std::move(arguments), std::move(key_points), std::move(pairs), split);
}

void save_dataset(const Dataset& d, const std::filesystem::path& arguments_path,
                  const std::filesystem::path& key_points_path, const std::filesystem::path& labels_path) {
  const bool with_quality =
      std::any_of(d.arguments().begin(), d.arguments().end(), [](const Argument& a) { return a.quality.has_value(); });
  std::ostringstream args;
  csv::write_row(args, with_quality ? std::vector<std::string>{"arg_id", "argument", "topic", "stance", "quality"}
                                    : std::vector<std::string>{"arg_id", "argument", "topic", "stance"});
  for (const auto& a : d.arguments()) {
    std::vector<std::string> row{a.id, a.text, a.topic, std::to_string(stance_value(a.stance))};
    if (with_quality) row.push_back(a.quality ? format_double(*a.quality) : "");
    csv::write_row(args, row);
  }
  write_file(arguments_path, args.str());

  std::ostringstream kps;
  csv::write_row(kps, {"key_point_id", "key_point", "topic", "stance"});
  for (const auto& k : d.key_points()) {
    csv::write_row(kps, {k.id, k.text, k.topic, std::to_string(stance_value(k.stance))});
  }
  write_file(key_points_path, kps.str());

  const bool with_amb = std::any_of(d.pairs().begin(), d.pairs().end(),
                                    [](const LabeledPair& p) { return p.label == MatchLabel::Ambiguous; });
  std::ostringstream labels;
  csv::write_row(labels, with_amb ? std::vector<std::string>{"arg_id", "key_point_id", "label", "ambiguous"}
                                  : std::vector<std::string>{"arg_id", "key_point_id", "label"});
  for (const auto& p : d.pairs()) {
    std::vector<std::string> row{p.argument_id, p.key_point_id, p.label == MatchLabel::Match ? "1" : "0"};
    if (with_amb) row.push_back(p.label == MatchLabel::Ambiguous ? "1" : "0");
    csv::write_row(labels, row);
  }
  write_file(labels_path, labels.str());
}

Dataset merge(const Dataset& a, const Dataset& b) {
  auto args = a.arguments();
  args.insert(args.end(), b.arguments().begin(), b.arguments().end());
  auto kps = a.key_points();
  kps.insert(kps.end(), b.key_points().begin(), b.key_points().end());
  auto pairs = a.pairs();
  pairs.insert(pairs.end(), b.pairs().begin(), b.pairs().end());
  return Dataset(std::move(args), std::move(kps), std::move(pairs), a.split());
}

StatisticsReport dataset_stats(const Dataset& d) {
  StatisticsReport r;
  r.topics = d.topics().size();
  r.arguments = d.arguments().size();
  r.key_points = d.key_points().size();
  r.pairs = d.pairs().size();

  struct Counts {
    std::size_t match = 0;
    bool ambiguous = false;
  };
  std::unordered_map<std::string, Counts> per_arg;
  for (const auto& p : d.pairs()) {
    auto& c = per_arg[p.argument_id];
    if (p.label == MatchLabel::Match) {
      ++r.match_pairs;
      ++c.match;
    } else if (p.label == MatchLabel::Ambiguous) {
      ++r.ambiguous_pairs;
      c.ambiguous = true;
    }
  }
  r.match_rate = r.pairs ? static_cast<double>(r.match_pairs) / static_cast<double>(r.pairs) : 0.0;
  for (const auto& a : d.arguments()) {
    auto it = per_arg.find(a.id);
    const Counts c = it == per_arg.end() ? Counts{} : it->second;
    if (c.ambiguous) {
      ++r.ambiguous;
    } else if (c.match == 0) {
      ++r.unmatched;
    } else if (c.match == 1) {
      ++r.single;
    } else {
      ++r.multiple;
    }
  }
  return r;
}

SplitResult split_by_topics(const Dataset& d, const std::set<std::string>& train_topics,
                            const std::set<std::string>& validation_topics, const std::set<std::string>& test_topics) {
  std::map<std::string, Split> owner;
  auto claim = [&](const std::set<std::string>& topics, Split s) {
    for (const auto& t : topics) {
      if (!owner.emplace(t, s).second) throw DataError("topic listed in more than one split: " + t);
    }
  };
  claim(train_topics, Split::Train);
  claim(validation_topics, Split::Validation);
  claim(test_topics, Split::Test);

  const auto present = d.topics();
  for (const auto& t : present) {
    if (!owner.count(t)) throw DataError("topic not assigned to any split: " + t);
  }
  SplitResult out;
  for (const auto& [t, s] : owner) {
    if (!present.count(t)) out.warnings.push_back("listed topic not present in data: " + t);
  }

  auto part = [&](Split s) {
    std::vector<Argument> args;
    std::vector<KeyPoint> kps;
    std::vector<LabeledPair> pairs;
    for (const auto& a : d.arguments()) {
      if (owner.at(a.topic) == s) args.push_back(a);
    }
    for (const auto& k : d.key_points()) {
      if (owner.at(k.topic) == s) kps.push_back(k);
    }
    for (const auto& p : d.pairs()) {
      if (owner.at(d.find_argument(p.argument_id)->topic) == s) pairs.push_back(p);
    }
    return Dataset(std::move(args), std::move(kps), std::move(pairs), s);
  };
  out.train = part(Split::Train);
  out.validation = part(Split::Validation);
  out.test = part(Split::Test);
  return out;
}

}  // namespace kpa::corpus
