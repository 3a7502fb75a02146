#include "kpa/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "kpa/error.hpp"
#include "kpa/text.hpp"

namespace kpa::evalkit {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const std::vector<std::string>& toks, std::size_t n) {
  NgramCounts out;
  if (toks.size() < n) return out;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    ++out[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                   toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return out;
}

double f1(double overlap, double cand_total, double ref_total) {
  if (cand_total == 0.0 || ref_total == 0.0 || overlap == 0.0) return 0.0;
  const double p = overlap / cand_total;
  const double r = overlap / ref_total;
  return 2.0 * p * r / (p + r);
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out.push_back(' ');
    out += p;
  }
  return out;
}

}  // namespace

std::vector<PredictionSet> group_predictions(std::span<const Prediction> predictions, const corpus::Dataset& gold) {
  std::map<corpus::GroupKey, std::vector<Prediction>> groups;
  for (const auto& p : predictions) {
    const corpus::Argument* a = gold.find_argument(p.argument_id);
    if (!a) throw DataError("prediction for unknown argument " + p.argument_id);
    groups[{a->topic, a->stance}].push_back(p);
  }
  std::vector<PredictionSet> out;
  for (auto& [key, entries] : groups) out.push_back({key, std::move(entries)});
  return out;
}

double average_precision(std::span<const int> ranked_relevance) {
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < ranked_relevance.size(); ++k) {
    if (ranked_relevance[k]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  return hits ? sum / static_cast<double>(hits) : 0.0;
}

APResult strict_relaxed_map(std::span<const PredictionSet> predictions, const corpus::Dataset& gold,
                            double keep_fraction) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw Error("keep_fraction must be in (0, 1]");
  APResult out;
  for (const auto& set : predictions) {
    if (set.entries.empty()) continue;
    std::vector<Prediction> ranked = set.entries;
    for (const auto& p : ranked) {
      if (!gold.find_argument(p.argument_id)) throw DataError("prediction for unknown argument " + p.argument_id);
    }
    std::sort(ranked.begin(), ranked.end(), [](const Prediction& a, const Prediction& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.argument_id < b.argument_id;
    });
    const auto n = ranked.size();
    const auto keep =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(keep_fraction * static_cast<double>(n))), 1, n);
    std::vector<int> strict(keep);
    std::vector<int> relaxed(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const auto label = gold.label(ranked[i].argument_id, ranked[i].key_point_id);
      strict[i] = label == corpus::MatchLabel::Match;
      relaxed[i] = label == corpus::MatchLabel::Match || label == corpus::MatchLabel::Ambiguous;
    }
    GroupAP g{set.group, average_precision(strict), average_precision(relaxed), keep};
    out.kept_count += keep;
    out.groups.push_back(std::move(g));
  }
  if (!out.groups.empty()) {
    for (const auto& g : out.groups) {
      out.strict += g.strict;
      out.relaxed += g.relaxed;
    }
    out.strict /= static_cast<double>(out.groups.size());
    out.relaxed /= static_cast<double>(out.groups.size());
  }
  return out;
}

double rouge_n(std::string_view candidate, std::string_view reference, int n) {
  if (n < 1) throw Error("rouge_n: n must be >= 1");
  const auto nn = static_cast<std::size_t>(n);
  const auto c = ngrams(text::tokenize(candidate), nn);
  const auto r = ngrams(text::tokenize(reference), nn);
  double overlap = 0.0;
  double c_total = 0.0;
  double r_total = 0.0;
  for (const auto& [g, cnt] : c) {
    c_total += static_cast<double>(cnt);
    auto it = r.find(g);
    if (it != r.end()) overlap += static_cast<double>(std::min(cnt, it->second));
  }
  for (const auto& [g, cnt] : r) r_total += static_cast<double>(cnt);
  return f1(overlap, c_total, r_total);
}

double rouge_l(std::string_view candidate, std::string_view reference) {
  const auto c = text::tokenize(candidate);
  const auto r = text::tokenize(reference);
  if (c.empty() || r.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(c, r));
  return f1(lcs, static_cast<double>(c.size()), static_cast<double>(r.size()));
}

RougeResult evaluate_generation(std::span<const kp_graph::GeneratedKeyPoint> generated, const corpus::Dataset& gold) {
  const auto gold_groups = gold.key_point_groups();
  std::map<corpus::GroupKey, std::vector<std::string>> gen;
  for (const auto& k : generated) {
    corpus::GroupKey key{k.topic, k.stance};
    if (!gold_groups.count(key)) {
      throw DataError("generated key points for group without gold key points: " + k.topic + " / " +
                      std::string(corpus::stance_name(k.stance)));
    }
    gen[key].push_back(k.text);
  }
  RougeResult out;
  for (const auto& [key, kps] : gold_groups) {
    std::vector<std::string> ref_texts;
    for (const auto* k : kps) ref_texts.push_back(k->text);
    const std::string reference = join(ref_texts);
    GroupRouge g;
    g.group = key;
    if (auto it = gen.find(key); it != gen.end()) {
      const std::string candidate = join(it->second);
      g.generated = it->second.size();
      g.score = {rouge_n(candidate, reference, 1), rouge_n(candidate, reference, 2), rouge_l(candidate, reference)};
    }
    out.groups.push_back(g);
  }
  if (!out.groups.empty()) {
    for (const auto& g : out.groups) {
      out.mean.r1 += g.score.r1;
      out.mean.r2 += g.score.r2;
      out.mean.rl += g.score.rl;
    }
    const auto n = static_cast<double>(out.groups.size());
    out.mean.r1 /= n;
    out.mean.r2 /= n;
    out.mean.rl /= n;
  }
  return out;
}

}  // namespace kpa::evalkit
