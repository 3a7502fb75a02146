#include "kpa/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "kpa/error.hpp"
#include "kpa/simd.hpp"
#include "kpa/text.hpp"

namespace kpa::embedding {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Adds the feature's pseudo-random direction (uniform in [-1, 1) per
// component) to `row`.
void add_feature(std::string_view feature, std::uint64_t seed, std::span<double> row) {
  std::uint64_t state = fnv1a(feature) ^ (seed * 0xD1B54A32D192ED03ull);
  for (double& v : row) {
    const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    v += 2.0 * u - 1.0;
  }
}

// Replaces bare NaN / Infinity / -Infinity tokens (as emitted by Python's
// json module) with null so the record still parses and the offending id
// can be named.
std::string neutralize_non_finite(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_string) {
      out.push_back(c);
      if (c == '\\' && i + 1 < line.size()) {
        out.push_back(line[++i]);
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out.push_back(c);
      continue;
    }
    const std::string_view rest = line.substr(i);
    if (rest.starts_with("NaN")) {
      out += "null";
      i += 2;
    } else if (rest.starts_with("-Infinity")) {
      out += "null";
      i += 8;
    } else if (rest.starts_with("Infinity")) {
      out += "null";
      i += 7;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw NumericError("embedding vector must have dim > 0");
  for (const double v : values_) {
    if (!std::isfinite(v)) throw NumericError("embedding vector has a non-finite entry");
  }
}

TokenEmbeddingMatrix::TokenEmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> values)
    : rows_(rows), dim_(dim), values_(std::move(values)) {
  if (rows_ == 0) throw NumericError("token embedding matrix has no rows");
  if (dim_ == 0) throw NumericError("token embedding matrix has dim 0");
  if (values_.size() != rows_ * dim_) throw NumericError("token embedding matrix size mismatch");
  for (const double v : values_) {
    if (!std::isfinite(v)) throw NumericError("token embedding matrix has a non-finite entry");
  }
}

EmbeddingVector mean_pool(const TokenEmbeddingMatrix& m) {
  std::vector<double> sum(m.dim(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) simd::axpy(1.0, m.row(r), sum);
  const double inv = 1.0 / static_cast<double>(m.rows());
  for (double& v : sum) v *= inv;
  return EmbeddingVector(std::move(sum));
}

TokenEmbeddingMatrix lexical_encode(std::string_view text, const EncoderConfig& cfg) {
  if (cfg.kind != EncoderKind::Lexical) throw Error("lexical_encode: encoder config is not lexical");
  if (cfg.dim == 0) throw Error("lexical_encode: dim must be positive");
  if (cfg.ngram_min < 1 || cfg.ngram_max < cfg.ngram_min) throw Error("lexical_encode: bad n-gram range");
  const auto tokens = text::tokenize(text);
  if (tokens.empty()) throw DataError("lexical_encode: text has no tokens");

  std::vector<double> values(tokens.size() * cfg.dim, 0.0);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    std::span<double> row(values.data() + t * cfg.dim, cfg.dim);
    const std::string marked = "<" + tokens[t] + ">";
    add_feature(marked, cfg.seed, row);
    for (int n = cfg.ngram_min; n <= cfg.ngram_max; ++n) {
      const auto len = static_cast<std::size_t>(n);
      if (len >= marked.size()) break;
      for (std::size_t i = 0; i + len <= marked.size(); ++i) add_feature(marked.substr(i, len), cfg.seed, row);
    }
    const double norm = std::sqrt(simd::dot(row, row));
    if (norm == 0.0) throw NumericError("lexical_encode: zero token vector for '" + tokens[t] + "'");
    for (double& v : row) v /= norm;
  }
  return TokenEmbeddingMatrix(tokens.size(), cfg.dim, std::move(values));
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw NumericError("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                       ")");
  }
  const double aa = simd::dot(a, a);
  const double bb = simd::dot(b, b);
  if (aa == 0.0 || bb == 0.0) throw NumericError("cosine: zero vector");
  const double c = simd::dot(a, b) / (std::sqrt(aa) * std::sqrt(bb));
  return std::clamp(c, -1.0, 1.0);
}

EmbeddingMap load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  EmbeddingMap out;
  std::size_t dim = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const std::string ctx = path.string() + ": line " + std::to_string(lineno) + ": ";
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(neutralize_non_finite(line));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(ctx + "invalid JSON: " + e.what());
    }
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string() || !rec.contains("values") ||
        !rec["values"].is_array()) {
      throw DataError(ctx + "expected {\"id\": string, \"dim\": int, \"values\": [...]}");
    }
    const std::string id = rec["id"].get<std::string>();
    const auto& arr = rec["values"];
    std::vector<double> values;
    values.reserve(arr.size());
    for (const auto& v : arr) {
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        throw DataError(ctx + "id '" + id + "' has a non-finite value");
      }
      values.push_back(v.get<double>());
    }
    if (rec.contains("dim")) {
      if (!rec["dim"].is_number_integer() || rec["dim"].get<long long>() != static_cast<long long>(values.size())) {
        throw DataError(ctx + "id '" + id + "': dim field disagrees with values length");
      }
    }
    if (values.empty()) throw DataError(ctx + "id '" + id + "' has no values");
    if (dim == 0) dim = values.size();
    if (values.size() != dim) {
      throw DataError(ctx + "id '" + id + "' has dim " + std::to_string(values.size()) + ", expected " +
                      std::to_string(dim));
    }
    if (!out.emplace(id, EmbeddingVector(std::move(values))).second) throw DataError(ctx + "duplicate id '" + id + "'");
  }
  return out;
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingMap& vectors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  for (const auto& [id, v] : vectors) {
    nlohmann::json rec;
    rec["id"] = id;
    rec["dim"] = v.dim();
    rec["values"] = std::vector<double>(v.values().begin(), v.values().end());
    out << rec.dump() << '\n';
  }
}

LexicalEncoder::LexicalEncoder(EncoderConfig cfg) : cfg_(cfg) {
  if (cfg_.kind != EncoderKind::Lexical) throw Error("LexicalEncoder needs a lexical config");
  if (cfg_.dim == 0) throw Error("encoder dim must be positive");
}

EmbeddingVector LexicalEncoder::embed(std::string_view, std::string_view text) const {
  return mean_pool(lexical_encode(text, cfg_));
}

std::string LexicalEncoder::describe() const {
  std::ostringstream ss;
  ss << "lexical(dim=" << cfg_.dim << ",ngram=" << cfg_.ngram_min << "-" << cfg_.ngram_max << ",seed=" << cfg_.seed
     << ")";
  return ss.str();
}

PrecomputedEncoder::PrecomputedEncoder(EmbeddingMap vectors, std::string source)
    : vectors_(std::move(vectors)), source_(std::move(source)) {
  if (vectors_.empty()) throw DataError("precomputed embeddings are empty");
  dim_ = vectors_.begin()->second.dim();
  for (const auto& [id, v] : vectors_) {
    if (v.dim() != dim_) throw DataError("precomputed embeddings: inconsistent dim for '" + id + "'");
  }
}

EmbeddingVector PrecomputedEncoder::embed(std::string_view id, std::string_view) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) throw DataError("no precomputed embedding for id '" + std::string(id) + "'");
  return it->second;
}

std::string PrecomputedEncoder::describe() const {
  return "precomputed(dim=" + std::to_string(dim_) + (source_.empty() ? "" : ",source=" + source_) + ")";
}

}  // namespace kpa::embedding
