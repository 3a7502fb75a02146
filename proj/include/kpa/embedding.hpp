#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kpa::embedding {

/// Finite, non-empty real vector.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

/// Row-major tokens x dim matrix of finite values, at least one row.
class TokenEmbeddingMatrix {
 public:
  TokenEmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  std::span<const double> values() const { return values_; }

  bool operator==(const TokenEmbeddingMatrix&) const = default;

 private:
  std::size_t rows_;
  std::size_t dim_;
  std::vector<double> values_;
};

enum class EncoderKind { Lexical, Precomputed };

struct EncoderConfig {
  EncoderKind kind = EncoderKind::Lexical;
  std::size_t dim = 256;
  int ngram_min = 3;  // character n-gram range over "<token>"
  int ngram_max = 5;
  std::uint64_t seed = 0;
};

/// Component-wise mean over token rows.
EmbeddingVector mean_pool(const TokenEmbeddingMatrix& m);

/// Deterministic hashed character-n-gram encoder. Each token row is the sum
/// of seeded pseudo-random vectors, one per n-gram of "<token>" plus the
/// whole marked token, then L2-normalized.
TokenEmbeddingMatrix lexical_encode(std::string_view text, const EncoderConfig& cfg);

/// Standard cosine similarity clamped to [-1, 1]. Throws NumericError on a
/// zero vector or on a dimension mismatch.
double cosine(std::span<const double> a, std::span<const double> b);
inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) { return cosine(a.values(), b.values()); }

using EmbeddingMap = std::map<std::string, EmbeddingVector, std::less<>>;

/// Reads the JSON Lines exchange format {"id","dim","values"}.
EmbeddingMap load_embeddings(const std::filesystem::path& path);
void save_embeddings(const std::filesystem::path& path, const EmbeddingMap& vectors);

/// Text -> sentence vector. Implementations are immutable after construction.
class Encoder {
 public:
  virtual ~Encoder() = default;
  /// `id` identifies the text for lookup-based encoders; `text` is what a
  /// content-based encoder embeds.
  virtual EmbeddingVector embed(std::string_view id, std::string_view text) const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::string describe() const = 0;
};

class LexicalEncoder final : public Encoder {
 public:
  explicit LexicalEncoder(EncoderConfig cfg);
  EmbeddingVector embed(std::string_view id, std::string_view text) const override;
  std::size_t dim() const override { return cfg_.dim; }
  std::string describe() const override;
  const EncoderConfig& config() const { return cfg_; }

 private:
  EncoderConfig cfg_;
};

/// Looks vectors up by id; unknown ids are a DataError.
class PrecomputedEncoder final : public Encoder {
 public:
  explicit PrecomputedEncoder(EmbeddingMap vectors, std::string source = {});
  EmbeddingVector embed(std::string_view id, std::string_view text) const override;
  std::size_t dim() const override { return dim_; }
  std::string describe() const override;
  bool contains(std::string_view id) const { return vectors_.count(id) != 0; }

 private:
  EmbeddingMap vectors_;
  std::size_t dim_ = 0;
  std::string source_;
};

}  // namespace kpa::embedding
