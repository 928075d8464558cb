#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lexsimp {

/// Word vectors of one fixed dimension, stored contiguously.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dim = 300) : dim_(dim) {}

  /// Throws on a dimension mismatch or a duplicate word.
  void add(std::string word, std::span<const double> vec);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return index_.size(); }

  /// Exact word, then lowercase; empty span when absent.
  std::span<const double> find(std::string_view word) const;

  void save_cache(std::ostream& out) const;
  static EmbeddingStore load_cache(std::istream& in);

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> words_;
  std::vector<double> data_;
};

/// word2vec text format: optional "count dim" header, then `word v1 ... vd`.
EmbeddingStore read_embeddings_text(std::istream& in, const std::string& source_name);

/// Loads either the text format or a binary cache written by save_cache
/// (detected by its magic bytes).
EmbeddingStore load_embeddings(const std::filesystem::path& path);
void save_embedding_cache(const EmbeddingStore& store, const std::filesystem::path& path);

struct PhraseEmbedding {
  std::vector<double> vector;
  std::size_t words = 0;
  std::size_t in_vocabulary = 0;
  bool covered() const noexcept { return in_vocabulary > 0; }
};

/// Component-wise mean over the phrase's in-vocabulary words; the zero
/// vector when none are known.
PhraseEmbedding phrase_embedding(const EmbeddingStore& store, std::string_view phrase);

/// u.v / (|u||v|); 0 when either norm is 0. Throws on a dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

}  // namespace lexsimp
