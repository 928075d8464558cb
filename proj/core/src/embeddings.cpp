#include "lexsimp/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <fstream>

#include "lexsimp/binary_io.hpp"
#include "lexsimp/error.hpp"
#include "lexsimp/log.hpp"
#include "lexsimp/text.hpp"

namespace lexsimp {

namespace {

constexpr std::string_view kCacheMagic = "LXEMBED1";
constexpr std::uint32_t kCacheVersion = 1;

}  // namespace

void EmbeddingStore::add(std::string word, std::span<const double> vec) {
  if (vec.size() != dim_) {
    throw Error(ErrorCode::kInvalidArgument, "embedding for '" + word + "' has dimension " +
                                                 std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
  }
  const auto [it, inserted] = index_.emplace(word, words_.size());
  if (!inserted) throw Error(ErrorCode::kInvalidArgument, "duplicate embedding for '" + word + "'");
  words_.push_back(std::move(word));
  data_.insert(data_.end(), vec.begin(), vec.end());
}

std::span<const double> EmbeddingStore::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) it = index_.find(text::to_lower(word));
  if (it == index_.end()) return {};
  return std::span<const double>(data_).subspan(it->second * dim_, dim_);
}

void EmbeddingStore::save_cache(std::ostream& out) const {
  BinaryWriter w(out);
  w.magic(kCacheMagic);
  w.u32(kCacheVersion);
  w.u64(dim_);
  w.u64(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    w.str(words_[i]);
    for (std::size_t d = 0; d < dim_; ++d) w.f64(data_[i * dim_ + d]);
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing embedding cache");
}

EmbeddingStore EmbeddingStore::load_cache(std::istream& in) {
  BinaryReader r(in, "embedding cache");
  r.expect_magic(kCacheMagic);
  if (r.u32() != kCacheVersion) throw Error(ErrorCode::kParse, "unsupported embedding cache version");
  const auto dim = r.u64();
  const auto count = r.u64();
  if (dim == 0 || dim > 100000) throw Error(ErrorCode::kParse, "embedding cache: bad dimension");
  EmbeddingStore store(dim);
  std::vector<double> vec(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto word = r.str();
    for (auto& x : vec) x = r.f64();
    store.add(std::move(word), vec);
  }
  return store;
}

EmbeddingStore read_embeddings_text(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  while (read_line(in, line)) {
    ++line_no;
    const auto fields = text::split_whitespace(line);
    if (fields.empty()) continue;
    long long a = 0;
    long long b = 0;
    if (line_no == 1 && fields.size() == 2 && text::parse_int(fields[0], a) && text::parse_int(fields[1], b)) {
      dim = static_cast<std::size_t>(b);
      continue;
    }
    if (fields.size() < 2) {
      throw Error(ErrorCode::kParse, source_name + ": line " + std::to_string(line_no) + " has no vector");
    }
    if (dim == 0) dim = fields.size() - 1;
    if (fields.size() - 1 != dim) {
      throw Error(ErrorCode::kParse, source_name + ": line " + std::to_string(line_no) + " has dimension " +
                                         std::to_string(fields.size() - 1) + ", expected " + std::to_string(dim));
    }
    std::vector<double> vec(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      if (!text::parse_double(fields[d + 1], vec[d])) {
        throw Error(ErrorCode::kParse, source_name + ": non-numeric component, line " + std::to_string(line_no));
      }
    }
    rows.emplace_back(fields[0], std::move(vec));
  }
  EmbeddingStore store(dim == 0 ? 300 : dim);
  std::unordered_set<std::string> seen;
  for (auto& [word, vec] : rows) {
    if (seen.insert(word).second) {
      store.add(std::move(word), vec);
    } else {
      log().debug("{}: duplicate embedding '{}' ignored", source_name, word);
    }
  }
  return store;
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingResource, "cannot open embeddings " + path.string());
  std::string head(kCacheMagic.size(), '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  const bool is_cache = in.gcount() == static_cast<std::streamsize>(head.size()) && head == kCacheMagic;
  in.clear();
  in.seekg(0);
  auto store = is_cache ? EmbeddingStore::load_cache(in) : read_embeddings_text(in, path.string());
  log().info("loaded {} embeddings of dimension {} from {}", store.size(), store.dim(), path.string());
  return store;
}

void save_embedding_cache(const EmbeddingStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  store.save_cache(out);
}

PhraseEmbedding phrase_embedding(const EmbeddingStore& store, std::string_view phrase) {
  PhraseEmbedding out;
  out.vector.assign(store.dim(), 0.0);
  const auto words = text::tokenize(phrase);
  out.words = words.size();
  for (const auto& w : words) {
    const auto v = store.find(w);
    if (v.empty()) continue;
    for (std::size_t d = 0; d < v.size(); ++d) out.vector[d] += v[d];
    ++out.in_vocabulary;
  }
  if (out.in_vocabulary > 0) {
    for (auto& x : out.vector) x /= static_cast<double>(out.in_vocabulary);
  }
  return out;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kInvalidArgument, "cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                                                 std::to_string(v.size()) + ")");
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

}  // namespace lexsimp
