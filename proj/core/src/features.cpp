#include "lexsimp/features.hpp"

#include <algorithm>
#include <unordered_set>

#include "lexsimp/error.hpp"
#include "lexsimp/text.hpp"

namespace lexsimp {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv(std::uint64_t& h, std::string_view bytes) {
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
}

void fnv(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xFF;
    h *= kFnvPrime;
  }
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

FeatureSpec side(std::string name, FeatureGroup group, bool binnable = true) {
  FeatureSpec s;
  s.name = std::move(name);
  s.group = group;
  s.binnable = binnable;
  return s;
}

}  // namespace

std::string_view to_string(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::kSurface: return "surface";
    case FeatureGroup::kFrequency: return "frequency";
    case FeatureGroup::kLexicon: return "lexicon";
    case FeatureGroup::kContext: return "context";
    case FeatureGroup::kEmbeddings: return "embeddings";
    case FeatureGroup::kCustom: return "custom";
  }
  return "custom";
}

std::optional<FeatureGroup> parse_feature_group(std::string_view name) {
  for (auto g : {FeatureGroup::kSurface, FeatureGroup::kFrequency, FeatureGroup::kLexicon, FeatureGroup::kContext,
                 FeatureGroup::kEmbeddings, FeatureGroup::kCustom}) {
    if (to_string(g) == name) return g;
  }
  return std::nullopt;
}

std::string ContextSlot::name() const {
  return "lm_n" + std::to_string(n) + "_l" + std::to_string(-start);
}

const std::vector<ContextSlot>& context_slots() {
  static const std::vector<ContextSlot> slots = [] {
    std::vector<ContextSlot> out;
    for (int n = 2; n <= 5; ++n) {
      // The window spans target-2 .. target+2.
      for (int start = -2; start <= 0; ++start) {
        if (start + n - 1 >= 0 && start + n - 1 <= 2) out.push_back({n, start});
      }
    }
    return out;
  }();
  return slots;
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> specs) : specs_(std::move(specs)) {
  std::unordered_set<std::string> seen;
  for (const auto& s : specs_) {
    if (!seen.insert(s.name).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate feature name '" + s.name + "'");
    }
    if (s.binnable && s.kind != FeatureKind::kScalar) {
      throw Error(ErrorCode::kInvalidArgument, "feature '" + s.name + "' is binnable but not scalar");
    }
    if (s.kind == FeatureKind::kVector && !s.pairwise) {
      throw Error(ErrorCode::kInvalidArgument, "vector feature '" + s.name + "' must be pairwise");
    }
  }
  const auto vectors = std::count_if(specs_.begin(), specs_.end(),
                                     [](const FeatureSpec& s) { return s.kind == FeatureKind::kVector; });
  if (vectors > 1) throw Error(ErrorCode::kInvalidArgument, "at most one vector feature is supported");
}

FeatureSchema FeatureSchema::standard(std::size_t embedding_dim) {
  std::vector<FeatureSpec> specs;
  specs.push_back(side("word_count", FeatureGroup::kSurface));
  specs.push_back(side("char_len", FeatureGroup::kSurface));
  specs.push_back(side("syllables", FeatureGroup::kSurface));
  specs.push_back(side("ngram_logfreq", FeatureGroup::kFrequency));
  specs.push_back(side("simplewiki_relfreq", FeatureGroup::kFrequency));
  specs.push_back(side("lex_present", FeatureGroup::kLexicon, false));
  specs.push_back(side("lex_score", FeatureGroup::kLexicon));
  specs.push_back(side("had_context", FeatureGroup::kContext, false));
  for (const auto& slot : context_slots()) specs.push_back(side(slot.name(), FeatureGroup::kContext));
  FeatureSpec cos = side("cosine", FeatureGroup::kEmbeddings);
  cos.pairwise = true;
  specs.push_back(cos);
  FeatureSpec diff = side("emb_diff", FeatureGroup::kEmbeddings, false);
  diff.pairwise = true;
  diff.kind = FeatureKind::kVector;
  diff.width = embedding_dim;
  specs.push_back(diff);
  return FeatureSchema(std::move(specs));
}

void FeatureSchema::set_group_enabled(FeatureGroup group, bool enabled) {
  for (auto& s : specs_) {
    if (s.group == group) s.enabled = enabled;
  }
}

void FeatureSchema::set_enabled(std::string_view name, bool enabled) {
  for (auto& s : specs_) {
    if (s.name == name) {
      s.enabled = enabled;
      return;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown feature '" + std::string(name) + "'");
}

std::vector<const FeatureSpec*> FeatureSchema::side_scalars() const {
  std::vector<const FeatureSpec*> out;
  for (const auto& s : specs_) {
    if (s.enabled && !s.pairwise) out.push_back(&s);
  }
  return out;
}

std::vector<const FeatureSpec*> FeatureSchema::pair_scalars() const {
  std::vector<const FeatureSpec*> out;
  for (const auto& s : specs_) {
    if (s.enabled && s.pairwise && s.kind == FeatureKind::kScalar) out.push_back(&s);
  }
  return out;
}

const FeatureSpec* FeatureSchema::pair_vector() const {
  for (const auto& s : specs_) {
    if (s.enabled && s.kind == FeatureKind::kVector) return &s;
  }
  return nullptr;
}

bool FeatureSchema::group_enabled(FeatureGroup group) const {
  return std::any_of(specs_.begin(), specs_.end(),
                     [&](const FeatureSpec& s) { return s.enabled && s.group == group; });
}

std::optional<std::size_t> FeatureSchema::side_index(std::string_view name) const {
  std::size_t i = 0;
  for (const auto& s : specs_) {
    if (!s.enabled || s.pairwise) continue;
    if (s.name == name) return i;
    ++i;
  }
  return std::nullopt;
}

std::uint64_t FeatureSchema::hash() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& s : specs_) {
    if (!s.enabled) continue;
    fnv(h, s.name);
    fnv(h, static_cast<std::uint64_t>(s.kind));
    fnv(h, static_cast<std::uint64_t>(s.group));
    fnv(h, static_cast<std::uint64_t>(s.pairwise));
    fnv(h, static_cast<std::uint64_t>(s.binnable));
    fnv(h, static_cast<std::uint64_t>(s.width));
  }
  return h;
}

FeatureExtractor::FeatureExtractor(FeatureSchema schema, FeatureResources resources)
    : schema_(std::move(schema)), res_(resources) {
  for (const auto* s : schema_.side_scalars()) side_.push_back(*s);
  for (const auto* s : schema_.pair_scalars()) pair_.push_back(*s);
  if (const auto* v = schema_.pair_vector()) vec_ = *v;

  auto need = [](const void* ptr, std::string_view what, std::string_view feature) {
    if (ptr == nullptr) {
      throw Error(ErrorCode::kMissingResource,
                  "feature '" + std::string(feature) + "' requires resource: " + std::string(what));
    }
  };
  for (const auto& s : side_) {
    if (s.name == "ngram_logfreq") {
      need(res_.ngram_frequency, "ngram frequency table", s.name);
    } else if (s.name == "simplewiki_relfreq") {
      need(res_.simple_frequency, "simple wikipedia frequency table", s.name);
      need(res_.normal_frequency, "normal wikipedia frequency table", s.name);
    } else if (s.group == FeatureGroup::kLexicon) {
      need(res_.lexicon, "word-complexity lexicon", s.name);
    } else if (s.group == FeatureGroup::kContext) {
      need(res_.lm, "language model", s.name);
    } else if (s.group == FeatureGroup::kCustom) {
      throw Error(ErrorCode::kInvalidArgument, "no extractor for custom feature '" + s.name + "'");
    }
  }
  for (const auto& s : pair_) {
    if (s.group != FeatureGroup::kEmbeddings) {
      throw Error(ErrorCode::kInvalidArgument, "no extractor for pairwise feature '" + s.name + "'");
    }
    need(res_.embeddings, "word embeddings", s.name);
  }
  if (vec_) {
    need(res_.embeddings, "word embeddings", vec_->name);
    if (res_.embeddings->dim() != vec_->width) {
      throw Error(ErrorCode::kSchemaMismatch, "embedding dimension " + std::to_string(res_.embeddings->dim()) +
                                                  " does not match schema width " + std::to_string(vec_->width));
    }
  }
}

double FeatureExtractor::lm_logprob_truncated(std::span<const std::string> ngram) const {
  const auto order = static_cast<std::size_t>(res_.lm->order());
  if (ngram.size() > order) ngram = ngram.subspan(ngram.size() - order);
  return res_.lm->logprob(ngram);
}

double FeatureExtractor::context_free_logprob(const std::vector<std::string>& tokens) const {
  const std::size_t m = tokens.size();
  const std::size_t max_n = std::min<std::size_t>(m, static_cast<std::size_t>(res_.lm->order()));
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    for (std::size_t s = 0; s + n <= m; ++s) {
      sum += res_.lm->logprob(std::span<const std::string>(tokens).subspan(s, n));
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

std::vector<double> FeatureExtractor::context_features(const std::vector<std::string>& tokens,
                                                       const Context* context) const {
  const auto& slots = context_slots();
  // [0] = had_context, then one value per slot.
  std::vector<double> out(slots.size() + 1, 0.0);
  const double fallback = context_free_logprob(tokens);
  if (context == nullptr || context->empty()) {
    std::fill(out.begin() + 1, out.end(), fallback);
    return out;
  }
  out[0] = 1.0;
  std::vector<std::string> seq;
  const std::size_t left_keep = std::min<std::size_t>(2, context->left.size());
  seq.insert(seq.end(), context->left.end() - static_cast<std::ptrdiff_t>(left_keep), context->left.end());
  const auto offset = static_cast<long>(seq.size());
  seq.insert(seq.end(), tokens.begin(), tokens.end());
  const std::size_t right_keep = std::min<std::size_t>(2, context->right.size());
  seq.insert(seq.end(), context->right.begin(), context->right.begin() + static_cast<std::ptrdiff_t>(right_keep));

  const std::span<const std::string> all(seq);
  for (std::size_t k = 0; k < slots.size(); ++k) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const long pos = offset + static_cast<long>(i) + slots[k].start;
      const long end = pos + slots[k].n;
      if (pos < 0 || end > static_cast<long>(seq.size())) continue;
      sum += lm_logprob_truncated(all.subspan(static_cast<std::size_t>(pos), static_cast<std::size_t>(slots[k].n)));
      ++count;
    }
    out[k + 1] = count ? sum / static_cast<double>(count) : fallback;
  }
  return out;
}

std::vector<double> FeatureExtractor::extract_single(std::string_view phrase, const Context* context) const {
  const auto tokens = text::tokenize(phrase);
  if (tokens.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot extract features of an empty phrase");
  std::vector<double> out;
  out.reserve(side_.size());
  std::optional<LexiconHit> hit;
  std::vector<double> ctx;
  const auto& slots = context_slots();
  for (const auto& s : side_) {
    const auto& name = s.name;
    if (name == "word_count") {
      out.push_back(static_cast<double>(tokens.size()));
    } else if (name == "char_len") {
      out.push_back(static_cast<double>(utf8_length(text::trim(phrase))));
    } else if (name == "syllables") {
      const SyllableCounter& counter = res_.syllables ? *res_.syllables : default_syllables_;
      out.push_back(static_cast<double>(counter.count(phrase)));
    } else if (name == "ngram_logfreq") {
      out.push_back(log_frequency(*res_.ngram_frequency, text::join(tokens, " ")));
    } else if (name == "simplewiki_relfreq") {
      out.push_back(phrase_relative_frequency(*res_.simple_frequency, *res_.normal_frequency, text::join(tokens, " ")));
    } else if (name == "lex_present" || name == "lex_score") {
      if (!hit) hit = res_.lexicon->lookup(phrase, res_.lemmatizer);
      out.push_back(name == "lex_present" ? (hit->present ? 1.0 : 0.0) : hit->score);
    } else if (s.group == FeatureGroup::kContext) {
      if (ctx.empty()) ctx = context_features(tokens, context);
      if (name == "had_context") {
        out.push_back(ctx[0]);
      } else {
        const auto it = std::find_if(slots.begin(), slots.end(), [&](const ContextSlot& c) { return c.name() == name; });
        if (it == slots.end()) throw Error(ErrorCode::kInvalidArgument, "unknown context feature '" + name + "'");
        out.push_back(ctx[static_cast<std::size_t>(it - slots.begin()) + 1]);
      }
    } else {
      throw Error(ErrorCode::kInvalidArgument, "no extractor for feature '" + name + "'");
    }
  }
  return out;
}

PhraseEmbedding FeatureExtractor::embed(std::string_view phrase) const {
  if (res_.embeddings == nullptr) return {};
  return phrase_embedding(*res_.embeddings, phrase);
}

PairFeatures FeatureExtractor::combine(const std::vector<double>& a, const std::vector<double>& b,
                                       const PhraseEmbedding* emb_a, const PhraseEmbedding* emb_b) const {
  PairFeatures out;
  out.schema_hash = schema_.hash();
  out.a = a;
  out.b = b;
  out.diff.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.diff[i] = a[i] - b[i];
  if (!pair_.empty() || vec_) {
    if (emb_a == nullptr || emb_b == nullptr) {
      throw Error(ErrorCode::kMissingResource, "pairwise features require phrase embeddings");
    }
    for (const auto& s : pair_) {
      if (s.name == "cosine") out.pair.push_back(cosine(emb_a->vector, emb_b->vector));
    }
    if (vec_) {
      out.vec.resize(emb_a->vector.size());
      for (std::size_t d = 0; d < out.vec.size(); ++d) out.vec[d] = emb_a->vector[d] - emb_b->vector[d];
    }
  }
  return out;
}

PairFeatures FeatureExtractor::extract_pair(std::string_view a, std::string_view b, const Context* context_a,
                                            const Context* context_b) const {
  const auto fa = extract_single(a, context_a);
  const auto fb = extract_single(b, context_b);
  if (pair_.empty() && !vec_) return combine(fa, fb, nullptr, nullptr);
  const auto ea = embed(a);
  const auto eb = embed(b);
  return combine(fa, fb, &ea, &eb);
}

}  // namespace lexsimp
