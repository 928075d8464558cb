#include "lexsimp/model.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "lexsimp/binary_io.hpp"
#include "lexsimp/error.hpp"
#include "lexsimp/log.hpp"

namespace lexsimp {

namespace {

constexpr std::string_view kMagic = "LXNRRMDL";
constexpr std::uint32_t kVersion = 1;
/// Decorrelates the training stream (shuffles, dropout) from weight init.
constexpr std::uint64_t kTrainStreamSalt = 0x9e3779b97f4a7c15ULL;

void write_schema(BinaryWriter& w, const FeatureSchema& schema) {
  w.magic("SCHM");
  w.u32(static_cast<std::uint32_t>(schema.specs().size()));
  for (const auto& s : schema.specs()) {
    w.str(s.name);
    w.u8(static_cast<std::uint8_t>(s.kind));
    w.u8(static_cast<std::uint8_t>(s.group));
    w.u8(s.pairwise);
    w.u8(s.binnable);
    w.u8(s.enabled);
    w.u64(s.width);
  }
  w.u64(schema.hash());
}

FeatureSchema read_schema(BinaryReader& r) {
  r.expect_magic("SCHM");
  const std::uint32_t n = r.u32();
  std::vector<FeatureSpec> specs;
  specs.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    FeatureSpec s;
    s.name = r.str();
    const auto kind = r.u8();
    const auto group = r.u8();
    if (kind > 1 || group > static_cast<std::uint8_t>(FeatureGroup::kCustom)) {
      throw Error(ErrorCode::kParse, "model file: bad feature spec for '" + s.name + "'");
    }
    s.kind = static_cast<FeatureKind>(kind);
    s.group = static_cast<FeatureGroup>(group);
    s.pairwise = r.u8() != 0;
    s.binnable = r.u8() != 0;
    s.enabled = r.u8() != 0;
    s.width = r.u64();
    specs.push_back(std::move(s));
  }
  FeatureSchema schema(std::move(specs));
  if (r.u64() != schema.hash()) throw Error(ErrorCode::kSchemaMismatch, "model file: stored schema hash does not match");
  return schema;
}

void write_binner(BinaryWriter& w, const GaussianBinner& binner) {
  w.magic("BINS");
  w.u32(static_cast<std::uint32_t>(binner.features().size()));
  for (const auto& [name, bins] : binner.features()) {
    w.str(name);
    w.f64(bins.f_min);
    w.f64(bins.f_max);
    w.u32(static_cast<std::uint32_t>(bins.k));
    w.f64(bins.gamma);
  }
}

GaussianBinner read_binner(BinaryReader& r) {
  r.expect_magic("BINS");
  const std::uint32_t n = r.u32();
  GaussianBinner binner;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = r.str();
    const double lo = r.f64();
    const double hi = r.f64();
    const auto k = static_cast<int>(r.u32());
    const double gamma = r.f64();
    binner.add(std::move(name), FeatureBins::make(lo, hi, k, gamma));
  }
  return binner;
}

void write_config(BinaryWriter& w, const TrainConfig& c) {
  w.magic("CONF");
  w.f64(c.learning_rate);
  w.u32(static_cast<std::uint32_t>(c.epochs));
  w.f64(c.dropout);
  w.u32(static_cast<std::uint32_t>(c.batch_size));
  w.u64(c.seed);
  w.u32(static_cast<std::uint32_t>(c.k));
  w.f64(c.gamma);
  w.u8(c.use_binning);
}

TrainConfig read_config(BinaryReader& r) {
  r.expect_magic("CONF");
  TrainConfig c;
  c.learning_rate = r.f64();
  c.epochs = static_cast<int>(r.u32());
  c.dropout = r.f64();
  c.batch_size = static_cast<int>(r.u32());
  c.seed = r.u64();
  c.k = static_cast<int>(r.u32());
  c.gamma = r.f64();
  c.use_binning = r.u8() != 0;
  return c;
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning rate must be positive");
  if (epochs < 1) fail("epochs must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (batch_size < 1) fail("batch size must be >= 1");
  if (k < 1) fail("bin count k must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) fail("gamma must be positive");
}

NRRModel::NRRModel(PairVectorizer vectorizer, Network network, TrainConfig config)
    : vectorizer_(std::move(vectorizer)), network_(std::move(network)), config_(config) {
  if (network_.input_dim() != vectorizer_.input_dim()) {
    throw Error(ErrorCode::kSchemaMismatch, "network input dimension " + std::to_string(network_.input_dim()) +
                                                " does not match the vectorizer (" +
                                                std::to_string(vectorizer_.input_dim()) + ")");
  }
  if (!network_.all_finite()) throw Error(ErrorCode::kNumeric, "model has non-finite weights");
}

double NRRModel::predict(const PairFeatures& features) const {
  std::vector<double> x(vectorizer_.input_dim());
  vectorizer_.transform(features, x);
  return network_.forward(x);
}

void NRRModel::save(std::ostream& out) const {
  BinaryWriter w(out);
  w.magic(kMagic);
  w.u32(kVersion);
  write_schema(w, schema());
  w.u8(vectorizer_.use_binning());
  write_binner(w, vectorizer_.binner());
  w.magic("NETW");
  w.u64(network_.input_dim());
  w.u32(static_cast<std::uint32_t>(kLayers));
  for (std::size_t l = 0; l < kLayers; ++l) {
    w.u64(network_.rows(l));
    w.u64(network_.cols(l));
  }
  w.f64s(network_.params());
  write_config(w, config_);
  if (!out) throw Error(ErrorCode::kIo, "failed to write model");
}

void NRRModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open model file for writing: " + path.string());
  save(out);
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "failed to write model file: " + path.string());
}

NRRModel NRRModel::load(std::istream& in) {
  BinaryReader r(in, "model file");
  r.expect_magic(kMagic);
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw Error(ErrorCode::kSchemaMismatch, "unsupported model file version " + std::to_string(version));
  }
  FeatureSchema schema = read_schema(r);
  const bool use_binning = r.u8() != 0;
  GaussianBinner binner = read_binner(r);
  PairVectorizer vectorizer(std::move(schema), use_binning, std::move(binner));

  r.expect_magic("NETW");
  const std::uint64_t input_dim = r.u64();
  if (r.u32() != kLayers) throw Error(ErrorCode::kSchemaMismatch, "model file: unexpected layer count");
  Network net = Network::zeros(input_dim);
  for (std::size_t l = 0; l < kLayers; ++l) {
    const auto rows = r.u64();
    const auto cols = r.u64();
    if (rows != net.rows(l) || cols != net.cols(l)) {
      throw Error(ErrorCode::kSchemaMismatch, "model file: unexpected shape for layer " + std::to_string(l + 1));
    }
  }
  const auto params = r.f64s();
  if (params.size() != net.param_count()) throw Error(ErrorCode::kSchemaMismatch, "model file: parameter count");
  std::copy(params.begin(), params.end(), net.params().begin());
  TrainConfig config = read_config(r);
  return NRRModel(std::move(vectorizer), std::move(net), config);
}

NRRModel NRRModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingResource, "model file not found: " + path.string());
  return load(in);
}

NetworkTrainResult train_network(std::span<const double> inputs, std::span<const double> targets, std::size_t dim,
                                 const TrainConfig& config) {
  config.validate();
  if (targets.empty()) throw Error(ErrorCode::kInvalidArgument, "training set is empty");
  if (inputs.size() != targets.size() * dim) throw Error(ErrorCode::kInvalidArgument, "training matrix shape");

  NetworkTrainResult result{Network::init(dim, config.seed), {}};
  Network& net = result.network;
  Adam adam(net.param_count(), AdamConfig{config.learning_rate});
  Rng rng(config.seed ^ kTrainStreamSalt);

  const std::size_t n = targets.size();
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> bx;
  std::vector<double> by;
  std::vector<DropoutMask> masks;
  const Batch full{inputs, targets, dim};

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      bx.clear();
      by.clear();
      masks.clear();
      for (std::size_t i = start; i < end; ++i) {
        const auto row = inputs.subspan(order[i] * dim, dim);
        bx.insert(bx.end(), row.begin(), row.end());
        by.push_back(targets[order[i]]);
        masks.push_back(config.dropout > 0.0 ? DropoutMask::sample(rng, config.dropout) : DropoutMask::identity());
      }
      const auto lg = loss_and_grad(net, Batch{bx, by, dim}, masks);
      if (!std::isfinite(lg.loss)) {
        throw Error(ErrorCode::kNumeric, "training diverged (non-finite loss at epoch " + std::to_string(epoch + 1) +
                                             "); lower the learning rate or check feature ranges");
      }
      adam.step(net.params(), lg.grad);
    }
    const double loss = mse(net, full);
    if (!std::isfinite(loss) || !net.all_finite()) {
      throw Error(ErrorCode::kNumeric, "training diverged (non-finite loss at epoch " + std::to_string(epoch + 1) +
                                           "); lower the learning rate or check feature ranges");
    }
    result.epoch_loss.push_back(loss);
    log().debug("epoch {} loss {:.6f}", epoch + 1, loss);
  }
  return result;
}

TrainResult train_nrr(const FeatureSchema& schema, std::span<const LabeledPair> pairs, const TrainConfig& config) {
  config.validate();
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "training set is empty");
  std::vector<PairFeatures> features;
  features.reserve(pairs.size());
  for (const auto& p : pairs) features.push_back(p.features);
  const BinnerConfig binner_config{config.k, config.gamma, ConstantColumnPolicy::kWiden};
  PairVectorizer vectorizer = PairVectorizer::fit(schema, config.use_binning, binner_config, features);

  const std::size_t dim = vectorizer.input_dim();
  std::vector<double> inputs(pairs.size() * dim);
  std::vector<double> targets(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    vectorizer.transform(pairs[i].features, std::span<double>(inputs).subspan(i * dim, dim));
    targets[i] = pairs[i].label;
  }
  auto trained = train_network(inputs, targets, dim, config);
  return TrainResult{NRRModel(std::move(vectorizer), std::move(trained.network), config),
                     std::move(trained.epoch_loss)};
}

}  // namespace lexsimp
