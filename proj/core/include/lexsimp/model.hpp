#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "lexsimp/network.hpp"
#include "lexsimp/vectorizer.hpp"

namespace lexsimp {

struct TrainConfig {
  double learning_rate = 0.0005;
  int epochs = 100;
  double dropout = 0.2;
  int batch_size = 32;
  std::uint64_t seed = 1;
  int k = 10;
  double gamma = 0.2;
  bool use_binning = true;

  static TrainConfig ranking() { return {}; }
  static TrainConfig ppdb() {
    TrainConfig c;
    c.learning_rate = 0.001;
    return c;
  }
  /// Throws kInvalidArgument on an out-of-range field.
  void validate() const;
};

/// A pair of words/phrases with its regression target.
struct LabeledPair {
  PairFeatures features;
  double label = 0.0;
};

/// Trained pairwise ranker: schema, fitted binner, network and the config it
/// was trained with. Immutable after training; predict is thread-safe.
class NRRModel {
 public:
  NRRModel(PairVectorizer vectorizer, Network network, TrainConfig config);

  const FeatureSchema& schema() const noexcept { return vectorizer_.schema(); }
  const PairVectorizer& vectorizer() const noexcept { return vectorizer_; }
  const Network& network() const noexcept { return network_; }
  const TrainConfig& config() const noexcept { return config_; }

  /// Relative complexity of (a, b); negative means a is simpler.
  double predict(const PairFeatures& features) const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static NRRModel load(std::istream& in);
  static NRRModel load(const std::filesystem::path& path);

 private:
  PairVectorizer vectorizer_;
  Network network_;
  TrainConfig config_;
};

struct TrainResult {
  NRRModel model;
  /// Mean squared error on the full training set (eval mode) after each epoch.
  std::vector<double> epoch_loss;
};

/// Fits the binner on `pairs`, then runs mini-batch Adam. Throws kNumeric
/// when the loss becomes NaN or infinite.
TrainResult train_nrr(const FeatureSchema& schema, std::span<const LabeledPair> pairs, const TrainConfig& config);

/// Lower-level entry point on already vectorized inputs (row-major).
struct NetworkTrainResult {
  Network network;
  std::vector<double> epoch_loss;
};
NetworkTrainResult train_network(std::span<const double> inputs, std::span<const double> targets, std::size_t dim,
                                 const TrainConfig& config);

}  // namespace lexsimp
