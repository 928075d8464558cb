#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lexsimp/random.hpp"

namespace lexsimp {

inline constexpr std::size_t kHiddenWidth = 8;
inline constexpr std::size_t kHiddenLayers = 3;
inline constexpr std::size_t kLayers = kHiddenLayers + 1;

/// Per-unit multipliers applied to the hidden activations: 0 for a dropped
/// unit, 1/(1-rate) for a kept one.
struct DropoutMask {
  std::array<std::array<double, kHiddenWidth>, kHiddenLayers> scale{};

  static DropoutMask identity();
  static DropoutMask sample(Rng& rng, double rate);
};

/// Activations kept from a forward pass for backpropagation.
struct ForwardCache {
  std::span<const double> input;
  /// tanh outputs before dropout.
  std::array<std::array<double, kHiddenWidth>, kHiddenLayers> act{};
  /// Values fed to the next layer (after dropout).
  std::array<std::array<double, kHiddenWidth>, kHiddenLayers> out{};
  double y = 0.0;
};

/// input -> 8 -> 8 -> 8 -> 1 regressor, tanh hidden units, linear output.
/// Parameters live in one flat vector: W1 (8 x in, row-major), b1, W2, b2,
/// W3, b3, W4 (1 x 8), b4.
class Network {
 public:
  /// Xavier/Glorot uniform weights, zero biases.
  static Network init(std::size_t input_dim, std::uint64_t seed);
  static Network zeros(std::size_t input_dim);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t param_count() const noexcept { return params_.size(); }
  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  /// Rows/columns of layer l (0-based; layer 3 is the output layer).
  std::size_t rows(std::size_t layer) const;
  std::size_t cols(std::size_t layer) const;
  double& weight(std::size_t layer, std::size_t row, std::size_t col);
  double weight(std::size_t layer, std::size_t row, std::size_t col) const;
  double& bias(std::size_t layer, std::size_t row);
  double bias(std::size_t layer, std::size_t row) const;

  /// Eval-mode forward pass (no dropout).
  double forward(std::span<const double> x) const;
  /// Forward pass with optional dropout mask, recording activations.
  double forward(std::span<const double> x, const DropoutMask* mask, ForwardCache& cache) const;
  /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
  void backward(const ForwardCache& cache, const DropoutMask* mask, double dloss_dy, std::span<double> grad) const;

  bool all_finite() const;

 private:
  explicit Network(std::size_t input_dim);
  std::size_t weight_offset(std::size_t layer) const { return offsets_[2 * layer]; }
  std::size_t bias_offset(std::size_t layer) const { return offsets_[2 * layer + 1]; }

  std::size_t input_dim_;
  std::array<std::size_t, 2 * kLayers> offsets_{};
  std::vector<double> params_;
};

/// Row-major example matrix plus targets.
struct Batch {
  std::span<const double> inputs;
  std::span<const double> targets;
  std::size_t dim = 0;
  std::size_t size() const noexcept { return targets.size(); }
  std::span<const double> row(std::size_t i) const { return inputs.subspan(i * dim, dim); }
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Mean squared error over the batch and its gradient. `masks`, when given,
/// holds one dropout mask per example (train mode); otherwise eval mode.
LossGrad loss_and_grad(const Network& net, const Batch& batch, std::span<const DropoutMask> masks = {});
double mse(const Network& net, const Batch& batch, std::span<const DropoutMask> masks = {});

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_param = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Backprop against central finite differences. Relative error is
/// |g - n| / max(|g|, |n|, floor).
GradCheckResult gradient_check(const Network& net, const Batch& batch, std::span<const DropoutMask> masks,
                               double step = 1e-5, double floor = 1e-6);

struct RandomGradCheck {
  GradCheckResult worst;
  std::size_t draws = 0;
};

/// gradient_check over `draws` random networks (input width 1..12), batches
/// (1..8 examples) and dropout masks (rate 0 or 0.2), seeded from `seed`.
RandomGradCheck random_gradient_check(std::uint64_t seed, std::size_t draws);

struct AdamConfig {
  double learning_rate = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(std::size_t params, AdamConfig config);
  void step(std::span<double> params, std::span<const double> grad);
  std::uint64_t steps() const noexcept { return t_; }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
  double beta1_power_ = 1.0;
  double beta2_power_ = 1.0;
};

}  // namespace lexsimp
