#include "lexsimp/network.hpp"

#include <algorithm>
#include <cmath>

#include "lexsimp/error.hpp"

namespace lexsimp {

DropoutMask DropoutMask::identity() {
  DropoutMask m;
  for (auto& layer : m.scale) layer.fill(1.0);
  return m;
}

DropoutMask DropoutMask::sample(Rng& rng, double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error(ErrorCode::kInvalidArgument, "dropout rate must be in [0, 1)");
  DropoutMask m;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& layer : m.scale) {
    for (auto& s : layer) s = rng.uniform() < rate ? 0.0 : keep_scale;
  }
  return m;
}

Network::Network(std::size_t input_dim) : input_dim_(input_dim) {
  if (input_dim == 0) throw Error(ErrorCode::kInvalidArgument, "network input dimension must be >= 1");
  std::size_t pos = 0;
  for (std::size_t l = 0; l < kLayers; ++l) {
    offsets_[2 * l] = pos;
    pos += rows(l) * cols(l);
    offsets_[2 * l + 1] = pos;
    pos += rows(l);
  }
  params_.assign(pos, 0.0);
}

Network Network::zeros(std::size_t input_dim) { return Network(input_dim); }

Network Network::init(std::size_t input_dim, std::uint64_t seed) {
  Network net(input_dim);
  Rng rng(seed);
  for (std::size_t l = 0; l < kLayers; ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(net.rows(l) + net.cols(l)));
    for (std::size_t r = 0; r < net.rows(l); ++r) {
      for (std::size_t c = 0; c < net.cols(l); ++c) net.weight(l, r, c) = rng.uniform(-bound, bound);
    }
  }
  return net;
}

std::size_t Network::rows(std::size_t layer) const { return layer + 1 == kLayers ? 1 : kHiddenWidth; }
std::size_t Network::cols(std::size_t layer) const { return layer == 0 ? input_dim_ : kHiddenWidth; }

double& Network::weight(std::size_t layer, std::size_t row, std::size_t col) {
  return params_[weight_offset(layer) + row * cols(layer) + col];
}
double Network::weight(std::size_t layer, std::size_t row, std::size_t col) const {
  return params_[weight_offset(layer) + row * cols(layer) + col];
}
double& Network::bias(std::size_t layer, std::size_t row) { return params_[bias_offset(layer) + row]; }
double Network::bias(std::size_t layer, std::size_t row) const { return params_[bias_offset(layer) + row]; }

double Network::forward(std::span<const double> x) const {
  ForwardCache cache;
  return forward(x, nullptr, cache);
}

double Network::forward(std::span<const double> x, const DropoutMask* mask, ForwardCache& cache) const {
  if (x.size() != input_dim_) {
    throw Error(ErrorCode::kInvalidArgument, "network input has dimension " + std::to_string(x.size()) +
                                                 ", expected " + std::to_string(input_dim_));
  }
  cache.input = x;
  std::span<const double> prev = x;
  for (std::size_t l = 0; l < kHiddenLayers; ++l) {
    const double* w = params_.data() + weight_offset(l);
    const double* b = params_.data() + bias_offset(l);
    const std::size_t n = prev.size();
    for (std::size_t r = 0; r < kHiddenWidth; ++r) {
      double z = b[r];
      const double* wr = w + r * n;
      for (std::size_t c = 0; c < n; ++c) z += wr[c] * prev[c];
      cache.act[l][r] = std::tanh(z);
      cache.out[l][r] = mask ? cache.act[l][r] * mask->scale[l][r] : cache.act[l][r];
    }
    prev = cache.out[l];
  }
  const double* w = params_.data() + weight_offset(kLayers - 1);
  double y = params_[bias_offset(kLayers - 1)];
  for (std::size_t c = 0; c < kHiddenWidth; ++c) y += w[c] * prev[c];
  cache.y = y;
  return y;
}

void Network::backward(const ForwardCache& cache, const DropoutMask* mask, double dloss_dy,
                       std::span<double> grad) const {
  if (grad.size() != params_.size()) throw Error(ErrorCode::kInvalidArgument, "gradient buffer has the wrong size");
  // Output layer.
  std::array<double, kHiddenWidth> upstream{};
  {
    const std::size_t l = kLayers - 1;
    const auto& h = cache.out[kHiddenLayers - 1];
    double* gw = grad.data() + weight_offset(l);
    for (std::size_t c = 0; c < kHiddenWidth; ++c) {
      gw[c] += dloss_dy * h[c];
      upstream[c] = dloss_dy * weight(l, 0, c);
    }
    grad[bias_offset(l)] += dloss_dy;
  }
  for (std::size_t li = kHiddenLayers; li-- > 0;) {
    std::array<double, kHiddenWidth> dz{};
    for (std::size_t r = 0; r < kHiddenWidth; ++r) {
      const double dact = mask ? upstream[r] * mask->scale[li][r] : upstream[r];
      const double a = cache.act[li][r];
      dz[r] = dact * (1.0 - a * a);
    }
    const std::span<const double> prev = li == 0 ? cache.input : std::span<const double>(cache.out[li - 1]);
    const std::size_t n = prev.size();
    double* gw = grad.data() + weight_offset(li);
    double* gb = grad.data() + bias_offset(li);
    for (std::size_t r = 0; r < kHiddenWidth; ++r) {
      gb[r] += dz[r];
      double* gwr = gw + r * n;
      for (std::size_t c = 0; c < n; ++c) gwr[c] += dz[r] * prev[c];
    }
    if (li == 0) break;
    upstream.fill(0.0);
    const double* w = params_.data() + weight_offset(li);
    for (std::size_t r = 0; r < kHiddenWidth; ++r) {
      for (std::size_t c = 0; c < kHiddenWidth; ++c) upstream[c] += w[r * kHiddenWidth + c] * dz[r];
    }
  }
}

bool Network::all_finite() const {
  return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

void check_batch(const Network& net, const Batch& batch, std::span<const DropoutMask> masks) {
  if (batch.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  if (batch.dim != net.input_dim() || batch.inputs.size() != batch.size() * batch.dim) {
    throw Error(ErrorCode::kInvalidArgument, "batch shape does not match the network input");
  }
  if (!masks.empty() && masks.size() != batch.size()) {
    throw Error(ErrorCode::kInvalidArgument, "need one dropout mask per example");
  }
}

}  // namespace

LossGrad loss_and_grad(const Network& net, const Batch& batch, std::span<const DropoutMask> masks) {
  check_batch(net, batch, masks);
  LossGrad out;
  out.grad.assign(net.param_count(), 0.0);
  const double m = static_cast<double>(batch.size());
  ForwardCache cache;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const DropoutMask* mask = masks.empty() ? nullptr : &masks[i];
    const double y = net.forward(batch.row(i), mask, cache);
    const double err = y - batch.targets[i];
    out.loss += err * err;
    net.backward(cache, mask, 2.0 * err / m, out.grad);
  }
  out.loss /= m;
  return out;
}

double mse(const Network& net, const Batch& batch, std::span<const DropoutMask> masks) {
  check_batch(net, batch, masks);
  double loss = 0.0;
  ForwardCache cache;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double err = net.forward(batch.row(i), masks.empty() ? nullptr : &masks[i], cache) - batch.targets[i];
    loss += err * err;
  }
  return loss / static_cast<double>(batch.size());
}

GradCheckResult gradient_check(const Network& net, const Batch& batch, std::span<const DropoutMask> masks,
                               double step, double floor) {
  const auto analytic = loss_and_grad(net, batch, masks).grad;
  Network probe = net;
  GradCheckResult result;
  for (std::size_t p = 0; p < probe.param_count(); ++p) {
    const double saved = probe.params()[p];
    probe.params()[p] = saved + step;
    const double up = mse(probe, batch, masks);
    probe.params()[p] = saved - step;
    const double down = mse(probe, batch, masks);
    probe.params()[p] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[p]), std::abs(numeric), floor});
    const double rel = std::abs(analytic[p] - numeric) / denom;
    if (p == 0 || rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_param = p;
      result.analytic = analytic[p];
      result.numeric = numeric;
    }
  }
  return result;
}

RandomGradCheck random_gradient_check(std::uint64_t seed, std::size_t draws) {
  Rng rng(seed);
  RandomGradCheck out;
  out.draws = draws;
  for (std::size_t d = 0; d < draws; ++d) {
    const std::size_t dim = 1 + rng.below(12);
    const std::size_t m = 1 + rng.below(8);
    Network net = Network::init(dim, rng.next());
    // Non-zero biases so every parameter's gradient path is exercised.
    for (std::size_t l = 0; l < kLayers; ++l) {
      for (std::size_t r = 0; r < net.rows(l); ++r) net.bias(l, r) = rng.uniform(-0.5, 0.5);
    }
    std::vector<double> x(m * dim);
    std::vector<double> y(m);
    for (auto& v : x) v = rng.uniform(-2.0, 2.0);
    for (auto& v : y) v = rng.uniform(-2.0, 2.0);
    std::vector<DropoutMask> masks;
    if (rng.uniform() < 0.5) {
      for (std::size_t i = 0; i < m; ++i) masks.push_back(DropoutMask::sample(rng, 0.2));
    }
    const auto r = gradient_check(net, Batch{x, y, dim}, masks);
    if (d == 0 || r.max_relative_error > out.worst.max_relative_error) out.worst = r;
  }
  return out;
}

Adam::Adam(std::size_t params, AdamConfig config) : config_(config), m_(params, 0.0), v_(params, 0.0) {
  if (!(config.learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning rate must be positive");
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "Adam: parameter count changed");
  }
  ++t_;
  beta1_power_ *= config_.beta1;
  beta2_power_ *= config_.beta2;
  const double c1 = 1.0 - beta1_power_;
  const double c2 = 1.0 - beta2_power_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grad[i];
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
  }
}

}  // namespace lexsimp
