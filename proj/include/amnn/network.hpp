#ifndef AMNN_NETWORK_HPP
#define AMNN_NETWORK_HPP

// Fully connected networks with hand-derived backpropagation, plus the
// adaptive modular network (AMNN): density-peak clusters, fuzzy routing and
// one classic squared-error subnet per surviving cluster.
//
// Notation used in comments below: X input, P hidden output, sigma output
// pre-activation, y_hat output, y target, zeta learning rate.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "amnn/clustering.hpp"
#include "amnn/core.hpp"
#include "amnn/data.hpp"
#include "amnn/gating.hpp"

namespace amnn {

enum class Activation { logistic, elu, softmax };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::logistic: return "logistic";
    case Activation::elu: return "elu";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

inline Activation parse_activation(const std::string& s) {
  if (s == "logistic") return Activation::logistic;
  if (s == "elu") return Activation::elu;
  if (s == "softmax") return Activation::softmax;
  throw Error("unknown activation '" + s + "'");
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

// Parameters live in one flat vector so optimizers and serializers can treat
// the network as a single array. Per layer l: weights (fan_in x fan_out,
// row-major) followed by biases (fan_out).
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output)
      : sizes_(std::move(layer_sizes)), hidden_(hidden), output_(output) {
    require(sizes_.size() >= 2, "Mlp: need at least an input and an output layer");
    for (auto s : sizes_) require(s >= 1, "Mlp: layer sizes must be >= 1");
    require(hidden != Activation::softmax, "Mlp: softmax is only valid on the output layer");
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      offsets_.push_back(offset);
      offset += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
    }
    params_.assign(offset, 0.0);
  }

  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  std::size_t layer_count() const noexcept { return sizes_.size() - 1; }
  std::size_t inputs() const noexcept { return sizes_.front(); }
  std::size_t outputs() const noexcept { return sizes_.back(); }
  Activation hidden_activation() const noexcept { return hidden_; }
  Activation output_activation() const noexcept { return output_; }
  Activation activation(std::size_t layer) const noexcept { return layer + 1 == layer_count() ? output_ : hidden_; }

  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  std::size_t weight_offset(std::size_t l) const { return offsets_.at(l); }
  std::size_t bias_offset(std::size_t l) const { return offsets_.at(l) + sizes_[l] * sizes_[l + 1]; }

  double& weight(std::size_t l, std::size_t in, std::size_t out) {
    return params_[weight_offset(l) + in * sizes_[l + 1] + out];
  }
  double weight(std::size_t l, std::size_t in, std::size_t out) const {
    return params_[weight_offset(l) + in * sizes_[l + 1] + out];
  }
  double& bias(std::size_t l, std::size_t out) { return params_[bias_offset(l) + out]; }
  double bias(std::size_t l, std::size_t out) const { return params_[bias_offset(l) + out]; }

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  Activation hidden_ = Activation::logistic;
  Activation output_ = Activation::logistic;
};

inline std::vector<std::size_t> layer_sizes_for(std::size_t inputs, std::span<const std::size_t> hidden,
                                                std::size_t outputs) {
  std::vector<std::size_t> sizes{inputs};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(outputs);
  return sizes;
}

// Glorot-uniform weights, zero biases.
inline Mlp init_weights(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed,
                        Activation hidden = Activation::logistic, Activation output = Activation::logistic) {
  Mlp net(layer_sizes, hidden, output);
  Rng rng(seed);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const double fan_in = static_cast<double>(layer_sizes[l]);
    const double fan_out = static_cast<double>(layer_sizes[l + 1]);
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < layer_sizes[l]; ++i) {
      for (std::size_t j = 0; j < layer_sizes[l + 1]; ++j) net.weight(l, i, j) = dist(rng);
    }
  }
  return net;
}

struct ForwardCache {
  std::vector<Matrix<double>> pre;         // per layer, batch x fan_out
  std::vector<Matrix<double>> activation;  // [0] = input batch, [l + 1] = output of layer l

  const Matrix<double>& outputs() const { return activation.back(); }
};

inline ForwardCache forward(const Mlp& net, const Matrix<double>& batch) {
  require(batch.cols() == net.inputs(), "forward: batch has " + std::to_string(batch.cols()) +
                                            " features, network expects " + std::to_string(net.inputs()));
  const auto& sizes = net.layer_sizes();
  ForwardCache cache;
  cache.activation.push_back(batch);
  const std::size_t n = batch.rows();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const Matrix<double>& in = cache.activation.back();
    const std::size_t fan_in = sizes[l];
    const std::size_t fan_out = sizes[l + 1];
    Matrix<double> z(n, fan_out);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < fan_out; ++j) z(r, j) = net.bias(l, j);
      for (std::size_t i = 0; i < fan_in; ++i) {
        const double x = in(r, i);
        for (std::size_t j = 0; j < fan_out; ++j) z(r, j) += x * net.weight(l, i, j);
      }
    }
    Matrix<double> a(n, fan_out);
    switch (net.activation(l)) {
      case Activation::logistic:
        for (std::size_t k = 0; k < z.size(); ++k) a.flat()[k] = logistic(z.flat()[k]);
        break;
      case Activation::elu:
        for (std::size_t k = 0; k < z.size(); ++k) a.flat()[k] = elu(z.flat()[k]);
        break;
      case Activation::softmax:
        for (std::size_t r = 0; r < n; ++r) {
          auto zr = z.row(r);
          auto ar = a.row(r);
          const double peak = *std::max_element(zr.begin(), zr.end());
          double sum = 0.0;
          for (std::size_t j = 0; j < fan_out; ++j) sum += ar[j] = std::exp(zr[j] - peak);
          for (auto& v : ar) v /= sum;
        }
        break;
    }
    cache.pre.push_back(std::move(z));
    cache.activation.push_back(std::move(a));
  }
  return cache;
}

// Backpropagates an error signal given at the output pre-activations
// (dLoss/dsigma, already scaled by any per-sample weights) and returns the
// gradient in the network's flat parameter layout.
inline std::vector<double> backward(const Mlp& net, const ForwardCache& cache, Matrix<double> delta) {
  const auto& sizes = net.layer_sizes();
  std::vector<double> grad(net.parameter_count(), 0.0);
  const std::size_t n = delta.rows();
  for (std::size_t l = net.layer_count(); l-- > 0;) {
    const Matrix<double>& in = cache.activation[l];
    const std::size_t fan_in = sizes[l];
    const std::size_t fan_out = sizes[l + 1];
    double* gw = grad.data() + net.weight_offset(l);
    double* gb = grad.data() + net.bias_offset(l);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < fan_in; ++i) {
        const double x = in(r, i);
        for (std::size_t j = 0; j < fan_out; ++j) gw[i * fan_out + j] += x * delta(r, j);
      }
      for (std::size_t j = 0; j < fan_out; ++j) gb[j] += delta(r, j);
    }
    if (l == 0) break;
    // Hidden error: (delta W^T) scaled by the activation derivative.
    Matrix<double> below(n, fan_in, 0.0);
    const Matrix<double>& z = cache.pre[l - 1];
    const Matrix<double>& a = cache.activation[l];
    const Activation act = net.activation(l - 1);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < fan_in; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < fan_out; ++j) s += delta(r, j) * net.weight(l, i, j);
        const double slope = act == Activation::logistic ? a(r, i) * (1.0 - a(r, i))
                                                          : (z(r, i) > 0.0 ? 1.0 : a(r, i) + 1.0);
        below(r, i) = s * slope;
      }
    }
    delta = std::move(below);
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Classic mode: logistic units, squared error W = 1/2 sum (y - y_hat)^2.

inline double squared_error(std::span<const double> expected, std::span<const double> actual) {
  require(expected.size() == actual.size(), "squared_error: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double d = expected[i] - actual[i];
    sum += d * d;
  }
  return 0.5 * sum;
}

inline double mean_squared_error(const Matrix<double>& targets, const Matrix<double>& outputs) {
  require(targets.rows() == outputs.rows() && targets.cols() == outputs.cols(), "squared_error: shape mismatch");
  double sum = 0.0;
  for (std::size_t r = 0; r < targets.rows(); ++r) sum += squared_error(targets.row(r), outputs.row(r));
  return targets.rows() ? sum / static_cast<double>(targets.rows()) : 0.0;
}

struct LossAndGradient {
  double loss = 0.0;  // batch mean
  std::vector<double> gradient;
};

// Gradient of the batch-mean squared error. The output signal
// eps = (y_hat - y) * y_hat * (1 - y_hat) is dW/dsigma; descending along it
// gives the familiar update zeta * y_hat (1 - y_hat) (y - y_hat) * P.
inline LossAndGradient squared_error_gradient(const Mlp& net, const Matrix<double>& batch,
                                              const Matrix<double>& targets) {
  require(net.output_activation() == Activation::logistic && net.hidden_activation() == Activation::logistic,
          "squared_error_gradient: classic mode requires logistic activations");
  require(batch.rows() >= 1, "squared_error_gradient: empty batch");
  require(targets.rows() == batch.rows() && targets.cols() == net.outputs(), "squared_error_gradient: target shape");
  const ForwardCache cache = forward(net, batch);
  const Matrix<double>& out = cache.outputs();
  const double scale = 1.0 / static_cast<double>(batch.rows());
  Matrix<double> eps(out.rows(), out.cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t t = 0; t < out.cols(); ++t) {
      const double y_hat = out(r, t);
      eps(r, t) = scale * (y_hat - targets(r, t)) * y_hat * (1.0 - y_hat);
    }
  }
  return {mean_squared_error(targets, out), backward(net, cache, std::move(eps))};
}

// One gradient-descent update, lambda(k+1) = lambda(k) - zeta * dW/dlambda,
// averaged over the batch. Returns the pre-update batch-mean error.
inline double backprop_step(Mlp& net, const Matrix<double>& batch, const Matrix<double>& targets,
                            double learning_rate) {
  auto [loss, grad] = squared_error_gradient(net, batch, targets);
  for (double g : grad) require(std::isfinite(g), "backprop_step: non-finite gradient");
  auto params = net.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= learning_rate * grad[i];
  return loss;
}

struct TrainConfig {
  double learning_rate = 0.5;
  std::size_t epochs = 20;
  std::size_t batch_size = 128;
  // Stop once the epoch-mean error is <= target_error. Infinity disables
  // the check.
  double target_error = 0.0;
  std::uint64_t seed = 0;
};

inline void validate(const TrainConfig& c) {
  require(c.learning_rate > 0.0 && c.learning_rate < 1.0, "train config: learning_rate must be in (0, 1)");
  require(c.epochs >= 1, "train config: epochs must be >= 1");
  require(c.batch_size >= 1, "train config: batch_size must be >= 1");
  require(c.target_error >= 0.0, "train config: target_error must be >= 0");
}

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  std::size_t retained = 0;
  double train_accuracy = 0.0;
};

inline std::vector<Label> argmax_rows(const Matrix<double>& scores) {
  std::vector<Label> out(scores.rows(), 0);
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    auto row = scores.row(r);
    out[r] = static_cast<Label>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

inline std::vector<Label> predict(const Mlp& net, const Matrix<double>& features) {
  return argmax_rows(forward(net, features).outputs());
}

inline double accuracy_of(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

inline void check_layer_sizes(const std::vector<std::size_t>& sizes, const Dataset& ds) {
  require(sizes.size() >= 2, "layer sizes: need at least input and output");
  require(sizes.front() == ds.dimension(), "layer sizes: input width " + std::to_string(sizes.front()) +
                                               " does not match feature width " + std::to_string(ds.dimension()));
  require(sizes.back() == ds.class_count, "layer sizes: output width " + std::to_string(sizes.back()) +
                                              " does not match class count " + std::to_string(ds.class_count));
}

inline std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

// Squared-error backprop with shuffled mini-batches; the stream that shuffles
// is independent of the one that initialized the weights.
inline Mlp train_classic(const Dataset& ds, const std::vector<std::size_t>& layer_sizes, const TrainConfig& config,
                         std::vector<EpochRecord>* log = nullptr) {
  validate(config);
  validate(ds);
  check_layer_sizes(layer_sizes, ds);
  Mlp net = init_weights(layer_sizes, config.seed, Activation::logistic, Activation::logistic);
  Rng rng(mix_seed(config.seed));
  const std::size_t n = ds.size();
  const Matrix<double> targets = one_hot(ds.labels, ds.class_count);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = shuffled_indices(n, rng);
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      std::span<const std::size_t> idx(order.data() + start, stop - start);
      try {
        total += backprop_step(net, ds.features.select_rows(idx), targets.select_rows(idx), config.learning_rate) *
                 static_cast<double>(idx.size());
      } catch (const Error& e) {
        throw Error(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(start / config.batch_size) + ")");
      }
    }
    const double mean = total / static_cast<double>(n);
    if (log) log->push_back({epoch, mean, n, accuracy_of(ds.labels, predict(net, ds.features))});
    if (std::isfinite(config.target_error) && mean <= config.target_error) break;
  }
  return net;
}

// ---------------------------------------------------------------------------
// Adaptive modular network

struct AmnnConfig {
  CenterPolicy centers = CenterPolicy::automatic();
  double denom = kDefaultMembershipDenom;
};

struct AmnnModel {
  Matrix<double> centers;  // surviving center coordinates, one per subnet
  double denom = kDefaultMembershipDenom;
  std::vector<Mlp> subnets;

  std::vector<std::size_t> route(const Matrix<double>& features) const {
    return amnn::route(fuzzy_membership(features, centers, denom));
  }

  friend bool operator==(const AmnnModel&, const AmnnModel&) = default;
};

// Subnet k is trained with seed config.seed + k on the samples routed to it,
// kept in their original order.
inline AmnnModel train_amnn(const Dataset& ds, const AmnnConfig& amnn_config,
                            const std::vector<std::size_t>& layer_sizes, const TrainConfig& config,
                            std::vector<std::vector<EpochRecord>>* logs = nullptr) {
  validate(config);
  validate(ds);
  check_layer_sizes(layer_sizes, ds);
  require(ds.size() >= 2, "train_amnn: need at least two samples to cluster");
  const DensityPeaks peaks = cluster_density_peaks(ds.features, amnn_config.centers);
  const Matrix<double> center_points = ds.features.select_rows(peaks.model.centers);
  const Routing routing = route_with_pruning(ds.features, center_points, amnn_config.denom);

  AmnnModel model;
  model.centers = routing.centers;
  model.denom = amnn_config.denom;
  for (std::size_t k = 0; k < routing.centers.rows(); ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (routing.routes[i] == k) members.push_back(i);
    }
    TrainConfig sub = config;
    sub.seed = config.seed + k;
    std::vector<EpochRecord> log;
    model.subnets.push_back(train_classic(ds.subset(members), layer_sizes, sub, logs ? &log : nullptr));
    if (logs) logs->push_back(std::move(log));
  }
  return model;
}

inline std::vector<Label> predict(const AmnnModel& model, const Matrix<double>& features) {
  require(!model.subnets.empty(), "predict: model has no subnets");
  const auto routes = model.route(features);
  std::vector<Label> out(features.rows(), 0);
  for (std::size_t k = 0; k < model.subnets.size(); ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < routes.size(); ++i) {
      if (routes[i] == k) members.push_back(i);
    }
    if (members.empty()) continue;
    const auto labels = predict(model.subnets[k], features.select_rows(members));
    for (std::size_t m = 0; m < members.size(); ++m) out[members[m]] = labels[m];
  }
  return out;
}

}  // namespace amnn

#endif
