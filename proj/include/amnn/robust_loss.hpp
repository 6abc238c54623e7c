#ifndef AMNN_ROBUST_LOSS_HPP
#define AMNN_ROBUST_LOSS_HPP

// Label-noise robust training.
//
// Per-sample loss on the predicted probability p of the labelled class:
//   gce(p)       = (1 - p^q) / q
//   truncated(p) = gce(p) if p > k, gce(k) otherwise
// The plateau bounds every sample's loss by gce(k) and zeroes the gradient of
// samples the network considers unlikely to carry their label. Each epoch
// (after a warmup) the retained set is re-estimated from the current model,
// optionally capped at a fraction of the training set.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "amnn/core.hpp"
#include "amnn/data.hpp"
#include "amnn/network.hpp"

namespace amnn {

inline void check_q(double q) { require(q > 0.0 && q <= 1.0, "loss: q must be in (0, 1]"); }
inline void check_k(double k) { require(k >= 0.0 && k < 1.0, "loss: k must be in [0, 1)"); }

inline double gce_loss(double p, double q) {
  check_q(q);
  require(p >= 0.0 && p <= 1.0, "gce_loss: p must be in [0, 1]");
  if (q == 1.0) return 1.0 - p;
  return (1.0 - std::pow(p, q)) / q;
}

// d gce / dp = -p^(q-1)
inline double gce_derivative(double p, double q) {
  check_q(q);
  if (q == 1.0) return -1.0;
  return -std::pow(p, q - 1.0);
}

inline double truncated_loss(double p, double q, double k) {
  check_k(k);
  return gce_loss(p > k ? p : k, q);
}

inline double truncated_derivative(double p, double q, double k) {
  check_k(k);
  return p > k ? gce_derivative(p, q) : 0.0;
}

inline double truncation_bound(double q, double k) { return truncated_loss(0.0, q, k); }

inline constexpr double kProbabilityFloor = 1e-12;

inline double cross_entropy_loss(double p) { return -std::log(std::max(p, kProbabilityFloor)); }

// ---------------------------------------------------------------------------
// Sample retention

struct SampleWeights {
  std::vector<char> keep;  // 1 = contributes gradient
  std::size_t epoch_updated = 0;

  std::size_t retained() const { return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), 1)); }
};

// Candidates are samples with p > k. At most ceil(sample_rate * N) of them
// are kept (highest p first, ties by lower index); if none qualify, the
// single most confident sample is kept.
inline SampleWeights prune_mask(std::span<const double> true_class_probs, double k, double sample_rate,
                                std::size_t epoch = 0) {
  require(sample_rate > 0.0 && sample_rate <= 1.0, "prune_mask: sample_rate must be in (0, 1]");
  const std::size_t n = true_class_probs.size();
  require(n >= 1, "prune_mask: empty input");
  SampleWeights w{std::vector<char>(n, 0), epoch};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return true_class_probs[a] > true_class_probs[b]; });
  const auto cap = static_cast<std::size_t>(std::ceil(sample_rate * static_cast<double>(n) - 1e-9));
  std::size_t kept = 0;
  for (auto i : order) {
    if (kept >= cap || !(true_class_probs[i] > k)) break;
    w.keep[i] = 1;
    ++kept;
  }
  if (kept == 0) w.keep[order.front()] = 1;
  return w;
}

// ---------------------------------------------------------------------------
// Adam

struct AdamHyper {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t t = 0;  // steps taken

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
                      const AdamHyper& h) {
  require(params.size() == grads.size(), "adam_step: parameter/gradient size mismatch");
  require(state.m.size() == params.size() && state.v.size() == params.size(), "adam_step: state size mismatch");
  ++state.t;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = h.beta1 * state.m[i] + (1.0 - h.beta1) * grads[i];
    state.v[i] = h.beta2 * state.v[i] + (1.0 - h.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
}

// ---------------------------------------------------------------------------
// Softmax objectives

enum class LossKind { cross_entropy, gce, truncated };

struct LossSpec {
  LossKind kind = LossKind::truncated;
  double q = 0.7;
  double k = 0.5;

  double value(double p) const {
    switch (kind) {
      case LossKind::cross_entropy: return cross_entropy_loss(p);
      case LossKind::gce: return gce_loss(p, q);
      case LossKind::truncated: return truncated_loss(p, q, k);
    }
    return 0.0;
  }

  double derivative(double p) const {
    switch (kind) {
      case LossKind::cross_entropy: return p > kProbabilityFloor ? -1.0 / p : 0.0;
      case LossKind::gce: return gce_derivative(p, q);
      case LossKind::truncated: return truncated_derivative(p, q, k);
    }
    return 0.0;
  }
};

inline void check_softmax_net(const Mlp& net) {
  require(net.output_activation() == Activation::softmax, "softmax objective requires a softmax output layer");
}

// Mean loss over the batch rows and its gradient. Through the softmax,
//   dL/dsigma_c = L'(p_y) * p_y * ([c == y] - p_c).
inline LossAndGradient softmax_loss_gradient(const Mlp& net, const Matrix<double>& batch,
                                             std::span<const Label> labels, const LossSpec& loss) {
  check_softmax_net(net);
  require(batch.rows() >= 1 && labels.size() == batch.rows(), "softmax_loss_gradient: batch/label mismatch");
  const ForwardCache cache = forward(net, batch);
  const Matrix<double>& prob = cache.outputs();
  const double scale = 1.0 / static_cast<double>(batch.rows());
  Matrix<double> delta(prob.rows(), prob.cols(), 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < prob.rows(); ++r) {
    const Label y = labels[r];
    require(y < prob.cols(), "softmax_loss_gradient: label out of range");
    const double p = prob(r, y);
    total += loss.value(p);
    if (loss.kind == LossKind::cross_entropy && p > kProbabilityFloor) {
      // Same formula with L' = -1/p, simplified to avoid dividing by p.
      for (std::size_t c = 0; c < prob.cols(); ++c) delta(r, c) = scale * (prob(r, c) - (c == y ? 1.0 : 0.0));
      continue;
    }
    const double g = loss.derivative(p) * p;
    if (g == 0.0) continue;
    for (std::size_t c = 0; c < prob.cols(); ++c) delta(r, c) = scale * g * ((c == y ? 1.0 : 0.0) - prob(r, c));
  }
  return {total * scale, backward(net, cache, std::move(delta))};
}

// Cross-entropy against soft targets (mixup): dL/dsigma = p - t for rows
// whose targets sum to one.
inline LossAndGradient soft_cross_entropy_gradient(const Mlp& net, const Matrix<double>& batch,
                                                   const Matrix<double>& targets) {
  check_softmax_net(net);
  require(batch.rows() >= 1 && targets.rows() == batch.rows() && targets.cols() == net.outputs(),
          "soft_cross_entropy_gradient: shape mismatch");
  const ForwardCache cache = forward(net, batch);
  const Matrix<double>& prob = cache.outputs();
  const double scale = 1.0 / static_cast<double>(batch.rows());
  Matrix<double> delta(prob.rows(), prob.cols());
  double total = 0.0;
  for (std::size_t r = 0; r < prob.rows(); ++r) {
    double mass = 0.0;
    for (std::size_t c = 0; c < prob.cols(); ++c) {
      total -= targets(r, c) * std::log(std::max(prob(r, c), kProbabilityFloor));
      mass += targets(r, c);
    }
    for (std::size_t c = 0; c < prob.cols(); ++c) delta(r, c) = scale * (mass * prob(r, c) - targets(r, c));
  }
  return {total * scale, backward(net, cache, std::move(delta))};
}

inline std::vector<double> true_class_probabilities(const Mlp& net, const Matrix<double>& features,
                                                    std::span<const Label> labels) {
  const ForwardCache cache = forward(net, features);
  std::vector<double> p(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) p[i] = cache.outputs()(i, labels[i]);
  return p;
}

// ---------------------------------------------------------------------------
// Training loops

struct RobustConfig {
  double q = 0.7;
  double k = 0.5;
  double sample_rate = 1.0;
  std::size_t prune_warmup_epochs = 2;
  double learning_rate = 1e-4;
  std::size_t epochs = 20;
  std::size_t batch_size = 128;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double mixup_alpha = 0.2;
  std::uint64_t seed = 0;

  AdamHyper adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_epsilon}; }
};

inline void validate(const RobustConfig& c) {
  require(c.q > 0.0 && c.q <= 1.0, "robust config: q must be in (0, 1]");
  require(c.k >= 0.0 && c.k < 1.0, "robust config: k must be in [0, 1)");
  require(c.sample_rate > 0.0 && c.sample_rate <= 1.0, "robust config: sample_rate must be in (0, 1]");
  require(c.learning_rate > 0.0 && std::isfinite(c.learning_rate), "robust config: learning_rate must be > 0");
  require(c.epochs >= 1, "robust config: epochs must be >= 1");
  require(c.batch_size >= 1, "robust config: batch_size must be >= 1");
  require(c.adam_beta1 >= 0.0 && c.adam_beta1 < 1.0, "robust config: adam_beta1 must be in [0, 1)");
  require(c.adam_beta2 >= 0.0 && c.adam_beta2 < 1.0, "robust config: adam_beta2 must be in [0, 1)");
  require(c.adam_epsilon > 0.0, "robust config: adam_epsilon must be > 0");
  require(c.mixup_alpha > 0.0, "robust config: mixup_alpha must be > 0");
}

enum class Objective { truncated, cross_entropy, mixup };

struct EpochStats {
  double mean_loss = 0.0;  // over retained samples, before each batch update
  std::size_t retained = 0;
};

// Feeds one shuffled pass of mini-batches to Adam. Samples with keep == 0
// are removed before the forward pass, so they cannot influence the update.
inline EpochStats softmax_epoch(Mlp& net, AdamState& adam, const Dataset& ds, const SampleWeights& mask,
                                std::span<const std::size_t> order, const LossSpec& loss, const RobustConfig& config,
                                Objective objective, Rng& mixup_rng) {
  EpochStats stats;
  double total = 0.0;
  const AdamHyper hyper = config.adam();
  for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
    const std::size_t stop = std::min(order.size(), start + config.batch_size);
    std::vector<std::size_t> idx;
    for (std::size_t p = start; p < stop; ++p) {
      if (mask.keep[order[p]]) idx.push_back(order[p]);
    }
    if (idx.empty()) continue;
    const Matrix<double> x = ds.features.select_rows(idx);
    std::vector<Label> y;
    y.reserve(idx.size());
    for (auto i : idx) y.push_back(ds.labels[i]);

    LossAndGradient step;
    if (objective == Objective::mixup) {
      const auto mixed = mixup(x, one_hot(y, ds.class_count), config.mixup_alpha, mixup_rng());
      step = soft_cross_entropy_gradient(net, mixed.features, mixed.targets);
    } else {
      step = softmax_loss_gradient(net, x, y, loss);
    }
    for (double g : step.gradient) {
      require(std::isfinite(g), "training: non-finite gradient (batch " + std::to_string(start / config.batch_size) + ")");
    }
    adam_step(net.parameters(), step.gradient, adam, hyper);
    total += step.loss * static_cast<double>(idx.size());
    stats.retained += idx.size();
  }
  stats.mean_loss = stats.retained ? total / static_cast<double>(stats.retained) : 0.0;
  return stats;
}

// ELU hidden layers, softmax output, Adam. The truncated objective trains
// on plain GCE during warmup; from then on each epoch re-estimates the
// retained set from the current model and minimizes the truncated loss
// over it. The cross-entropy and mixup objectives always retain every sample.
inline Mlp train_softmax(const Dataset& ds, const std::vector<std::size_t>& layer_sizes, const RobustConfig& config,
                         Objective objective, std::vector<EpochRecord>* log = nullptr) {
  validate(config);
  validate(ds);
  check_layer_sizes(layer_sizes, ds);
  Mlp net = init_weights(layer_sizes, config.seed, Activation::elu, Activation::softmax);
  AdamState adam(net.parameter_count());
  Rng rng(mix_seed(config.seed));
  Rng mixup_rng(mix_seed(config.seed ^ 0x6d697875ULL));
  const std::size_t n = ds.size();
  SampleWeights mask{std::vector<char>(n, 1), 0};

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    LossSpec loss{LossKind::cross_entropy, config.q, config.k};
    if (objective == Objective::truncated) {
      if (epoch >= config.prune_warmup_epochs) {
        mask = prune_mask(true_class_probabilities(net, ds.features, ds.labels), config.k, config.sample_rate, epoch);
        loss.kind = LossKind::truncated;
      } else {
        loss.kind = LossKind::gce;
      }
    }
    const auto order = shuffled_indices(n, rng);
    const EpochStats stats = softmax_epoch(net, adam, ds, mask, order, loss, config, objective, mixup_rng);
    if (log) log->push_back({epoch, stats.mean_loss, mask.retained(), accuracy_of(ds.labels, predict(net, ds.features))});
  }
  return net;
}

inline Mlp train_robust(const Dataset& ds, const std::vector<std::size_t>& layer_sizes, const RobustConfig& config,
                        std::vector<EpochRecord>* log = nullptr) {
  return train_softmax(ds, layer_sizes, config, Objective::truncated, log);
}

inline Mlp train_cross_entropy(const Dataset& ds, const std::vector<std::size_t>& layer_sizes,
                               const RobustConfig& config, std::vector<EpochRecord>* log = nullptr) {
  return train_softmax(ds, layer_sizes, config, Objective::cross_entropy, log);
}

inline Mlp train_mixup(const Dataset& ds, const std::vector<std::size_t>& layer_sizes, const RobustConfig& config,
                       std::vector<EpochRecord>* log = nullptr) {
  return train_softmax(ds, layer_sizes, config, Objective::mixup, log);
}

inline void write_training_log(std::span<const EpochRecord> log, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "write_training_log: cannot open '" + path + "'");
  out << "epoch,mean_loss,retained,train_accuracy\n";
  for (const auto& r : log) {
    out << r.epoch << ',' << format_double(r.mean_loss) << ',' << r.retained << ',' << format_double(r.train_accuracy)
        << '\n';
  }
  require(out.good(), "write_training_log: write failed for '" + path + "'");
}

}  // namespace amnn

#endif
