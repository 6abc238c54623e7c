#ifndef AMNN_TESTS_ORACLES_HPP
#define AMNN_TESTS_ORACLES_HPP

// Independent reference computations used only by the test suites. Nothing
// here calls into the library code path it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "amnn/core.hpp"

namespace amnn::oracle {

// Central finite differences of `loss` with respect to every entry of params.
inline std::vector<double> finite_difference_gradient(std::span<double> params,
                                                      const std::function<double()>& loss, double step = 1e-5) {
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + step;
    const double up = loss();
    params[i] = saved - step;
    const double down = loss();
    params[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

inline bool gradients_agree(double analytic, double numeric, double rel_tol = 1e-5, double abs_tol = 1e-8) {
  const double diff = std::abs(analytic - numeric);
  if (diff < abs_tol) return true;
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return diff / scale < rel_tol;
}

// Metrics straight from per-sample label lists.
struct BruteMetrics {
  double accuracy, weighted_precision, weighted_recall, weighted_f1, kappa;
};

inline BruteMetrics brute_force_metrics(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred,
                                        std::size_t classes) {
  const double n = static_cast<double>(truth.size());
  double correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == pred[i] ? 1 : 0;
  BruteMetrics m{correct / n, 0, 0, 0, 0};
  double expected_agreement = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    double tp = 0, fp = 0, fn = 0, support = 0, predicted = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool t = truth[i] == c, p = pred[i] == c;
      tp += t && p;
      fp += !t && p;
      fn += t && !p;
      support += t;
      predicted += p;
    }
    const double precision = tp + fp == 0 ? 0 : tp / (tp + fp);
    const double recall = tp + fn == 0 ? 0 : tp / (tp + fn);
    const double f1 = precision + recall == 0 ? 0 : 2 * precision * recall / (precision + recall);
    m.weighted_precision += precision * support / n;
    m.weighted_recall += recall * support / n;
    m.weighted_f1 += f1 * support / n;
    expected_agreement += (support / n) * (predicted / n);
  }
  m.kappa = expected_agreement == 1 ? 0 : (m.accuracy - expected_agreement) / (1 - expected_agreement);
  return m;
}

// Adjusted Rand index by explicit enumeration of all item pairs.
inline double brute_force_ari(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  const std::size_t n = a.size();
  double both = 0, only_a = 0, only_b = 0, pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      both += sa && sb;
      only_a += sa;
      only_b += sb;
      pairs += 1;
    }
  }
  const double expected = only_a * only_b / pairs;
  const double maximum = 0.5 * (only_a + only_b);
  if (maximum == expected) return 1.0;
  return (both - expected) / (maximum - expected);
}

inline Matrix<double> random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = -1.0,
                                    double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix<double> m(rows, cols);
  for (auto& v : m.flat()) v = u(rng);
  return m;
}

}  // namespace amnn::oracle

#endif
