#ifndef AMNN_METRICS_HPP
#define AMNN_METRICS_HPP

// Classification metrics: accuracy, support-weighted precision / recall / F1,
// Cohen's kappa; and the adjusted Rand index for comparing partitions.
//
// Undefined ratios are reported as 0: per-class precision or recall with an
// empty denominator, F1 when precision and recall are both 0, and kappa when
// chance agreement is 1.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "amnn/core.hpp"

namespace amnn {

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = 0) : classes_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const noexcept { return classes_; }
  // rows = true class, columns = predicted class
  std::size_t operator()(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * classes_ + predicted];
  }
  std::size_t& operator()(std::size_t truth, std::size_t predicted) { return counts_[truth * classes_ + predicted]; }

  std::size_t total() const noexcept {
    std::size_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }
  std::size_t trace() const noexcept {
    std::size_t t = 0;
    for (std::size_t c = 0; c < classes_; ++c) t += (*this)(c, c);
    return t;
  }
  bool is_diagonal() const noexcept {
    for (std::size_t a = 0; a < classes_; ++a) {
      for (std::size_t b = 0; b < classes_; ++b) {
        if (a != b && (*this)(a, b) != 0) return false;
      }
    }
    return true;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t classes_;
  std::vector<std::size_t> counts_;
};

inline ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted,
                                 std::size_t class_count) {
  require(truth.size() == predicted.size(), "confusion: length mismatch");
  ConfusionMatrix cm(class_count);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] < class_count && predicted[i] < class_count,
            "confusion: label out of range at position " + std::to_string(i));
    ++cm(truth[i], predicted[i]);
  }
  return cm;
}

struct MetricsReport {
  double accuracy = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  double kappa = 0.0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

inline MetricsReport report(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  require(total > 0, "report: empty confusion matrix");
  const std::size_t k = cm.classes();
  const double n = static_cast<double>(total);
  std::vector<double> support(k, 0.0), predicted(k, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t p = 0; p < k; ++p) {
      support[t] += static_cast<double>(cm(t, p));
      predicted[p] += static_cast<double>(cm(t, p));
    }
  }
  MetricsReport r;
  r.accuracy = static_cast<double>(cm.trace()) / n;
  double chance = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double tp = static_cast<double>(cm(c, c));
    const double precision = predicted[c] > 0 ? tp / predicted[c] : 0.0;
    const double recall = support[c] > 0 ? tp / support[c] : 0.0;
    const double f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    const double w = support[c] / n;
    r.weighted_precision += w * precision;
    r.weighted_recall += w * recall;
    r.weighted_f1 += w * f1;
    chance += (support[c] / n) * (predicted[c] / n);
  }
  r.kappa = chance < 1.0 ? (r.accuracy - chance) / (1.0 - chance) : 0.0;
  return r;
}

inline MetricsReport evaluate(std::span<const Label> truth, std::span<const Label> predicted,
                              std::size_t class_count) {
  return report(confusion(truth, predicted, class_count));
}

inline const char* metrics_csv_header() { return "accuracy,weighted_precision,weighted_recall,weighted_f1,kappa"; }

inline std::string to_csv_row(const MetricsReport& r) {
  return format_double(r.accuracy) + ',' + format_double(r.weighted_precision) + ',' +
         format_double(r.weighted_recall) + ',' + format_double(r.weighted_f1) + ',' + format_double(r.kappa);
}

// Adjusted Rand index from the pair-counting contingency table. Returns 1
// when both partitions are trivial in the same way (expected index equals
// its maximum).
inline double adjusted_rand(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  require(a.size() == b.size(), "adjusted_rand: length mismatch");
  require(a.size() >= 2, "adjusted_rand: need at least two items");
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::map<std::size_t, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto pairs = [](double m) { return m * (m - 1.0) / 2.0; };
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, m] : table) index += pairs(m);
  for (const auto& [key, m] : rows) sum_a += pairs(m);
  for (const auto& [key, m] : cols) sum_b += pairs(m);
  const double expected = sum_a * sum_b / pairs(static_cast<double>(a.size()));
  const double maximum = 0.5 * (sum_a + sum_b);
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

}  // namespace amnn

#endif
