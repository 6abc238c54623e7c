#ifndef AMNN_DATA_HPP
#define AMNN_DATA_HPP

// Tabular datasets: CSV ingestion, Gaussian-blob synthesis, stratified
// splitting, standardization, label-noise injection and mixup.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "amnn/core.hpp"

namespace amnn {

struct Dataset {
  Matrix<double> features;
  std::vector<Label> labels;
  // Set once noise has been injected; holds the uncorrupted labels.
  std::optional<std::vector<Label>> clean_labels;
  std::size_t class_count = 0;
  // Original label text per class id (first-appearance order for CSV input).
  std::vector<std::string> label_names;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dimension() const noexcept { return features.cols(); }

  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.features = features.select_rows(indices);
    out.labels.reserve(indices.size());
    for (auto i : indices) out.labels.push_back(labels[i]);
    if (clean_labels) {
      std::vector<Label> clean;
      clean.reserve(indices.size());
      for (auto i : indices) clean.push_back((*clean_labels)[i]);
      out.clean_labels = std::move(clean);
    }
    out.class_count = class_count;
    out.label_names = label_names;
    return out;
  }
};

inline void validate(const Dataset& ds) {
  require(ds.size() >= 1, "dataset: no samples");
  require(ds.features.rows() == ds.size(), "dataset: feature rows do not match label count");
  require(ds.class_count >= 1, "dataset: class_count must be >= 1");
  for (auto l : ds.labels) require(l < ds.class_count, "dataset: label out of range");
  for (double v : ds.features.flat()) require(std::isfinite(v), "dataset: non-finite feature value");
  if (ds.clean_labels) {
    require(ds.clean_labels->size() == ds.size(), "dataset: clean_labels length mismatch");
    for (auto l : *ds.clean_labels) require(l < ds.class_count, "dataset: clean label out of range");
  }
}

inline std::vector<std::size_t> class_histogram(std::span<const Label> labels, std::size_t class_count) {
  std::vector<std::size_t> counts(class_count, 0);
  for (auto l : labels) ++counts.at(l);
  return counts;
}

// ---------------------------------------------------------------------------
// CSV

struct CsvOptions {
  // Column name (requires a header row) or zero-based column index.
  std::variant<std::string, std::size_t> label_column = std::size_t{0};
  // nullopt: a header is assumed when the first row has a non-numeric
  // feature cell.
  std::optional<bool> has_header;
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline bool is_number(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

inline bool is_nonnegative_integer(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace detail

// Label values are mapped to ids by first appearance, except when they are
// already exactly the integers 0..C-1, which are kept as-is.
inline Dataset load_csv(const std::string& path, const CsvOptions& options = {}) {
  std::ifstream in(path);
  require(in.good(), "load_csv: cannot open '" + path + "'");

  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, cells)
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    rows.emplace_back(line_no, detail::split_csv_line(line));
  }
  require(!rows.empty(), "load_csv: zero data rows in '" + path + "'");

  const std::size_t width = rows.front().second.size();
  for (const auto& [ln, cells] : rows) {
    if (cells.size() != width) {
      throw Error("load_csv: ragged row " + std::to_string(ln) + ": expected " + std::to_string(width) +
                  " columns, found " + std::to_string(cells.size()));
    }
  }
  require(width >= 2, "load_csv: need at least one feature column and a label column");

  std::size_t label_col = 0;
  bool header = false;
  if (const auto* name = std::get_if<std::string>(&options.label_column)) {
    header = true;
    require(!options.has_header || *options.has_header, "load_csv: label column by name requires a header row");
    const auto& first = rows.front().second;
    auto it = std::find(first.begin(), first.end(), *name);
    require(it != first.end(), "load_csv: label column '" + *name + "' not found in header");
    label_col = static_cast<std::size_t>(it - first.begin());
  } else {
    label_col = std::get<std::size_t>(options.label_column);
    require(label_col < width, "load_csv: label column index " + std::to_string(label_col) + " out of range");
    if (options.has_header) {
      header = *options.has_header;
    } else {
      const auto& first = rows.front().second;
      for (std::size_t c = 0; c < width; ++c) {
        if (c != label_col && !detail::is_number(first[c])) header = true;
      }
    }
  }

  const std::size_t data_begin = header ? 1 : 0;
  require(rows.size() > data_begin, "load_csv: zero data rows in '" + path + "'");
  const std::size_t n = rows.size() - data_begin;

  Dataset ds;
  ds.features = Matrix<double>(n, width - 1);
  std::vector<std::string> raw_labels;
  raw_labels.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& [ln, cells] = rows[data_begin + r];
    std::size_t f = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_col) continue;
      const auto& cell = cells[c];
      if (!detail::is_number(cell)) {
        throw Error("load_csv: non-numeric feature cell '" + cell + "' at row " + std::to_string(ln) + ", column " +
                    std::to_string(c));
      }
      const double v = std::strtod(cell.c_str(), nullptr);
      if (!std::isfinite(v)) {
        throw Error("load_csv: non-finite feature cell '" + cell + "' at row " + std::to_string(ln) + ", column " +
                    std::to_string(c));
      }
      ds.features(r, f++) = v;
    }
    const auto& label = cells[label_col];
    require(!label.empty(), "load_csv: empty label at row " + std::to_string(ln) + ", column " + std::to_string(label_col));
    raw_labels.push_back(label);
  }

  std::vector<std::string> names;
  std::map<std::string, Label> ids;
  for (const auto& l : raw_labels) {
    if (ids.emplace(l, names.size()).second) names.push_back(l);
  }
  const bool numeric_identity = std::all_of(names.begin(), names.end(), [&](const std::string& s) {
    return detail::is_nonnegative_integer(s) && s.size() < 10 && std::stoul(s) < names.size() &&
           (s == "0" || s.front() != '0');
  });
  if (numeric_identity) {
    for (auto& [text, id] : ids) id = std::stoul(text);
    for (auto& [text, id] : ids) names[id] = text;
  }

  ds.labels.reserve(n);
  for (const auto& l : raw_labels) ds.labels.push_back(ids.at(l));
  ds.class_count = names.size();
  ds.label_names = std::move(names);
  return ds;
}

inline void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "write_csv: cannot open '" + path + "'");
  for (std::size_t c = 0; c < ds.dimension(); ++c) out << 'x' << c << ',';
  out << "label\n";
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (double v : ds.features.row(r)) out << format_double(v) << ',';
    const Label l = ds.labels[r];
    out << (l < ds.label_names.size() ? ds.label_names[l] : std::to_string(l)) << '\n';
  }
  require(out.good(), "write_csv: write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Synthetic Gaussian blobs

struct SynthSpec {
  // Explicit per-class counts; class_count = counts.size().
  std::vector<std::size_t> class_counts = {100, 100, 100};
  std::size_t dimension = 2;
  double center_separation = 10.0;
  double cluster_stddev = 1.0;
  std::uint64_t seed = 0;

  static SynthSpec uniform(std::size_t classes, std::size_t per_class, std::size_t dimension, double separation,
                           double stddev, std::uint64_t seed) {
    return {std::vector<std::size_t>(classes, per_class), dimension, separation, stddev, seed};
  }
};

inline void validate(const SynthSpec& spec) {
  require(!spec.class_counts.empty(), "synth: at least one class required");
  for (auto c : spec.class_counts) require(c >= 1, "synth: every class count must be >= 1");
  require(spec.dimension >= 1, "synth: dimension must be >= 1");
  require(std::isfinite(spec.center_separation) && spec.center_separation > 0, "synth: center_separation must be > 0");
  require(std::isfinite(spec.cluster_stddev) && spec.cluster_stddev > 0, "synth: cluster_stddev must be > 0");
}

// Blob centers. With dimension >= classes the centers sit on scaled axes so
// every pair is exactly `center_separation` apart; otherwise they are drawn
// uniformly in a box and rejected until every pair is far enough apart.
inline Matrix<double> blob_centers(const SynthSpec& spec, Rng& rng) {
  const std::size_t classes = spec.class_counts.size();
  Matrix<double> centers(classes, spec.dimension, 0.0);
  if (spec.dimension >= classes) {
    const double scale = spec.center_separation / std::sqrt(2.0);
    for (std::size_t c = 0; c < classes; ++c) centers(c, c) = scale;
    return centers;
  }
  const double side = 2.0 * spec.center_separation *
                      std::ceil(std::pow(static_cast<double>(classes), 1.0 / static_cast<double>(spec.dimension)));
  std::uniform_real_distribution<double> coord(0.0, side);
  const double min_sq = spec.center_separation * spec.center_separation;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    for (double& v : centers.flat()) v = coord(rng);
    bool ok = true;
    for (std::size_t a = 0; a < classes && ok; ++a) {
      for (std::size_t b = a + 1; b < classes && ok; ++b) ok = squared_distance(centers.row(a), centers.row(b)) >= min_sq;
    }
    if (ok) return centers;
  }
  throw Error("synth: could not place blob centers at the requested separation");
}

inline Dataset synthesize(const SynthSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const Matrix<double> centers = blob_centers(spec, rng);
  const std::size_t n = std::accumulate(spec.class_counts.begin(), spec.class_counts.end(), std::size_t{0});
  Dataset ds;
  ds.features = Matrix<double>(n, spec.dimension);
  ds.labels.reserve(n);
  ds.class_count = spec.class_counts.size();
  std::normal_distribution<double> noise(0.0, spec.cluster_stddev);
  std::size_t r = 0;
  for (std::size_t c = 0; c < ds.class_count; ++c) {
    ds.label_names.push_back(std::to_string(c));
    for (std::size_t i = 0; i < spec.class_counts[c]; ++i, ++r) {
      for (std::size_t d = 0; d < spec.dimension; ++d) ds.features(r, d) = centers(c, d) + noise(rng);
      ds.labels.push_back(c);
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Train/test split

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Test size is round(test_ratio * N). When every class has at least two
// members the test quota is allocated per class by largest remainder;
// otherwise rows are drawn without regard to class.
inline SplitIndices split_indices(std::span<const Label> labels, std::size_t class_count, double test_ratio,
                                  std::uint64_t seed) {
  const std::size_t n = labels.size();
  require(test_ratio >= 0.0 && test_ratio < 1.0, "split: test_ratio must be in [0, 1)");
  const auto n_test = static_cast<std::size_t>(std::llround(test_ratio * static_cast<double>(n)));
  require(n_test < n, "split: test_ratio leaves an empty training set");

  Rng rng(seed);
  std::vector<char> in_test(n, 0);
  const auto hist = class_histogram(labels, class_count);
  const bool stratify = std::all_of(hist.begin(), hist.end(), [](std::size_t c) { return c == 0 || c >= 2; });

  if (stratify && n_test > 0) {
    std::vector<std::size_t> quota(class_count, 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < class_count; ++c) {
      const double exact = test_ratio * static_cast<double>(hist[c]);
      quota[c] = static_cast<std::size_t>(std::floor(exact));
      assigned += quota[c];
      remainders.emplace_back(exact - std::floor(exact), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n_test; i = (i + 1) % class_count) {
      const auto c = remainders[i].second;
      if (quota[c] < hist[c]) {
        ++quota[c];
        ++assigned;
      }
    }
    for (std::size_t c = 0; c < class_count; ++c) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == c) members.push_back(i);
      }
      std::shuffle(members.begin(), members.end(), rng);
      for (std::size_t i = 0; i < quota[c]; ++i) in_test[members[i]] = 1;
    }
  } else if (n_test > 0) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < n_test; ++i) in_test[order[i]] = 1;
  }

  SplitIndices out;
  for (std::size_t i = 0; i < n; ++i) (in_test[i] ? out.test : out.train).push_back(i);
  return out;
}

inline std::pair<Dataset, Dataset> split(const Dataset& ds, double test_ratio, std::uint64_t seed) {
  require(ds.size() >= 2 || test_ratio == 0.0, "split: need at least two samples");
  const auto idx = split_indices(ds.labels, ds.class_count, test_ratio, seed);
  return {ds.subset(idx.train), ds.subset(idx.test)};
}

// ---------------------------------------------------------------------------
// Standardization

struct Standardizer {
  std::vector<double> means;
  std::vector<double> stddevs;

  static Standardizer fit(const Matrix<double>& x) {
    require(x.rows() >= 1, "standardize: empty training set");
    Standardizer s;
    s.means.assign(x.cols(), 0.0);
    s.stddevs.assign(x.cols(), 0.0);
    const auto n = static_cast<double>(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) s.means[c] += x(r, c);
    }
    for (auto& m : s.means) m /= n;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) {
        const double d = x(r, c) - s.means[c];
        s.stddevs[c] += d * d;
      }
    }
    for (auto& sd : s.stddevs) sd = std::sqrt(sd / n);
    return s;
  }

  // Zero-variance features map to 0.
  Matrix<double> apply(Matrix<double> x) const {
    require(x.cols() == means.size(), "standardize: feature width mismatch");
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) {
        x(r, c) = stddevs[c] > 0.0 ? (x(r, c) - means[c]) / stddevs[c] : 0.0;
      }
    }
    return x;
  }
};

struct StandardizedPair {
  Dataset train;
  Dataset test;
  Standardizer transform;
};

inline StandardizedPair standardize(Dataset train, Dataset test) {
  auto s = Standardizer::fit(train.features);
  train.features = s.apply(std::move(train.features));
  if (test.features.rows() > 0) test.features = s.apply(std::move(test.features));
  return {std::move(train), std::move(test), std::move(s)};
}

// ---------------------------------------------------------------------------
// Label noise

enum class NoiseKind { symmetric, pair_asymmetric };

inline std::string to_string(NoiseKind k) { return k == NoiseKind::symmetric ? "symmetric" : "pair_asymmetric"; }

inline NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "symmetric") return NoiseKind::symmetric;
  if (s == "pair_asymmetric" || s == "pair-asymmetric" || s == "pair") return NoiseKind::pair_asymmetric;
  throw Error("unknown noise kind '" + s + "'");
}

struct NoiseSpec {
  NoiseKind kind = NoiseKind::symmetric;
  double rate = 0.0;
  std::uint64_t seed = 0;
};

struct NoisyLabels {
  std::vector<Label> labels;
  std::vector<bool> flipped;
};

// Flips exactly round(rate * N) labels chosen without replacement.
// Symmetric: uniform over the other C-1 classes. Pair: c -> (c+1) mod C.
inline NoisyLabels inject_noise(std::span<const Label> labels, const NoiseSpec& spec, std::size_t class_count) {
  require(spec.rate >= 0.0 && spec.rate <= 1.0, "inject_noise: rate must be in [0, 1]");
  require(class_count >= 2 || spec.rate == 0.0, "inject_noise: need at least two classes to flip labels");
  const std::size_t n = labels.size();
  NoisyLabels out{{labels.begin(), labels.end()}, std::vector<bool>(n, false)};
  const auto flips = static_cast<std::size_t>(std::llround(spec.rate * static_cast<double>(n)));
  if (flips == 0) return out;

  Rng rng(spec.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<std::size_t> other(0, class_count - 2);
  for (std::size_t i = 0; i < flips; ++i) {
    const std::size_t idx = order[i];
    const Label c = labels[idx];
    require(c < class_count, "inject_noise: label out of range");
    if (spec.kind == NoiseKind::symmetric) {
      const Label r = other(rng);
      out.labels[idx] = r < c ? r : r + 1;
    } else {
      out.labels[idx] = (c + 1) % class_count;
    }
    out.flipped[idx] = true;
  }
  return out;
}

// Corrupts ds.labels in place and keeps the originals in clean_labels.
inline std::vector<bool> apply_noise(Dataset& ds, const NoiseSpec& spec) {
  auto noisy = inject_noise(ds.labels, spec, ds.class_count);
  if (!ds.clean_labels) ds.clean_labels = ds.labels;
  ds.labels = std::move(noisy.labels);
  return std::move(noisy.flipped);
}

// ---------------------------------------------------------------------------
// Mixup

inline Matrix<double> one_hot(std::span<const Label> labels, std::size_t class_count) {
  Matrix<double> out(labels.size(), class_count, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) out(i, labels[i]) = 1.0;
  return out;
}

struct MixedBatch {
  Matrix<double> features;
  Matrix<double> targets;
};

// out_i = lambda_i * x_i + (1 - lambda_i) * x_partner(i), applied to features
// and soft targets alike.
inline MixedBatch mix_batch(const Matrix<double>& features, const Matrix<double>& targets,
                            std::span<const double> lambdas, std::span<const std::size_t> partners) {
  require(features.rows() == targets.rows(), "mixup: feature/target row mismatch");
  require(lambdas.size() == features.rows() && partners.size() == features.rows(), "mixup: pairing size mismatch");
  MixedBatch out{features, targets};
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const double lam = lambdas[i];
    const std::size_t j = partners[i];
    for (std::size_t c = 0; c < features.cols(); ++c) {
      out.features(i, c) = lam * features(i, c) + (1.0 - lam) * features(j, c);
    }
    for (std::size_t c = 0; c < targets.cols(); ++c) {
      out.targets(i, c) = lam * targets(i, c) + (1.0 - lam) * targets(j, c);
    }
  }
  return out;
}

inline double sample_beta(double alpha, double beta, Rng& rng) {
  std::gamma_distribution<double> ga(alpha, 1.0);
  std::gamma_distribution<double> gb(beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  if (x + y <= 0.0) return 0.5;
  return x / (x + y);
}

inline MixedBatch mixup(const Matrix<double>& features, const Matrix<double>& targets, double alpha,
                        std::uint64_t seed) {
  require(features.rows() >= 1, "mixup: empty batch");
  require(alpha > 0.0, "mixup: alpha must be > 0");
  Rng rng(seed);
  const std::size_t n = features.rows();
  std::vector<std::size_t> partners(n);
  std::iota(partners.begin(), partners.end(), 0);
  std::shuffle(partners.begin(), partners.end(), rng);
  std::vector<double> lambdas(n);
  for (auto& l : lambdas) l = sample_beta(alpha, alpha, rng);
  return mix_batch(features, targets, lambdas, partners);
}

}  // namespace amnn

#endif
