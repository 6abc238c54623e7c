#ifndef AMNN_EXPERIMENT_HPP
#define AMNN_EXPERIMENT_HPP

// Experiment orchestration: strict JSON configuration, the noise-rate sweep
// (algorithms x rates x seeds) and its CSV / markdown reports.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "amnn/core.hpp"
#include "amnn/data.hpp"
#include "amnn/metrics.hpp"
#include "amnn/model_io.hpp"
#include "amnn/network.hpp"
#include "amnn/robust_loss.hpp"
#include "json.hpp"

namespace amnn {

enum class Algorithm { classic_dnn, amnn, robust_dnn, dnn_mixup, ce_dnn };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::classic_dnn: return "classic_dnn";
    case Algorithm::amnn: return "amnn";
    case Algorithm::robust_dnn: return "robust_dnn";
    case Algorithm::dnn_mixup: return "dnn_mixup";
    case Algorithm::ce_dnn: return "ce_dnn";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  for (auto a : {Algorithm::classic_dnn, Algorithm::amnn, Algorithm::robust_dnn, Algorithm::dnn_mixup,
                 Algorithm::ce_dnn}) {
    if (to_string(a) == s) return a;
  }
  throw Error("unknown algorithm '" + s + "'");
}

struct CsvSource {
  std::string path;
  CsvOptions options;
};

struct ExperimentConfig {
  std::variant<SynthSpec, CsvSource> data = SynthSpec{};
  double test_ratio = 0.2;
  std::uint64_t split_seed = 0;
  bool standardize = true;
  NoiseKind noise_kind = NoiseKind::symmetric;
  std::vector<double> noise_rates = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40};
  std::vector<Algorithm> algorithms = {Algorithm::ce_dnn, Algorithm::robust_dnn};
  std::vector<std::size_t> hidden_layers = {20};
  RobustConfig robust;   // optimizer, truncation and mixup settings for the softmax models
  TrainConfig classic;   // squared-error backprop for classic_dnn and AMNN subnets
  AmnnConfig clustering;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::string output_dir = "amnn_out";
  std::optional<std::string> log_dir;
  bool record_timings = false;
  std::size_t threads = 1;
};

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

class ConfigReader {
 public:
  ConfigReader(const nlohmann::json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw Error("config: " + where() + " must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : node_.items()) {
      if (!allowed.count(key)) throw Error("config: unknown key '" + qualified(key) + "'");
    }
  }

  bool has(const char* key) const { return node_.contains(key); }

  template <typename T>
  void read(const char* key, T& out) const {
    if (!node_.contains(key)) return;
    try {
      out = node_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error("config: '" + qualified(key) + "' has the wrong type");
    }
  }

  ConfigReader child(const char* key) const { return ConfigReader(node_.at(key), qualified(key)); }
  const nlohmann::json& at(const char* key) const { return node_.at(key); }
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void check(bool ok, const char* key, const std::string& what) const {
    if (!ok) throw Error("config: '" + qualified(key) + "' " + what);
  }

 private:
  std::string where() const { return path_.empty() ? "document root" : "'" + path_ + "'"; }

  const nlohmann::json& node_;
  std::string path_;
};

inline std::string position_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& root) {
  using detail::ConfigReader;
  ExperimentConfig c;
  ConfigReader top(root, "");
  top.allow({"data", "split", "standardize", "noise", "algorithms", "model", "optimizer", "robust", "mixup",
             "classic", "clustering", "seeds", "output_dir", "log_dir", "record_timings", "threads"});

  if (!top.has("data")) throw Error("config: missing required key 'data'");
  {
    auto data = top.child("data");
    data.allow({"synth", "csv"});
    data.check(data.has("synth") != data.has("csv"), "synth", "or 'data.csv': exactly one data source is required");
    if (data.has("synth")) {
      auto s = data.child("synth");
      s.allow({"class_counts", "class_count", "samples_per_class", "dimension", "center_separation",
               "cluster_stddev", "seed"});
      SynthSpec spec;
      if (s.has("class_counts")) {
        s.check(!s.has("class_count") && !s.has("samples_per_class"), "class_counts",
                "cannot be combined with class_count/samples_per_class");
        s.read("class_counts", spec.class_counts);
      } else {
        std::size_t classes = spec.class_counts.size(), per_class = spec.class_counts.front();
        s.read("class_count", classes);
        s.read("samples_per_class", per_class);
        spec.class_counts.assign(classes, per_class);
      }
      s.read("dimension", spec.dimension);
      s.read("center_separation", spec.center_separation);
      s.read("cluster_stddev", spec.cluster_stddev);
      s.read("seed", spec.seed);
      try {
        validate(spec);
      } catch (const Error& e) {
        throw Error("config: 'data.synth': " + std::string(e.what()));
      }
      c.data = spec;
    } else {
      auto s = data.child("csv");
      s.allow({"path", "label_column", "header"});
      CsvSource src;
      s.check(s.has("path"), "path", "is required");
      s.read("path", src.path);
      if (s.has("label_column")) {
        const auto& lc = s.at("label_column");
        if (lc.is_string()) {
          src.options.label_column = lc.get<std::string>();
        } else if (lc.is_number_unsigned()) {
          src.options.label_column = lc.get<std::size_t>();
        } else {
          throw Error("config: 'data.csv.label_column' must be a column name or a non-negative index");
        }
      }
      if (s.has("header")) {
        bool h = false;
        s.read("header", h);
        src.options.has_header = h;
      }
      c.data = src;
    }
  }

  if (top.has("split")) {
    auto s = top.child("split");
    s.allow({"test_ratio", "seed"});
    s.read("test_ratio", c.test_ratio);
    s.read("seed", c.split_seed);
    s.check(c.test_ratio >= 0.0 && c.test_ratio < 1.0, "test_ratio", "must be in [0, 1)");
  }
  top.read("standardize", c.standardize);

  if (top.has("noise")) {
    auto s = top.child("noise");
    s.allow({"kind", "rates"});
    if (s.has("kind")) {
      std::string kind;
      s.read("kind", kind);
      try {
        c.noise_kind = parse_noise_kind(kind);
      } catch (const Error& e) {
        throw Error("config: 'noise.kind': " + std::string(e.what()));
      }
    }
    s.read("rates", c.noise_rates);
    s.check(!c.noise_rates.empty(), "rates", "must not be empty");
    for (double r : c.noise_rates) s.check(r >= 0.0 && r <= 1.0, "rates", "values must be in [0, 1]");
  }

  if (top.has("algorithms")) {
    std::vector<std::string> names;
    top.read("algorithms", names);
    top.check(!names.empty(), "algorithms", "must not be empty");
    c.algorithms.clear();
    for (const auto& n : names) {
      try {
        c.algorithms.push_back(parse_algorithm(n));
      } catch (const Error& e) {
        throw Error("config: 'algorithms': " + std::string(e.what()));
      }
    }
  }

  if (top.has("model")) {
    auto s = top.child("model");
    s.allow({"hidden_layers"});
    s.read("hidden_layers", c.hidden_layers);
    for (auto h : c.hidden_layers) s.check(h >= 1, "hidden_layers", "widths must be >= 1");
  }

  if (top.has("optimizer")) {
    auto s = top.child("optimizer");
    s.allow({"learning_rate", "batch_size", "epochs", "adam_beta1", "adam_beta2", "adam_epsilon"});
    s.read("learning_rate", c.robust.learning_rate);
    s.read("batch_size", c.robust.batch_size);
    s.read("epochs", c.robust.epochs);
    s.read("adam_beta1", c.robust.adam_beta1);
    s.read("adam_beta2", c.robust.adam_beta2);
    s.read("adam_epsilon", c.robust.adam_epsilon);
  }
  if (top.has("robust")) {
    auto s = top.child("robust");
    s.allow({"q", "k", "sample_rate", "prune_warmup_epochs"});
    s.read("q", c.robust.q);
    s.read("k", c.robust.k);
    s.read("sample_rate", c.robust.sample_rate);
    s.read("prune_warmup_epochs", c.robust.prune_warmup_epochs);
  }
  if (top.has("mixup")) {
    auto s = top.child("mixup");
    s.allow({"alpha"});
    s.read("alpha", c.robust.mixup_alpha);
  }
  try {
    validate(c.robust);
  } catch (const Error& e) {
    throw Error("config: " + std::string(e.what()));
  }

  if (top.has("classic")) {
    auto s = top.child("classic");
    s.allow({"learning_rate", "epochs", "batch_size", "target_error"});
    s.read("learning_rate", c.classic.learning_rate);
    s.read("epochs", c.classic.epochs);
    s.read("batch_size", c.classic.batch_size);
    s.read("target_error", c.classic.target_error);
  }
  try {
    validate(c.classic);
  } catch (const Error& e) {
    throw Error("config: 'classic': " + std::string(e.what()));
  }

  if (top.has("clustering")) {
    auto s = top.child("clustering");
    s.allow({"centers", "threshold", "denom"});
    double threshold = c.clustering.centers.threshold;
    s.read("threshold", threshold);
    if (s.has("centers")) {
      const auto& v = s.at("centers");
      if (v.is_string() && v.get<std::string>() == "auto") {
        c.clustering.centers = CenterPolicy::automatic(threshold);
      } else if (v.is_number_unsigned() && v.get<std::size_t>() >= 1) {
        c.clustering.centers = CenterPolicy::fixed(v.get<std::size_t>());
      } else {
        throw Error("config: 'clustering.centers' must be \"auto\" or a positive integer");
      }
    } else {
      c.clustering.centers = CenterPolicy::automatic(threshold);
    }
    s.read("denom", c.clustering.denom);
    s.check(c.clustering.denom > 0.0, "denom", "must be > 0");
  }

  top.read("seeds", c.seeds);
  top.check(!c.seeds.empty(), "seeds", "must not be empty");
  top.read("output_dir", c.output_dir);
  if (top.has("log_dir")) {
    std::string dir;
    top.read("log_dir", dir);
    c.log_dir = dir;
  }
  top.read("record_timings", c.record_timings);
  top.read("threads", c.threads);
  top.check(c.threads >= 1, "threads", "must be >= 1");
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("config: parse error at " + detail::position_of(text, e.byte) + ": " + e.what());
  }
  return config_from_json(j);
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

inline Dataset load_dataset(const ExperimentConfig& config) {
  if (const auto* synth = std::get_if<SynthSpec>(&config.data)) return synthesize(*synth);
  const auto& csv = std::get<CsvSource>(config.data);
  return load_csv(csv.path, csv.options);
}

// ---------------------------------------------------------------------------
// Training one algorithm

using TrainedModel = std::variant<Mlp, AmnnModel>;

inline TrainedModel train_algorithm(Algorithm algorithm, const ExperimentConfig& config, const Dataset& train,
                                    std::uint64_t seed, std::vector<EpochRecord>* log = nullptr) {
  const auto sizes = layer_sizes_for(train.dimension(), config.hidden_layers, train.class_count);
  RobustConfig robust = config.robust;
  robust.seed = seed;
  TrainConfig classic = config.classic;
  classic.seed = seed;
  switch (algorithm) {
    case Algorithm::classic_dnn: return train_classic(train, sizes, classic, log);
    case Algorithm::amnn: return train_amnn(train, config.clustering, sizes, classic);
    case Algorithm::robust_dnn: return train_robust(train, sizes, robust, log);
    case Algorithm::dnn_mixup: return train_mixup(train, sizes, robust, log);
    case Algorithm::ce_dnn: return train_cross_entropy(train, sizes, robust, log);
  }
  throw Error("train_algorithm: unknown algorithm");
}

inline std::vector<Label> predict(const TrainedModel& model, const Matrix<double>& features) {
  return std::visit([&](const auto& m) { return predict(m, features); }, model);
}

// ---------------------------------------------------------------------------
// Sweep

struct SweepRow {
  std::string algorithm;
  double noise_rate = 0.0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string message;
  MetricsReport metrics;
  double wall_time = 0.0;  // seconds; kept out of rows.csv so reruns are byte-identical
};

struct SweepCell {
  std::size_t algorithm_index = 0;
  std::size_t rate_index = 0;
  std::size_t seed_index = 0;
};

struct SweepReport {
  std::vector<std::string> algorithms;
  std::vector<double> rates;
  std::vector<SweepRow> rows;
};

struct CellData {
  Dataset train;  // labels possibly corrupted; clean copy in train.clean_labels
  Dataset test;   // always clean
  std::optional<Standardizer> standardizer;
};

inline std::uint64_t split_seed_for(const ExperimentConfig& c, std::uint64_t seed) {
  return derive_seed(c.split_seed, {seed});
}
inline std::uint64_t noise_seed_for(std::uint64_t seed, std::size_t rate_index) {
  return derive_seed(seed, {rate_index});
}
inline std::uint64_t train_seed_for(std::uint64_t seed, std::size_t rate_index, std::size_t algorithm_index) {
  return derive_seed(seed, {rate_index, algorithm_index});
}

// Split (per seed, shared across rates), standardize on the train part, and
// corrupt the train labels only.
inline CellData prepare_cell(const ExperimentConfig& config, const Dataset& full, std::size_t rate_index,
                             std::uint64_t seed) {
  auto [train, test] = split(full, config.test_ratio, split_seed_for(config, seed));
  CellData cell;
  if (config.standardize) {
    auto s = standardize(std::move(train), std::move(test));
    cell.train = std::move(s.train);
    cell.test = std::move(s.test);
    cell.standardizer = std::move(s.transform);
  } else {
    cell.train = std::move(train);
    cell.test = std::move(test);
  }
  apply_noise(cell.train, {config.noise_kind, config.noise_rates.at(rate_index), noise_seed_for(seed, rate_index)});
  require(!cell.test.clean_labels, "sweep: test labels must never be corrupted");
  return cell;
}

inline std::string log_path_for(const std::string& dir, const SweepRow& row, std::size_t rate_index) {
  return dir + "/" + row.algorithm + "_rate" + std::to_string(rate_index) + "_seed" + std::to_string(row.seed) + ".csv";
}

inline SweepRow run_cell(const ExperimentConfig& config, const Dataset& full, const SweepCell& cell) {
  SweepRow row;
  const Algorithm algorithm = config.algorithms.at(cell.algorithm_index);
  row.algorithm = to_string(algorithm);
  row.noise_rate = config.noise_rates.at(cell.rate_index);
  row.seed = config.seeds.at(cell.seed_index);
  const auto started = std::chrono::steady_clock::now();
  try {
    const CellData data = prepare_cell(config, full, cell.rate_index, row.seed);
    require(data.test.size() > 0, "sweep: empty test split (test_ratio too small)");
    std::vector<EpochRecord> log;
    const TrainedModel model =
        train_algorithm(algorithm, config, data.train, train_seed_for(row.seed, cell.rate_index, cell.algorithm_index),
                        config.log_dir ? &log : nullptr);
    row.metrics = evaluate(data.test.labels, predict(model, data.test.features), full.class_count);
    if (config.log_dir && !log.empty()) write_training_log(log, log_path_for(*config.log_dir, row, cell.rate_index));
  } catch (const std::exception& e) {
    row.ok = false;
    row.message = e.what();
    const double nan = std::nan("");
    row.metrics = {nan, nan, nan, nan, nan};
  }
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return row;
}

// Canonical cell order: algorithm, then rate, then seed.
inline std::vector<SweepCell> sweep_cells(const ExperimentConfig& config) {
  std::vector<SweepCell> cells;
  for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
    for (std::size_t r = 0; r < config.noise_rates.size(); ++r) {
      for (std::size_t s = 0; s < config.seeds.size(); ++s) cells.push_back({a, r, s});
    }
  }
  return cells;
}

// `execution_order` (a permutation of cell indices) only changes the order in
// which cells run; rows always come back in canonical order.
inline SweepReport run_sweep(const ExperimentConfig& config, std::span<const std::size_t> execution_order = {}) {
  require(!config.algorithms.empty(), "sweep: no algorithms");
  require(!config.seeds.empty(), "sweep: no seeds");
  require(!config.noise_rates.empty(), "sweep: no noise rates");
  const Dataset full = load_dataset(config);
  validate(full);
  if (config.log_dir) std::filesystem::create_directories(*config.log_dir);

  const auto cells = sweep_cells(config);
  std::vector<std::size_t> order;
  if (execution_order.empty()) {
    order.resize(cells.size());
    std::iota(order.begin(), order.end(), 0);
  } else {
    order.assign(execution_order.begin(), execution_order.end());
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) require(sorted[i] == i, "sweep: execution order is not a permutation");
    require(sorted.size() == cells.size(), "sweep: execution order is not a permutation");
  }

  SweepReport report;
  for (auto a : config.algorithms) report.algorithms.push_back(to_string(a));
  report.rates = config.noise_rates;
  report.rows.resize(cells.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < order.size(); i = next++) {
      report.rows[order[i]] = run_cell(config, full, cells[order[i]]);
    }
  };
  const std::size_t threads = std::min(config.threads, std::max<std::size_t>(1, cells.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return report;
}

// ---------------------------------------------------------------------------
// Reports

struct SummaryCell {
  std::string algorithm;
  double noise_rate = 0.0;
  std::size_t runs = 0;
  std::size_t failed = 0;
  MetricsReport mean;
  MetricsReport stddev;  // sample standard deviation; 0 for a single run
};

inline std::vector<SummaryCell> summarize(const SweepReport& report) {
  std::vector<SummaryCell> out;
  std::map<std::pair<std::string, double>, std::size_t> slot;
  for (const auto& row : report.rows) {
    auto key = std::make_pair(row.algorithm, row.noise_rate);
    auto [it, inserted] = slot.emplace(key, out.size());
    if (inserted) out.push_back({row.algorithm, row.noise_rate, 0, 0, {}, {}});
  }
  auto fields = [](MetricsReport& m) {
    return std::array<double*, 5>{&m.accuracy, &m.weighted_precision, &m.weighted_recall, &m.weighted_f1, &m.kappa};
  };
  for (auto& cell : out) {
    std::vector<MetricsReport> ok;
    for (const auto& row : report.rows) {
      if (row.algorithm != cell.algorithm || row.noise_rate != cell.noise_rate) continue;
      if (row.ok) {
        ok.push_back(row.metrics);
      } else {
        ++cell.failed;
      }
    }
    cell.runs = ok.size();
    auto mean = fields(cell.mean);
    auto sd = fields(cell.stddev);
    for (std::size_t f = 0; f < 5; ++f) {
      if (ok.empty()) {
        *mean[f] = std::nan("");
        *sd[f] = std::nan("");
        continue;
      }
      double sum = 0.0;
      for (auto& m : ok) sum += *fields(m)[f];
      const double mu = sum / static_cast<double>(ok.size());
      double sq = 0.0;
      for (auto& m : ok) sq += (*fields(m)[f] - mu) * (*fields(m)[f] - mu);
      *mean[f] = mu;
      *sd[f] = ok.size() > 1 ? std::sqrt(sq / static_cast<double>(ok.size() - 1)) : 0.0;
    }
  }
  return out;
}

inline const char* rows_csv_header() {
  return "algorithm,noise_rate,seed,status,accuracy,weighted_precision,weighted_recall,weighted_f1,kappa,message";
}

inline std::string sanitize_message(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return s;
}

inline std::string to_csv_row(const SweepRow& row) {
  return row.algorithm + ',' + format_double(row.noise_rate) + ',' + std::to_string(row.seed) + ',' +
         (row.ok ? "ok" : "failed") + ',' + to_csv_row(row.metrics) + ',' + sanitize_message(row.message);
}

inline std::string format_percent(double fraction) {
  if (std::isnan(fraction)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
  return buf;
}

inline std::string format_rate_label(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", rate * 100.0);
  return buf;
}

inline std::string summary_markdown(const SweepReport& report) {
  const auto cells = summarize(report);
  std::ostringstream md;
  md << "| Algorithm |";
  for (double r : report.rates) md << ' ' << format_rate_label(r) << " |";
  md << "\n|---|";
  for (std::size_t i = 0; i < report.rates.size(); ++i) md << "---|";
  md << '\n';
  if (report.rows.empty()) return md.str();
  for (const auto& alg : report.algorithms) {
    md << "| " << alg << " |";
    for (double r : report.rates) {
      std::string value = "n/a";
      for (const auto& c : cells) {
        if (c.algorithm == alg && c.noise_rate == r) value = format_percent(c.mean.accuracy);
      }
      md << ' ' << value << " |";
    }
    md << '\n';
  }
  return md.str();
}

namespace detail {
inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "emit_report: cannot write '" + path.string() + "'");
  out << content;
  require(out.good(), "emit_report: write failed for '" + path.string() + "'");
}
}  // namespace detail

// Writes rows.csv, summary.csv and summary.md (plus timings.csv when asked).
inline std::vector<std::filesystem::path> emit_report(const SweepReport& report, const std::string& out_dir,
                                                      bool with_timings = false) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  require(!ec && std::filesystem::is_directory(out_dir), "emit_report: cannot create directory '" + out_dir + "'");
  const std::filesystem::path dir(out_dir);
  std::vector<std::filesystem::path> written;

  std::string rows = std::string(rows_csv_header()) + '\n';
  for (const auto& row : report.rows) rows += to_csv_row(row) + '\n';
  detail::write_file(dir / "rows.csv", rows);
  written.push_back(dir / "rows.csv");

  std::string summary =
      "algorithm,noise_rate,runs,failed,accuracy_mean,accuracy_std,weighted_precision_mean,weighted_precision_std,"
      "weighted_recall_mean,weighted_recall_std,weighted_f1_mean,weighted_f1_std,kappa_mean,kappa_std\n";
  for (const auto& c : summarize(report)) {
    summary += c.algorithm + ',' + format_double(c.noise_rate) + ',' + std::to_string(c.runs) + ',' +
               std::to_string(c.failed);
    const std::array<std::pair<double, double>, 5> pairs{{{c.mean.accuracy, c.stddev.accuracy},
                                                          {c.mean.weighted_precision, c.stddev.weighted_precision},
                                                          {c.mean.weighted_recall, c.stddev.weighted_recall},
                                                          {c.mean.weighted_f1, c.stddev.weighted_f1},
                                                          {c.mean.kappa, c.stddev.kappa}}};
    for (const auto& [m, s] : pairs) summary += ',' + format_double(m) + ',' + format_double(s);
    summary += '\n';
  }
  detail::write_file(dir / "summary.csv", summary);
  written.push_back(dir / "summary.csv");

  detail::write_file(dir / "summary.md", summary_markdown(report));
  written.push_back(dir / "summary.md");

  if (with_timings) {
    std::string timings = "algorithm,noise_rate,seed,wall_time_seconds\n";
    for (const auto& row : report.rows) {
      timings += row.algorithm + ',' + format_double(row.noise_rate) + ',' + std::to_string(row.seed) + ',' +
                 format_double(row.wall_time) + '\n';
    }
    detail::write_file(dir / "timings.csv", timings);
    written.push_back(dir / "timings.csv");
  }
  return written;
}

inline std::vector<SweepRow> parse_rows_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "parse_rows_csv: cannot open '" + path + "'");
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == rows_csv_header(), "parse_rows_csv: bad header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (int field = 0; field < 9; ++field) {
      const auto comma = line.find(',', start);
      require(comma != std::string::npos, "parse_rows_csv: short row '" + line + "'");
      cells.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    cells.push_back(line.substr(start));
    SweepRow row;
    row.algorithm = cells[0];
    row.noise_rate = parse_double(cells[1]);
    row.seed = std::stoull(cells[2]);
    require(cells[3] == "ok" || cells[3] == "failed", "parse_rows_csv: bad status '" + cells[3] + "'");
    row.ok = cells[3] == "ok";
    row.metrics = {parse_double(cells[4]), parse_double(cells[5]), parse_double(cells[6]), parse_double(cells[7]),
                   parse_double(cells[8])};
    row.message = cells[9];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace amnn

#endif
