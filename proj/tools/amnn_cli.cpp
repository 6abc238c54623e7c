// amnn: command-line front end.
//
//   amnn synth    --config c.json [--seed N] [--out DIR]
//   amnn cluster  --config c.json [--seed N] [--out DIR]
//   amnn train    --config c.json [--seed N] [--noise-rate R] [--out DIR]
//   amnn evaluate --config c.json --model m.json [--data file.csv] [--seed N]
//   amnn sweep    --config c.json [--seed N] [--out DIR]
//
// Failures print one JSON object {"error": ..., "command": ...} on stderr
// and exit with status 1 (2 for command-line usage errors).

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "amnn/amnn.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace amnn;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> noise_rate;
  std::string model;
  std::optional<std::string> data;
};

void fail(const std::string& command, const std::string& message) {
  std::cerr << nlohmann::json{{"error", message}, {"command", command}}.dump() << '\n';
}

ExperimentConfig load_config(const Options& o) {
  ExperimentConfig c = parse_config(o.config);
  if (o.out) c.output_dir = *o.out;
  return c;
}

// --seed on the data-producing commands reseeds the synthetic generator.
void reseed_data(ExperimentConfig& c, const Options& o) {
  if (!o.seed) return;
  if (auto* synth = std::get_if<SynthSpec>(&c.data)) synth->seed = *o.seed;
}

fs::path output_dir(const ExperimentConfig& c) {
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  require(!ec, "cannot create output directory '" + c.output_dir + "'");
  return c.output_dir;
}

int run_synth(const Options& o) {
  ExperimentConfig c = load_config(o);
  require(std::holds_alternative<SynthSpec>(c.data), "synth requires a data.synth section");
  reseed_data(c, o);
  const Dataset ds = load_dataset(c);
  const auto path = output_dir(c) / "data.csv";
  write_csv(ds, path.string());
  std::cout << path.string() << '\n';
  return 0;
}

int run_cluster(const Options& o) {
  ExperimentConfig c = load_config(o);
  reseed_data(c, o);
  Dataset ds = load_dataset(c);
  validate(ds);
  if (c.standardize) ds.features = Standardizer::fit(ds.features).apply(ds.features);
  const DensityPeaks peaks = cluster_density_peaks(ds.features, c.clustering.centers);
  const fs::path dir = output_dir(c);
  write_decision_graph(peaks.profile, peaks.model.centers, (dir / "decision_graph.csv").string());
  std::ofstream out(dir / "assignments.csv");
  out << "index,cluster,label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) out << i << ',' << peaks.model.assignments[i] << ',' << ds.labels[i] << '\n';
  require(out.good(), "cannot write assignments.csv");
  nlohmann::json summary{{"centers", peaks.model.centers},
                         {"cutoff", *peaks.distances.cutoff},
                         {"adjusted_rand", adjusted_rand(peaks.model.assignments, ds.labels)}};
  std::cout << summary.dump() << '\n';
  return 0;
}

int run_train(const Options& o) {
  ExperimentConfig c = load_config(o);
  if (c.algorithms.size() != 1) throw Error("train expects exactly one algorithm");
  const std::uint64_t seed = o.seed.value_or(c.seeds.front());
  c.noise_rates = {o.noise_rate.value_or(0.0)};
  require(c.noise_rates[0] >= 0.0 && c.noise_rates[0] <= 1.0, "--noise-rate must be in [0, 1]");
  const Dataset full = load_dataset(c);
  validate(full);
  const CellData cell = prepare_cell(c, full, 0, seed);
  const fs::path dir = output_dir(c);
  std::vector<EpochRecord> log;
  const TrainedModel model = train_algorithm(c.algorithms[0], c, cell.train, train_seed_for(seed, 0, 0), &log);
  if (!log.empty()) write_training_log(log, (dir / "training_log.csv").string());

  ModelDocument doc;
  std::visit([&](const auto& m) { doc.model = m; }, model);
  doc.standardizer = cell.standardizer;
  doc.label_names = full.label_names;
  save_model(doc, (dir / "model.json").string());

  std::cout << metrics_csv_header() << '\n';
  if (cell.test.size() > 0) {
    std::cout << to_csv_row(evaluate(cell.test.labels, predict(model, cell.test.features), full.class_count)) << '\n';
  }
  return 0;
}

int run_evaluate(const Options& o) {
  ExperimentConfig c = load_config(o);
  if (o.data) c.data = CsvSource{*o.data, {}};
  reseed_data(c, o);
  const ModelDocument doc = load_model(o.model);
  const Dataset ds = load_dataset(c);
  validate(ds);
  require(ds.dimension() == doc.inputs(), "evaluate: data has " + std::to_string(ds.dimension()) +
                                              " features, model expects " + std::to_string(doc.inputs()));
  std::size_t classes = ds.class_count;
  if (const auto* net = std::get_if<Mlp>(&doc.model)) classes = std::max(classes, net->outputs());
  else classes = std::max(classes, std::get<AmnnModel>(doc.model).subnets.front().outputs());
  std::cout << metrics_csv_header() << '\n' << to_csv_row(evaluate(ds.labels, doc.predict(ds.features), classes)) << '\n';
  return 0;
}

int run_sweep_command(const Options& o) {
  ExperimentConfig c = load_config(o);
  if (o.seed) c.seeds = {*o.seed};
  const SweepReport report = run_sweep(c);
  for (const auto& p : emit_report(report, c.output_dir, c.record_timings)) std::cout << p.string() << '\n';
  std::size_t failed = 0;
  for (const auto& r : report.rows) failed += !r.ok;
  if (failed) std::cerr << failed << " of " << report.rows.size() << " runs failed; see rows.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-noise robust tabular classification toolkit"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON experiment config")->required();
    sub->add_option("--seed", o.seed, "seed override");
    sub->add_option("--out", o.out, "output directory (overrides output_dir)");
  };
  auto* synth = app.add_subcommand("synth", "write the synthetic dataset as CSV");
  common(synth);
  auto* cluster = app.add_subcommand("cluster", "density-peak clustering with decision graph dump");
  common(cluster);
  auto* train = app.add_subcommand("train", "train one algorithm and save the model");
  common(train);
  train->add_option("--noise-rate", o.noise_rate, "train-label noise rate (default 0)");
  auto* eval = app.add_subcommand("evaluate", "evaluate a saved model");
  common(eval);
  eval->add_option("--model", o.model, "model JSON written by train")->required();
  eval->add_option("--data", o.data, "CSV file to evaluate on (overrides the config data source)");
  auto* sweep = app.add_subcommand("sweep", "noise sweep over algorithms, rates and seeds");
  common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("usage", e.what());
    return 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "synth") return run_synth(o);
    if (name == "cluster") return run_cluster(o);
    if (name == "train") return run_train(o);
    if (name == "evaluate") return run_evaluate(o);
    return run_sweep_command(o);
  } catch (const std::exception& e) {
    fail(name, e.what());
    return 1;
  }
}
