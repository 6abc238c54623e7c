#ifndef AMNN_MODEL_IO_HPP
#define AMNN_MODEL_IO_HPP

// Versioned JSON model documents.
//
//   {"format": "amnn-model", "version": 1, "kind": "mlp" | "amnn",
//    "network": {...}                      (kind mlp)
//    "centers": [[...]], "denom": d,
//    "subnets": [{...}, ...]               (kind amnn)
//    "standardizer": {"means": [...], "stddevs": [...]}   optional
//    "label_names": [...]}                                optional
//
// A network object holds "layer_sizes", "hidden_activation",
// "output_activation" and "parameters": the flat parameter array (per layer,
// row-major fan_in x fan_out weights then biases). Doubles are written in
// shortest round-trip form, so reading a document back is bit-exact.

#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "amnn/core.hpp"
#include "amnn/data.hpp"
#include "amnn/network.hpp"
#include "json.hpp"

namespace amnn {

inline constexpr int kModelFormatVersion = 1;

struct ModelDocument {
  std::variant<Mlp, AmnnModel> model;
  std::optional<Standardizer> standardizer;
  std::vector<std::string> label_names;

  std::size_t inputs() const {
    if (const auto* m = std::get_if<Mlp>(&model)) return m->inputs();
    return std::get<AmnnModel>(model).centers.cols();
  }

  std::vector<Label> predict(Matrix<double> features) const {
    if (standardizer) features = standardizer->apply(std::move(features));
    return std::visit([&](const auto& m) { return amnn::predict(m, features); }, model);
  }
};

namespace detail {

inline nlohmann::json network_to_json(const Mlp& net) {
  return {{"layer_sizes", net.layer_sizes()},
          {"hidden_activation", to_string(net.hidden_activation())},
          {"output_activation", to_string(net.output_activation())},
          {"parameters", std::vector<double>(net.parameters().begin(), net.parameters().end())}};
}

inline Mlp network_from_json(const nlohmann::json& j) {
  Mlp net(j.at("layer_sizes").get<std::vector<std::size_t>>(),
          parse_activation(j.at("hidden_activation").get<std::string>()),
          parse_activation(j.at("output_activation").get<std::string>()));
  const auto params = j.at("parameters").get<std::vector<double>>();
  require(params.size() == net.parameter_count(), "model: parameter count does not match layer sizes");
  std::copy(params.begin(), params.end(), net.parameters().begin());
  return net;
}

}  // namespace detail

inline nlohmann::json to_json(const ModelDocument& doc) {
  nlohmann::json j{{"format", "amnn-model"}, {"version", kModelFormatVersion}};
  if (const auto* net = std::get_if<Mlp>(&doc.model)) {
    j["kind"] = "mlp";
    j["network"] = detail::network_to_json(*net);
  } else {
    const auto& m = std::get<AmnnModel>(doc.model);
    j["kind"] = "amnn";
    nlohmann::json centers = nlohmann::json::array();
    for (std::size_t r = 0; r < m.centers.rows(); ++r) {
      centers.push_back(std::vector<double>(m.centers.row(r).begin(), m.centers.row(r).end()));
    }
    j["centers"] = std::move(centers);
    j["denom"] = m.denom;
    nlohmann::json subnets = nlohmann::json::array();
    for (const auto& s : m.subnets) subnets.push_back(detail::network_to_json(s));
    j["subnets"] = std::move(subnets);
  }
  if (doc.standardizer) {
    j["standardizer"] = {{"means", doc.standardizer->means}, {"stddevs", doc.standardizer->stddevs}};
  }
  if (!doc.label_names.empty()) j["label_names"] = doc.label_names;
  return j;
}

inline ModelDocument model_from_json(const nlohmann::json& j) {
  try {
    require(j.at("format").get<std::string>() == "amnn-model", "model: not an amnn-model document");
    const int version = j.at("version").get<int>();
    require(version == kModelFormatVersion, "model: unsupported version " + std::to_string(version));
    ModelDocument doc;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "mlp") {
      doc.model = detail::network_from_json(j.at("network"));
    } else if (kind == "amnn") {
      AmnnModel m;
      const auto rows = j.at("centers").get<std::vector<std::vector<double>>>();
      require(!rows.empty(), "model: amnn document has no centers");
      m.centers = Matrix<double>(rows.size(), rows.front().size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        require(rows[r].size() == m.centers.cols(), "model: ragged center coordinates");
        std::copy(rows[r].begin(), rows[r].end(), m.centers.row(r).begin());
      }
      m.denom = j.at("denom").get<double>();
      for (const auto& s : j.at("subnets")) m.subnets.push_back(detail::network_from_json(s));
      require(m.subnets.size() == rows.size(), "model: subnet count does not match center count");
      doc.model = std::move(m);
    } else {
      throw Error("model: unknown kind '" + kind + "'");
    }
    if (j.contains("standardizer")) {
      Standardizer s;
      s.means = j["standardizer"].at("means").get<std::vector<double>>();
      s.stddevs = j["standardizer"].at("stddevs").get<std::vector<double>>();
      require(s.means.size() == s.stddevs.size(), "model: standardizer length mismatch");
      doc.standardizer = std::move(s);
    }
    if (j.contains("label_names")) doc.label_names = j["label_names"].get<std::vector<std::string>>();
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("model: malformed document: ") + e.what());
  }
}

inline void save_model(const ModelDocument& doc, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "save_model: cannot open '" + path + "'");
  out << to_json(doc).dump(1) << '\n';
  require(out.good(), "save_model: write failed for '" + path + "'");
}

inline ModelDocument load_model(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "load_model: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("load_model: " + std::string(e.what()));
  }
  return model_from_json(j);
}

}  // namespace amnn

#endif
