#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "amnn/model_io.hpp"
#include "oracles.hpp"

namespace amnn {
namespace {

Mlp awkward_net() {
  std::mt19937_64 rng(13);
  Mlp net({3, 4, 2}, Activation::elu, Activation::softmax);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& p : net.parameters()) p = u(rng) / 3.0;
  net.parameters()[0] = 5e-324;
  net.parameters()[1] = -1.7976931348623157e308;
  net.parameters()[2] = 0.1;
  return net;
}

TEST(ModelIo, MlpRoundTripIsBitExact) {
  ModelDocument doc{awkward_net(), Standardizer{{0.5, 1.0 / 3.0, -2.0}, {1.0, 0.25, 7.0}}, {"a", "b"}};
  const std::string path = ::testing::TempDir() + "amnn_mlp.json";
  save_model(doc, path);
  const ModelDocument back = load_model(path);
  EXPECT_EQ(std::get<Mlp>(back.model), std::get<Mlp>(doc.model));
  ASSERT_TRUE(back.standardizer);
  EXPECT_EQ(back.standardizer->means, doc.standardizer->means);
  EXPECT_EQ(back.standardizer->stddevs, doc.standardizer->stddevs);
  EXPECT_EQ(back.label_names, doc.label_names);
  EXPECT_EQ(to_json(back).dump(), to_json(doc).dump());
}

TEST(ModelIo, AmnnRoundTripIsBitExact) {
  const Dataset ds = synthesize(SynthSpec::uniform(3, 30, 2, 10.0, 1.0, 1));
  AmnnConfig cfg;
  cfg.centers = CenterPolicy::fixed(3);
  cfg.denom = 0.07;
  ModelDocument doc{train_amnn(ds, cfg, {2, 3, 3}, TrainConfig{}), std::nullopt, {}};
  const ModelDocument back = model_from_json(nlohmann::json::parse(to_json(doc).dump()));
  EXPECT_EQ(std::get<AmnnModel>(back.model), std::get<AmnnModel>(doc.model));
  EXPECT_FALSE(back.standardizer);
  EXPECT_EQ(back.predict(ds.features), doc.predict(ds.features));
  EXPECT_EQ(back.inputs(), 2u);
}

TEST(ModelIo, DocumentShape) {
  const auto j = to_json(ModelDocument{awkward_net(), std::nullopt, {}});
  EXPECT_EQ(j.at("format"), "amnn-model");
  EXPECT_EQ(j.at("version"), 1);
  EXPECT_EQ(j.at("kind"), "mlp");
  EXPECT_EQ(j.at("network").at("hidden_activation"), "elu");
  EXPECT_EQ(j.at("network").at("parameters").size(), awkward_net().parameter_count());
}

TEST(ModelIo, RejectsMalformedDocuments) {
  auto j = to_json(ModelDocument{awkward_net(), std::nullopt, {}});
  auto wrong_version = j;
  wrong_version["version"] = 2;
  EXPECT_THROW(model_from_json(wrong_version), Error);
  auto short_params = j;
  short_params["network"]["parameters"].erase(0);
  EXPECT_THROW(model_from_json(short_params), Error);
  auto no_kind = j;
  no_kind.erase("kind");
  EXPECT_THROW(model_from_json(no_kind), Error);
  EXPECT_THROW(load_model(::testing::TempDir() + "does_not_exist.json"), Error);
  const std::string garbage = ::testing::TempDir() + "amnn_garbage.json";
  std::ofstream(garbage) << "{not json";
  EXPECT_THROW(load_model(garbage), Error);
}

TEST(ModelIo, PredictAppliesStandardizer) {
  Mlp net({1, 2}, Activation::logistic, Activation::logistic);
  net.weight(0, 0, 0) = 1.0;
  net.weight(0, 0, 1) = -1.0;
  const ModelDocument doc{net, Standardizer{{10.0}, {1.0}}, {}};
  EXPECT_EQ(doc.predict(Matrix<double>{{11.0}, {9.0}}), (std::vector<Label>{0, 1}));
}

}  // namespace
}  // namespace amnn
