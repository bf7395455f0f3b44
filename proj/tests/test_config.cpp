#include <gtest/gtest.h>

#include "hcm/config.hpp"
#include "hcm/error.hpp"

namespace {

using nlohmann::json;

std::string config_error_field(const json& doc) {
  try {
    hcm::config_from_json(doc);
  } catch (const hcm::ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

TEST(Defaults, EveryExperimentValidates) {
  for (const auto& name : hcm::experiment_names()) {
    const auto c = hcm::default_config(name);
    EXPECT_EQ(c.experiment, name);
    EXPECT_NO_THROW(hcm::validate(c)) << name;
  }
  try {
    hcm::default_config("cifar");
    FAIL();
  } catch (const hcm::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("two-moons"), std::string::npos) << e.what();
  }
}

TEST(Json, RoundTripThroughDocument) {
  for (const auto& name : hcm::experiment_names()) {
    const auto c = hcm::default_config(name);
    const auto doc = hcm::to_json(c);
    const auto back = hcm::config_from_json(doc);
    EXPECT_EQ(hcm::to_json(back), doc) << name;
  }
}

TEST(Json, OverlaysOnlyGivenFields) {
  const auto c = hcm::config_from_json(
      json::parse(R"({"experiment": "toy1d", "seed": 7, "training": {"epochs": 3}})"));
  const auto d = hcm::default_config("toy1d");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.training.epochs, 3);
  EXPECT_EQ(c.training.batch_size, d.training.batch_size);
  EXPECT_EQ(c.network.hidden, d.network.hidden);
}

TEST(Json, UnknownKeysAndBadTypesNameTheField) {
  EXPECT_EQ(config_error_field(json::parse(R"({"experiment": "toy1d", "sede": 1})")), "sede");
  EXPECT_EQ(config_error_field(json::parse(R"({"experiment": "toy1d", "training": {"epoch": 1}})")),
            "training.epoch");
  EXPECT_EQ(config_error_field(json::parse(R"({"experiment": "toy1d", "training": {"epochs": "5"}})")),
            "training.epochs");
  EXPECT_EQ(config_error_field(json::parse(R"({"experiment": "toy1d", "training": {"epochs": 1.5}})")),
            "training.epochs");
  EXPECT_EQ(config_error_field(
                json::parse(R"({"experiment": "blob-ood", "data": {"blobs": {"gap": 1}}})")),
            "data.blobs.gap");
  EXPECT_EQ(config_error_field(json::parse(R"({"experiment": "toy1d", "mixup": {"mode": "cutmix"}})")),
            "mixup.mode");
  EXPECT_EQ(config_error_field(json::parse(R"({"training": {"epochs": 1}})")), "experiment");
  EXPECT_EQ(config_error_field(json::parse(R"([1, 2])")), "");
}

TEST(Json, ValidationRejectsOutOfDomainValues) {
  EXPECT_EQ(config_error_field(json::parse(R"({"experiment": "toy1d", "optimizer": {"lr": 0}})")),
            "optimizer.lr");
  EXPECT_EQ(config_error_field(json::parse(R"({"experiment": "toy1d", "network": {"hidden": []}})")),
            "network.hidden");
  EXPECT_EQ(config_error_field(
                json::parse(R"({"experiment": "toy1d", "calibration": {"threshold_value": 1.5}})")),
            "calibration.threshold_value");
  EXPECT_EQ(config_error_field(json::parse(R"({"experiment": "lambda-sweep", "lambdas": [-1]})")),
            "lambdas");
  EXPECT_EQ(config_error_field(json::parse(R"({"experiment": "toy1d", "loss": {"lambda_norm": -1}})")),
            "loss");
}

TEST(Json, ExperimentArgumentMustAgreeWithDocument) {
  const auto doc = json::parse(R"({"experiment": "toy1d"})");
  EXPECT_NO_THROW(hcm::config_from_json(doc, "toy1d"));
  EXPECT_THROW(hcm::config_from_json(doc, "two-moons"), hcm::ConfigError);
  EXPECT_EQ(hcm::config_from_json(json::object(), "noise-shift").experiment, "noise-shift");
}

TEST(Build, NetworkShapeFollowsConfig) {
  auto c = hcm::default_config("two-moons");
  c.network.hidden = {5, 7};
  const auto p = hcm::build_network(c, 2, 3);
  ASSERT_EQ(p.layers.size(), 3u);
  EXPECT_EQ(p.layers[0].weight.rows(), 5);
  EXPECT_EQ(p.layers[2].weight.rows(), 3);
  EXPECT_FALSE(hcm::mixup_mode(c.mixup).has_value());
  c.mixup.mode = hcm::MixupKind::kDirichlet;
  EXPECT_TRUE(std::holds_alternative<hcm::data::DirichletMixup>(*hcm::mixup_mode(c.mixup)));
}

}  // namespace
