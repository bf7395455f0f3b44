#include "hcm/config.hpp"

#include <algorithm>
#include <set>

#include "hcm/error.hpp"
#include "hcm/random.hpp"

namespace hcm {
namespace {

using nlohmann::json;

// Reads keys from one JSON object and rejects anything it was not asked for.
class StrictObject {
 public:
  StrictObject(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(path_, "expected an object");
  }

  template <typename T>
  void read(const char* key, T& into) {
    seen_.insert(key);
    const auto it = doc_.find(key);
    if (it == doc_.end()) return;
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) throw ConfigError(field(key), "expected a number");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw ConfigError(field(key), "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (it->is_number_integer() && !it->is_number_unsigned())
            throw ConfigError(field(key), "expected a non-negative integer");
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw ConfigError(field(key), "expected a string");
      }
      into = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(field(key), e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : doc_.items())
      if (!seen_.count(k)) throw ConfigError(field(k.c_str()), "unknown key");
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename E>
E parse_enum(StrictObject& obj, const char* key, E current,
             std::initializer_list<std::pair<const char*, E>> table) {
  std::string text;
  for (const auto& [name, value] : table)
    if (value == current) text = name;
  obj.read(key, text);
  std::string valid;
  for (const auto& [name, value] : table) {
    if (text == name) return value;
    valid += valid.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(obj.field(key), "unknown value '" + text + "' (expected " + valid + ")");
}

template <typename E>
const char* enum_name(E value, std::initializer_list<std::pair<const char*, E>> table) {
  for (const auto& [name, v] : table)
    if (v == value) return name;
  return "";
}

constexpr std::initializer_list<std::pair<const char*, nn::ActivationKind>> kActivations = {
    {"relu", nn::ActivationKind::kReLU},
    {"leaky_relu", nn::ActivationKind::kLeakyReLU},
    {"identity", nn::ActivationKind::kIdentity}};
constexpr std::initializer_list<std::pair<const char*, Normalization>> kNormalizers = {
    {"minmax", Normalization::kMinMax}, {"quantile", Normalization::kQuantile}};
constexpr std::initializer_list<std::pair<const char*, ThresholdKind>> kThresholds = {
    {"tolerance", ThresholdKind::kTolerance}, {"quantile", ThresholdKind::kQuantile}};
constexpr std::initializer_list<std::pair<const char*, MixupKind>> kMixups = {
    {"none", MixupKind::kNone},
    {"pairwise", MixupKind::kPairwise},
    {"dirichlet", MixupKind::kDirichlet}};
constexpr std::initializer_list<std::pair<const char*, Objective>> kObjectives = {
    {"decomposed", Objective::kDecomposed}, {"exact_primal", Objective::kExactPrimal}};

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"toy1d", "two-moons", "noise-shift", "blob-ood",
                                              "lambda-sweep"};
  return names;
}

RunConfig default_config(std::string_view experiment) {
  RunConfig c;
  c.experiment = std::string(experiment);
  if (experiment == "toy1d") {
    c.network.hidden = {64, 64};
    c.training = {400, 64};
    c.optimizer.lr = 3e-3;
    c.optimizer.milestones = {250, 350};
    c.data.n = 3000;
    c.data.target_scale = 1.0 / 32.0;
    c.data.grid_points = 601;
  } else if (experiment == "two-moons") {
    // A wide, briefly trained single layer keeps the class transition
    // smooth; deeper, fully converged fits give a near-binary u.
    c.network.hidden = {64};
    c.training = {60, 32};
    c.data.n = 1000;
    c.data.noise_std = 0.18;
  } else if (experiment == "noise-shift" || experiment == "lambda-sweep") {
    c.network.hidden = {64, 64};
    c.training = {300, 64};
    c.data.n = 3000;
    c.data.noise_std = 0.05;
    c.data.input_width = 4;
    c.data.target_width = 3;
    c.data.a_max = 1.0;
    c.data.n_test = 2000;
    if (experiment == "lambda-sweep") c.training.epochs = 150;
  } else if (experiment == "blob-ood") {
    c.network.hidden = {32, 32};
    c.training = {200, 64};
    c.data.n = 800;
    // Clusters 6 stds apart in a plane; the OOD cluster sits above it.
    c.data.input_width = 3;
    c.data.blobs.spacing = 6.0;
    c.data.blobs.ood_height = 6.0;
    c.data.n_test = 400;
    c.data.n_ood = 400;
    c.mixup = {MixupKind::kNone, 0.2, 20};
  } else {
    std::string valid;
    for (const auto& n : experiment_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("experiment",
                      "unknown experiment '" + std::string(experiment) + "' (valid: " + valid + ")");
  }
  return c;
}

RunConfig config_from_json(const json& doc, std::optional<std::string_view> experiment) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  std::string name = experiment ? std::string(*experiment) : std::string();
  if (const auto it = doc.find("experiment"); it != doc.end()) {
    if (!it->is_string()) throw ConfigError("experiment", "expected a string");
    const auto in_doc = it->get<std::string>();
    if (experiment && in_doc != *experiment)
      throw ConfigError("experiment", "config names '" + in_doc + "' but '" +
                                          std::string(*experiment) + "' was requested");
    name = in_doc;
  }
  if (name.empty()) throw ConfigError("experiment", "missing experiment name");
  RunConfig c = default_config(name);

  StrictObject root(doc, "");
  std::string ignored;
  root.read("experiment", ignored);
  root.read("seed", c.seed);
  if (const auto* n = root.child("network")) {
    StrictObject o(*n, "network");
    o.read("hidden", c.network.hidden);
    c.network.activation = parse_enum(o, "activation", c.network.activation, kActivations);
    o.read("leaky_slope", c.network.leaky_slope);
    o.finish();
  }
  if (const auto* l = root.child("loss")) {
    StrictObject o(*l, "loss");
    if (const auto* p = o.child("phi_d")) c.loss.phi_d = phi_from_json(*p, "loss.phi_d");
    if (const auto* p = o.child("phi_r")) c.loss.phi_r = phi_from_json(*p, "loss.phi_r");
    if (const auto* p = o.child("phi_norm")) c.loss.phi_norm = phi_from_json(*p, "loss.phi_norm");
    o.read("lambda_norm", c.loss.lambda_norm);
    c.objective = parse_enum(o, "objective", c.objective, kObjectives);
    o.finish();
  }
  if (const auto* p = root.child("optimizer")) {
    StrictObject o(*p, "optimizer");
    std::string kind = c.optimizer.adam ? "adam" : "sgd";
    o.read("kind", kind);
    if (kind != "adam" && kind != "sgd")
      throw ConfigError("optimizer.kind", "unknown value '" + kind + "' (expected adam, sgd)");
    c.optimizer.adam = kind == "adam";
    o.read("lr", c.optimizer.lr);
    o.read("beta1", c.optimizer.beta1);
    o.read("beta2", c.optimizer.beta2);
    o.read("eps", c.optimizer.eps);
    o.read("milestones", c.optimizer.milestones);
    o.read("gamma", c.optimizer.gamma);
    o.finish();
  }
  if (const auto* t = root.child("training")) {
    StrictObject o(*t, "training");
    o.read("epochs", c.training.epochs);
    o.read("batch_size", c.training.batch_size);
    o.finish();
  }
  if (const auto* d = root.child("data")) {
    StrictObject o(*d, "data");
    o.read("path", c.data.path);
    o.read("n", c.data.n);
    o.read("noise_std", c.data.noise_std);
    o.read("input_width", c.data.input_width);
    o.read("target_width", c.data.target_width);
    o.read("val_fraction", c.data.val_fraction);
    o.read("test_fraction", c.data.test_fraction);
    o.read("a_max", c.data.a_max);
    o.read("n_test", c.data.n_test);
    o.read("n_ood", c.data.n_ood);
    o.read("target_scale", c.data.target_scale);
    o.read("grid_points", c.data.grid_points);
    if (const auto* b = o.child("blobs")) {
      StrictObject bo(*b, "data.blobs");
      bo.read("classes", c.data.blobs.classes);
      bo.read("cluster_std", c.data.blobs.cluster_std);
      bo.read("spacing", c.data.blobs.spacing);
      bo.read("ood_height", c.data.blobs.ood_height);
      bo.read("ood_std", c.data.blobs.ood_std);
      bo.finish();
    }
    o.finish();
  }
  if (const auto* cal = root.child("calibration")) {
    StrictObject o(*cal, "calibration");
    c.calibration.normalizer = parse_enum(o, "normalizer", c.calibration.normalizer, kNormalizers);
    o.read("bins", c.calibration.bins);
    c.calibration.threshold = parse_enum(o, "threshold", c.calibration.threshold, kThresholds);
    o.read("threshold_value", c.calibration.threshold_value);
    o.finish();
  }
  if (const auto* m = root.child("mixup")) {
    StrictObject o(*m, "mixup");
    c.mixup.mode = parse_enum(o, "mode", c.mixup.mode, kMixups);
    o.read("alpha", c.mixup.alpha);
    o.read("k", c.mixup.k);
    o.finish();
  }
  root.read("lambdas", c.lambdas);
  root.finish();
  validate(c);
  return c;
}

json to_json(const RunConfig& c) {
  return json{
      {"experiment", c.experiment},
      {"seed", c.seed},
      {"network",
       {{"hidden", c.network.hidden},
        {"activation", enum_name(c.network.activation, kActivations)},
        {"leaky_slope", c.network.leaky_slope}}},
      {"loss",
       {{"phi_d", to_json(c.loss.phi_d)},
        {"phi_r", to_json(c.loss.phi_r)},
        {"phi_norm", to_json(c.loss.phi_norm)},
        {"lambda_norm", c.loss.lambda_norm},
        {"objective", enum_name(c.objective, kObjectives)}}},
      {"optimizer",
       {{"kind", c.optimizer.adam ? "adam" : "sgd"},
        {"lr", c.optimizer.lr},
        {"beta1", c.optimizer.beta1},
        {"beta2", c.optimizer.beta2},
        {"eps", c.optimizer.eps},
        {"milestones", c.optimizer.milestones},
        {"gamma", c.optimizer.gamma}}},
      {"training", {{"epochs", c.training.epochs}, {"batch_size", c.training.batch_size}}},
      {"data",
       {{"path", c.data.path},
        {"n", c.data.n},
        {"noise_std", c.data.noise_std},
        {"input_width", c.data.input_width},
        {"target_width", c.data.target_width},
        {"val_fraction", c.data.val_fraction},
        {"test_fraction", c.data.test_fraction},
        {"a_max", c.data.a_max},
        {"n_test", c.data.n_test},
        {"n_ood", c.data.n_ood},
        {"target_scale", c.data.target_scale},
        {"grid_points", c.data.grid_points},
        {"blobs",
         {{"classes", c.data.blobs.classes},
          {"cluster_std", c.data.blobs.cluster_std},
          {"spacing", c.data.blobs.spacing},
          {"ood_height", c.data.blobs.ood_height},
          {"ood_std", c.data.blobs.ood_std}}}}},
      {"calibration",
       {{"normalizer", enum_name(c.calibration.normalizer, kNormalizers)},
        {"bins", c.calibration.bins},
        {"threshold", enum_name(c.calibration.threshold, kThresholds)},
        {"threshold_value", c.calibration.threshold_value}}},
      {"mixup",
       {{"mode", enum_name(c.mixup.mode, kMixups)}, {"alpha", c.mixup.alpha}, {"k", c.mixup.k}}},
      {"lambdas", c.lambdas}};
}

void validate(const RunConfig& c) {
  if (c.network.hidden.empty()) throw ConfigError("network.hidden", "need at least one hidden layer");
  for (int h : c.network.hidden)
    if (h < 1) throw ConfigError("network.hidden", "widths must be >= 1");
  if (c.network.activation == nn::ActivationKind::kLeakyReLU &&
      !(c.network.leaky_slope > 0.0 && c.network.leaky_slope < 1.0))
    throw ConfigError("network.leaky_slope", "must lie in (0, 1)");
  try {
    validate(c.loss);
  } catch (const DomainError& e) {
    throw ConfigError("loss", e.what());
  }
  if (!(c.optimizer.lr > 0.0)) throw ConfigError("optimizer.lr", "must be > 0");
  if (c.optimizer.beta1 < 0.0 || c.optimizer.beta1 >= 1.0)
    throw ConfigError("optimizer.beta1", "must lie in [0, 1)");
  if (c.optimizer.beta2 < 0.0 || c.optimizer.beta2 >= 1.0)
    throw ConfigError("optimizer.beta2", "must lie in [0, 1)");
  if (c.optimizer.eps < 0.0) throw ConfigError("optimizer.eps", "must be >= 0");
  if (!(c.optimizer.gamma > 0.0)) throw ConfigError("optimizer.gamma", "must be > 0");
  if (c.training.epochs < 1) throw ConfigError("training.epochs", "must be >= 1");
  if (c.training.batch_size < 1) throw ConfigError("training.batch_size", "must be >= 1");
  if (c.data.n < 1) throw ConfigError("data.n", "must be >= 1");
  if (c.data.noise_std < 0.0) throw ConfigError("data.noise_std", "must be >= 0");
  if (c.data.val_fraction <= 0.0 || c.data.test_fraction < 0.0 ||
      c.data.val_fraction + c.data.test_fraction >= 1.0)
    throw ConfigError("data.val_fraction", "fractions must be positive and sum below 1");
  if (c.data.a_max < 0.0) throw ConfigError("data.a_max", "must be >= 0");
  if (!(c.data.target_scale > 0.0)) throw ConfigError("data.target_scale", "must be > 0");
  if (c.data.grid_points < 2) throw ConfigError("data.grid_points", "must be >= 2");
  if (c.data.target_width < 2) throw ConfigError("data.target_width", "must be >= 2");
  if (c.data.input_width < 1) throw ConfigError("data.input_width", "must be >= 1");
  if (c.calibration.bins < 1) throw ConfigError("calibration.bins", "must be >= 1");
  if (c.calibration.threshold == ThresholdKind::kQuantile &&
      !(c.calibration.threshold_value > 0.0 && c.calibration.threshold_value < 1.0))
    throw ConfigError("calibration.threshold_value", "quantile must lie in (0, 1)");
  if (c.calibration.threshold == ThresholdKind::kTolerance && !(c.calibration.threshold_value > 0.0))
    throw ConfigError("calibration.threshold_value", "tolerance must be > 0");
  if (c.mixup.mode != MixupKind::kNone && !(c.mixup.alpha > 0.0))
    throw ConfigError("mixup.alpha", "must be > 0");
  if (c.mixup.mode == MixupKind::kDirichlet && (c.mixup.k < 2 || c.mixup.k > c.training.batch_size))
    throw ConfigError("mixup.k", "must lie in [2, batch_size]");
  if (c.lambdas.empty()) throw ConfigError("lambdas", "must be nonempty");
  for (double l : c.lambdas)
    if (!(l >= 0.0)) throw ConfigError("lambdas", "values must be >= 0");
}

nn::NetworkParams build_network(const RunConfig& c, int input_width, int output_width) {
  nn::Activation act{c.network.activation,
                     c.network.activation == nn::ActivationKind::kLeakyReLU ? c.network.leaky_slope
                                                                            : 0.0};
  const auto specs = nn::mlp_specs(input_width, c.network.hidden, output_width, act);
  return nn::init_params(specs, derive_seed(c.seed, 0));
}

TrainConfig train_config(const RunConfig& c) {
  TrainConfig t;
  if (c.optimizer.adam)
    t.optimizer = nn::Adam{c.optimizer.lr, c.optimizer.beta1, c.optimizer.beta2, c.optimizer.eps};
  else
    t.optimizer = nn::Sgd{c.optimizer.lr};
  t.lr_milestones = c.optimizer.milestones;
  t.lr_gamma = c.optimizer.gamma;
  t.loss = c.loss;
  t.objective = c.objective;
  t.epochs = c.training.epochs;
  t.batch_size = c.training.batch_size;
  t.mixup = mixup_mode(c.mixup);
  t.seed = c.seed;
  return t;
}

std::optional<data::MixupMode> mixup_mode(const MixupConfig& m) {
  switch (m.mode) {
    case MixupKind::kNone:
      return std::nullopt;
    case MixupKind::kPairwise:
      return data::PairwiseMixup{m.alpha};
    case MixupKind::kDirichlet:
      return data::DirichletMixup{m.k, m.alpha};
  }
  return std::nullopt;
}

}  // namespace hcm
