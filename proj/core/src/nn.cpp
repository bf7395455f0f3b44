#include "hcm/nn.hpp"

#include <cmath>
#include <random>
#include <string>

#include "hcm/error.hpp"
#include "hcm/random.hpp"

namespace hcm::nn {
namespace {

void check_activation(const Activation& a, int layer) {
  if (a.kind == ActivationKind::kLeakyReLU && !(a.slope > 0.0 && a.slope < 1.0))
    throw DomainError("layer " + std::to_string(layer) +
                      ": LeakyReLU slope must lie in (0, 1)");
}

void apply_activation(const Activation& a, Eigen::MatrixXd& z) {
  switch (a.kind) {
    case ActivationKind::kIdentity:
      break;
    case ActivationKind::kReLU:
      z = z.cwiseMax(0.0);
      break;
    case ActivationKind::kLeakyReLU:
      z = z.unaryExpr([s = a.slope](double v) { return v > 0.0 ? v : s * v; });
      break;
  }
}

// Multiplies the upstream gradient by the activation derivative, read off the
// post-activation value (sign is preserved by every supported activation).
void apply_activation_grad(const Activation& a, const Eigen::MatrixXd& post,
                           Eigen::MatrixXd& grad) {
  switch (a.kind) {
    case ActivationKind::kIdentity:
      break;
    case ActivationKind::kReLU:
      grad = grad.binaryExpr(post,
                             [](double g, double y) { return y > 0.0 ? g : 0.0; });
      break;
    case ActivationKind::kLeakyReLU:
      grad = grad.binaryExpr(post, [s = a.slope](double g, double y) {
        return y > 0.0 ? g : s * g;
      });
      break;
  }
}

void check_finite(const Eigen::MatrixXd& m, int layer, const char* what) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (!std::isfinite(m(r, c)))
        throw NonFiniteError(std::string("non-finite ") + what + " gradient at layer " +
                                 std::to_string(layer) + " (" + std::to_string(r) +
                                 ", " + std::to_string(c) + ")",
                             layer, static_cast<std::size_t>(r),
                             static_cast<std::size_t>(c));
}

const char* activation_tag(ActivationKind k) {
  switch (k) {
    case ActivationKind::kIdentity:
      return "identity";
    case ActivationKind::kReLU:
      return "relu";
    case ActivationKind::kLeakyReLU:
      return "leaky_relu";
  }
  return "identity";
}

}  // namespace

int NetworkParams::input_width() const {
  return layers.empty() ? 0 : static_cast<int>(layers.front().weight.cols());
}

int NetworkParams::output_width() const {
  return layers.empty() ? 0 : static_cast<int>(layers.back().weight.rows());
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

Gradients zeros_like(const NetworkParams& params) {
  Gradients g;
  g.reserve(params.layers.size());
  for (const auto& l : params.layers)
    g.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                 Eigen::VectorXd::Zero(l.bias.size())});
  return g;
}

NetworkParams init_params(std::span<const LayerSpec> specs, std::uint64_t seed) {
  if (specs.empty()) throw DimensionError("init_params: empty layer spec list");
  NetworkParams params;
  params.seed = seed;
  Rng rng(seed);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    const int layer = static_cast<int>(i);
    if (s.input_width < 1 || s.output_width < 1)
      throw DimensionError("layer " + std::to_string(i) + ": widths must be >= 1", layer);
    if (i > 0 && specs[i - 1].output_width != s.input_width)
      throw DimensionError("layer " + std::to_string(i) + ": input width " +
                               std::to_string(s.input_width) +
                               " does not match previous output width " +
                               std::to_string(specs[i - 1].output_width),
                           layer);
    check_activation(s.activation, layer);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(s.input_width));
    Layer l;
    l.weight.resize(s.output_width, s.input_width);
    // Row-major fill order so the draw sequence matches the checkpoint layout.
    for (int r = 0; r < s.output_width; ++r)
      for (int c = 0; c < s.input_width; ++c) l.weight(r, c) = normal(rng);
    l.bias = Eigen::VectorXd::Zero(s.output_width);
    l.activation = s.activation;
    params.layers.push_back(std::move(l));
  }
  return params;
}

std::vector<LayerSpec> mlp_specs(int input_width, std::span<const int> hidden,
                                 int output_width, Activation hidden_activation) {
  std::vector<LayerSpec> specs;
  int prev = input_width;
  for (int h : hidden) {
    specs.push_back({prev, h, hidden_activation});
    prev = h;
  }
  specs.push_back({prev, output_width, Activation::identity()});
  return specs;
}

ForwardTrace forward_batch(const NetworkParams& params, const Eigen::MatrixXd& inputs) {
  if (params.layers.empty()) throw DimensionError("forward: network has no layers");
  ForwardTrace trace;
  trace.input = inputs;
  trace.outputs.reserve(params.layers.size());
  const Eigen::MatrixXd* prev = &trace.input;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& l = params.layers[i];
    if (prev->rows() != l.weight.cols())
      throw DimensionError("forward: layer " + std::to_string(i) + " expects width " +
                               std::to_string(l.weight.cols()) + ", got " +
                               std::to_string(prev->rows()),
                           static_cast<int>(i));
    Eigen::MatrixXd z = l.weight * *prev;
    z.colwise() += l.bias;
    apply_activation(l.activation, z);
    trace.outputs.push_back(std::move(z));
    prev = &trace.outputs.back();
  }
  return trace;
}

ForwardTrace forward(const NetworkParams& params, std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) throw DomainError("forward: non-finite input");
  Eigen::MatrixXd column(static_cast<Eigen::Index>(x.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) column(static_cast<Eigen::Index>(i), 0) = x[i];
  return forward_batch(params, column);
}

Gradients backward(const NetworkParams& params, const ForwardTrace& trace,
                   const Eigen::MatrixXd& output_grad) {
  const std::size_t n_layers = params.layers.size();
  if (trace.outputs.size() != n_layers)
    throw DimensionError("backward: trace does not belong to this network");
  if (output_grad.rows() != params.layers.back().weight.rows() ||
      output_grad.cols() != trace.input.cols())
    throw DimensionError("backward: output gradient shape mismatch",
                         static_cast<int>(n_layers) - 1);

  Gradients grads(n_layers);
  Eigen::MatrixXd delta = output_grad;
  for (std::size_t k = n_layers; k-- > 0;) {
    const auto& l = params.layers[k];
    apply_activation_grad(l.activation, trace.outputs[k], delta);
    const Eigen::MatrixXd& below = k == 0 ? trace.input : trace.outputs[k - 1];
    grads[k].weight = delta * below.transpose();
    grads[k].bias = delta.rowwise().sum();
    check_finite(grads[k].weight, static_cast<int>(k), "weight");
    check_finite(grads[k].bias, static_cast<int>(k), "bias");
    if (k > 0) delta = l.weight.transpose() * delta;
  }
  return grads;
}

Gradients backward(const NetworkParams& params, const ForwardTrace& trace,
                   std::span<const double> output_grad) {
  Eigen::MatrixXd g(static_cast<Eigen::Index>(output_grad.size()), 1);
  for (std::size_t i = 0; i < output_grad.size(); ++i)
    g(static_cast<Eigen::Index>(i), 0) = output_grad[i];
  return backward(params, trace, g);
}

OptimizerState make_optimizer(const OptimizerKind& kind, const NetworkParams& params) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if (!(k.lr > 0.0)) throw DomainError("optimizer: lr must be > 0");
        if constexpr (std::is_same_v<K, Adam>) {
          if (k.beta1 < 0.0 || k.beta1 >= 1.0 || k.beta2 < 0.0 || k.beta2 >= 1.0)
            throw DomainError("optimizer: Adam betas must lie in [0, 1)");
          if (k.eps < 0.0) throw DomainError("optimizer: Adam eps must be >= 0");
        }
      },
      kind);
  OptimizerState state;
  state.kind = kind;
  if (std::holds_alternative<Adam>(kind)) {
    state.first_moment = zeros_like(params);
    state.second_moment = zeros_like(params);
  }
  return state;
}

void step(OptimizerState& state, NetworkParams& params, const Gradients& grads) {
  if (grads.size() != params.layers.size())
    throw DimensionError("step: gradient layer count mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    const auto& l = params.layers[i];
    if (grads[i].weight.rows() != l.weight.rows() ||
        grads[i].weight.cols() != l.weight.cols() || grads[i].bias.size() != l.bias.size())
      throw DimensionError("step: gradient shape mismatch", static_cast<int>(i));
  }
  ++state.step;
  if (const auto* sgd = std::get_if<Sgd>(&state.kind)) {
    for (std::size_t i = 0; i < grads.size(); ++i) {
      params.layers[i].weight -= sgd->lr * grads[i].weight;
      params.layers[i].bias -= sgd->lr * grads[i].bias;
    }
    return;
  }
  const auto& adam = std::get<Adam>(state.kind);
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(adam.beta1, t);
  const double c2 = 1.0 - std::pow(adam.beta2, t);
  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    m = adam.beta1 * m + (1.0 - adam.beta1) * g;
    v = adam.beta2 * v + (1.0 - adam.beta2) * g.cwiseAbs2();
    p.array() -= adam.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + adam.eps);
  };
  for (std::size_t i = 0; i < grads.size(); ++i) {
    update(params.layers[i].weight, state.first_moment[i].weight,
           state.second_moment[i].weight, grads[i].weight);
    update(params.layers[i].bias, state.first_moment[i].bias, state.second_moment[i].bias,
           grads[i].bias);
  }
}

nlohmann::json to_json(const NetworkParams& params) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : params.layers) {
    nlohmann::json weight = nlohmann::json::array();
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) row.push_back(l.weight(r, c));
      weight.push_back(std::move(row));
    }
    nlohmann::json bias = nlohmann::json::array();
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) bias.push_back(l.bias(r));
    nlohmann::json entry{{"activation", activation_tag(l.activation.kind)},
                         {"weight", std::move(weight)},
                         {"bias", std::move(bias)}};
    if (l.activation.kind == ActivationKind::kLeakyReLU) entry["slope"] = l.activation.slope;
    layers.push_back(std::move(entry));
  }
  return {{"seed", params.seed}, {"layers", std::move(layers)}};
}

NetworkParams params_from_json(const nlohmann::json& doc) {
  NetworkParams params;
  try {
    params.seed = doc.at("seed").get<std::uint64_t>();
    const auto& layers = doc.at("layers");
    if (!layers.is_array() || layers.empty())
      throw DataError("checkpoint: 'layers' must be a nonempty array");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& entry = layers[i];
      Layer l;
      const auto tag = entry.at("activation").get<std::string>();
      if (tag == "identity") {
        l.activation = Activation::identity();
      } else if (tag == "relu") {
        l.activation = Activation::relu();
      } else if (tag == "leaky_relu") {
        l.activation = Activation::leaky_relu(entry.at("slope").get<double>());
      } else {
        throw DataError("checkpoint: layer " + std::to_string(i) +
                        " has unknown activation '" + tag + "'");
      }
      check_activation(l.activation, static_cast<int>(i));
      const auto& weight = entry.at("weight");
      const auto& bias = entry.at("bias");
      const auto rows = static_cast<Eigen::Index>(weight.size());
      if (rows == 0 || static_cast<Eigen::Index>(bias.size()) != rows)
        throw DimensionError("checkpoint: layer " + std::to_string(i) +
                                 " weight/bias row count mismatch",
                             static_cast<int>(i));
      const auto cols = static_cast<Eigen::Index>(weight[0].size());
      l.weight.resize(rows, cols);
      l.bias.resize(rows);
      for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(weight[r].size()) != cols)
          throw DimensionError("checkpoint: layer " + std::to_string(i) + " is ragged",
                               static_cast<int>(i));
        for (Eigen::Index c = 0; c < cols; ++c) l.weight(r, c) = weight[r][c].get<double>();
        l.bias(r) = bias[r].get<double>();
      }
      if (!params.layers.empty() && params.layers.back().weight.rows() != cols)
        throw DimensionError("checkpoint: layer " + std::to_string(i) +
                                 " does not chain with the previous layer",
                             static_cast<int>(i));
      params.layers.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  return params;
}

}  // namespace hcm::nn
