#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace hcm::nn {

enum class ActivationKind { kIdentity, kReLU, kLeakyReLU };

struct Activation {
  ActivationKind kind = ActivationKind::kIdentity;
  double slope = 0.0;  // LeakyReLU only, in (0, 1)

  static Activation identity() { return {}; }
  static Activation relu() { return {ActivationKind::kReLU, 0.0}; }
  static Activation leaky_relu(double slope) {
    return {ActivationKind::kLeakyReLU, slope};
  }
};

struct LayerSpec {
  int input_width = 1;
  int output_width = 1;
  Activation activation;
};

struct Layer {
  Eigen::MatrixXd weight;  // output_width x input_width
  Eigen::VectorXd bias;    // output_width
  Activation activation;
};

struct NetworkParams {
  std::vector<Layer> layers;
  std::uint64_t seed = 0;

  int input_width() const;
  int output_width() const;
  std::size_t parameter_count() const;
};

// Gradients (and optimizer moments) share the layer shapes of NetworkParams.
struct LayerGrad {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};
using Gradients = std::vector<LayerGrad>;

Gradients zeros_like(const NetworkParams& params);

// Post-activation values of every layer for a batch of column samples.
// `outputs.back()` is the raw network output.
struct ForwardTrace {
  Eigen::MatrixXd input;                 // input_width x batch
  std::vector<Eigen::MatrixXd> outputs;  // one per layer

  Eigen::VectorXd output(Eigen::Index column = 0) const {
    return outputs.back().col(column);
  }
};

// Builds a network from a chain of layer specs. Weights ~ N(0, 1/fan_in),
// biases zero. Identical seeds give bit-identical parameters.
NetworkParams init_params(std::span<const LayerSpec> specs, std::uint64_t seed);

// Convenience: in -> hidden... -> out with `hidden_activation` on every
// hidden layer and an identity output layer.
std::vector<LayerSpec> mlp_specs(int input_width, std::span<const int> hidden,
                                 int output_width,
                                 Activation hidden_activation);

ForwardTrace forward(const NetworkParams& params, std::span<const double> x);
ForwardTrace forward_batch(const NetworkParams& params,
                           const Eigen::MatrixXd& inputs);

// Reverse accumulation. `output_grad` has one column per sample of the trace;
// the returned gradients are summed over columns. Throws NonFiniteError on
// the first non-finite entry.
Gradients backward(const NetworkParams& params, const ForwardTrace& trace,
                   const Eigen::MatrixXd& output_grad);
Gradients backward(const NetworkParams& params, const ForwardTrace& trace,
                   std::span<const double> output_grad);

struct Sgd {
  double lr = 0.01;
};

struct Adam {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

using OptimizerKind = std::variant<Sgd, Adam>;

struct OptimizerState {
  OptimizerKind kind;
  Gradients first_moment;
  Gradients second_moment;
  std::uint64_t step = 0;
};

OptimizerState make_optimizer(const OptimizerKind& kind,
                              const NetworkParams& params);

// Applies one update in place and increments the step counter.
void step(OptimizerState& state, NetworkParams& params, const Gradients& grads);

// Checkpoint: {"seed", "layers": [{"activation", "slope"?, "weight": rows,
// "bias"}]}.
nlohmann::json to_json(const NetworkParams& params);
NetworkParams params_from_json(const nlohmann::json& doc);

}  // namespace hcm::nn
