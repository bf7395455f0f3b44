#include <benchmark/benchmark.h>

#include <random>

#include "hcm/calibrate.hpp"
#include "hcm/config.hpp"
#include "hcm/data.hpp"
#include "hcm/experiments.hpp"
#include "hcm/head.hpp"
#include "hcm/loss.hpp"
#include "hcm/metrics.hpp"
#include "hcm/nn.hpp"

namespace {

hcm::nn::NetworkParams network(int width) {
  const std::vector<int> hidden = {width, width};
  const auto specs = hcm::nn::mlp_specs(4, hidden, 4, hcm::nn::Activation::relu());
  return hcm::nn::init_params(specs, 1);
}

Eigen::MatrixXd batch(Eigen::Index cols) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd x(4, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(rng);
  return x;
}

void BM_ForwardBackward(benchmark::State& state) {
  const auto params = network(static_cast<int>(state.range(0)));
  const auto x = batch(64);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Ones(4, 64);
  for (auto _ : state) {
    const auto trace = hcm::nn::forward_batch(params, x);
    benchmark::DoNotOptimize(hcm::nn::backward(params, trace, g));
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_ForwardBackward)->Arg(16)->Arg(64)->Arg(256);

void BM_LossGrad(benchmark::State& state) {
  const std::vector<double> y = {0.3, 1.2, -0.4};
  const auto target = hcm::decompose(y);
  const hcm::HcmOutput out{1.1, {0.2, 0.9, -0.3}};
  const hcm::LossSpec spec{hcm::Huber{1.0}, hcm::PowerP{2.0}, hcm::PowerP{2.0}, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(hcm::loss_grad(spec, target, out));
}
BENCHMARK(BM_LossGrad);

void BM_ScoreSet(benchmark::State& state) {
  const auto set = hcm::data::gen_smooth_regression(static_cast<std::size_t>(state.range(0)), 4, 3,
                                                    0.05, 3);
  const auto params = network(64);
  for (auto _ : state) benchmark::DoNotOptimize(hcm::score_set(params, set));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ScoreSet)->Arg(1000)->Arg(10000);

void BM_FitTemperature(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  std::vector<double> u(static_cast<std::size_t>(state.range(0))), err(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = 0.1 + std::abs(z(rng));
    err[i] = u[i] * std::abs(z(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(hcm::fit_temperature(u, err));
}
BENCHMARK(BM_FitTemperature)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Auroc(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u01;
  std::vector<double> s(static_cast<std::size_t>(state.range(0)));
  std::vector<hcm::metrics::Label> l(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = u01(rng);
    l[i] = i % 2 ? hcm::metrics::Label::kOutOfDistribution : hcm::metrics::Label::kInDistribution;
  }
  for (auto _ : state) benchmark::DoNotOptimize(hcm::metrics::auroc(s, l));
}
BENCHMARK(BM_Auroc)->Arg(1000)->Arg(100000);

void BM_NoiseTrackingOracle(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(hcm::noise_tracking_oracle(50.0, 10, 1.0, 100000, 6, 1));
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_NoiseTrackingOracle)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
