#pragma once

#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hcm/head.hpp"

namespace hcm {

struct PowerP {
  double p = 2.0;
};
struct Huber {
  double delta = 1.0;
};
struct SmoothL1 {
  double beta = 1.0;
};

// Penalty family applied to a non-negative residual magnitude.
using Phi = std::variant<PowerP, Huber, SmoothL1>;

double phi(const Phi& family, double z);
// Derivative in z; 0 at z = 0 (subgradient convention at the kink).
double phi_derivative(const Phi& family, double z);

struct LossSpec {
  Phi phi_d = PowerP{2.0};
  Phi phi_r = PowerP{2.0};
  Phi phi_norm = PowerP{2.0};
  double lambda_norm = 0.0;
};

// Throws DomainError on p < 1, non-positive delta/beta or negative lambda.
void validate(const LossSpec& spec);

struct LossBreakdown {
  double dir_term = 0.0;
  double mag_term = 0.0;
  double norm_term = 0.0;
  double total = 0.0;
};

// phi_d(R ||e_d||) + phi_r(|e_R|) + lambda phi_norm(| ||d_hat|| - 1 |).
// The direction residual is weighted by the ground-truth magnitude R.
LossBreakdown loss_total(const LossSpec& spec, const TargetDecomposition& target,
                         const HcmOutput& out);

struct LossGradient {
  double magnitude = 0.0;
  std::vector<double> direction;
};

LossGradient loss_grad(const LossSpec& spec, const TargetDecomposition& target,
                       const HcmOutput& out);

// ||R_hat d_hat - R d||^2 computed directly and through
// ||R_hat e_d||^2 + e_R^2 + 2 R_hat e_R <e_d, d>.
struct ExactPrimalLoss {
  double direct = 0.0;
  double expanded = 0.0;
};

ExactPrimalLoss loss_exact_primal(const TargetDecomposition& target, const HcmOutput& out);
LossGradient loss_exact_primal_grad(const TargetDecomposition& target, const HcmOutput& out);

nlohmann::json to_json(const Phi& family);
Phi phi_from_json(const nlohmann::json& doc, const std::string& field);

}  // namespace hcm
