#include "hcm/loss.hpp"

#include <cmath>

#include "hcm/error.hpp"

namespace hcm {
namespace {

struct PhiValue {
  double operator()(const PowerP& f) const { return std::pow(z, f.p); }
  double operator()(const Huber& f) const {
    return z <= f.delta ? 0.5 * z * z : f.delta * (z - 0.5 * f.delta);
  }
  double operator()(const SmoothL1& f) const {
    return z <= f.beta ? z * z / (2.0 * f.beta) : z - 0.5 * f.beta;
  }
  double z;
};

struct PhiSlope {
  double operator()(const PowerP& f) const {
    if (f.p == 1.0) return 1.0;
    if (f.p == 2.0) return 2.0 * z;
    return f.p * std::pow(z, f.p - 1.0);
  }
  double operator()(const Huber& f) const { return z <= f.delta ? z : f.delta; }
  double operator()(const SmoothL1& f) const { return z <= f.beta ? z / f.beta : 1.0; }
  double z;
};

void check_dims(const TargetDecomposition& target, const HcmOutput& out) {
  if (target.dim() != out.dim())
    throw DimensionError("loss: target dimension " + std::to_string(target.dim()) +
                         " != prediction dimension " + std::to_string(out.dim()));
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double phi(const Phi& family, double z) {
  if (z < 0.0) throw DomainError("phi: argument must be non-negative");
  return std::visit(PhiValue{z}, family);
}

double phi_derivative(const Phi& family, double z) {
  if (z < 0.0) throw DomainError("phi: argument must be non-negative");
  if (z == 0.0) return 0.0;
  return std::visit(PhiSlope{z}, family);
}

void validate(const LossSpec& spec) {
  for (const Phi* f : {&spec.phi_d, &spec.phi_r, &spec.phi_norm}) {
    if (const auto* p = std::get_if<PowerP>(f); p && !(p->p >= 1.0))
      throw DomainError("loss: power p must be >= 1");
    if (const auto* h = std::get_if<Huber>(f); h && !(h->delta > 0.0))
      throw DomainError("loss: Huber delta must be > 0");
    if (const auto* s = std::get_if<SmoothL1>(f); s && !(s->beta > 0.0))
      throw DomainError("loss: smooth-L1 beta must be > 0");
  }
  if (!(spec.lambda_norm >= 0.0)) throw DomainError("loss: lambda_norm must be >= 0");
}

LossBreakdown loss_total(const LossSpec& spec, const TargetDecomposition& target,
                         const HcmOutput& out) {
  check_dims(target, out);
  double ed2 = 0.0;
  for (std::size_t i = 0; i < target.dim(); ++i) {
    const double e = out.direction[i] - target.direction[i];
    ed2 += e * e;
  }
  LossBreakdown b;
  b.dir_term = phi(spec.phi_d, target.magnitude * std::sqrt(ed2));
  b.mag_term = phi(spec.phi_r, std::abs(out.magnitude - target.magnitude));
  b.norm_term = spec.lambda_norm == 0.0
                    ? 0.0
                    : spec.lambda_norm *
                          phi(spec.phi_norm, std::abs(out.direction_norm() - 1.0));
  b.total = b.dir_term + b.mag_term + b.norm_term;
  return b;
}

LossGradient loss_grad(const LossSpec& spec, const TargetDecomposition& target,
                       const HcmOutput& out) {
  check_dims(target, out);
  const std::size_t dim = target.dim();
  LossGradient g;
  g.direction.assign(dim, 0.0);

  std::vector<double> e_d(dim);
  for (std::size_t i = 0; i < dim; ++i) e_d[i] = out.direction[i] - target.direction[i];
  const double ed_norm = l2_norm(e_d);
  if (ed_norm > 0.0) {
    const double scale =
        phi_derivative(spec.phi_d, target.magnitude * ed_norm) * target.magnitude / ed_norm;
    for (std::size_t i = 0; i < dim; ++i) g.direction[i] += scale * e_d[i];
  }

  const double e_r = out.magnitude - target.magnitude;
  g.magnitude = phi_derivative(spec.phi_r, std::abs(e_r)) * sign(e_r);

  if (spec.lambda_norm > 0.0) {
    const double n = out.direction_norm();
    if (n > 0.0) {
      const double scale = spec.lambda_norm *
                           phi_derivative(spec.phi_norm, std::abs(n - 1.0)) *
                           sign(n - 1.0) / n;
      for (std::size_t i = 0; i < dim; ++i) g.direction[i] += scale * out.direction[i];
    }
  }
  return g;
}

ExactPrimalLoss loss_exact_primal(const TargetDecomposition& target, const HcmOutput& out) {
  check_dims(target, out);
  const std::size_t dim = target.dim();
  const double e_r = out.magnitude - target.magnitude;
  ExactPrimalLoss l;
  double ed2 = 0.0;
  double cross = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double ey = out.magnitude * out.direction[i] - target.magnitude * target.direction[i];
    const double ed = out.direction[i] - target.direction[i];
    l.direct += ey * ey;
    ed2 += ed * ed;
    cross += ed * target.direction[i];
  }
  l.expanded = out.magnitude * out.magnitude * ed2 + e_r * e_r + 2.0 * out.magnitude * e_r * cross;
  return l;
}

LossGradient loss_exact_primal_grad(const TargetDecomposition& target, const HcmOutput& out) {
  check_dims(target, out);
  const std::size_t dim = target.dim();
  LossGradient g;
  g.direction.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const double ey = out.magnitude * out.direction[i] - target.magnitude * target.direction[i];
    g.magnitude += 2.0 * ey * out.direction[i];
    g.direction[i] = 2.0 * out.magnitude * ey;
  }
  return g;
}

nlohmann::json to_json(const Phi& family) {
  return std::visit(
      [](const auto& f) -> nlohmann::json {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, PowerP>) return {{"kind", "power"}, {"p", f.p}};
        if constexpr (std::is_same_v<F, Huber>) return {{"kind", "huber"}, {"delta", f.delta}};
        if constexpr (std::is_same_v<F, SmoothL1>)
          return {{"kind", "smooth_l1"}, {"beta", f.beta}};
      },
      family);
}

Phi phi_from_json(const nlohmann::json& doc, const std::string& field) {
  if (!doc.is_object()) throw ConfigError(field, "expected an object");
  const auto kind_it = doc.find("kind");
  if (kind_it == doc.end() || !kind_it->is_string())
    throw ConfigError(field + ".kind", "missing or not a string");
  const auto kind = kind_it->get<std::string>();
  auto number = [&](const char* key, double fallback) {
    for (const auto& [k, v] : doc.items()) {
      if (k != "kind" && k != key) throw ConfigError(field + "." + k, "unknown key");
    }
    const auto it = doc.find(key);
    if (it == doc.end()) return fallback;
    if (!it->is_number()) throw ConfigError(field + "." + key, "expected a number");
    return it->get<double>();
  };
  if (kind == "power") return PowerP{number("p", 2.0)};
  if (kind == "huber") return Huber{number("delta", 1.0)};
  if (kind == "smooth_l1") return SmoothL1{number("beta", 1.0)};
  throw ConfigError(field + ".kind", "unknown loss family '" + kind +
                                         "' (expected power, huber, smooth_l1)");
}

}  // namespace hcm
