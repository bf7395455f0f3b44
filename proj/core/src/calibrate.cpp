#include "hcm/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hcm/error.hpp"

namespace hcm {
namespace {

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g(static_cast<std::size_t>(points));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < points; ++i)
    g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

struct GridBest {
  std::size_t index = 0;
  double temperature = 0.0;
  double objective = 0.0;
};

GridBest scan(const std::vector<double>& grid, std::span<const double> u,
              std::span<const double> errors) {
  GridBest best{0, grid[0], coverage_objective(u, errors, grid[0])};
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double obj = coverage_objective(u, errors, grid[i]);
    if (obj < best.objective) best = {i, grid[i], obj};
  }
  return best;
}

}  // namespace

double CalibrationModel::confidence(double u) const { return hcm::confidence(u, temperature); }

double CalibrationModel::normalized_confidence(double u) const {
  const double c = confidence(u);
  return std::visit(
      [c](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, MinMaxNormalizer>)
          return apply(n, c);
        else
          return normalize_quantile(c, n);
      },
      normalizer);
}

double coverage(std::span<const double> u, std::span<const double> errors, double temperature,
                int k) {
  if (u.size() != errors.size()) throw DimensionError("coverage: length mismatch");
  if (u.empty()) throw DomainError("coverage: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (errors[i] <= k * temperature * u[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(u.size());
}

double coverage_objective(std::span<const double> u, std::span<const double> errors,
                          double temperature) {
  double obj = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const double d = coverage(u, errors, temperature, k) - kCoverageTargets[k - 1];
    obj += d * d;
  }
  return obj;
}

double fit_temperature(std::span<const double> u, std::span<const double> errors,
                       const TemperatureSearch& search) {
  if (u.size() != errors.size())
    throw DimensionError("fit_temperature: scores and errors differ in length");
  if (u.size() < 10) throw DomainError("fit_temperature: need at least 10 samples");
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!(u[i] >= 0.0) || !(errors[i] >= 0.0))
      throw DomainError("fit_temperature: scores and errors must be non-negative");
  if (std::all_of(u.begin(), u.end(), [](double v) { return v == 0.0; }))
    throw UncalibratableError("uncalibratable: degenerate scores");
  if (!(search.lo > 0.0) || !(search.hi > search.lo) || search.points < 2)
    throw DomainError("fit_temperature: invalid search grid");

  const auto grid = log_grid(search.lo, search.hi, search.points);
  GridBest best = scan(grid, u, errors);
  if (!search.refine) return best.temperature;

  const double lo = grid[best.index == 0 ? 0 : best.index - 1];
  const double hi = grid[std::min(best.index + 1, grid.size() - 1)];
  const GridBest fine = scan(log_grid(lo, hi, search.points), u, errors);
  if (fine.objective < best.objective ||
      (fine.objective == best.objective && fine.temperature < best.temperature))
    return fine.temperature;
  return best.temperature;
}

double confidence(double u, double temperature) { return std::exp(-u * temperature); }

MinMaxNormalizer fit_minmax(std::span<const double> conf) {
  if (conf.empty()) throw DomainError("normalize_minmax: empty input");
  const auto [lo, hi] = std::minmax_element(conf.begin(), conf.end());
  return {*lo, *hi};
}

double apply(const MinMaxNormalizer& n, double conf) {
  if (n.hi <= n.lo) return 0.5;
  return std::clamp((conf - n.lo) / (n.hi - n.lo), 0.0, 1.0);
}

std::vector<double> normalize_minmax(std::span<const double> conf) {
  const auto n = fit_minmax(conf);
  std::vector<double> out(conf.size());
  std::transform(conf.begin(), conf.end(), out.begin(), [&](double c) { return apply(n, c); });
  return out;
}

QuantileNormalizer fit_quantile(std::span<const double> conf) {
  if (conf.empty()) throw DomainError("normalize_quantile: empty reference");
  QuantileNormalizer n{{conf.begin(), conf.end()}};
  std::sort(n.reference.begin(), n.reference.end());
  return n;
}

double normalize_quantile(double conf, const QuantileNormalizer& n) {
  if (n.reference.empty()) throw DomainError("normalize_quantile: empty reference");
  const auto it = std::upper_bound(n.reference.begin(), n.reference.end(), conf);
  return static_cast<double>(it - n.reference.begin()) /
         static_cast<double>(n.reference.size());
}

double empirical_quantile(std::span<const double> values, double q) {
  if (values.empty()) throw DomainError("empirical_quantile: empty input");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("empirical_quantile: q outside [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

ThresholdPolicy fit_threshold(ThresholdPolicy::Kind kind, std::span<const double> val_u,
                              double eps_or_q) {
  ThresholdPolicy p;
  p.kind = kind;
  p.parameter = eps_or_q;
  if (kind == ThresholdPolicy::Kind::kTolerance) {
    if (!(eps_or_q > 0.0)) throw DomainError("fit_threshold: tolerance must be > 0");
    p.cutoff = eps_or_q;
    return p;
  }
  if (!(eps_or_q > 0.0 && eps_or_q < 1.0))
    throw DomainError("fit_threshold: quantile q must lie in (0, 1)");
  if (val_u.empty()) throw DomainError("fit_threshold: empty validation scores");
  p.cutoff = empirical_quantile(val_u, eps_or_q);
  return p;
}

nlohmann::json to_json(const CalibrationModel& model) {
  nlohmann::json doc{{"temperature", model.temperature}};
  if (const auto* mm = std::get_if<MinMaxNormalizer>(&model.normalizer)) {
    doc["normalizer"] = {{"kind", "minmax"}, {"lo", mm->lo}, {"hi", mm->hi}};
  } else {
    const auto& q = std::get<QuantileNormalizer>(model.normalizer);
    doc["normalizer"] = {{"kind", "quantile"}, {"reference", q.reference}};
  }
  return doc;
}

CalibrationModel calibration_from_json(const nlohmann::json& doc) {
  try {
    CalibrationModel m;
    m.temperature = doc.at("temperature").get<double>();
    if (!(m.temperature > 0.0)) throw DataError("calibration: temperature must be > 0");
    const auto& n = doc.at("normalizer");
    const auto kind = n.at("kind").get<std::string>();
    if (kind == "minmax") {
      m.normalizer = MinMaxNormalizer{n.at("lo").get<double>(), n.at("hi").get<double>()};
    } else if (kind == "quantile") {
      auto ref = n.at("reference").get<std::vector<double>>();
      if (ref.empty()) throw DataError("calibration: empty quantile reference");
      if (!std::is_sorted(ref.begin(), ref.end()))
        throw DataError("calibration: quantile reference must be sorted");
      m.normalizer = QuantileNormalizer{std::move(ref)};
    } else {
      throw DataError("calibration: unknown normalizer '" + kind + "'");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("calibration: ") + e.what());
  }
}

nlohmann::json to_json(const ThresholdPolicy& policy) {
  return {{"kind", policy.kind == ThresholdPolicy::Kind::kTolerance ? "tolerance" : "quantile"},
          {"parameter", policy.parameter},
          {"cutoff", policy.cutoff}};
}

}  // namespace hcm
