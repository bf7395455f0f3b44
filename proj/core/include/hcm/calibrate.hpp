#pragma once

#include <span>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace hcm {

// Min-max over the fitting confidences. lo == hi is the degenerate constant
// case and maps everything to 0.5.
struct MinMaxNormalizer {
  double lo = 0.0;
  double hi = 1.0;
};

// Empirical CDF of the fitting confidences (sorted ascending).
struct QuantileNormalizer {
  std::vector<double> reference;
};

using Normalizer = std::variant<MinMaxNormalizer, QuantileNormalizer>;

struct CalibrationModel {
  double temperature = 1.0;
  Normalizer normalizer = MinMaxNormalizer{};

  double calibrated(double u) const { return u * temperature; }
  double confidence(double u) const;
  // exp(-u T) passed through the normalizer.
  double normalized_confidence(double u) const;
};

struct TemperatureSearch {
  double lo = 1e-4;
  double hi = 1e4;
  int points = 400;
  bool refine = true;  // one 3x zoom around the best coarse cell
};

inline constexpr double kCoverageTargets[3] = {0.68, 0.95, 0.997};

// Fraction of samples with error <= k * T * u (inclusive).
double coverage(std::span<const double> u, std::span<const double> errors, double temperature,
                int k);

// Sum over k = 1, 2, 3 of (coverage - target_k)^2.
double coverage_objective(std::span<const double> u, std::span<const double> errors,
                          double temperature);

// Grid argmin of coverage_objective; ties go to the smaller temperature.
// Throws UncalibratableError when every u is zero.
double fit_temperature(std::span<const double> u, std::span<const double> errors,
                       const TemperatureSearch& search = {});

// exp(-u T), strictly decreasing in u.
double confidence(double u, double temperature);

MinMaxNormalizer fit_minmax(std::span<const double> conf);
double apply(const MinMaxNormalizer& n, double conf);
std::vector<double> normalize_minmax(std::span<const double> conf);

QuantileNormalizer fit_quantile(std::span<const double> conf);
// #{reference <= conf} / |reference|
double normalize_quantile(double conf, const QuantileNormalizer& n);

// Linear interpolation between order statistics at position q (n - 1).
double empirical_quantile(std::span<const double> values, double q);

struct ThresholdPolicy {
  enum class Kind { kTolerance, kQuantileTail };
  Kind kind = Kind::kTolerance;
  double parameter = 0.0;  // eps or q
  double cutoff = 0.0;
};

ThresholdPolicy fit_threshold(ThresholdPolicy::Kind kind, std::span<const double> val_u,
                              double eps_or_q);

// True marks an unreliable prediction: u strictly above the cutoff.
inline bool flag(double u, const ThresholdPolicy& policy) { return u > policy.cutoff; }

nlohmann::json to_json(const CalibrationModel& model);
CalibrationModel calibration_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ThresholdPolicy& policy);

}  // namespace hcm
