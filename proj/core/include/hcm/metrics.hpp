#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hcm::metrics {

// Positive class for ranking metrics is out-of-distribution.
enum class Label : std::uint8_t { kInDistribution = 0, kOutOfDistribution = 1 };

struct MetricsReport {
  double cov_1s = 0.0;
  double cov_2s = 0.0;
  double cov_3s = 0.0;
  double ece_reg = 0.0;
  double pearson = 0.0;
  double spearman = 0.0;
  double rmse = 0.0;
  std::optional<double> auroc;
  std::optional<double> fpr_at_95tpr;
};

// Fraction with r_i <= k * u_cal_i.
double coverage_at_k(std::span<const double> u_cal, std::span<const double> r, int k);

// Equal-width bins over [min u_cal, max u_cal] (max falls in the last bin);
// sum_b |S_b| |mean u_b - mean r_b| / N.
double ece_reg(std::span<const double> u_cal, std::span<const double> r, int bins = 10);

// Throws DomainError when either coordinate has zero variance or n < 2.
double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);

// 1-based ranks; tied values share the average rank.
std::vector<double> average_ranks(std::span<const double> values);

// Mean of the per-sample errors.
double rmse_report(std::span<const double> r);

// Larger score = more OOD. Ties count 1/2.
double auroc(std::span<const double> scores, std::span<const Label> labels);
// FPR of the negatives at the largest threshold whose TPR reaches 0.95.
double fpr_at_95tpr(std::span<const double> scores, std::span<const Label> labels);

MetricsReport evaluate(std::span<const double> u_cal, std::span<const double> r, int bins = 10);

// Adds auroc / fpr_at_95tpr computed from (scores, labels).
void add_ranking(MetricsReport& report, std::span<const double> scores,
                 std::span<const Label> labels);

nlohmann::json to_json(const MetricsReport& report);

// Fixed column order for CSV output.
std::string csv_header();
std::string csv_row(const MetricsReport& report);

}  // namespace hcm::metrics
