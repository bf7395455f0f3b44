#include "hcm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hcm/error.hpp"
#include "hcm/format.hpp"

namespace hcm::metrics {
namespace {

void check_pairs(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) throw DimensionError(std::string(what) + ": length mismatch");
  if (a.empty()) throw DomainError(std::string(what) + ": empty input");
}

void check_labels(std::span<const double> scores, std::span<const Label> labels,
                  const char* what) {
  if (scores.size() != labels.size())
    throw DimensionError(std::string(what) + ": length mismatch");
  const auto pos = std::count(labels.begin(), labels.end(), Label::kOutOfDistribution);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size()))
    throw DomainError(std::string(what) + ": both classes must be present");
}

}  // namespace

double coverage_at_k(std::span<const double> u_cal, std::span<const double> r, int k) {
  check_pairs(u_cal, r, "coverage_at_k");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i] <= k * u_cal[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(r.size());
}

double ece_reg(std::span<const double> u_cal, std::span<const double> r, int bins) {
  check_pairs(u_cal, r, "ece_reg");
  if (bins < 1) throw DomainError("ece_reg: bin count must be >= 1");
  const auto [lo_it, hi_it] = std::minmax_element(u_cal.begin(), u_cal.end());
  const double lo = *lo_it;
  const double width = (*hi_it - lo) / bins;
  std::vector<double> sum_u(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> sum_r(static_cast<std::size_t>(bins), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(bins), 0);
  for (std::size_t i = 0; i < u_cal.size(); ++i) {
    int b = width > 0.0 ? static_cast<int>((u_cal[i] - lo) / width) : 0;
    b = std::clamp(b, 0, bins - 1);
    sum_u[static_cast<std::size_t>(b)] += u_cal[i];
    sum_r[static_cast<std::size_t>(b)] += r[i];
    ++count[static_cast<std::size_t>(b)];
  }
  double total = 0.0;
  for (std::size_t b = 0; b < count.size(); ++b) {
    if (count[b] == 0) continue;
    const double n = static_cast<double>(count[b]);
    total += n * std::abs(sum_u[b] / n - sum_r[b] / n);
  }
  return total / static_cast<double>(u_cal.size());
}

double pearson(std::span<const double> a, std::span<const double> b) {
  check_pairs(a, b, "pearson");
  if (a.size() < 2) throw DomainError("correlation undefined: need at least 2 samples");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw DomainError("correlation undefined: zero variance");
  return std::clamp(sab / (std::sqrt(saa) * std::sqrt(sbb)), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  check_pairs(a, b, "spearman");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

double rmse_report(std::span<const double> r) {
  if (r.empty()) throw DomainError("rmse_report: empty input");
  return std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

double auroc(std::span<const double> scores, std::span<const Label> labels) {
  check_labels(scores, labels, "auroc");
  const auto ranks = average_ranks(scores);
  double rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (labels[i] == Label::kOutOfDistribution) {
      rank_sum += ranks[i];
      n_pos += 1.0;
    }
  }
  const double n_neg = static_cast<double>(scores.size()) - n_pos;
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double fpr_at_95tpr(std::span<const double> scores, std::span<const Label> labels) {
  check_labels(scores, labels, "fpr_at_95tpr");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return scores[i] > scores[j]; });
  const double n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), Label::kOutOfDistribution));
  const double n_neg = static_cast<double>(labels.size()) - n_pos;
  double tp = 0.0;
  double fp = 0.0;
  std::size_t i = 0;
  // Sweep thresholds from high to low; all samples sharing a score enter together.
  while (i < order.size()) {
    const double t = scores[order[i]];
    while (i < order.size() && scores[order[i]] == t) {
      if (labels[order[i]] == Label::kOutOfDistribution)
        tp += 1.0;
      else
        fp += 1.0;
      ++i;
    }
    if (tp / n_pos >= 0.95) return fp / n_neg;
  }
  return fp / n_neg;
}

MetricsReport evaluate(std::span<const double> u_cal, std::span<const double> r, int bins) {
  MetricsReport rep;
  rep.cov_1s = coverage_at_k(u_cal, r, 1);
  rep.cov_2s = coverage_at_k(u_cal, r, 2);
  rep.cov_3s = coverage_at_k(u_cal, r, 3);
  rep.ece_reg = ece_reg(u_cal, r, bins);
  rep.pearson = pearson(u_cal, r);
  rep.spearman = spearman(u_cal, r);
  rep.rmse = rmse_report(r);
  return rep;
}

void add_ranking(MetricsReport& report, std::span<const double> scores,
                 std::span<const Label> labels) {
  report.auroc = auroc(scores, labels);
  report.fpr_at_95tpr = fpr_at_95tpr(scores, labels);
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json j{{"cov_1s", report.cov_1s},   {"cov_2s", report.cov_2s},
                   {"cov_3s", report.cov_3s},   {"ece_reg", report.ece_reg},
                   {"pearson", report.pearson}, {"spearman", report.spearman},
                   {"rmse", report.rmse}};
  j["auroc"] = report.auroc ? nlohmann::json(*report.auroc) : nlohmann::json(nullptr);
  j["fpr_at_95tpr"] =
      report.fpr_at_95tpr ? nlohmann::json(*report.fpr_at_95tpr) : nlohmann::json(nullptr);
  return j;
}

std::string csv_header() {
  return "cov_1s,cov_2s,cov_3s,ece_reg,pearson,spearman,rmse,auroc,fpr_at_95tpr";
}

std::string csv_row(const MetricsReport& report) {
  std::string row;
  for (double v : {report.cov_1s, report.cov_2s, report.cov_3s, report.ece_reg, report.pearson,
                   report.spearman, report.rmse}) {
    row += format_double(v);
    row += ',';
  }
  if (report.auroc) row += format_double(*report.auroc);
  row += ',';
  if (report.fpr_at_95tpr) row += format_double(*report.fpr_at_95tpr);
  return row;
}

}  // namespace hcm::metrics
