#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "hcm/error.hpp"
#include "hcm/metrics.hpp"

namespace {

using hcm::metrics::Label;

std::vector<double> uniform(std::size_t n, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

std::vector<Label> random_labels(std::size_t n, std::mt19937_64& rng) {
  std::vector<Label> l(n);
  for (std::size_t i = 0; i < n; ++i)
    l[i] = (rng() & 1U) ? Label::kOutOfDistribution : Label::kInDistribution;
  l[0] = Label::kOutOfDistribution;
  l[1] = Label::kInDistribution;
  return l;
}

double brute_auroc(const std::vector<double>& s, const std::vector<Label>& l) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (l[i] != Label::kOutOfDistribution) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (l[j] != Label::kInDistribution) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Every distinct score is a candidate threshold; pick the largest one with TPR >= 0.95.
double brute_fpr(const std::vector<double>& s, const std::vector<Label>& l) {
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  for (double t : thresholds) {
    double tp = 0, fp = 0, pos = 0, neg = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const bool is_pos = l[i] == Label::kOutOfDistribution;
      (is_pos ? pos : neg) += 1.0;
      if (s[i] >= t) (is_pos ? tp : fp) += 1.0;
    }
    if (tp / pos >= 0.95) return fp / neg;
  }
  return 1.0;
}

double naive_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - sa / n) * (b[i] - sb / n);
    saa += (a[i] - sa / n) * (a[i] - sa / n);
    sbb += (b[i] - sb / n) * (b[i] - sb / n);
  }
  return sab / std::sqrt(saa * sbb);
}

// Rank of v = 1 + (# smaller) + (# equal others) / 2.
std::vector<double> brute_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) less += 1;
      else if (v[j] == v[i] && j != i) equal += 1;
    }
    r[i] = 1.0 + less + equal / 2.0;
  }
  return r;
}

double brute_ece(const std::vector<double>& u, const std::vector<double>& r, int bins) {
  const double lo = *std::min_element(u.begin(), u.end());
  const double hi = *std::max_element(u.begin(), u.end());
  double total = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double a = lo + (hi - lo) * b / bins;
    const double z = lo + (hi - lo) * (b + 1) / bins;
    double su = 0, sr = 0, n = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const bool in = b == bins - 1 ? (u[i] >= a) : (u[i] >= a && u[i] < z);
      if (!in) continue;
      su += u[i];
      sr += r[i];
      n += 1;
    }
    if (n > 0) total += n * std::abs(su / n - sr / n);
  }
  return total / static_cast<double>(u.size());
}

TEST(Coverage, Examples) {
  const std::vector<double> u = {0.5, 1.0, 2.0};
  EXPECT_EQ(hcm::metrics::coverage_at_k(u, std::vector<double>(3, 0.0), 1), 1.0);
  const std::vector<double> r = {1.0, 2.0, 4.0};
  EXPECT_EQ(hcm::metrics::coverage_at_k(u, r, 1), 0.0);
  EXPECT_EQ(hcm::metrics::coverage_at_k(u, r, 2), 1.0);
  EXPECT_THROW(hcm::metrics::coverage_at_k(std::vector<double>{}, std::vector<double>{}, 1),
               hcm::Error);
}

TEST(Coverage, MatchesLoopAndGrowsWithK) {
  std::mt19937_64 rng(1);
  const auto u = uniform(300, rng), r = uniform(300, rng, 0.0, 2.5);
  double prev = 0.0;
  for (int k = 1; k <= 3; ++k) {
    double hits = 0;
    for (std::size_t i = 0; i < u.size(); ++i) hits += r[i] <= k * u[i] ? 1 : 0;
    const double c = hcm::metrics::coverage_at_k(u, r, k);
    EXPECT_NEAR(c, hits / 300.0, 1e-10);
    EXPECT_GE(c, prev);
    prev = c;
  }
}

TEST(Ece, Examples) {
  const std::vector<double> u = {0.1, 0.4, 0.9, 2.0};
  for (int b : {1, 3, 10}) EXPECT_EQ(hcm::metrics::ece_reg(u, u, b), 0.0);
  EXPECT_EQ(hcm::metrics::ece_reg(std::vector<double>{1, 1}, std::vector<double>{0, 2}, 1), 0.0);
  EXPECT_THROW(hcm::metrics::ece_reg(u, u, 0), hcm::Error);
}

TEST(Ece, MatchesIndependentBinning) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = uniform(200, rng, 0.0, 3.0), r = uniform(200, rng, 0.0, 3.0);
    EXPECT_NEAR(hcm::metrics::ece_reg(u, r, 10), brute_ece(u, r, 10), 1e-10);
  }
}

TEST(Correlation, Examples) {
  const std::vector<double> u = {0.1, 0.5, 0.2, 0.9};
  EXPECT_NEAR(hcm::metrics::pearson(u, u), 1.0, 1e-15);
  EXPECT_NEAR(hcm::metrics::spearman(u, u), 1.0, 1e-15);
  std::vector<double> r;
  for (double v : u) r.push_back(2.0 - v);
  EXPECT_NEAR(hcm::metrics::pearson(u, r), -1.0, 1e-15);
  try {
    hcm::metrics::pearson(u, std::vector<double>(4, 1.0));
    FAIL();
  } catch (const hcm::Error& e) {
    EXPECT_NE(std::string(e.what()).find("correlation undefined"), std::string::npos);
  }
  EXPECT_THROW(hcm::metrics::spearman(std::vector<double>{1.0}, std::vector<double>{1.0}),
               hcm::Error);
}

TEST(Correlation, MatchesIndependentImplementationWithTies) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> small(0, 6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(60), b(60);
    for (auto& x : a) x = small(rng);
    for (auto& x : b) x = small(rng) + 0.5 * small(rng);
    EXPECT_NEAR(hcm::metrics::pearson(a, b), naive_pearson(a, b), 1e-10);
    EXPECT_NEAR(hcm::metrics::spearman(a, b), naive_pearson(brute_ranks(a), brute_ranks(b)), 1e-10);
    EXPECT_EQ(hcm::metrics::average_ranks(a), brute_ranks(a));
  }
}

TEST(Rmse, Examples) {
  EXPECT_EQ(hcm::metrics::rmse_report(std::vector<double>(4, 5.0)), 5.0);
  EXPECT_EQ(hcm::metrics::rmse_report(std::vector<double>{0.0, 10.0}), 5.0);
  EXPECT_THROW(hcm::metrics::rmse_report(std::vector<double>{}), hcm::Error);
}

TEST(Auroc, Examples) {
  const std::vector<Label> l = {Label::kInDistribution, Label::kInDistribution,
                                Label::kOutOfDistribution, Label::kOutOfDistribution};
  EXPECT_EQ(hcm::metrics::auroc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, l), 1.0);
  EXPECT_EQ(hcm::metrics::auroc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, l), 0.5);
  EXPECT_EQ(hcm::metrics::fpr_at_95tpr(std::vector<double>{0.1, 0.2, 0.8, 0.9}, l), 0.0);
  const std::vector<Label> one(4, Label::kInDistribution);
  EXPECT_THROW(hcm::metrics::auroc(std::vector<double>(4, 0.0), one), hcm::Error);
  EXPECT_THROW(hcm::metrics::fpr_at_95tpr(std::vector<double>(4, 0.0), one), hcm::Error);
}

TEST(Auroc, ExactlyMatchesPairwiseBruteForce) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> coarse(0, 9);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = uniform(50, rng);
    // Half of the cases carry heavy ties.
    if (trial % 2) for (auto& x : s) x = coarse(rng);
    const auto l = random_labels(50, rng);
    EXPECT_EQ(hcm::metrics::auroc(s, l), brute_auroc(s, l));
  }
}

TEST(Auroc, InvariantUnderMonotoneTransformPermutationAndNegation) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = uniform(80, rng);
    const auto l = random_labels(80, rng);
    const double a = hcm::metrics::auroc(s, l);
    std::vector<double> t, neg;
    for (double x : s) {
      t.push_back(std::exp(3.0 * x) - 7.0);
      neg.push_back(-x);
    }
    EXPECT_NEAR(hcm::metrics::auroc(t, l), a, 1e-14);
    EXPECT_NEAR(a + hcm::metrics::auroc(neg, l), 1.0, 1e-14);
    EXPECT_NEAR(hcm::metrics::spearman(t, s), 1.0, 1e-14);

    std::vector<std::size_t> perm(s.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> ps;
    std::vector<Label> pl;
    for (auto i : perm) {
      ps.push_back(s[i]);
      pl.push_back(l[i]);
    }
    EXPECT_NEAR(hcm::metrics::auroc(ps, pl), a, 1e-14);
    EXPECT_EQ(hcm::metrics::fpr_at_95tpr(ps, pl), hcm::metrics::fpr_at_95tpr(s, l));
  }
}

TEST(Fpr, MatchesThresholdSweep) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> coarse(0, 5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(12);
    for (auto& x : s) x = coarse(rng);
    const auto l = random_labels(12, rng);
    EXPECT_EQ(hcm::metrics::fpr_at_95tpr(s, l), brute_fpr(s, l));
  }
}

TEST(Fpr, IdenticalDistributionsApproach95Percent) {
  std::mt19937_64 rng(7);
  const auto s = uniform(10000, rng);
  const auto l = random_labels(10000, rng);
  EXPECT_NEAR(hcm::metrics::fpr_at_95tpr(s, l), 0.95, 0.02);
}

TEST(Report, JsonAndCsvCarryEveryField) {
  std::mt19937_64 rng(8);
  const auto u = uniform(100, rng), r = uniform(100, rng);
  auto rep = hcm::metrics::evaluate(u, r);
  EXPECT_FALSE(rep.auroc.has_value());
  const auto j = hcm::metrics::to_json(rep);
  for (const char* k : {"cov_1s", "cov_2s", "cov_3s", "ece_reg", "pearson", "spearman", "rmse"})
    EXPECT_TRUE(j.contains(k)) << k;
  hcm::metrics::add_ranking(rep, u, random_labels(100, rng));
  EXPECT_TRUE(rep.auroc.has_value());
  const auto header = hcm::metrics::csv_header();
  const auto row = hcm::metrics::csv_row(rep);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
}

}  // namespace
