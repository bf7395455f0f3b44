#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hcm/calibrate.hpp"
#include "hcm/error.hpp"

namespace {

struct GaussianRatio {
  std::vector<double> u, err;
};

// errors = u |z| with z ~ N(0, 1): the ideal temperature is 1.
GaussianRatio gaussian_ratio(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> scale(0.1, 2.0);
  GaussianRatio g;
  for (std::size_t i = 0; i < n; ++i) {
    g.u.push_back(scale(rng));
    g.err.push_back(g.u.back() * std::abs(z(rng)));
  }
  return g;
}

TEST(FitTemperature, GaussianRatioGivesUnitTemperature) {
  const auto g = gaussian_ratio(10000, 1);
  const double t = hcm::fit_temperature(g.u, g.err);
  EXPECT_NEAR(t, 1.0, 0.15);
}

TEST(FitTemperature, ScaleEquivariance) {
  const auto g = gaussian_ratio(2000, 2);
  std::vector<double> u10(g.u);
  for (auto& v : u10) v *= 10.0;
  const double t = hcm::fit_temperature(g.u, g.err);
  const double t10 = hcm::fit_temperature(u10, g.err);
  // The refined grid is not scale-aligned, so equality holds up to one refined cell.
  EXPECT_NEAR(t10 * 10.0 / t, 1.0, 0.01);
  EXPECT_EQ(hcm::coverage_objective(g.u, g.err, t), hcm::coverage_objective(u10, g.err, t10));
}

TEST(FitTemperature, AllZeroErrorsTieBreakToGridMinimum) {
  const std::vector<double> u(10, 1.0), err(10, 0.0);
  EXPECT_DOUBLE_EQ(hcm::fit_temperature(u, err), 1e-4);
}

TEST(FitTemperature, Preconditions) {
  const std::vector<double> zeros(20, 0.0), ones(20, 1.0), short_list(9, 1.0);
  try {
    hcm::fit_temperature(zeros, ones);
    FAIL();
  } catch (const hcm::UncalibratableError& e) {
    EXPECT_NE(std::string(e.what()).find("uncalibratable"), std::string::npos);
  }
  EXPECT_THROW(hcm::fit_temperature(short_list, short_list), hcm::Error);
  std::vector<double> negative(ones);
  negative[3] = -1.0;
  EXPECT_THROW(hcm::fit_temperature(negative, ones), hcm::Error);
  EXPECT_THROW(hcm::fit_temperature(ones, short_list), hcm::Error);
}

TEST(Coverage, NondecreasingInTemperature) {
  const auto g = gaussian_ratio(500, 3);
  for (int k = 1; k <= 3; ++k) {
    double prev = 0.0;
    for (double t = 1e-3; t < 1e3; t *= 1.3) {
      const double c = hcm::coverage(g.u, g.err, t, k);
      EXPECT_GE(c, prev);
      prev = c;
    }
  }
}

TEST(Confidence, ExamplesAndMonotonicity) {
  EXPECT_EQ(hcm::confidence(0.0, 3.0), 1.0);
  EXPECT_NEAR(hcm::confidence(std::numbers::ln2, 1.0), 0.5, 1e-15);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    double a = u(rng), b = u(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    EXPECT_GT(hcm::confidence(a, 0.7), hcm::confidence(b, 0.7));
  }
}

TEST(MinMax, ExamplesAndOrder) {
  const std::vector<double> c = {0.2, 0.6, 1.0};
  const auto n = hcm::normalize_minmax(c);
  EXPECT_NEAR(n[0], 0.0, 1e-15);
  EXPECT_NEAR(n[1], 0.5, 1e-15);
  EXPECT_NEAR(n[2], 1.0, 1e-15);
  for (double v : hcm::normalize_minmax(std::vector<double>(5, 0.3))) EXPECT_EQ(v, 0.5);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> r(200);
  for (auto& v : r) v = u(rng);
  const auto nr = hcm::normalize_minmax(r);
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < r.size(); ++j)
      if (r[i] < r[j]) ASSERT_LE(nr[i], nr[j]);
}

TEST(MinMax, FittedNormalizerClampsOutsideRange) {
  const std::vector<double> c = {0.2, 0.6, 1.0};
  const auto n = hcm::fit_minmax(c);
  EXPECT_EQ(hcm::apply(n, 0.1), 0.0);
  EXPECT_EQ(hcm::apply(n, 2.0), 1.0);
}

TEST(Quantile, ExamplesAndKsUniformity) {
  const std::vector<double> ref = {0.1, 0.3, 0.5, 0.7, 0.9};
  const auto q = hcm::fit_quantile(ref);
  EXPECT_EQ(hcm::normalize_quantile(0.05, q), 0.0);
  EXPECT_NEAR(hcm::normalize_quantile(0.5, q), 0.6, 1e-15);
  EXPECT_THROW(hcm::fit_quantile(std::vector<double>{}), hcm::Error);

  std::mt19937_64 rng(6);
  std::exponential_distribution<double> e(2.0);
  std::vector<double> conf(5000);
  for (auto& v : conf) v = std::exp(-e(rng));
  const auto model = hcm::fit_quantile(conf);
  std::vector<double> mapped;
  for (double c : conf) mapped.push_back(hcm::normalize_quantile(c, model));
  std::sort(mapped.begin(), mapped.end());
  double ks = 0.0;
  const double n = static_cast<double>(mapped.size());
  for (std::size_t i = 0; i < mapped.size(); ++i) {
    ks = std::max({ks, std::abs(mapped[i] - static_cast<double>(i + 1) / n),
                   std::abs(mapped[i] - static_cast<double>(i) / n)});
  }
  EXPECT_LE(ks, 2.0 / std::sqrt(n));
}

TEST(Threshold, ToleranceAndQuantile) {
  const std::vector<double> empty;
  const auto tol = hcm::fit_threshold(hcm::ThresholdPolicy::Kind::kTolerance, empty, 0.5);
  EXPECT_EQ(tol.cutoff, 0.5);
  EXPECT_FALSE(hcm::flag(0.5, tol));
  EXPECT_TRUE(hcm::flag(0.5 + 1e-12, tol));

  std::vector<double> hundred(100);
  for (int i = 0; i < 100; ++i) hundred[static_cast<std::size_t>(i)] = i + 1;
  const auto q = hcm::fit_threshold(hcm::ThresholdPolicy::Kind::kQuantileTail, hundred, 0.95);
  EXPECT_NEAR(q.cutoff, 95.05, 1e-12);

  const std::vector<double> sym = {-3, -1, 0, 1, 3};
  EXPECT_EQ(hcm::fit_threshold(hcm::ThresholdPolicy::Kind::kQuantileTail, sym, 0.5).cutoff, 0.0);
  EXPECT_THROW(hcm::fit_threshold(hcm::ThresholdPolicy::Kind::kQuantileTail, sym, 1.0), hcm::Error);
}

TEST(Threshold, FlaggedFractionMatchesQuantile) {
  std::mt19937_64 rng(7);
  std::gamma_distribution<double> g(2.0, 1.0);
  for (double q : {0.9, 0.95, 0.99}) {
    std::vector<double> u(1000);
    for (auto& v : u) v = g(rng);
    const auto p = hcm::fit_threshold(hcm::ThresholdPolicy::Kind::kQuantileTail, u, q);
    const double flagged =
        static_cast<double>(std::count_if(u.begin(), u.end(), [&](double v) { return hcm::flag(v, p); })) /
        1000.0;
    EXPECT_NEAR(flagged, 1.0 - q, 1.0 / 1000.0 + 1e-12);
  }
}

TEST(CalibrationJson, RoundTrip) {
  hcm::CalibrationModel m{2.5, hcm::QuantileNormalizer{{0.1, 0.2, 0.4}}};
  const auto back = hcm::calibration_from_json(hcm::to_json(m));
  EXPECT_EQ(back.temperature, 2.5);
  EXPECT_EQ(std::get<hcm::QuantileNormalizer>(back.normalizer).reference,
            (std::vector<double>{0.1, 0.2, 0.4}));
  hcm::CalibrationModel mm{0.5, hcm::MinMaxNormalizer{0.2, 0.9}};
  const auto back2 = hcm::calibration_from_json(hcm::to_json(mm));
  EXPECT_EQ(std::get<hcm::MinMaxNormalizer>(back2.normalizer).hi, 0.9);
  EXPECT_THROW(hcm::calibration_from_json(nlohmann::json::parse(R"({"temperature": -1})")),
               hcm::Error);
}

}  // namespace
