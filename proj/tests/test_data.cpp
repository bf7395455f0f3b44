#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "hcm/data.hpp"
#include "hcm/error.hpp"
#include "hcm/head.hpp"

namespace {

namespace fs = std::filesystem;
using hcm::data::LabeledSet;

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("hcm_test_data_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

TEST(Cubic, NoiseProfile) {
  EXPECT_EQ(hcm::data::cubic_noise_std(0.0), 10.0);
  EXPECT_EQ(hcm::data::cubic_noise_std(-2.0), 0.0);
  EXPECT_EQ(hcm::data::cubic_noise_std(2.0), 20.0);
  EXPECT_EQ(hcm::data::cubic_noise_std(-3.0), 0.0);
  EXPECT_EQ(hcm::data::cubic_noise_std(3.5), 0.0);
}

TEST(Cubic, NoiseFreeOutsideRampAndDomain) {
  const auto set = hcm::data::gen_cubic(20000, 1);
  ASSERT_EQ(set.size(), 20000u);
  ASSERT_EQ(set.target_width, 1u);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double x = set.input(i)[0];
    ASSERT_GE(x, -4.0);
    ASSERT_LE(x, 4.0);
    if (x < -2.0 || x > 2.0) ASSERT_EQ(set.target(i)[0], x * x * x);
  }
  EXPECT_THROW(hcm::data::gen_cubic(0, 1), hcm::Error);
}

TEST(Cubic, EmpiricalStdNearRampTop) {
  const auto set = hcm::data::gen_cubic(100000, 2);
  double ss = 0.0;
  double n = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double x = set.input(i)[0];
    if (x < 1.9 || x > 2.0) continue;
    const double e = set.target(i)[0] - x * x * x;
    // Rescale to the std at x = 2 so the slab width does not bias the estimate.
    const double s = e * 20.0 / hcm::data::cubic_noise_std(x);
    ss += s * s;
    n += 1.0;
  }
  ASSERT_GT(n, 500.0);
  EXPECT_NEAR(std::sqrt(ss / n), 20.0, 1.0);
}

TEST(TwoMoons, EndpointAndBalance) {
  const auto set = hcm::data::gen_two_moons(100, 0.0, 3);
  EXPECT_NEAR(set.input(0)[0], 1.0, 1e-15);
  EXPECT_NEAR(set.input(0)[1], 0.0, 1e-15);
  EXPECT_EQ(set.target(0)[0], 1.0);
  std::size_t class0 = 0;
  for (std::size_t i = 0; i < set.size(); ++i) class0 += set.target(i)[0] == 1.0 ? 1 : 0;
  EXPECT_EQ(class0, 50u);
  EXPECT_THROW(hcm::data::gen_two_moons(11, 0.1, 0), hcm::Error);
}

TEST(TwoMoons, CentroidsMatchHalfCircle) {
  const std::size_t n = 20000;
  const double noise = 0.1;
  const auto set = hcm::data::gen_two_moons(n, noise, 4);
  double c[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < n; ++i) {
    const int k = set.target(i)[0] == 1.0 ? 0 : 1;
    c[k][0] += set.input(i)[0] / (n / 2.0);
    c[k][1] += set.input(i)[1] / (n / 2.0);
  }
  // Jitter dominates the standard error; the curve itself adds at most ~0.7 / sqrt(m).
  const double se = std::sqrt((noise * noise + 0.5) / (n / 2.0));
  const double two_over_pi = 2.0 / std::numbers::pi;
  EXPECT_NEAR(c[0][0], 0.0, 3 * se);
  EXPECT_NEAR(c[0][1], two_over_pi, 3 * se);
  EXPECT_NEAR(c[1][0], 1.0, 3 * se);
  EXPECT_NEAR(c[1][1], 0.5 - two_over_pi, 3 * se);
}

TEST(Blobs, OodCenterFarFromClustersAndDeterministic) {
  hcm::data::BlobSpec spec;
  const auto centers = hcm::data::blob_centers(spec, 2);
  const auto ood = hcm::data::blob_ood_center(spec, 2);
  for (const auto& c : centers)
    EXPECT_GE(std::hypot(c[0] - ood[0], c[1] - ood[1]), 6.0 * spec.cluster_std);
  EXPECT_NEAR(std::hypot(centers[0][0] - centers[1][0], centers[0][1] - centers[1][1]),
              spec.spacing, 1e-12);

  const auto [id, out] = hcm::data::gen_blobs_ood(200, 50, 2, 5, spec);
  const auto [id2, out2] = hcm::data::gen_blobs_ood(200, 50, 2, 5, spec);
  EXPECT_EQ(id.inputs, id2.inputs);
  EXPECT_EQ(out.inputs, out2.inputs);
  EXPECT_EQ(out.size(), 50u);

  hcm::data::BlobSpec tight = spec;
  tight.spacing = 2.0;
  EXPECT_THROW(hcm::data::gen_blobs_ood(10, 10, 2, 0, tight), hcm::Error);
  hcm::data::BlobSpec lifted = spec;
  lifted.ood_height = 6.0;
  EXPECT_THROW(hcm::data::gen_blobs_ood(10, 10, 2, 0, lifted), hcm::Error);
  EXPECT_NO_THROW(hcm::data::gen_blobs_ood(10, 10, 3, 0, lifted));
}

// The nearest-center rule is linear, so zero errors under it certifies separability.
TEST(Blobs, LinearlySeparableAcrossSeeds) {
  hcm::data::BlobSpec spec;
  const auto centers = hcm::data::blob_centers(spec, 2);
  int separable = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto [id, out] = hcm::data::gen_blobs_ood(800, 1, 2, seed, spec);
    bool ok = true;
    for (std::size_t i = 0; i < id.size() && ok; ++i) {
      std::size_t best = 0;
      double best_d = 1e300;
      for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = std::hypot(id.input(i)[0] - centers[c][0], id.input(i)[1] - centers[c][1]);
        if (d < best_d) best_d = d, best = c;
      }
      ok = id.target(i)[best] == 1.0;
    }
    separable += ok ? 1 : 0;
  }
  EXPECT_GE(separable, 99);
}

TEST(Perturb, IdentityAndTargetsUntouched) {
  const auto set = hcm::data::gen_smooth_regression(100, 4, 3, 0.05, 6);
  const auto same = hcm::data::perturb_inputs(set, 0.0, 7);
  EXPECT_EQ(same.inputs, set.inputs);
  const auto moved = hcm::data::perturb_inputs(set, 1.0, 7);
  EXPECT_EQ(moved.targets, set.targets);
  EXPECT_NE(moved.inputs, set.inputs);
  ASSERT_EQ(moved.meta["amplitudes"].size(), 100u);
  for (const auto& a : moved.meta["amplitudes"]) {
    EXPECT_GE(a.get<double>(), 0.0);
    EXPECT_LE(a.get<double>(), 1.0);
  }
  EXPECT_THROW(hcm::data::perturb_inputs(set, -1.0, 0), hcm::Error);
}

TEST(Perturb, PerCoordinateStdTracksAmplitude) {
  const auto set = hcm::data::gen_smooth_regression(100000, 2, 2, 0.0, 8);
  const auto moved = hcm::data::perturb_inputs(set, 0.6, 9);
  double weighted = 0.0;
  double a2 = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double a = moved.meta["amplitudes"][i].get<double>();
    for (std::size_t j = 0; j < 2; ++j) {
      const double d = moved.input(i)[j] - set.input(i)[j];
      weighted += d * d;
    }
    a2 += 2.0 * a * a;
  }
  // E[(a eps)^2] = E[a^2]; comparing sums removes the amplitude spread.
  EXPECT_NEAR(std::sqrt(weighted / a2), 1.0, 0.01);
}

TEST(Mixup, PairwiseHalfOfTwoClasses) {
  LabeledSet set(1, 2);
  set.add(std::vector<double>{0.0}, hcm::data::one_hot(0, 2));
  set.add(std::vector<double>{2.0}, hcm::data::one_hot(1, 2));
  std::vector<double> x(1), y(2);
  const std::vector<std::size_t> rows = {0, 1};
  hcm::data::mix_samples(set, rows, std::vector<double>{0.5, 0.5}, x, y);
  EXPECT_EQ(x[0], 1.0);
  EXPECT_EQ(y, (std::vector<double>{0.5, 0.5}));
  EXPECT_NEAR(norm(y), 1.0 / std::sqrt(2.0), 1e-15);
  hcm::data::mix_samples(set, rows, std::vector<double>{1.0, 0.0}, x, y);
  EXPECT_EQ(x[0], 0.0);
  EXPECT_EQ(y, hcm::data::one_hot(0, 2));
}

TEST(Mixup, MixedTargetsStayInsideUnitBall) {
  std::vector<double> seeds;
  const auto [id, out] = hcm::data::gen_blobs_ood(64, 1, 2, 10, {});
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    for (const hcm::data::MixupMode mode :
         {hcm::data::MixupMode{hcm::data::PairwiseMixup{0.4}},
          hcm::data::MixupMode{hcm::data::DirichletMixup{20, 0.5}}}) {
      const auto mixed = hcm::data::mixup(id, mode, seed);
      ASSERT_EQ(mixed.size(), id.size());
      for (std::size_t i = 0; i < mixed.size(); ++i) {
        const auto y = mixed.target(i);
        double sum = 0.0;
        for (double v : y) {
          ASSERT_GE(v, -1e-15);
          sum += v;
        }
        ASSERT_NEAR(sum, 1.0, 1e-12);
        ASSERT_LE(norm(y), 1.0 + 1e-12);
        ASSERT_GT(norm(y), 1.0 / std::sqrt(4.0) - 1e-12);
      }
    }
  }
  EXPECT_THROW(hcm::data::mixup(id.subset(std::vector<std::size_t>{0, 1, 2}),
                                hcm::data::DirichletMixup{20, 0.5}, 0),
               hcm::Error);
}

// Dirichlet weights drawn as normalized gammas; norm 1 only when all mass sits on one class.
TEST(Mixup, DirichletWeightSweep) {
  const auto [id, out] = hcm::data::gen_blobs_ood(40, 1, 2, 11, {});
  std::mt19937_64 rng(12);
  std::gamma_distribution<double> g(0.5, 1.0);
  std::vector<double> x(2), y(4);
  std::vector<std::size_t> rows(20);
  std::iota(rows.begin(), rows.end(), 0);
  for (int draw = 0; draw < 10000; ++draw) {
    std::vector<double> w(20);
    double s = 0.0;
    for (auto& v : w) s += (v = g(rng));
    for (auto& v : w) v /= s;
    double total = 0.0;
    for (double v : w) total += v;
    ASSERT_NEAR(total, 1.0, 1e-12);
    hcm::data::mix_samples(id, rows, w, x, y);
    ASSERT_LE(norm(y), 1.0 + 1e-12);
    const double top = *std::max_element(y.begin(), y.end());
    if (top < 1.0 - 1e-9) ASSERT_LT(norm(y), 1.0);
  }
}

TEST(OneHot, BasisAndDecomposition) {
  EXPECT_EQ(hcm::data::one_hot(1, 3), (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(hcm::decompose(hcm::data::one_hot(2, 4)).magnitude, 1.0);
  EXPECT_THROW(hcm::data::one_hot(3, 3), hcm::Error);
  EXPECT_THROW(hcm::data::one_hot(0, 1), hcm::Error);
}

TEST(Split, PartitionsEveryRow) {
  const auto set = hcm::data::gen_smooth_regression(101, 2, 2, 0.1, 13);
  const std::vector<double> f = {0.8, 0.1, 0.1};
  const auto parts = hcm::data::split(set, f, 14);
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[0].size() + parts[1].size() + parts[2].size(), 101u);
  std::multiset<double> all(set.inputs.begin(), set.inputs.end()), seen;
  for (const auto& p : parts) seen.insert(p.inputs.begin(), p.inputs.end());
  EXPECT_EQ(all, seen);
}

TEST(Csv, RoundTripIsExactAndCarriesMeta) {
  const auto dir = temp_dir("roundtrip");
  auto set = hcm::data::perturb_inputs(hcm::data::gen_smooth_regression(50, 3, 2, 0.1, 15), 0.5, 16);
  hcm::data::csv_write(set, dir / "d.csv");
  const auto back = hcm::data::csv_read(dir / "d.csv");
  EXPECT_EQ(back.input_width, 3u);
  EXPECT_EQ(back.target_width, 2u);
  EXPECT_EQ(back.inputs, set.inputs);
  EXPECT_EQ(back.targets, set.targets);
  EXPECT_EQ(back.meta, set.meta);
}

TEST(Csv, StructuredErrors) {
  const auto dir = temp_dir("errors");
  std::ofstream(dir / "empty.csv").close();
  EXPECT_THROW(hcm::data::csv_read(dir / "empty.csv"), hcm::DataError);
  std::ofstream(dir / "header.csv") << "x0,z0\n1,2\n";
  try {
    hcm::data::csv_read(dir / "header.csv");
    FAIL();
  } catch (const hcm::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("expected 'y0'"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("found 'z0'"), std::string::npos) << e.what();
  }
  std::ofstream(dir / "row.csv") << "x0,y0\n1,2\n3,abc\n";
  try {
    hcm::data::csv_read(dir / "row.csv");
    FAIL();
  } catch (const hcm::DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
  std::ofstream(dir / "short.csv") << "x0,y0\n1,2\n3\n";
  EXPECT_THROW(hcm::data::csv_read(dir / "short.csv"), hcm::DataError);
  EXPECT_THROW(hcm::data::csv_read(dir / "missing.csv"), hcm::DataError);
}

TEST(Generators, PureFunctionsOfSeed) {
  EXPECT_EQ(hcm::data::gen_cubic(100, 3).targets, hcm::data::gen_cubic(100, 3).targets);
  EXPECT_NE(hcm::data::gen_cubic(100, 3).targets, hcm::data::gen_cubic(100, 4).targets);
  EXPECT_EQ(hcm::data::gen_two_moons(100, 0.1, 3).inputs,
            hcm::data::gen_two_moons(100, 0.1, 3).inputs);
  EXPECT_EQ(hcm::data::gen_smooth_regression(40, 4, 3, 0.05, 1).targets,
            hcm::data::gen_smooth_regression(40, 4, 3, 0.05, 1).targets);
}

}  // namespace
