#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace hcm {

// Ground truth y = R * d with ||d|| = 1.
struct TargetDecomposition {
  double magnitude = 0.0;
  std::vector<double> direction;

  std::size_t dim() const { return direction.size(); }
};

// Raw model prediction. `direction` is deliberately not normalized: its
// distance from the unit sphere is the uncertainty signal.
struct HcmOutput {
  double magnitude = 0.0;
  std::vector<double> direction;

  std::size_t dim() const { return direction.size(); }
  double direction_norm() const;
};

struct ErrorTriple {
  std::vector<double> e_y;  // R_hat * d_hat - R * d
  std::vector<double> e_d;  // d_hat - d
  double e_r = 0.0;         // R_hat - R
  // |e_R| / (R_hat * ||e_d||); empty when the denominator is zero.
  std::optional<double> epsilon;
};

struct ScoreDiagnostics {
  std::uint64_t negative_magnitude = 0;
};

double l2_norm(std::span<const double> v);

// Throws DomainError for D < 2, non-finite entries, or y = 0.
TargetDecomposition decompose(std::span<const double> y);

// Scalar targets live on the diagonal of R^2.
std::array<double, 2> embed_scalar(double y);
// Mean of the coordinates; inverse of embed_scalar on exact predictions.
double readback_scalar(std::span<const double> y_hat);

std::vector<double> recompose(const HcmOutput& out);

// u = |R_hat| * | ||d_hat|| - 1 |. A negative R_hat is scored by its absolute
// value and counted in `diag` when provided.
double uncertainty_score(const HcmOutput& out, ScoreDiagnostics* diag = nullptr);

// sigma_hat^2 = u * |R_hat| (1 + ||d_hat||) / (D - 1).
double sigma_hat_sq(const HcmOutput& out);

ErrorTriple error_triple(const TargetDecomposition& target, const HcmOutput& out);

struct LowerBoundReport {
  double u = 0.0;
  double lower = 0.0;  // u (1 - eps) when eps is defined and < 1, else 0
  std::optional<double> epsilon;
  double e_y_norm = 0.0;
  double sandwich_lower = 0.0;  // R_hat ||e_d|| - |e_R|
  double sandwich_upper = 0.0;  // R_hat ||e_d|| + |e_R|
};

LowerBoundReport prediction_error_bound(const TargetDecomposition& target,
                                        const HcmOutput& out);

// Monte-Carlo estimate of the population sigma_hat^2 for y = g + xi,
// xi ~ N(0, sigma^2 I_D). The magnitude head's minimizer is sqrt(E||y||^2)
// and the direction head's is E[y / ||y||].
struct NoiseTrackingEstimate {
  double sigma_hat_sq = 0.0;
  double standard_error = 0.0;  // batch-means over fixed chunks
  double mean_sq_norm = 0.0;    // E ||y||^2
  double mean_sq_norm_standard_error = 0.0;
  double mean_direction_norm = 0.0;  // ||E[y / ||y||]||
  double remainder_bound = 0.0;
};

// (D + 2)(D + 4) sigma^4 / ((D - 1) ||g||^2)
double noise_tracking_remainder(double g_norm, int dim, double sigma);

// Samples are split into a fixed number of chunks with derived seeds, so
// the result does not depend on `threads` (0 = HCM_THREADS or hardware).
NoiseTrackingEstimate noise_tracking_oracle(double g_norm, int dim, double sigma,
                                            std::uint64_t n_samples, std::uint64_t seed,
                                            unsigned threads = 0);

// Worker count from HCM_THREADS, falling back to hardware concurrency.
unsigned default_thread_count();

}  // namespace hcm
