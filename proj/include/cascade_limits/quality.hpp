#pragma once
// Content quality (reproduction number) and noisy ex-ante observations of it.

#include <span>
#include <vector>

#include "cascade_limits/rng.hpp"

namespace cascade_limits {

// Beta distribution over R0 parameterized by mean and standard deviation.
// q_std == 0 is a point mass at q_mean.
struct QualitySpec {
  double q_mean = 0.2;
  double q_std = 0.0;

  void validate() const;
};

struct NoiseSpec {
  double sigma_n = 0.0;

  void validate() const;
};

struct BetaShape {
  double a = 1.0;
  double b = 1.0;
};

BetaShape beta_params_from_moments(const QualitySpec& spec);

double sample_r0(const QualitySpec& spec, CounterStream& rng);

// Normal(r0_true, sigma_n) clamped to [0, 1].
double observe_r0(double r0_true, const NoiseSpec& noise, CounterStream& rng);

// The clamp applied to a given standard-normal deviate z.
double observe_r0_from_deviate(double r0_true, const NoiseSpec& noise, double z) noexcept;

// Regularized incomplete beta I_x(a, b).
double beta_cdf(const BetaShape& shape, double x);

// Probability mass of the quality distribution in each R0 grid cell. Cell i
// spans the midpoints to its neighbors; the outer cells extend to 0 and 1.
// A point mass goes entirely to the cell [lo, hi) containing q_mean (the last
// cell is closed).
std::vector<double> grid_cell_masses(const QualitySpec& spec, std::span<const double> grid);

}  // namespace cascade_limits
