#include "cascade_limits/quality.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <random>
#include <string>

#include "cascade_limits/error.hpp"

namespace cascade_limits {

void QualitySpec::validate() const {
  if (!(q_std >= 0.0)) throw Error(ErrorKind::InvalidConfig, "q_std must be non-negative");
  if (q_std == 0.0) {
    // point mass
    if (!(q_mean >= 0.0 && q_mean <= 1.0)) throw Error(ErrorKind::InvalidConfig, "q_mean must lie in [0, 1]");
    return;
  }
  if (!(q_mean > 0.0 && q_mean < 1.0)) throw Error(ErrorKind::InvalidConfig, "q_mean must lie in (0, 1)");
  if (q_std * q_std >= q_mean * (1.0 - q_mean)) {
    throw Error(ErrorKind::InfeasibleMoments,
                "q_std^2 = " + std::to_string(q_std * q_std) + " must be below q(1-q) = " +
                    std::to_string(q_mean * (1.0 - q_mean)));
  }
}

void NoiseSpec::validate() const {
  if (!(sigma_n >= 0.0)) throw Error(ErrorKind::InvalidConfig, "sigma_n must be non-negative");
}

BetaShape beta_params_from_moments(const QualitySpec& spec) {
  spec.validate();
  if (spec.q_std == 0.0) throw Error(ErrorKind::InfeasibleMoments, "q_std must be positive for a Beta shape");
  const double q = spec.q_mean;
  const double nu = q * (1.0 - q) / (spec.q_std * spec.q_std) - 1.0;
  return {q * nu, (1.0 - q) * nu};
}

double sample_r0(const QualitySpec& spec, CounterStream& rng) {
  if (spec.q_std == 0.0) {
    spec.validate();
    return spec.q_mean;
  }
  const BetaShape shape = beta_params_from_moments(spec);
  std::gamma_distribution<double> ga(shape.a, 1.0);
  std::gamma_distribution<double> gb(shape.b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  const double sum = x + y;
  if (sum == 0.0) return spec.q_mean;
  return std::clamp(x / sum, 0.0, 1.0);
}

double observe_r0_from_deviate(double r0_true, const NoiseSpec& noise, double z) noexcept {
  if (noise.sigma_n == 0.0) return r0_true;
  return std::clamp(r0_true + noise.sigma_n * z, 0.0, 1.0);
}

double observe_r0(double r0_true, const NoiseSpec& noise, CounterStream& rng) {
  if (noise.sigma_n == 0.0) return r0_true;
  std::normal_distribution<double> normal(0.0, 1.0);
  return observe_r0_from_deviate(r0_true, noise, normal(rng));
}

double beta_cdf(const BetaShape& shape, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(shape.a, shape.b, x);
}

std::vector<double> grid_cell_masses(const QualitySpec& spec, std::span<const double> grid) {
  spec.validate();
  if (grid.empty()) throw Error(ErrorKind::Precondition, "R0 grid is empty");
  std::vector<double> edges(grid.size() + 1);
  edges.front() = 0.0;
  edges.back() = 1.0;
  for (std::size_t i = 1; i < grid.size(); ++i) edges[i] = 0.5 * (grid[i - 1] + grid[i]);

  std::vector<double> masses(grid.size(), 0.0);
  if (spec.q_std == 0.0) {
    auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, spec.q_mean);
    masses[static_cast<std::size_t>(it - (edges.begin() + 1))] = 1.0;
    return masses;
  }
  const BetaShape shape = beta_params_from_moments(spec);
  double previous = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double upper = (i + 1 == grid.size()) ? 1.0 : beta_cdf(shape, edges[i + 1]);
    masses[i] = std::max(0.0, upper - previous);
    previous = upper;
  }
  return masses;
}

}  // namespace cascade_limits
