#pragma once

#include <span>
#include <vector>

#include "titan/core/rng.hpp"
#include "titan/data/types.hpp"

namespace titan::models {

inline constexpr double kSigmaMin = 1e-3;
inline constexpr double kSigmaMax = 0.5;
inline constexpr double kRhoBound = 0.99;

struct Bivariate {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double rho = 0.0;
};

// Negative log density at (x, y).  Throws std::domain_error unless both
// sigmas are positive and |rho| < 1.
double bivariate_nll(const Bivariate& g, double x, double y);

// One correlated draw; consumes exactly two normals from rng.
void sample_bivariate(const Bivariate& g, core::Rng& rng, double& x, double& y);

// One future step: a Gaussian over the box center and one over the box
// dimensions, in normalized image coordinates.
struct StepForecast {
  Bivariate center;
  Bivariate dims;
};

using BoxForecast = std::vector<StepForecast>;  // one entry per future step

// Maps the network's 10 sigmoid outputs y in (0,1) to forecast parameters:
// mu = y, sigma = kSigmaMin + y*(kSigmaMax - kSigmaMin), rho = 1.98*y - 0.99.
// Layout: [mu_cu, mu_cv, s_cu, s_cv, rho_c, mu_lu, mu_lv, s_lu, s_lv, rho_l].
StepForecast transform_output(std::span<const double> y10);

// Mean negative log-likelihood of the truth under the forecast: for each
// step, center NLL plus dimension NLL, averaged over steps.
double fol_nll(const BoxForecast& forecast, std::span<const data::BBox> truth);

// Mean trajectory (mu series).
std::vector<data::BBox> forecast_mean(const BoxForecast& forecast);

// k independent trajectories; centers and dimensions sampled per step from
// their bivariate Gaussians.  Deterministic in seed.
std::vector<std::vector<data::BBox>> sample_forecast(const BoxForecast& forecast,
                                                     int k, std::uint64_t seed);

}  // namespace titan::models
