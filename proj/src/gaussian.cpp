#include "titan/models/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace titan::models {

double bivariate_nll(const Bivariate& g, double x, double y) {
  if (!(g.sigma_x > 0.0) || !(g.sigma_y > 0.0) || !(std::abs(g.rho) < 1.0))
    throw std::domain_error("bivariate_nll: sigma must be positive and |rho| < 1");
  if (!std::isfinite(x) || !std::isfinite(y))
    throw std::domain_error("bivariate_nll: non-finite observation");
  const double q = 1.0 - g.rho * g.rho;
  const double a = (x - g.mu_x) / g.sigma_x;
  const double b = (y - g.mu_y) / g.sigma_y;
  const double z = a * a - 2.0 * g.rho * a * b + b * b;
  return std::log(2.0 * std::numbers::pi) + std::log(g.sigma_x) +
         std::log(g.sigma_y) + 0.5 * std::log(q) + z / (2.0 * q);
}

void sample_bivariate(const Bivariate& g, core::Rng& rng, double& x, double& y) {
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  x = g.mu_x + g.sigma_x * z1;
  y = g.mu_y + g.sigma_y * (g.rho * z1 + std::sqrt(1.0 - g.rho * g.rho) * z2);
}

StepForecast transform_output(std::span<const double> y10) {
  if (y10.size() != 10)
    throw std::invalid_argument("transform_output: expected 10 values");
  const double span = kSigmaMax - kSigmaMin;
  auto gauss = [&](int base) {
    Bivariate g;
    g.mu_x = y10[base];
    g.mu_y = y10[base + 1];
    g.sigma_x = kSigmaMin + y10[base + 2] * span;
    g.sigma_y = kSigmaMin + y10[base + 3] * span;
    g.rho = 1.98 * y10[base + 4] - kRhoBound;
    return g;
  };
  return {gauss(0), gauss(5)};
}

double fol_nll(const BoxForecast& forecast, std::span<const data::BBox> truth) {
  if (forecast.empty() || forecast.size() != truth.size())
    throw std::invalid_argument("fol_nll: length mismatch");
  double total = 0.0;
  for (size_t t = 0; t < forecast.size(); ++t) {
    total += bivariate_nll(forecast[t].center, truth[t].c_u, truth[t].c_v);
    total += bivariate_nll(forecast[t].dims, truth[t].l_u, truth[t].l_v);
  }
  return total / static_cast<double>(forecast.size());
}

std::vector<data::BBox> forecast_mean(const BoxForecast& forecast) {
  std::vector<data::BBox> out;
  out.reserve(forecast.size());
  for (const StepForecast& s : forecast)
    out.push_back({s.center.mu_x, s.center.mu_y, s.dims.mu_x, s.dims.mu_y});
  return out;
}

std::vector<std::vector<data::BBox>> sample_forecast(const BoxForecast& forecast,
                                                     int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("sample_forecast: k must be >= 1");
  core::Rng rng(seed);
  std::vector<std::vector<data::BBox>> out(k);
  for (int i = 0; i < k; ++i) {
    out[i].reserve(forecast.size());
    for (const StepForecast& s : forecast) {
      data::BBox b;
      sample_bivariate(s.center, rng, b.c_u, b.c_v);
      sample_bivariate(s.dims, rng, b.l_u, b.l_v);
      out[i].push_back(b);
    }
  }
  return out;
}

}  // namespace titan::models
