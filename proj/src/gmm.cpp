#include "seco/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "seco/error.hpp"

namespace seco {
namespace {

double log_weighted_density(const GmmComponent& c, double x) {
  const double d = x - c.mean;
  return std::log(c.weight) - 0.5 * std::log(2.0 * std::numbers::pi * c.variance) - d * d / (2.0 * c.variance);
}

double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double gmm_log_likelihood(const GmmFit& fit, std::span<const double> samples) {
  double ll = 0.0;
  for (double x : samples) {
    const double a = log_weighted_density(fit.low, x);
    const double b = log_weighted_density(fit.high, x);
    const double m = std::max(a, b);
    ll += m + std::log(std::exp(a - m) + std::exp(b - m));
  }
  return ll;
}

GmmFit fit_gmm2(std::span<const double> samples, int max_iters, double tol) {
  if (samples.size() < kGmmMinSamples)
    throw Error(ErrorCode::TooFewSamples, "need at least 8 samples, got " + std::to_string(samples.size()));
  for (double x : samples)
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteValue, "GMM sample is not finite");

  const auto n = static_cast<double>(samples.size());
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var = std::max(var / n, kGmmVarianceFloor);

  GmmFit fit;
  fit.low = {0.5, percentile(sorted, 0.25), var};
  fit.high = {0.5, percentile(sorted, 0.75), var};
  double ll = gmm_log_likelihood(fit, samples);
  fit.log_likelihood_trace.push_back(ll);

  std::vector<double> resp(samples.size());
  for (int iter = 1; iter <= max_iters; ++iter) {
    // E-step: responsibility of the second component.
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double a = log_weighted_density(fit.low, samples[i]);
      const double b = log_weighted_density(fit.high, samples[i]);
      resp[i] = 1.0 / (1.0 + std::exp(a - b));
    }
    // M-step.
    double n_high = 0.0, s_high = 0.0, s_low = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      n_high += resp[i];
      s_high += resp[i] * samples[i];
      s_low += (1.0 - resp[i]) * samples[i];
    }
    const double n_low = n - n_high;
    // A component that lost all responsibility keeps its previous shape.
    if (n_low > 0.0 && n_high > 0.0) {
      const double mu_low = s_low / n_low, mu_high = s_high / n_high;
      double v_low = 0.0, v_high = 0.0;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const double dl = samples[i] - mu_low, dh = samples[i] - mu_high;
        v_low += (1.0 - resp[i]) * dl * dl;
        v_high += resp[i] * dh * dh;
      }
      fit.low = {n_low / n, mu_low, std::max(v_low / n_low, kGmmVarianceFloor)};
      fit.high = {n_high / n, mu_high, std::max(v_high / n_high, kGmmVarianceFloor)};
    }
    const double next = gmm_log_likelihood(fit, samples);
    fit.log_likelihood_trace.push_back(next);
    fit.iterations = iter;
    const bool converged = std::abs(next - ll) < tol;
    ll = next;
    if (converged || !(n_low > 0.0 && n_high > 0.0)) break;
  }
  fit.log_likelihood = ll;
  if (fit.low.mean > fit.high.mean) std::swap(fit.low, fit.high);
  return fit;
}

double noise_posterior(const GmmFit& fit, double loss) {
  const double a = log_weighted_density(fit.low, loss);
  const double b = log_weighted_density(fit.high, loss);
  return 1.0 / (1.0 + std::exp(a - b));
}

}  // namespace seco
