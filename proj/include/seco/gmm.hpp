#pragma once

#include <span>

#include "seco/types.hpp"

namespace seco {

inline constexpr double kGmmVarianceFloor = 1e-8;
inline constexpr std::size_t kGmmMinSamples = 8;

/// Two-component 1-D Gaussian mixture fitted with EM.
///
/// Initialisation: means at the 25th/75th percentiles, equal weights, both
/// variances set to the sample variance. Stops once the log-likelihood moves by
/// less than `tol` or after `max_iters` EM steps. The returned components are
/// ordered so that low.mean <= high.mean. Throws TooFewSamples below 8 values.
GmmFit fit_gmm2(std::span<const double> samples, int max_iters = 100, double tol = 1e-6);

/// Total log-likelihood of the samples under the mixture.
double gmm_log_likelihood(const GmmFit& fit, std::span<const double> samples);

/// Posterior responsibility of the high-mean component at `loss`.
double noise_posterior(const GmmFit& fit, double loss);

}  // namespace seco
