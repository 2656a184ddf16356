#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "seco/error.hpp"
#include "seco/gmm.hpp"

using namespace seco;

namespace {

std::vector<double> mixture(int n, double w_hi, double mu_lo, double sd_lo, double mu_hi, double sd_hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> lo(mu_lo, sd_lo), hi(mu_hi, sd_hi);
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(u(rng) < w_hi ? hi(rng) : lo(rng));
  return out;
}

void check_monotone(const GmmFit& fit) {
  for (std::size_t i = 1; i < fit.log_likelihood_trace.size(); ++i)
    CHECK(fit.log_likelihood_trace[i] >= fit.log_likelihood_trace[i - 1] - 1e-9 * std::abs(fit.log_likelihood_trace[i - 1]));
}

}  // namespace

TEST_CASE("recovers a well separated mixture") {
  const auto xs = mixture(5000, 0.5, 0.0, 0.01, 1.0, 0.01, 17);
  const GmmFit fit = fit_gmm2(xs);
  CHECK(std::abs(fit.low.mean - 0.0) < 0.05);
  CHECK(std::abs(fit.high.mean - 1.0) < 0.05);
  CHECK(std::abs(fit.low.weight - 0.5) < 0.05);
  CHECK(std::abs(fit.high.weight - 0.5) < 0.05);
  CHECK(fit.low.mean <= fit.high.mean);
  check_monotone(fit);
  CHECK(fit.log_likelihood == doctest::Approx(gmm_log_likelihood(fit, xs)));
}

TEST_CASE("log-likelihood never decreases on overlapping mixtures") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto xs = mixture(800, 0.3, 0.2, 0.3, 1.5, 0.8, seed);
    check_monotone(fit_gmm2(xs, 200, 1e-10));
  }
}

TEST_CASE("constant samples give a degenerate but valid fit") {
  const std::vector<double> xs(50, 0.7);
  const GmmFit fit = fit_gmm2(xs);
  CHECK(fit.low.mean == doctest::Approx(0.7));
  CHECK(fit.high.mean == doctest::Approx(0.7));
  CHECK(fit.low.variance == kGmmVarianceFloor);
  CHECK(fit.high.variance == kGmmVarianceFloor);
  CHECK(std::isfinite(fit.log_likelihood));
}

TEST_CASE("too few or non-finite samples") {
  CHECK_THROWS_AS(fit_gmm2(std::vector<double>(7, 1.0)), Error);
  std::vector<double> xs(10, 1.0);
  xs[3] = std::nan("");
  CHECK_THROWS_AS(fit_gmm2(xs), Error);
}

TEST_CASE("posterior at the midpoint of a symmetric mixture is one half") {
  GmmFit fit;
  fit.low = {0.5, 0.0, 0.25};
  fit.high = {0.5, 2.0, 0.25};
  CHECK(noise_posterior(fit, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(noise_posterior(fit, -1e6) < 1e-12);
  CHECK(noise_posterior(fit, 1e6) > 1.0 - 1e-12);
}

TEST_CASE("posterior matches Bayes rule") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> w(0.05, 0.95), mu(-2, 4), var(0.01, 3), x(-5, 8);
  for (int trial = 0; trial < 2000; ++trial) {
    GmmFit fit;
    const double wl = w(rng);
    double m1 = mu(rng), m2 = mu(rng);
    if (m1 > m2) std::swap(m1, m2);
    fit.low = {wl, m1, var(rng)};
    fit.high = {1 - wl, m2, var(rng)};
    const double l = x(rng);
    const double want =
        oracle::posterior_high(fit.low.weight, fit.low.mean, fit.low.variance, fit.high.weight, fit.high.mean, fit.high.variance, l);
    CHECK(std::abs(noise_posterior(fit, l) - want) < 1e-9);
  }
}

TEST_CASE("posterior is monotone in loss over the fitted range") {
  const auto xs = mixture(2000, 0.25, 0.1, 0.05, 1.2, 0.07, 3);
  const GmmFit fit = fit_gmm2(xs);
  double lo = *std::min_element(xs.begin(), xs.end()), hi = *std::max_element(xs.begin(), xs.end());
  double prev = -1;
  for (int i = 0; i <= 1000; ++i) {
    const double l = lo + (hi - lo) * i / 1000.0;
    if (l > fit.high.mean) break;
    const double eta = noise_posterior(fit, l);
    CHECK(eta >= prev - 1e-12);
    prev = eta;
  }
}
