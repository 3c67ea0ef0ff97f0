#include "emse/scalar_channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "emse/finite_difference.hpp"
#include "emse/quadrature.hpp"

namespace emse {
namespace {

void require_positive_noise(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw std::domain_error("noise variance must be positive, got " + std::to_string(sigma2));
  }
}

// log of weight_k * N(y; m_k, v_k + sigma2) up to the common -0.5 log(2 pi).
double component_log_evidence(const MixtureComponent& c, double y, double sigma2) {
  const double total = c.variance + sigma2;
  const double d = y - c.mean;
  return std::log(c.weight) - 0.5 * std::log(total) - 0.5 * d * d / total;
}

template <class F>
double component_expectation(const MseEvalConfig& cfg, F&& f) {
  if (cfg.quadrature == QuadratureMethod::gauss_hermite) {
    return gauss_hermite(cfg.quadrature_order).expectation(f);
  }
  return normal_expectation(f, cfg.quadrature_tol);
}

}  // namespace

ScalarChannel::ScalarChannel(double sigma2) : sigma2_(sigma2) { require_positive_noise(sigma2); }

PosteriorMoments posterior_moments(const Prior& prior, double y, double sigma2) {
  require_positive_noise(sigma2);
  const auto comps = prior.components();

  double max_log = -std::numeric_limits<double>::infinity();
  for (const auto& c : comps) max_log = std::max(max_log, component_log_evidence(c, y, sigma2));

  double norm = 0.0;
  double first = 0.0;
  double second = 0.0;
  for (const auto& c : comps) {
    const double w = std::exp(component_log_evidence(c, y, sigma2) - max_log);
    const double total = c.variance + sigma2;
    const double cond_mean = (y * c.variance + c.mean * sigma2) / total;
    const double cond_var = c.variance * sigma2 / total;
    norm += w;
    first += w * cond_mean;
    second += w * (cond_mean * cond_mean + cond_var);
  }
  PosteriorMoments m;
  m.mean = first / norm;
  m.variance = std::max(0.0, second / norm - m.mean * m.mean);
  return m;
}

double pme(const Prior& prior, double y, double sigma2) {
  return posterior_moments(prior, y, sigma2).mean;
}

double pme_derivative(const Prior& prior, double y, double sigma2) {
  return posterior_moments(prior, y, sigma2).variance / sigma2;
}

double psi_quadrature(const MismatchPair& pair, double sigma2, const MseEvalConfig& cfg) {
  require_positive_noise(sigma2);
  double total = 0.0;
  for (const auto& c : pair.true_prior.components()) {
    const double marginal_var = c.variance + sigma2;
    const double scale = std::sqrt(marginal_var);
    const double residual_var = c.variance * sigma2 / marginal_var;
    // Given Y and this component, X is N(cond_mean, residual_var).
    const double component_mse = component_expectation(cfg, [&](double z) {
      const double y = c.mean + scale * z;
      const double cond_mean = (y * c.variance + c.mean * sigma2) / marginal_var;
      const double err = pme(pair.postulated_prior, y, sigma2) - cond_mean;
      return err * err + residual_var;
    });
    total += c.weight * component_mse;
  }
  return total;
}

double psi_gauss_hermite(const MismatchPair& pair, double sigma2, int quadrature_order) {
  MseEvalConfig cfg;
  cfg.quadrature = QuadratureMethod::gauss_hermite;
  cfg.quadrature_order = quadrature_order;
  cfg.validate();
  return psi_quadrature(pair, sigma2, cfg);
}

MonteCarloEstimate psi_monte_carlo(const MismatchPair& pair, double sigma2,
                                   std::uint64_t samples, std::uint64_t seed) {
  require_positive_noise(sigma2);
  if (samples < 2) throw std::invalid_argument("Monte Carlo needs at least two samples");
  const auto x = pair.true_prior.sample(samples, derive_seed(seed, 0));
  std::mt19937_64 rng(derive_seed(seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma = std::sqrt(sigma2);

  // Welford accumulation.
  double mean = 0.0;
  double m2 = 0.0;
  std::uint64_t k = 0;
  for (double xi : x) {
    const double y = xi + sigma * normal(rng);
    const double err = pme(pair.postulated_prior, y, sigma2) - xi;
    const double v = err * err;
    ++k;
    const double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  const double var = m2 / static_cast<double>(k - 1);
  return {mean, std::sqrt(var / static_cast<double>(k))};
}

double psi(const MismatchPair& pair, double sigma2, const MseEvalConfig& cfg) {
  cfg.validate();
  const double value = psi_quadrature(pair, sigma2, cfg);
  if (cfg.mc_samples > 0) {
    const auto mc = psi_monte_carlo(pair, sigma2, cfg.mc_samples, cfg.seed);
    if (std::abs(value - mc.mean) > 5.0 * mc.std_error) {
      throw std::runtime_error("quadrature and Monte Carlo MSE disagree: " +
                               std::to_string(value) + " vs " + std::to_string(mc.mean) +
                               " +- " + std::to_string(mc.std_error));
    }
  }
  return value;
}

PsiDerivatives psi_derivatives(const MismatchPair& pair, double sigma2, const MseEvalConfig& cfg) {
  cfg.validate();
  require_positive_noise(sigma2);
  // Relative step below 0.5 keeps every stencil point above zero.
  const double h = cfg.derivative_step * sigma2;
  const auto est = richardson_derivatives(
      [&](double s) { return psi_quadrature(pair, s, cfg); }, sigma2, h);
  return {est.first, est.second, est.first_error, est.second_error};
}

double emse_s(const MismatchPair& pair, double sigma2, const MseEvalConfig& cfg) {
  const MismatchPair matched{pair.true_prior, pair.true_prior};
  const double value = psi(pair, sigma2, cfg) - psi(matched, sigma2, cfg);
  if (value < -1e-9) {
    throw std::logic_error("negative scalar EMSE " + std::to_string(value) +
                           ": quadrature is not resolving the MSE curve");
  }
  return value;
}

double smoothed_relative_entropy(const MismatchPair& pair, double snr, const MseEvalConfig& cfg) {
  if (!(snr > 0.0)) throw std::domain_error("snr must be positive");
  const double sigma2 = 1.0 / snr;
  double total = 0.0;
  for (const auto& c : pair.true_prior.components()) {
    const double scale = std::sqrt(c.variance + sigma2);
    total += c.weight * component_expectation(cfg, [&](double z) {
      const double y = c.mean + scale * z;
      return pair.true_prior.log_smoothed_density(y, sigma2) -
             pair.postulated_prior.log_smoothed_density(y, sigma2);
    });
  }
  return total;
}

double emse_s_via_kl(const MismatchPair& pair, double sigma2, const MseEvalConfig& cfg) {
  cfg.validate();
  require_positive_noise(sigma2);
  const double snr = 1.0 / sigma2;
  const double slope = richardson_first_derivative(
      [&](double g) { return smoothed_relative_entropy(pair, g, cfg); }, snr,
      cfg.derivative_step * snr);
  return 2.0 * slope;
}

}  // namespace emse
