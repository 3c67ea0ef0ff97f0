#ifndef EMSE_SCALAR_CHANNEL_HPP
#define EMSE_SCALAR_CHANNEL_HPP

#include <cstdint>
#include <optional>

#include "emse/prior.hpp"

namespace emse {

/// Y = X + sqrt(sigma2) * W with W ~ N(0,1).
class ScalarChannel {
 public:
  explicit ScalarChannel(double sigma2);
  double sigma2() const { return sigma2_; }
  double snr() const { return 1.0 / sigma2_; }

 private:
  double sigma2_;
};

/// True signal distribution paired with the prior the estimator assumes.
struct MismatchPair {
  Prior true_prior;
  Prior postulated_prior;
};

struct PosteriorMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Posterior mean and variance of X given Y = y under `prior`, in closed form
/// from the mixture representation. Throws std::domain_error if sigma2 <= 0.
PosteriorMoments posterior_moments(const Prior& prior, double y, double sigma2);

/// E_prior[X | Y = y].
double pme(const Prior& prior, double y, double sigma2);

/// d/dy of the posterior mean, Var(X | Y = y) / sigma2.
double pme_derivative(const Prior& prior, double y, double sigma2);

/// MSE of the PME built from pair.postulated_prior when X follows
/// pair.true_prior, by per-component quadrature over Y (method from cfg).
/// When cfg.mc_samples > 0 a Monte Carlo estimate is also computed and a
/// std::runtime_error is thrown if the two disagree by more than five
/// standard errors.
double psi(const MismatchPair& pair, double sigma2, const MseEvalConfig& cfg);

/// Quadrature only, never runs Monte Carlo.
double psi_quadrature(const MismatchPair& pair, double sigma2, const MseEvalConfig& cfg);

/// Fixed-order Gauss-Hermite variant. Converges slowly when the postulated
/// PME switches sharply, as for Bernoulli-Gaussian priors at low noise.
double psi_gauss_hermite(const MismatchPair& pair, double sigma2, int quadrature_order);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

MonteCarloEstimate psi_monte_carlo(const MismatchPair& pair, double sigma2,
                                   std::uint64_t samples, std::uint64_t seed);

/// alpha = dPsi_q/d(sigma2) and beta = d^2Psi_q/d(sigma2)^2 by Richardson
/// extrapolated central differences with step cfg.derivative_step * sigma2.
struct PsiDerivatives {
  double alpha = 0.0;
  double beta = 0.0;
  double alpha_error = 0.0;
  double beta_error = 0.0;
};

PsiDerivatives psi_derivatives(const MismatchPair& pair, double sigma2, const MseEvalConfig& cfg);

/// Psi_q(sigma2) - Psi_p(sigma2).
double emse_s(const MismatchPair& pair, double sigma2, const MseEvalConfig& cfg);

/// D(P_X * N(0,1/snr) || Q_X * N(0,1/snr)) in nats.
double smoothed_relative_entropy(const MismatchPair& pair, double snr, const MseEvalConfig& cfg);

/// Independent route to EMSE_s: 2 dD/d(snr) at snr = 1/sigma2.
double emse_s_via_kl(const MismatchPair& pair, double sigma2, const MseEvalConfig& cfg);

}  // namespace emse

#endif  // EMSE_SCALAR_CHANNEL_HPP
