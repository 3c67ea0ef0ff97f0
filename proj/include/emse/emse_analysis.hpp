#ifndef EMSE_EMSE_ANALYSIS_HPP
#define EMSE_EMSE_ANALYSIS_HPP

#include <optional>
#include <stdexcept>
#include <string>

#include "emse/state_evolution.hpp"

namespace emse {

/// Raised when a closed-form EMSE_l approximation has no valid value
/// (alpha >= delta, or a negative discriminant in the square-root form).
class ApproximationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Scalar and large-system excess MSE for one (true, postulated) prior pair
/// together with the three closed-form predictions of EMSE_l.
///
/// Optional fields are empty when the quantity is undefined: approximations
/// when alpha >= delta, relative errors when the exact EMSE_l is zero.
struct EmseReport {
  double delta = 0.0;
  double sigma_z2 = 0.0;
  double sigma_p2 = 0.0;
  double sigma_q2 = 0.0;
  /// sigma_q2 - sigma_p2
  double Delta = 0.0;
  double emse_s = 0.0;
  double emse_l_exact = 0.0;

  double alpha = 0.0;
  double beta = 0.0;
  double alpha_error = 0.0;
  double beta_error = 0.0;
  /// beta > 0: Psi_q is locally convex and the square-root form is used
  /// outside the regime it was derived for.
  bool beta_positive = false;

  std::optional<double> approx_first;
  std::optional<double> approx_second_taylor;
  std::optional<double> approx_second_sqrt;
  std::optional<double> rel_err_first;
  std::optional<double> rel_err_second_taylor;
  std::optional<double> rel_err_second_sqrt;
  /// Why an approximation is missing, if one is.
  std::string approximation_note;

  double identity_residual = 0.0;

  /// delta / (delta - alpha)
  double amplification() const { return delta / (delta - alpha); }
};

/// Solves state evolution with p and with q as postulated prior and fills
/// sigma_p2, sigma_q2, Delta, emse_s and emse_l_exact = Psi_q(sigma_q2) - Psi_p(sigma_p2).
EmseReport emse_l_exact(const MismatchPair& pair, const SystemParams& params,
                        const MseEvalConfig& cfg);

/// EMSE_s(sigma_p2) + [Psi_q(sigma_p2 + EMSE_l/delta) - Psi_q(sigma_p2)] - EMSE_l.
double check_claim_identity(const EmseReport& report, const MismatchPair& pair,
                            const MseEvalConfig& cfg);

/// delta / (delta - alpha) * emse_s
double approx_first_order(double emse_s, double alpha, double delta);

/// First-order value times (1 + beta * emse_s / (2 (delta - alpha)^2)).
double approx_second_taylor(double emse_s, double alpha, double beta, double delta);

/// Root of the quadratic EMSE_l = emse_s + alpha E/delta + beta/2 (E/delta)^2
/// that tends to the first-order value as beta -> 0:
///   delta (delta - alpha) / beta * (1 - sqrt(1 - 2 beta emse_s / (delta - alpha)^2)).
double approx_second_sqrt(double emse_s, double alpha, double beta, double delta);

/// |exact - predicted| / exact, empty when exact == 0.
std::optional<double> relative_error(double exact, double predicted);

/// Everything in EmseReport, with alpha and beta taken at sigma_p2.
EmseReport full_report(const MismatchPair& pair, const SystemParams& params,
                       const MseEvalConfig& cfg);

}  // namespace emse

#endif  // EMSE_EMSE_ANALYSIS_HPP
