#include "emse/emse_analysis.hpp"

#include <algorithm>
#include <cmath>

namespace emse {
namespace {

void require_linearization(double alpha, double delta) {
  if (!(alpha < delta)) {
    throw ApproximationError("first-order amplification diverges: alpha >= delta");
  }
}

}  // namespace

EmseReport emse_l_exact(const MismatchPair& pair, const SystemParams& params,
                        const MseEvalConfig& cfg) {
  const MismatchPair matched{pair.true_prior, pair.true_prior};
  const auto fp = solve_se(matched, params, cfg);
  const auto fq = solve_se(pair, params, cfg);

  EmseReport r;
  r.delta = params.delta;
  r.sigma_z2 = params.sigma_z2;
  r.sigma_p2 = fp.sigma2;
  r.sigma_q2 = fq.sigma2;
  r.Delta = fq.sigma2 - fp.sigma2;
  r.emse_s = emse_s(pair, fp.sigma2, cfg);
  r.emse_l_exact = fq.psi_at - fp.psi_at;
  return r;
}

double check_claim_identity(const EmseReport& report, const MismatchPair& pair,
                            const MseEvalConfig& cfg) {
  const double upper = report.sigma_p2 + report.emse_l_exact / report.delta;
  const double integral = psi_quadrature(pair, upper, cfg) -
                          psi_quadrature(pair, report.sigma_p2, cfg);
  return report.emse_s + integral - report.emse_l_exact;
}

double approx_first_order(double emse_s, double alpha, double delta) {
  require_linearization(alpha, delta);
  return delta / (delta - alpha) * emse_s;
}

double approx_second_taylor(double emse_s, double alpha, double beta, double delta) {
  require_linearization(alpha, delta);
  const double gap = delta - alpha;
  return delta * emse_s / gap * (1.0 + 0.5 * beta * emse_s / (gap * gap));
}

double approx_second_sqrt(double emse_s, double alpha, double beta, double delta) {
  require_linearization(alpha, delta);
  const double gap = delta - alpha;
  const double x = 2.0 * beta * emse_s / (gap * gap);
  if (1.0 - x < 0.0) {
    throw ApproximationError("second-order model has no real solution");
  }
  if (std::abs(beta) < 1e-12 * gap * gap / std::max(emse_s, 1e-300)) {
    return delta * emse_s / gap;
  }
  // 1 - sqrt(1 - x) = x / (1 + sqrt(1 - x)) avoids cancellation for small x.
  return delta * gap / beta * (x / (1.0 + std::sqrt(1.0 - x)));
}

std::optional<double> relative_error(double exact, double predicted) {
  if (exact == 0.0) return std::nullopt;
  return std::abs(exact - predicted) / std::abs(exact);
}

EmseReport full_report(const MismatchPair& pair, const SystemParams& params,
                       const MseEvalConfig& cfg) {
  EmseReport r = emse_l_exact(pair, params, cfg);
  const auto d = psi_derivatives(pair, r.sigma_p2, cfg);
  r.alpha = d.alpha;
  r.beta = d.beta;
  r.alpha_error = d.alpha_error;
  r.beta_error = d.beta_error;
  r.beta_positive = d.beta > 0.0;
  r.identity_residual = check_claim_identity(r, pair, cfg);

  try {
    r.approx_first = approx_first_order(r.emse_s, r.alpha, r.delta);
    r.approx_second_taylor = approx_second_taylor(r.emse_s, r.alpha, r.beta, r.delta);
    r.approx_second_sqrt = approx_second_sqrt(r.emse_s, r.alpha, r.beta, r.delta);
  } catch (const ApproximationError& e) {
    r.approximation_note = e.what();
  }
  if (r.approx_first) r.rel_err_first = relative_error(r.emse_l_exact, *r.approx_first);
  if (r.approx_second_taylor) {
    r.rel_err_second_taylor = relative_error(r.emse_l_exact, *r.approx_second_taylor);
  }
  if (r.approx_second_sqrt) {
    r.rel_err_second_sqrt = relative_error(r.emse_l_exact, *r.approx_second_sqrt);
  }
  return r;
}

}  // namespace emse
