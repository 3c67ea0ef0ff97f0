#ifndef EMSE_STATE_EVOLUTION_HPP
#define EMSE_STATE_EVOLUTION_HPP

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "emse/scalar_channel.hpp"

namespace emse {

/// Measurement rate delta = M/N and measurement noise variance.
struct SystemParams {
  double delta = 1.0;
  double sigma_z2 = 0.0;

  void validate() const;
};

struct FixedPointSolution {
  double sigma2 = 0.0;
  double psi_at = 0.0;
  /// Psi'(sigma2) < delta: the fixed-point map contracts around the root.
  bool stable = false;
  double slope = 0.0;
  int iterations = 0;
  /// |delta (sigma2 - sigma_z2) - Psi(sigma2)|
  double residual = 0.0;
};

/// Raised when a fixed-point iteration runs out of iterations.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> tail)
      : std::runtime_error(what), tail_(std::move(tail)) {}
  const std::vector<double>& trajectory_tail() const { return tail_; }

 private:
  std::vector<double> tail_;
};

struct FixedPointIteration {
  double sigma2 = 0.0;
  int iterations = 0;
};

/// Iterates sigma2 <- sigma_z2 + Psi(sigma2) / delta from `start` until the
/// update drops below max(rel_tol * sigma2, abs_tol).
template <class PsiFn>
FixedPointIteration iterate_state_evolution(PsiFn&& psi_fn, const SystemParams& params,
                                            double start, double rel_tol, double abs_tol,
                                            int max_iters) {
  double current = start;
  std::deque<double> tail;
  for (int it = 1; it <= max_iters; ++it) {
    const double next = params.sigma_z2 + psi_fn(current) / params.delta;
    tail.push_back(next);
    if (tail.size() > 16) tail.pop_front();
    if (!std::isfinite(next)) break;
    if (std::abs(next - current) < std::max(rel_tol * current, abs_tol)) return {next, it};
    current = next;
  }
  throw ConvergenceError("state evolution did not converge",
                         std::vector<double>(tail.begin(), tail.end()));
}

/// sigma_z2 + E_p[X^2] / delta, the decoupled noise level of a zero estimate.
double initial_sigma2(const MismatchPair& pair, const SystemParams& params);

/// Solves delta (sigma2 - sigma_z2) = Psi_q(sigma2) by plain iteration from
/// initial_sigma2. Stops when the update is below 1e-12 relative (or
/// 1e-15 * initial_sigma2, for noiseless systems collapsing to zero) or
/// after 10^4 iterations (ConvergenceError).
FixedPointSolution solve_se(const MismatchPair& pair, const SystemParams& params,
                            const MseEvalConfig& cfg);

struct ScanGrid {
  double lo = 0.0;
  double hi = 0.0;
  int count = 512;
};

/// Every sign change of delta (sigma2 - sigma_z2) - Psi_q(sigma2) on a
/// geometric grid, refined by bisection to 1e-12 relative. Defaults to
/// [sigma_z2, initial_sigma2] with 512 points.
std::vector<FixedPointSolution> scan_fixed_points(const MismatchPair& pair,
                                                  const SystemParams& params,
                                                  const MseEvalConfig& cfg,
                                                  std::optional<ScanGrid> grid = std::nullopt);

}  // namespace emse

#endif  // EMSE_STATE_EVOLUTION_HPP
