#ifndef EMSE_AMP_HPP
#define EMSE_AMP_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "emse/prior.hpp"
#include "emse/state_evolution.hpp"

namespace emse {

/// y = A x + z with A_ij ~ N(0, 1/m) i.i.d. and z ~ N(0, sigma_z2 I).
struct LinearSystemInstance {
  std::size_t n = 0;
  std::size_t m = 0;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd x_true;
  Eigen::VectorXd y;
  double sigma_z2 = 0.0;
  std::uint64_t seed = 0;

  double delta() const { return static_cast<double>(m) / static_cast<double>(n); }
};

/// x_true drawn from `prior`. Matrix, signal and noise use distinct sub-seeds
/// of `seed`, so the same seed reproduces the instance bit for bit.
LinearSystemInstance generate_instance(const Prior& prior, std::size_t n,
                                       const SystemParams& params, std::uint64_t seed);

/// Same, for a caller-supplied signal.
LinearSystemInstance build_instance(std::vector<double> x_true, const SystemParams& params,
                                    std::uint64_t seed);

/// Denoiser applied to AMP's pseudo-data v = x + A^T r at effective noise sigma2.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  virtual void apply(std::span<const double> v, double sigma2, std::span<double> out) const = 0;

  /// Entry i of the output depends on v_i only.
  virtual bool separable() const = 0;

  /// (1/n) sum_i d out_i / d v_i, if known in closed form.
  virtual std::optional<double> analytic_divergence(std::span<const double> /*v*/,
                                                    double /*sigma2*/) const {
    return std::nullopt;
  }
};

/// Entrywise posterior mean under a postulated scalar prior.
class PriorDenoiser final : public Denoiser {
 public:
  explicit PriorDenoiser(Prior postulated) : prior_(std::move(postulated)) {}

  void apply(std::span<const double> v, double sigma2, std::span<double> out) const override;
  bool separable() const override { return true; }
  std::optional<double> analytic_divergence(std::span<const double> v,
                                            double sigma2) const override;

  const Prior& prior() const { return prior_; }

 private:
  Prior prior_;
};

enum class DivergenceMode { analytic, finite_difference };

struct AmpConfig {
  int max_iters = 200;
  /// Stop once |sigma2_t - sigma2_{t-1}| < halt_tol * sigma2_t.
  double halt_tol = 1e-8;
  /// analytic falls back to finite differences when the denoiser has no
  /// closed form. Finite differences use step 1e-4 * sigma_t; non-separable
  /// denoisers get one Rademacher probe, re-drawn every iteration.
  DivergenceMode divergence_mode = DivergenceMode::analytic;
  std::uint64_t probe_seed = 0;

  void validate() const;
};

struct AmpTrace {
  /// ||x_t - x_true||^2 / n per iteration.
  std::vector<double> mse;
  /// ||r_t||^2 / m per iteration, the effective noise the denoiser saw.
  std::vector<double> sigma2_est;
  Eigen::VectorXd estimate;
  bool converged = false;

  int iterations() const { return static_cast<int>(mse.size()); }
  double final_mse() const { return mse.empty() ? 0.0 : mse.back(); }
};

class AmpDivergenceError : public std::runtime_error {
 public:
  AmpDivergenceError(const std::string& what, AmpTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const AmpTrace& trace() const { return trace_; }

 private:
  AmpTrace trace_;
};

/// AMP with Onsager correction:
///   x_{t+1} = eta_t(x_t + A^T r_t),
///   r_t = y - A x_t + (1/delta) r_{t-1} <eta'_{t-1}>,
/// with eta_t evaluated at sigma_t^2 = ||r_t||^2 / m. Throws
/// AmpDivergenceError when the MSE exceeds ten times the signal's second
/// moment for five consecutive iterations.
AmpTrace run_amp(const LinearSystemInstance& instance, const Denoiser& denoiser,
                 const AmpConfig& cfg = {});

AmpTrace run_amp(const LinearSystemInstance& instance, const Prior& postulated,
                 const AmpConfig& cfg = {});

struct MeanWithError {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanWithError mean_and_stderr(std::span<const double> values);

/// Paired finite-N estimate of EMSE_l: each trial draws one instance and runs
/// AMP with the true and with the postulated prior on it.
struct EmpiricalEmse {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> mse_true_prior;
  std::vector<double> mse_postulated;
};

EmpiricalEmse empirical_emse_l(const Prior& prior, const Prior& postulated, std::size_t n,
                               const SystemParams& params, int trials, std::uint64_t seed,
                               const AmpConfig& cfg = {});

/// Reference estimator with independent instances for the two denoisers.
EmpiricalEmse empirical_emse_l_unpaired(const Prior& prior, const Prior& postulated,
                                        std::size_t n, const SystemParams& params, int trials,
                                        std::uint64_t seed, const AmpConfig& cfg = {});

}  // namespace emse

#endif  // EMSE_AMP_HPP
