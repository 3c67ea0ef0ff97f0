#ifndef EMSE_MARKOV_WINDOW_HPP
#define EMSE_MARKOV_WINDOW_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "emse/amp.hpp"
#include "emse/state_evolution.hpp"

namespace emse {

/// Two-state Markov source emitting value0 in the off state and value1 in
/// the on state. Defaults give a block-sparse signal with 10% nonzeros,
/// runs of ones of mean length 5 and runs of zeros of mean length 45.
struct MarkovChainSpec {
  /// Pr[off | on]
  double p10 = 0.2;
  /// Pr[on | off]
  double p01 = 1.0 / 45.0;
  double value0 = 0.0;
  double value1 = 1.0;

  void validate() const;
  double stationary_on() const { return p01 / (p01 + p10); }
  double mean() const;
  double second_moment() const;
  double variance() const { return second_moment() - mean() * mean(); }
};

/// First state from the stationary law; deterministic in seed.
std::vector<double> sample_markov(const MarkovChainSpec& chain, std::size_t n, std::uint64_t seed);

/// Posterior over the 2^w state patterns of a window of observations
/// y_k = value(s_k) + noise. Bit k of the pattern index is the state of entry k.
std::vector<double> pattern_posterior(const MarkovChainSpec& chain, std::span<const double> y,
                                      double sigma2);

/// E[x(target) | y] for a window of one to three observations, by exact
/// enumeration of state patterns in the log domain.
double window_posterior_mean(const MarkovChainSpec& chain, std::span<const double> y,
                             std::size_t target, double sigma2);

/// Bayesian sliding-window denoiser. Window 2 estimates the last entry from
/// (y(i-1), y(i)); window 3 estimates the middle entry from
/// (y(i-1), y(i), y(i+1)).
class WindowDenoiser {
 public:
  WindowDenoiser(MarkovChainSpec chain, int window);

  const MarkovChainSpec& chain() const { return chain_; }
  int window() const { return window_; }
  std::size_t target() const { return target_; }
  /// Entries before / after the target inside a full window.
  std::size_t lead() const { return target_; }
  std::size_t trail() const { return static_cast<std::size_t>(window_) - 1 - target_; }

  /// Posterior mean of the target entry; y_window.size() == window().
  double operator()(std::span<const double> y_window, double sigma2) const;

  /// Slides over a whole sequence. Entries near the ends use the truncated
  /// window that fits.
  void denoise(std::span<const double> y, double sigma2, std::span<double> out) const;

 private:
  MarkovChainSpec chain_;
  int window_;
  std::size_t target_;
};

double window_pme(const WindowDenoiser& d, std::span<const double> y_window, double sigma2);

/// Adapter so AMP can run a window denoiser on its pseudo-data.
class SequenceDenoiser final : public Denoiser {
 public:
  explicit SequenceDenoiser(WindowDenoiser d) : d_(std::move(d)) {}
  void apply(std::span<const double> v, double sigma2, std::span<double> out) const override {
    d_.denoise(v, sigma2, out);
  }
  bool separable() const override { return false; }

 private:
  WindowDenoiser d_;
};

/// Monte Carlo budget for window-denoiser MSE curves. The sample is split
/// into `chunks` independent Markov sequences with their own sub-seeds; the
/// standard error comes from the spread of per-chunk means.
struct WindowMcConfig {
  std::uint64_t samples = 1'000'000;
  int chunks = 64;
  std::uint64_t seed = 1;
};

/// Holds one frozen draw of signal and unit noise, so the MSE curve is a
/// smooth function of sigma2 (common random numbers across noise levels and
/// across denoisers).
class WindowMseEvaluator {
 public:
  WindowMseEvaluator(MarkovChainSpec chain, WindowMcConfig cfg);

  const MarkovChainSpec& chain() const { return chain_; }
  const WindowMcConfig& config() const { return cfg_; }

  /// Per-entry MSE of `d` at noise sigma2; boundary entries excluded.
  MeanWithError psi(const WindowDenoiser& d, double sigma2) const;

  /// Paired estimate of psi(worse) - psi(better) on shared noise.
  MeanWithError psi_difference(const WindowDenoiser& worse, const WindowDenoiser& better,
                               double sigma2) const;

 private:
  std::vector<double> chunk_errors(const WindowDenoiser& d, double sigma2) const;

  MarkovChainSpec chain_;
  WindowMcConfig cfg_;
  std::vector<std::vector<double>> signal_;
  std::vector<std::vector<double>> noise_;
};

MeanWithError psi_window(const WindowDenoiser& d, double sigma2, std::uint64_t mc_samples,
                         std::uint64_t seed);

/// delta (sigma2 - sigma_z2) = psi_window(sigma2) by fixed-point iteration from
/// sigma_z2 + E[X^2]/delta; halts when the update is below
/// max(1e-6, 3 * stderr of psi).
FixedPointSolution se_with_window(const WindowDenoiser& d, const SystemParams& params,
                                  const WindowMseEvaluator& mc, double derivative_step = 1e-3);

FixedPointSolution se_with_window(const WindowDenoiser& d, const SystemParams& params,
                                  std::uint64_t mc_samples, std::uint64_t seed);

struct Fig2Row {
  double delta = 0.0;
  double sigma2_of_delta = 0.0;
  double mse_x3 = 0.0;
  double mse_x2_scalar = 0.0;
  double emse_s = 0.0;
  double emse_s_stderr = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double predicted_emse_l = 0.0;
  double predicted_mse_x2_amp = 0.0;
};

/// Predicts the MSE of AMP run with the `worse` window denoiser from the
/// fixed point of AMP with the `better` one: EMSE_s at sigma2(delta), alpha
/// and beta of the worse denoiser's MSE curve there, and the square-root
/// second-order amplification formula.
std::vector<Fig2Row> predict_fig2(const MarkovChainSpec& chain, std::span<const double> delta_grid,
                                  double sigma_z2, const MseEvalConfig& cfg,
                                  const WindowMcConfig& mc, int better_window = 3,
                                  int worse_window = 2);

/// Mean final MSE of AMP with a window denoiser on Markov signals.
MeanWithError amp_window_mse(const WindowDenoiser& d, std::size_t n, const SystemParams& params,
                             int trials, std::uint64_t seed, const AmpConfig& cfg);

}  // namespace emse

#endif  // EMSE_MARKOV_WINDOW_HPP
