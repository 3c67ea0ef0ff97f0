#include "emse/markov_window.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "emse/emse_analysis.hpp"
#include "emse/finite_difference.hpp"

namespace emse {
namespace {

constexpr std::size_t kMaxWindow = 3;
constexpr std::size_t kMaxPatterns = std::size_t{1} << kMaxWindow;

// Log prior of every state pattern of a given length under the stationary chain.
struct PatternTable {
  std::size_t length = 0;
  std::array<double, kMaxPatterns> log_prior{};
};

PatternTable make_table(const MarkovChainSpec& chain, std::size_t length) {
  const double log_state[2] = {std::log(1.0 - chain.stationary_on()),
                               std::log(chain.stationary_on())};
  // log_transition[from][to]
  const double log_transition[2][2] = {{std::log(1.0 - chain.p01), std::log(chain.p01)},
                                       {std::log(chain.p10), std::log(1.0 - chain.p10)}};
  PatternTable table;
  table.length = length;
  for (std::size_t pattern = 0; pattern < (std::size_t{1} << length); ++pattern) {
    int prev = static_cast<int>(pattern & 1u);
    double lp = log_state[prev];
    for (std::size_t k = 1; k < length; ++k) {
      const int cur = static_cast<int>((pattern >> k) & 1u);
      lp += log_transition[prev][cur];
      prev = cur;
    }
    table.log_prior[pattern] = lp;
  }
  return table;
}

void require_window_noise(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw std::domain_error("noise variance must be positive");
  }
}

// Fills weights[0 .. 2^len) with normalized pattern posteriors.
void pattern_weights(const PatternTable& table, const MarkovChainSpec& chain, const double* y,
                     double sigma2, double* weights) {
  // Log-likelihood ratio of the on state against the off state per entry;
  // terms shared by all patterns cancel in the normalization.
  std::array<double, kMaxWindow> on_llr{};
  for (std::size_t k = 0; k < table.length; ++k) {
    const double d0 = y[k] - chain.value0;
    const double d1 = y[k] - chain.value1;
    on_llr[k] = (d0 * d0 - d1 * d1) / (2.0 * sigma2);
  }
  const std::size_t count = std::size_t{1} << table.length;
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < count; ++p) {
    double lw = table.log_prior[p];
    for (std::size_t k = 0; k < table.length; ++k) {
      if ((p >> k) & 1u) lw += on_llr[k];
    }
    weights[p] = lw;
    max_log = std::max(max_log, lw);
  }
  double norm = 0.0;
  for (std::size_t p = 0; p < count; ++p) {
    weights[p] = std::exp(weights[p] - max_log);
    norm += weights[p];
  }
  for (std::size_t p = 0; p < count; ++p) weights[p] /= norm;
}

double posterior_mean(const PatternTable& table, const MarkovChainSpec& chain, const double* y,
                      std::size_t target, double sigma2) {
  std::array<double, kMaxPatterns> w{};
  pattern_weights(table, chain, y, sigma2, w.data());
  double on = 0.0;
  for (std::size_t p = 0; p < (std::size_t{1} << table.length); ++p) {
    if ((p >> target) & 1u) on += w[p];
  }
  return chain.value0 + on * (chain.value1 - chain.value0);
}

void check_window_size(std::size_t len) {
  if (len < 1 || len > kMaxWindow) throw std::invalid_argument("window must hold 1 to 3 entries");
}

}  // namespace

void MarkovChainSpec::validate() const {
  if (!(p10 > 0.0 && p10 < 1.0) || !(p01 > 0.0 && p01 < 1.0)) {
    throw std::invalid_argument("Markov transition probabilities must lie in (0,1)");
  }
  if (!std::isfinite(value0) || !std::isfinite(value1)) {
    throw std::invalid_argument("Markov state values must be finite");
  }
}

double MarkovChainSpec::mean() const {
  const double on = stationary_on();
  return (1.0 - on) * value0 + on * value1;
}

double MarkovChainSpec::second_moment() const {
  const double on = stationary_on();
  return (1.0 - on) * value0 * value0 + on * value1 * value1;
}

std::vector<double> sample_markov(const MarkovChainSpec& chain, std::size_t n,
                                  std::uint64_t seed) {
  chain.validate();
  if (n < 1) throw std::invalid_argument("Markov sequence length must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> out(n);
  bool on = uniform(rng) < chain.stationary_on();
  out[0] = on ? chain.value1 : chain.value0;
  for (std::size_t i = 1; i < n; ++i) {
    const double u = uniform(rng);
    on = on ? (u >= chain.p10) : (u < chain.p01);
    out[i] = on ? chain.value1 : chain.value0;
  }
  return out;
}

std::vector<double> pattern_posterior(const MarkovChainSpec& chain, std::span<const double> y,
                                      double sigma2) {
  chain.validate();
  check_window_size(y.size());
  require_window_noise(sigma2);
  std::vector<double> w(std::size_t{1} << y.size());
  pattern_weights(make_table(chain, y.size()), chain, y.data(), sigma2, w.data());
  return w;
}

double window_posterior_mean(const MarkovChainSpec& chain, std::span<const double> y,
                             std::size_t target, double sigma2) {
  chain.validate();
  check_window_size(y.size());
  require_window_noise(sigma2);
  if (target >= y.size()) throw std::invalid_argument("target outside window");
  return posterior_mean(make_table(chain, y.size()), chain, y.data(), target, sigma2);
}

// Index 1 is the last entry of a pair and the middle of a triple.
WindowDenoiser::WindowDenoiser(MarkovChainSpec chain, int window)
    : chain_(chain), window_(window), target_(1) {
  chain_.validate();
  if (window != 2 && window != 3) throw std::invalid_argument("window must be 2 or 3");
}

double WindowDenoiser::operator()(std::span<const double> y_window, double sigma2) const {
  if (y_window.size() != static_cast<std::size_t>(window_)) {
    throw std::invalid_argument("observation window has the wrong length");
  }
  return window_posterior_mean(chain_, y_window, target_, sigma2);
}

void WindowDenoiser::denoise(std::span<const double> y, double sigma2,
                             std::span<double> out) const {
  require_window_noise(sigma2);
  const std::size_t n = y.size();
  if (out.size() != n) throw std::invalid_argument("output length mismatch");
  std::array<PatternTable, kMaxWindow + 1> tables;
  for (std::size_t len = 1; len <= kMaxWindow; ++len) tables[len] = make_table(chain_, len);

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t first = i >= lead() ? i - lead() : 0;
    const std::size_t last = std::min(n - 1, i + trail());
    const std::size_t len = last - first + 1;
    out[i] = posterior_mean(tables[len], chain_, y.data() + first, i - first, sigma2);
  }
}

double window_pme(const WindowDenoiser& d, std::span<const double> y_window, double sigma2) {
  return d(y_window, sigma2);
}

WindowMseEvaluator::WindowMseEvaluator(MarkovChainSpec chain, WindowMcConfig cfg)
    : chain_(chain), cfg_(cfg) {
  chain_.validate();
  if (cfg_.chunks < 2) throw std::invalid_argument("need at least two Monte Carlo chunks");
  const std::size_t length =
      std::max<std::size_t>(cfg_.samples / static_cast<std::size_t>(cfg_.chunks), 16);
  signal_.resize(cfg_.chunks);
  noise_.resize(cfg_.chunks);
  for (int c = 0; c < cfg_.chunks; ++c) {
    const auto chunk_seed = derive_seed(cfg_.seed, static_cast<std::uint64_t>(c));
    signal_[c] = sample_markov(chain_, length, derive_seed(chunk_seed, 0));
    std::mt19937_64 rng(derive_seed(chunk_seed, 1));
    std::normal_distribution<double> normal(0.0, 1.0);
    noise_[c].resize(length);
    for (auto& w : noise_[c]) w = normal(rng);
  }
}

std::vector<double> WindowMseEvaluator::chunk_errors(const WindowDenoiser& d,
                                                     double sigma2) const {
  require_window_noise(sigma2);
  const double sigma = std::sqrt(sigma2);
  std::vector<double> means(signal_.size());
  std::vector<double> y, est;
  for (std::size_t c = 0; c < signal_.size(); ++c) {
    const auto& x = signal_[c];
    const std::size_t len = x.size();
    y.resize(len);
    est.resize(len);
    for (std::size_t i = 0; i < len; ++i) y[i] = x[i] + sigma * noise_[c][i];
    d.denoise(y, sigma2, est);
    // Entries without a full width-3 window are not scored.
    double sum = 0.0;
    for (std::size_t i = 1; i + 1 < len; ++i) sum += (est[i] - x[i]) * (est[i] - x[i]);
    means[c] = sum / static_cast<double>(len - 2);
  }
  return means;
}

MeanWithError WindowMseEvaluator::psi(const WindowDenoiser& d, double sigma2) const {
  return mean_and_stderr(chunk_errors(d, sigma2));
}

MeanWithError WindowMseEvaluator::psi_difference(const WindowDenoiser& worse,
                                                 const WindowDenoiser& better,
                                                 double sigma2) const {
  auto a = chunk_errors(worse, sigma2);
  const auto b = chunk_errors(better, sigma2);
  for (std::size_t c = 0; c < a.size(); ++c) a[c] -= b[c];
  return mean_and_stderr(a);
}

MeanWithError psi_window(const WindowDenoiser& d, double sigma2, std::uint64_t mc_samples,
                         std::uint64_t seed) {
  if (mc_samples < 10'000) throw std::invalid_argument("psi_window needs at least 1e4 samples");
  const WindowMseEvaluator mc(d.chain(), {mc_samples, 64, seed});
  return mc.psi(d, sigma2);
}

FixedPointSolution se_with_window(const WindowDenoiser& d, const SystemParams& params,
                                  const WindowMseEvaluator& mc, double derivative_step) {
  params.validate();
  constexpr int kMaxIterations = 10000;
  double current = params.sigma_z2 + d.chain().second_moment() / params.delta;
  for (int it = 1; it <= kMaxIterations; ++it) {
    const auto value = mc.psi(d, current);
    const double next = params.sigma_z2 + value.mean / params.delta;
    if (std::abs(next - current) < std::max(1e-6, 3.0 * value.std_error)) {
      FixedPointSolution sol;
      sol.sigma2 = next;
      sol.psi_at = mc.psi(d, next).mean;
      sol.residual = std::abs(params.delta * (next - params.sigma_z2) - sol.psi_at);
      sol.slope = richardson_first_derivative([&](double s) { return mc.psi(d, s).mean; }, next,
                                              derivative_step * next);
      sol.stable = sol.slope < params.delta;
      sol.iterations = it;
      return sol;
    }
    current = next;
  }
  throw ConvergenceError("window state evolution did not converge", {current});
}

FixedPointSolution se_with_window(const WindowDenoiser& d, const SystemParams& params,
                                  std::uint64_t mc_samples, std::uint64_t seed) {
  const WindowMseEvaluator mc(d.chain(), {mc_samples, 64, seed});
  return se_with_window(d, params, mc);
}

std::vector<Fig2Row> predict_fig2(const MarkovChainSpec& chain, std::span<const double> delta_grid,
                                  double sigma_z2, const MseEvalConfig& cfg,
                                  const WindowMcConfig& mc, int better_window, int worse_window) {
  if (delta_grid.empty()) throw std::invalid_argument("delta grid is empty");
  cfg.validate();
  const WindowDenoiser better(chain, better_window);
  const WindowDenoiser worse(chain, worse_window);
  const WindowMseEvaluator evaluator(chain, mc);

  std::vector<Fig2Row> rows;
  for (double delta : delta_grid) {
    const SystemParams params{delta, sigma_z2};
    const auto sol = se_with_window(better, params, evaluator, cfg.derivative_step);
    Fig2Row row;
    row.delta = delta;
    row.sigma2_of_delta = sol.sigma2;
    row.mse_x3 = sol.psi_at;
    row.mse_x2_scalar = evaluator.psi(worse, sol.sigma2).mean;
    const auto gap = evaluator.psi_difference(worse, better, sol.sigma2);
    row.emse_s = gap.mean;
    row.emse_s_stderr = gap.std_error;
    const auto d = richardson_derivatives(
        [&](double s) { return evaluator.psi(worse, s).mean; }, sol.sigma2,
        cfg.derivative_step * sol.sigma2);
    row.alpha = d.first;
    row.beta = d.second;
    row.predicted_emse_l = approx_second_sqrt(row.emse_s, row.alpha, row.beta, delta);
    row.predicted_mse_x2_amp = row.mse_x3 + row.predicted_emse_l;
    rows.push_back(row);
  }
  return rows;
}

MeanWithError amp_window_mse(const WindowDenoiser& d, std::size_t n, const SystemParams& params,
                             int trials, std::uint64_t seed, const AmpConfig& cfg) {
  if (trials < 2) throw std::invalid_argument("need at least two AMP trials");
  const SequenceDenoiser denoiser(d);
  std::vector<double> finals;
  for (int t = 0; t < trials; ++t) {
    const auto trial_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    auto x = sample_markov(d.chain(), n, derive_seed(trial_seed, 0));
    const auto inst = build_instance(std::move(x), params, derive_seed(trial_seed, 1));
    AmpConfig trial_cfg = cfg;
    trial_cfg.probe_seed = derive_seed(trial_seed, 2);
    finals.push_back(run_amp(inst, denoiser, trial_cfg).final_mse());
  }
  return mean_and_stderr(finals);
}

}  // namespace emse
