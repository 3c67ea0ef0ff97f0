#include "emse/amp.hpp"

#include <cmath>
#include <random>

#include "emse/scalar_channel.hpp"

namespace emse {
namespace {

constexpr int kDivergencePatience = 5;
constexpr double kDivergenceFactor = 10.0;
constexpr double kRelativeFdStep = 1e-4;

double mean_divergence(const Denoiser& denoiser, const AmpConfig& cfg,
                       std::span<const double> v, double sigma2, int iteration) {
  if (cfg.divergence_mode == DivergenceMode::analytic) {
    if (auto d = denoiser.analytic_divergence(v, sigma2)) return *d;
  }
  const std::size_t n = v.size();
  const double eps = kRelativeFdStep * std::sqrt(sigma2);
  std::vector<double> shifted(n), plus(n), minus(n);

  if (denoiser.separable()) {
    for (std::size_t i = 0; i < n; ++i) shifted[i] = v[i] + eps;
    denoiser.apply(shifted, sigma2, plus);
    for (std::size_t i = 0; i < n; ++i) shifted[i] = v[i] - eps;
    denoiser.apply(shifted, sigma2, minus);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += plus[i] - minus[i];
    return sum / (2.0 * eps * static_cast<double>(n));
  }

  // Hutchinson trace estimate with a single Rademacher probe.
  std::mt19937_64 rng(derive_seed(cfg.probe_seed, static_cast<std::uint64_t>(iteration)));
  std::bernoulli_distribution coin(0.5);
  std::vector<double> probe(n);
  for (auto& b : probe) b = coin(rng) ? 1.0 : -1.0;
  for (std::size_t i = 0; i < n; ++i) shifted[i] = v[i] + eps * probe[i];
  denoiser.apply(shifted, sigma2, plus);
  for (std::size_t i = 0; i < n; ++i) shifted[i] = v[i] - eps * probe[i];
  denoiser.apply(shifted, sigma2, minus);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += probe[i] * (plus[i] - minus[i]);
  return sum / (2.0 * eps * static_cast<double>(n));
}

Eigen::VectorXd gaussian_vector(std::size_t len, double stddev, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  Eigen::VectorXd out(static_cast<Eigen::Index>(len));
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal(rng);
  return out;
}

}  // namespace

LinearSystemInstance build_instance(std::vector<double> x_true, const SystemParams& params,
                                    std::uint64_t seed) {
  params.validate();
  if (x_true.empty()) throw std::invalid_argument("signal length must be at least 1");
  LinearSystemInstance inst;
  inst.n = x_true.size();
  inst.m = static_cast<std::size_t>(std::llround(params.delta * static_cast<double>(inst.n)));
  if (inst.m == 0) throw std::invalid_argument("delta * n rounds to zero measurements");
  inst.sigma_z2 = params.sigma_z2;
  inst.seed = seed;
  inst.x_true = Eigen::Map<const Eigen::VectorXd>(x_true.data(),
                                                  static_cast<Eigen::Index>(x_true.size()));

  const auto rows = static_cast<Eigen::Index>(inst.m);
  const auto cols = static_cast<Eigen::Index>(inst.n);
  inst.matrix.resize(rows, cols);
  std::mt19937_64 rng(derive_seed(seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(inst.m)));
  double* data = inst.matrix.data();
  for (Eigen::Index k = 0; k < rows * cols; ++k) data[k] = normal(rng);

  inst.y = inst.matrix * inst.x_true;
  if (params.sigma_z2 > 0.0) {
    inst.y += gaussian_vector(inst.m, std::sqrt(params.sigma_z2), derive_seed(seed, 2));
  }
  return inst;
}

LinearSystemInstance generate_instance(const Prior& prior, std::size_t n,
                                       const SystemParams& params, std::uint64_t seed) {
  return build_instance(prior.sample(n, derive_seed(seed, 1)), params, seed);
}

void PriorDenoiser::apply(std::span<const double> v, double sigma2, std::span<double> out) const {
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = pme(prior_, v[i], sigma2);
}

std::optional<double> PriorDenoiser::analytic_divergence(std::span<const double> v,
                                                         double sigma2) const {
  double sum = 0.0;
  for (double vi : v) sum += pme_derivative(prior_, vi, sigma2);
  return sum / static_cast<double>(v.size());
}

void AmpConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("AMP needs max_iters >= 1");
  if (!(halt_tol >= 0.0)) throw std::invalid_argument("halt_tol must be nonnegative");
}

AmpTrace run_amp(const LinearSystemInstance& instance, const Denoiser& denoiser,
                 const AmpConfig& cfg) {
  cfg.validate();
  const auto& A = instance.matrix;
  const std::size_t n = instance.n;
  const double m = static_cast<double>(instance.m);
  const double delta = instance.delta();
  const double signal_power = instance.x_true.squaredNorm() / static_cast<double>(n);
  const double blowup = kDivergenceFactor * std::max(signal_power, 1e-300);

  AmpTrace trace;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd next(static_cast<Eigen::Index>(n));
  Eigen::VectorXd r = instance.y;
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  int blowup_streak = 0;

  for (int t = 0; t < cfg.max_iters; ++t) {
    const double sigma2 = std::max(r.squaredNorm() / m, 1e-300);
    v.noalias() = A.transpose() * r;
    v += x;
    const std::span<const double> vs(v.data(), n);
    denoiser.apply(vs, sigma2, std::span<double>(next.data(), n));
    const double div = mean_divergence(denoiser, cfg, vs, sigma2, t);

    Eigen::VectorXd onsager = r * (div / delta);
    r = instance.y;
    r.noalias() -= A * next;
    r += onsager;
    x.swap(next);

    trace.mse.push_back((x - instance.x_true).squaredNorm() / static_cast<double>(n));
    trace.sigma2_est.push_back(sigma2);

    if (!std::isfinite(trace.mse.back()) || trace.mse.back() > blowup) {
      if (++blowup_streak >= kDivergencePatience || !std::isfinite(trace.mse.back())) {
        trace.estimate = x;
        throw AmpDivergenceError("AMP diverged", std::move(trace));
      }
    } else {
      blowup_streak = 0;
    }

    const std::size_t k = trace.sigma2_est.size();
    if (k >= 2 && std::abs(trace.sigma2_est[k - 1] - trace.sigma2_est[k - 2]) <
                      cfg.halt_tol * trace.sigma2_est[k - 1]) {
      trace.converged = true;
      break;
    }
  }
  trace.estimate = x;
  return trace;
}

AmpTrace run_amp(const LinearSystemInstance& instance, const Prior& postulated,
                 const AmpConfig& cfg) {
  return run_amp(instance, PriorDenoiser(postulated), cfg);
}

MeanWithError mean_and_stderr(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("need at least two values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(values.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

EmpiricalEmse empirical_emse_l(const Prior& prior, const Prior& postulated, std::size_t n,
                               const SystemParams& params, int trials, std::uint64_t seed,
                               const AmpConfig& cfg) {
  if (trials < 2) throw std::invalid_argument("empirical EMSE needs at least two trials");
  EmpiricalEmse out;
  std::vector<double> diffs;
  for (int t = 0; t < trials; ++t) {
    const auto inst = generate_instance(prior, n, params, derive_seed(seed, t));
    const double mp = run_amp(inst, prior, cfg).final_mse();
    const double mq = run_amp(inst, postulated, cfg).final_mse();
    out.mse_true_prior.push_back(mp);
    out.mse_postulated.push_back(mq);
    diffs.push_back(mq - mp);
  }
  const auto stats = mean_and_stderr(diffs);
  out.mean = stats.mean;
  out.std_error = stats.std_error;
  return out;
}

EmpiricalEmse empirical_emse_l_unpaired(const Prior& prior, const Prior& postulated,
                                        std::size_t n, const SystemParams& params, int trials,
                                        std::uint64_t seed, const AmpConfig& cfg) {
  if (trials < 2) throw std::invalid_argument("empirical EMSE needs at least two trials");
  EmpiricalEmse out;
  std::vector<double> diffs;
  for (int t = 0; t < trials; ++t) {
    const auto inst_p = generate_instance(prior, n, params, derive_seed(seed, 2 * t));
    const auto inst_q = generate_instance(prior, n, params, derive_seed(seed, 2 * t + 1));
    const double mp = run_amp(inst_p, prior, cfg).final_mse();
    const double mq = run_amp(inst_q, postulated, cfg).final_mse();
    out.mse_true_prior.push_back(mp);
    out.mse_postulated.push_back(mq);
    diffs.push_back(mq - mp);
  }
  const auto stats = mean_and_stderr(diffs);
  out.mean = stats.mean;
  out.std_error = stats.std_error;
  return out;
}

}  // namespace emse
