#include <doctest.h>

#include <cmath>
#include <vector>

#include "emse/amp.hpp"
#include "emse/emse_analysis.hpp"
#include "emse_lab/oracles.hpp"

using emse::AmpConfig;
using emse::MismatchPair;
using emse::MseEvalConfig;
using emse::Prior;
using emse::SystemParams;

namespace {

const SystemParams kTableSystem{0.2, 0.03};

// Declares itself non-separable so AMP takes the probe-based divergence path.
class OpaqueDenoiser final : public emse::Denoiser {
 public:
  explicit OpaqueDenoiser(Prior p) : inner_(std::move(p)) {}
  void apply(std::span<const double> v, double sigma2, std::span<double> out) const override {
    inner_.apply(v, sigma2, out);
  }
  bool separable() const override { return false; }

 private:
  emse::PriorDenoiser inner_;
};

class Amplifier final : public emse::Denoiser {
 public:
  void apply(std::span<const double> v, double, std::span<double> out) const override {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = 10.0 * v[i];
  }
  bool separable() const override { return true; }
};

}  // namespace

TEST_CASE("instance generation") {
  const auto prior = Prior::bernoulli(0.1);
  const auto inst = emse::generate_instance(prior, 1000, {0.2, 0.0}, 5);
  CHECK(inst.m == 200);
  CHECK(inst.matrix.rows() == 200);
  CHECK(inst.matrix.cols() == 1000);
  CHECK(inst.delta() == doctest::Approx(0.2));
  const double col_norm = inst.matrix.colwise().squaredNorm().mean();
  CHECK(std::abs(col_norm - 1.0) < 0.15);
  CHECK((inst.y - inst.matrix * inst.x_true).norm() == 0.0);

  const auto again = emse::generate_instance(prior, 1000, {0.2, 0.0}, 5);
  CHECK(again.matrix == inst.matrix);
  CHECK(again.x_true == inst.x_true);
  CHECK(again.y == inst.y);
  const auto other = emse::generate_instance(prior, 1000, {0.2, 0.0}, 6);
  CHECK(other.matrix != inst.matrix);

  const auto noisy = emse::generate_instance(prior, 1000, {0.2, 0.5}, 5);
  CHECK(noisy.matrix == inst.matrix);
  CHECK(noisy.x_true == inst.x_true);
  const double noise_var = (noisy.y - noisy.matrix * noisy.x_true).squaredNorm() / 200.0;
  CHECK(std::abs(noise_var - 0.5) < 0.15);

  CHECK_THROWS_AS(emse::generate_instance(prior, 0, {0.2, 0.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(emse::generate_instance(prior, 2, {0.2, 0.0}, 1), std::invalid_argument);
}

TEST_CASE("analytic and finite-difference divergences agree") {
  const emse::PriorDenoiser d(Prior::bernoulli(0.2));
  std::vector<double> v;
  for (int i = 0; i < 200; ++i) v.push_back(-1.0 + 0.015 * i);
  const double sigma2 = 0.3;
  const double analytic = *d.analytic_divergence(v, sigma2);
  const double eps = 1e-5;
  double fd = 0.0;
  for (double vi : v) {
    fd += (emse::pme(d.prior(), vi + eps, sigma2) - emse::pme(d.prior(), vi - eps, sigma2)) /
          (2.0 * eps);
  }
  fd /= static_cast<double>(v.size());
  CHECK(analytic == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("AMP trace bookkeeping and determinism") {
  const auto inst = emse::generate_instance(Prior::bernoulli(0.1), 2000, kTableSystem, 11);
  const auto a = emse::run_amp(inst, Prior::bernoulli(0.1));
  const auto b = emse::run_amp(inst, Prior::bernoulli(0.1));
  CHECK(a.mse == b.mse);
  CHECK(a.mse.size() == a.sigma2_est.size());
  CHECK(a.iterations() >= 2);
  CHECK(a.converged);
  CHECK(a.estimate.size() == 2000);
  CHECK(a.final_mse() == doctest::Approx((a.estimate - inst.x_true).squaredNorm() / 2000.0));

  AmpConfig short_run;
  short_run.max_iters = 3;
  const auto c = emse::run_amp(inst, Prior::bernoulli(0.1), short_run);
  CHECK(c.iterations() == 3);
  CHECK_FALSE(c.converged);
  for (int t = 0; t < 3; ++t) CHECK(c.mse[t] == a.mse[t]);

  AmpConfig bad;
  bad.max_iters = 0;
  CHECK_THROWS_AS(emse::run_amp(inst, Prior::bernoulli(0.1), bad), std::invalid_argument);
}

TEST_CASE("probe divergence matches the analytic one for separable denoisers") {
  const auto inst = emse::generate_instance(Prior::bernoulli(0.1), 2000, kTableSystem, 3);
  const auto analytic = emse::run_amp(inst, Prior::bernoulli(0.2));
  AmpConfig fd_cfg;
  fd_cfg.divergence_mode = emse::DivergenceMode::finite_difference;
  const auto fd = emse::run_amp(inst, emse::PriorDenoiser(Prior::bernoulli(0.2)), fd_cfg);
  const auto probe = emse::run_amp(inst, OpaqueDenoiser(Prior::bernoulli(0.2)), fd_cfg);
  CHECK(fd.final_mse() == doctest::Approx(analytic.final_mse()).epsilon(1e-5));
  CHECK(probe.final_mse() == doctest::Approx(analytic.final_mse()).epsilon(1e-5));
}

TEST_CASE("finite-size AMP tracks state evolution") {
  MseEvalConfig cfg;
  const MismatchPair matched{Prior::bernoulli(0.1), Prior::bernoulli(0.1)};
  const MismatchPair mismatched{Prior::bernoulli(0.1), Prior::bernoulli(0.2)};
  const auto report = emse::full_report(mismatched, kTableSystem, cfg);
  const double psi_p = emse::psi(matched, report.sigma_p2, cfg);
  const double psi_q = emse::psi(mismatched, report.sigma_q2, cfg);
  CHECK(std::abs(psi_p - 0.062) < 0.001);

  std::vector<double> mp, mq;
  for (std::uint64_t s = 0; s < 4; ++s) {
    const auto inst = emse::generate_instance(Prior::bernoulli(0.1), 4000, kTableSystem, 100 + s);
    mp.push_back(emse::run_amp(inst, Prior::bernoulli(0.1)).final_mse());
    mq.push_back(emse::run_amp(inst, Prior::bernoulli(0.2)).final_mse());
  }
  const auto sp = emse::mean_and_stderr(mp);
  const auto sq = emse::mean_and_stderr(mq);
  CHECK(std::abs(sp.mean - psi_p) < std::max(0.1 * psi_p, 3.0 * sp.std_error));
  CHECK(std::abs(sq.mean - psi_q) < std::max(0.1 * psi_q, 3.0 * sq.std_error));
}

TEST_CASE("square noiseless Gaussian system follows the slow state-evolution trajectory") {
  const auto g = Prior::gaussian(0.0, 1.0);
  const SystemParams sp{1.0, 1e-6};
  const auto inst = emse::generate_instance(g, 2000, sp, 21);
  const auto trace = emse::run_amp(inst, g);
  double s = sp.sigma_z2 + 1.0 / sp.delta;
  std::vector<double> se;
  for (int t = 0; t < trace.iterations(); ++t) {
    se.push_back(s);
    s = sp.sigma_z2 + (s / (1.0 + s)) / sp.delta;
  }
  for (int t : {0, 5, 10, 20}) {
    CAPTURE(t);
    CHECK(trace.sigma2_est[t] == doctest::Approx(se[t]).epsilon(0.1));
  }
  const double fixed = oracle::gaussian_fixed_point(sp.delta, sp.sigma_z2);
  CHECK(fixed / (1.0 + fixed) > 5e-4);
  CHECK(trace.final_mse() > 1e-4);
}

TEST_CASE("overdetermined nearly noiseless Gaussian system is solved") {
  const auto g = Prior::gaussian(0.0, 1.0);
  const auto inst = emse::generate_instance(g, 1000, {2.0, 1e-6}, 4);
  CHECK(emse::run_amp(inst, g).final_mse() < 1e-4);
}

TEST_CASE("runaway denoiser raises with its trace") {
  const auto inst = emse::generate_instance(Prior::bernoulli(0.1), 500, kTableSystem, 9);
  try {
    emse::run_amp(inst, Amplifier{});
    FAIL("expected AmpDivergenceError");
  } catch (const emse::AmpDivergenceError& e) {
    CHECK(e.trace().iterations() >= 1);
    CHECK(e.trace().iterations() <= 200);
    CHECK(e.trace().mse.size() == e.trace().sigma2_est.size());
  }
}

TEST_CASE("paired empirical EMSE") {
  const auto out = emse::empirical_emse_l(Prior::bernoulli(0.1), Prior::bernoulli(0.2), 2000,
                                          kTableSystem, 3, 77);
  CHECK(out.mse_true_prior.size() == 3);
  CHECK(out.mse_postulated.size() == 3);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) sum += out.mse_postulated[i] - out.mse_true_prior[i];
  CHECK(out.mean == doctest::Approx(sum / 3.0));
  CHECK(out.mean > 0.0);
  CHECK_THROWS_AS(emse::empirical_emse_l(Prior::bernoulli(0.1), Prior::bernoulli(0.2), 100,
                                         kTableSystem, 1, 1),
                  std::invalid_argument);
}

TEST_CASE("mean and standard error") {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const auto s = emse::mean_and_stderr(v);
  CHECK(s.mean == 2.5);
  CHECK(s.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  const std::vector<double> one = {1.0};
  CHECK_THROWS_AS(emse::mean_and_stderr(one), std::invalid_argument);
}
