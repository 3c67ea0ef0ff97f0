#include "emse_lab/checks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>

#include "emse_lab/oracles.hpp"

namespace emse::lab {
namespace {

/// A reference percentage; `bound` marks "<" entries.
struct Pct {
  double value;
  bool bound = false;
};

struct TableRow {
  double theta;
  double delta;
  Pct first;
  Pct taylor;
  Pct sqrt;
};

struct ReferenceTable {
  double sigma_p2;
  std::array<TableRow, 5> rows;
};

const ReferenceTable kTable1{0.34,
                             {{{0.11, 0.0008, {0.13}, {0.0005, true}, {0.0001, true}},
                               {0.13, 0.0070, {1.0}, {0.041}, {0.017}},
                               {0.15, 0.0178, {2.8}, {0.28}, {0.11}},
                               {0.17, 0.0324, {5.2}, {0.99}, {0.35}},
                               {0.20, 0.0603, {10.0}, {4.0}, {1.0}}}}};

const ReferenceTable kTable2{0.27,
                             {{{0.11, 0.0006, {0.25}, {0.09}, {0.09}},
                               {0.13, 0.0052, {1.4}, {0.04}, {0.08}},
                               {0.15, 0.0132, {3.5}, {0.21}, {0.03}},
                               {0.17, 0.0240, {6.5}, {0.98}, {0.08}},
                               {0.20, 0.0444, {13.0}, {4.0}, {0.4}}}}};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

/// Collects per-row outcomes into one check.
class Tally {
 public:
  Tally(std::string criterion, std::string name)
      : result_{std::move(criterion), std::move(name), true, ""} {}

  void add(bool ok, const std::string& what) {
    ++count_;
    if (!ok) {
      result_.passed = false;
      failures_ += (failures_.empty() ? "" : "; ") + what;
    }
  }
  void note_worst(double v) { worst_ = std::max(worst_, v); }

  CheckResult done(const char* worst_label = nullptr) {
    if (!result_.passed) {
      result_.detail = failures_;
    } else {
      result_.detail = std::to_string(count_) + " ok";
      if (worst_label) result_.detail += std::string(", ") + worst_label + " " + fmt("%.3g", worst_);
    }
    return result_;
  }

 private:
  CheckResult result_;
  std::string failures_;
  int count_ = 0;
  double worst_ = 0.0;
};

bool within_pct(const Pct& want, double got_pct, const Tolerances& t) {
  if (want.bound) return got_pct <= t.rel_err_upper_bound_pct;
  return std::abs(got_pct - want.value) <= std::max(t.rel_err_pp, t.rel_err_rel * want.value);
}

const ReferenceTable* reference_table(Kind kind) {
  if (kind == Kind::table1) return &kTable1;
  if (kind == Kind::table2) return &kTable2;
  return nullptr;
}

std::string row_label(const ExperimentConfig& cfg, double v) {
  return cfg.sweep.parameter + "=" + fmt("%g", v);
}

std::optional<std::size_t> find_row(const TableResult& r, double theta) {
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (std::abs(r.values[i] - theta) < 1e-12) return i;
  }
  return std::nullopt;
}

void reference_checks(const ExperimentConfig& cfg, const TableResult& r, const ReferenceTable& pub,
                      std::vector<CheckResult>& out) {
  const auto& t = kTolerances;
  out.push_back({"fixed_point", "fixed point sigma_p2",
                 std::abs(r.matched.sigma2 - pub.sigma_p2) <= t.fixed_point_abs,
                 fmt("%.6f (expected %.2f)", r.matched.sigma2, pub.sigma_p2)});

  Tally delta("table", "Delta column");
  std::array<Tally, 3> cols = {Tally("table", "first-order relative error"),
                               Tally("table", "second-order (Taylor) relative error"),
                               Tally("table", "second-order (square-root) relative error")};
  for (const auto& row : pub.rows) {
    const auto idx = find_row(r, row.theta);
    const auto label = row_label(cfg, row.theta);
    if (!idx) {
      delta.add(false, label + " missing from sweep");
      continue;
    }
    const auto& rep = r.rows[*idx];
    const double tol = std::max(t.delta_rel * row.delta, t.delta_abs);
    delta.add(std::abs(rep.Delta - row.delta) <= tol,
              label + fmt(": %.6f vs %.4f", rep.Delta, row.delta));
    const std::array<std::optional<double>, 3> got = {rep.rel_err_first, rep.rel_err_second_taylor,
                                                      rep.rel_err_second_sqrt};
    const std::array<Pct, 3> want = {row.first, row.taylor, row.sqrt};
    for (std::size_t k = 0; k < 3; ++k) {
      if (!got[k]) {
        cols[k].add(false, label + ": undefined");
        continue;
      }
      const double pct = 100.0 * *got[k];
      cols[k].add(within_pct(want[k], pct, t),
                  label + fmt(want[k].bound ? ": %.4g%% vs <%.4g%%" : ": %.4g%% vs %.4g%%", pct,
                              want[k].value));
    }
  }
  out.push_back(delta.done());
  for (auto& c : cols) out.push_back(c.done());
}

}  // namespace

json tolerances_to_json(const Tolerances& t) {
  return {{"fixed_point_abs", t.fixed_point_abs},
          {"delta_rel", t.delta_rel},
          {"delta_abs", t.delta_abs},
          {"rel_err_pp", t.rel_err_pp},
          {"rel_err_rel", t.rel_err_rel},
          {"rel_err_upper_bound_pct", t.rel_err_upper_bound_pct},
          {"identity", t.identity},
          {"beta_continuity_rel", t.beta_continuity_rel},
          {"ordering_slack", t.ordering_slack},
          {"kl_rel", t.kl_rel},
          {"oracle_gaussian", t.oracle_gaussian},
          {"oracle_pme", t.oracle_pme},
          {"fig1_gap", t.fig1_gap},
          {"fig2_rel", t.fig2_rel},
          {"fig2_min_points", t.fig2_min_points},
          {"decoupling_rel", t.decoupling_rel},
          {"decoupling_stderr", t.decoupling_stderr}};
}

std::vector<CheckResult> check_table(const ExperimentConfig& cfg, const TableResult& r) {
  const auto& t = kTolerances;
  std::vector<CheckResult> out;
  if (const auto* pub = reference_table(cfg.kind)) reference_checks(cfg, r, *pub, out);

  Tally identity("identity", "excess-error identity residual");
  Tally taylor_vs_sqrt("approximation", "Taylor form within O(x^2) of the square-root form");
  Tally continuity("approximation", "square-root form continuous at beta = 0");
  Tally optimal("property", "matched estimator is optimal (Psi_p <= Psi_q)");
  Tally sigma_order("property", "sigma_q2 >= sigma_p2");
  Tally emse_order("property", "EMSE_l >= EMSE_s");
  Tally amplification("property", "amplification factor > 1");
  Tally kl("property", "EMSE_s from the relative-entropy derivative");

  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& rep = r.rows[i];
    const auto& pair = r.pairs[i];
    const auto label = row_label(cfg, r.values[i]);

    const double res = std::max(std::abs(rep.identity_residual),
                                std::abs(check_claim_identity(rep, pair, cfg.eval)));
    identity.note_worst(res);
    identity.add(res < t.identity, label + fmt(": residual %.3g", res));

    for (double s2 : {0.5 * rep.sigma_p2, rep.sigma_p2, rep.sigma_q2, 2.0 * rep.sigma_q2}) {
      const double pp = psi({pair.true_prior, pair.true_prior}, s2, cfg.eval);
      const double pq = psi(pair, s2, cfg.eval);
      optimal.add(pp <= pq + t.ordering_slack, label + fmt(": %.10g > %.10g at %.4g", pp, pq, s2));
    }
    sigma_order.add(rep.sigma_q2 >= rep.sigma_p2 - t.ordering_slack,
                    label + fmt(": %.10g < %.10g", rep.sigma_q2, rep.sigma_p2));
    emse_order.add(rep.emse_l_exact >= rep.emse_s - t.ordering_slack,
                   label + fmt(": %.6g < %.6g", rep.emse_l_exact, rep.emse_s));

    if (rep.emse_s <= 0.0) continue;
    if (rep.alpha < rep.delta) {
      amplification.add(rep.amplification() > 1.0,
                        label + fmt(": %.6g", rep.amplification()));
    } else {
      amplification.add(false, label + ": alpha >= delta");
    }
    const double via_kl = emse_s_via_kl(pair, rep.sigma_p2, cfg.eval);
    const double kl_err = std::abs(via_kl - rep.emse_s) / rep.emse_s;
    kl.note_worst(kl_err);
    kl.add(kl_err <= t.kl_rel, label + fmt(": %.6g vs %.6g", via_kl, rep.emse_s));

    if (rep.approx_first && rep.approx_second_taylor && rep.approx_second_sqrt) {
      const double gap = rep.delta - rep.alpha;
      const double x = rep.beta * rep.emse_s / (gap * gap);
      const double diff = std::abs(*rep.approx_second_taylor - *rep.approx_second_sqrt);
      taylor_vs_sqrt.add(diff <= 2.0 * x * x * *rep.approx_first,
                         label + fmt(": |diff| %.3g, bound %.3g", diff,
                                     2.0 * x * x * *rep.approx_first));
      const double base = approx_first_order(rep.emse_s, rep.alpha, rep.delta);
      for (double b : {1e-14, -1e-14}) {
        const double v = approx_second_sqrt(rep.emse_s, rep.alpha, b, rep.delta);
        const double rel = std::abs(v - base) / base;
        continuity.note_worst(rel);
        continuity.add(rel < t.beta_continuity_rel, label + fmt(": %.3g", rel));
      }
    } else {
      taylor_vs_sqrt.add(false, label + ": " + rep.approximation_note);
    }
  }
  out.push_back(identity.done("max residual"));
  out.push_back(taylor_vs_sqrt.done());
  out.push_back(continuity.done("max relative change"));
  out.push_back(optimal.done());
  out.push_back(sigma_order.done());
  out.push_back(emse_order.done());
  out.push_back(amplification.done());
  out.push_back(kl.done("max relative difference"));
  return out;
}

std::vector<CheckResult> check_fig1(const ExperimentConfig& cfg, const Fig1Result& r) {
  const auto& t = kTolerances;
  std::vector<CheckResult> out;
  if (cfg.kind == Kind::fig1) {
    out.push_back({"fig1", "point a sigma coordinate",
                   std::abs(r.a.sigma2 - 0.27) <= t.fixed_point_abs,
                   fmt("%.6f (expected 0.27)", r.a.sigma2)});
  }
  const MismatchPair pair{cfg.prior, cfg.postulated};
  const double es = emse_s(pair, r.a.sigma2, cfg.eval);
  const double ca = r.c.mse - r.a.mse;
  out.push_back({"fig1", "gap c - a equals EMSE_s", std::abs(ca - es) <= t.fig1_gap,
                 fmt("%.12g vs %.12g", ca, es)});
  const double ba = r.b.mse - r.a.mse;
  out.push_back({"fig1", "gap b - a equals EMSE_l", std::abs(ba - r.report.emse_l_exact) <= t.fig1_gap,
                 fmt("%.12g vs %.12g", ba, r.report.emse_l_exact)});
  const double on_line = cfg.system.delta * (r.a.sigma2 - cfg.system.sigma_z2);
  out.push_back({"fig1", "a lies on the line", std::abs(on_line - r.a.mse) <= t.identity,
                 fmt("%.12g vs %.12g", on_line, r.a.mse)});
  return out;
}

std::vector<CheckResult> check_fig2(const ExperimentConfig& cfg, const Fig2Result& r) {
  const auto& t = kTolerances;
  std::vector<CheckResult> out;
  if (cfg.kind == Kind::fig2) {
    out.push_back({"fig2", "grid size", static_cast<int>(r.rows.size()) >= t.fig2_min_points,
                   std::to_string(r.rows.size()) + " delta values"});
  }
  Tally pred("fig2", "predicted vs empirical AMP MSE with the worse window");
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const double emp = r.amp[i].mean;
    const double rel = std::abs(r.rows[i].predicted_mse_x2_amp - emp) / emp;
    pred.note_worst(rel);
    pred.add(rel <= t.fig2_rel, fmt("delta=%g: predicted %.5g vs AMP %.5g", r.rows[i].delta,
                                    r.rows[i].predicted_mse_x2_amp, emp));
  }
  out.push_back(pred.done("max relative error"));
  return out;
}

std::vector<CheckResult> check_amp_validate(const ExperimentConfig&, const AmpValidateResult& r) {
  const auto& t = kTolerances;
  std::vector<CheckResult> out;
  for (const auto& c : r.cases) {
    const auto within = [&](const MeanWithError& m, double target) {
      return std::abs(m.mean - target) <=
             std::max(t.decoupling_rel * target, t.decoupling_stderr * m.std_error);
    };
    out.push_back({"decoupling", c.name + ": AMP MSE with the true prior", within(c.amp_p, c.se_mse_p),
                   fmt("%.6g +- %.2g vs %.6g", c.amp_p.mean, c.amp_p.std_error, c.se_mse_p)});
    out.push_back({"decoupling", c.name + ": AMP MSE with the postulated prior",
                   within(c.amp_q, c.se_mse_q),
                   fmt("%.6g +- %.2g vs %.6g", c.amp_q.mean, c.amp_q.std_error, c.se_mse_q)});
    out.push_back(
        {"decoupling", c.name + ": paired EMSE_l",
         std::abs(c.paired.mean - c.report.emse_l_exact) <=
             t.decoupling_stderr * c.paired.std_error,
         fmt("%.6g +- %.2g vs %.6g", c.paired.mean, c.paired.std_error, c.report.emse_l_exact)});
  }
  return out;
}

std::vector<CheckResult> check_oracles(const MseEvalConfig& eval) {
  const auto& t = kTolerances;
  std::vector<CheckResult> out;

  const auto g = Prior::gaussian(0.0, 1.0);
  Tally gpsi("oracle", "Gaussian Psi = s / (1 + s)");
  for (double s : {0.01, 0.1, 0.34, 1.0, 10.0}) {
    const double want = s / (1.0 + s);
    const double got = psi({g, g}, s, eval);
    const double rel = std::abs(got - want) / want;
    gpsi.note_worst(rel);
    gpsi.add(rel <= t.oracle_gaussian, fmt("s=%g: %.15g vs %.15g", s, got, want));
  }
  out.push_back(gpsi.done("max relative error"));

  Tally groot("oracle", "Gaussian fixed point = quadratic root");
  for (const auto& sp : {SystemParams{0.2, 0.03}, SystemParams{0.5, 0.1}, SystemParams{2.0, 0.01},
                         SystemParams{0.3, 1.0}}) {
    const double want = oracle::gaussian_fixed_point(sp.delta, sp.sigma_z2);
    const double got = solve_se({g, g}, sp, eval).sigma2;
    const double rel = std::abs(got - want) / want;
    groot.note_worst(rel);
    groot.add(rel <= t.oracle_gaussian, fmt("delta=%g: %.15g vs %.15g", sp.delta, got, want));
  }
  out.push_back(groot.done("max relative error"));

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> theta(0.01, 0.99);
  std::uniform_real_distribution<double> value(-3.0, 3.0);
  std::normal_distribution<double> y(0.0, 2.0);
  std::uniform_real_distribution<double> s2(0.01, 3.0);
  Tally bpme("oracle", "Bernoulli posterior mean vs two-point Bayes rule");
  for (int i = 0; i < 1000; ++i) {
    const double th = theta(rng);
    const double v = value(rng);
    const double yy = y(rng);
    const double s = s2(rng);
    const double want = oracle::bernoulli_pme(th, v, yy, s);
    const double got = pme(Prior::bernoulli(th, v), yy, s);
    const double err = std::abs(got - want) / std::max(1.0, std::abs(want));
    bpme.note_worst(err);
    bpme.add(err <= t.oracle_pme, fmt("y=%g: %.17g vs %.17g", yy, got, want));
  }
  out.push_back(bpme.done("max error"));

  const MarkovChainSpec chain;
  const WindowDenoiser w3(chain, 3);
  std::normal_distribution<double> wy(0.3, 0.8);
  Tally wpme("oracle", "window-3 posterior mean vs 8-pattern enumeration");
  for (int i = 0; i < 1000; ++i) {
    const std::array<double, 3> obs = {wy(rng), wy(rng), wy(rng)};
    const double s = s2(rng);
    const double want = oracle::markov_window3_middle(chain.p10, chain.p01, obs, s);
    const double got = window_pme(w3, obs, s);
    const double err = std::abs(got - want) / std::max(1.0, std::abs(want));
    wpme.note_worst(err);
    wpme.add(err <= t.oracle_pme, fmt("s=%g: %.17g vs %.17g", s, got, want));
  }
  out.push_back(wpme.done("max error"));
  return out;
}

bool all_passed(const std::vector<CheckResult>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

json checks_to_json(const std::vector<CheckResult>& checks) {
  json arr = json::array();
  for (const auto& c : checks) {
    arr.push_back({{"criterion", c.criterion},
                   {"name", c.name},
                   {"passed", c.passed},
                   {"detail", c.detail}});
  }
  return arr;
}

}  // namespace emse::lab
