#include "emse_lab/commands.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "emse_lab/checks.hpp"

namespace emse::lab {
namespace {

std::string csv_line(std::initializer_list<std::string> cells) {
  std::string out;
  for (const auto& c : cells) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

std::string f(double v) { return format_double(v); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  out.close();
  if (!out) throw UsageError("cannot write " + path.string());
}

json mean_json(const MeanWithError& m) { return {{"mean", m.mean}, {"stderr", m.std_error}}; }

json point_json(const CurvePoint& p) { return {{"sigma2", p.sigma2}, {"mse", p.mse}}; }

struct Output {
  std::string csv;
  json results;
  std::vector<CheckResult> checks;
  /// Extra CSV files keyed by suffix appended to the stem.
  std::vector<std::pair<std::string, std::string>> extra;
};

Output table_output(const ExperimentConfig& cfg, bool check) {
  const auto r = run_table(cfg);
  std::string header = report_csv_header();
  if (cfg.sweep.parameter != "theta") {
    header.replace(0, header.find(','), cfg.sweep.parameter + "_mismatch");
  }
  std::ostringstream csv;
  csv << header << '\n';
  json rows = json::array();
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    csv << report_csv_row(r.values[i], r.rows[i]) << '\n';
    auto row = report_to_json(r.rows[i]);
    row[cfg.sweep.parameter] = r.values[i];
    row["approximation_note"] = r.rows[i].approximation_note;
    rows.push_back(row);
  }
  Output out{csv.str(),
             {{"sigma_p2", r.matched.sigma2}, {"psi_p", r.matched.psi_at}, {"rows", rows}},
             {},
             {}};
  if (check) out.checks = check_table(cfg, r);
  if (check && cfg.kind == Kind::table1) {
    for (auto& c : check_oracles(cfg.eval)) out.checks.push_back(std::move(c));
  }
  return out;
}

Output fig1_output(const ExperimentConfig& cfg, bool check) {
  const auto r = run_fig1(cfg);
  std::ostringstream csv;
  csv << "sigma2,psi_p,psi_q,line\n";
  for (std::size_t i = 0; i < r.sigma2.size(); ++i) {
    csv << csv_line({f(r.sigma2[i]), f(r.psi_p[i]), f(r.psi_q[i]), f(r.line[i])}) << '\n';
  }
  std::ostringstream pts;
  pts << "point,sigma2,mse\n";
  for (const auto& [label, p] : {std::pair{"a", r.a}, std::pair{"b", r.b}, std::pair{"c", r.c}}) {
    pts << csv_line({label, f(p.sigma2), f(p.mse)}) << '\n';
  }
  Output out{csv.str(),
             {{"a", point_json(r.a)},
              {"b", point_json(r.b)},
              {"c", point_json(r.c)},
              {"report", report_to_json(r.report)}},
             {},
             {{"_points", pts.str()}}};
  if (check) out.checks = check_fig1(cfg, r);
  return out;
}

Output fig2_output(const ExperimentConfig& cfg, bool check) {
  const auto r = run_fig2(cfg);
  std::ostringstream csv;
  csv << "delta,sigma2_of_delta,mse_x3,mse_x2_scalar,emse_s,emse_s_stderr,alpha,beta,"
         "predicted_emse_l,predicted_mse_x2_amp,amp_mse_x2,amp_mse_x2_stderr\n";
  json rows = json::array();
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& w = r.rows[i];
    csv << csv_line({f(w.delta), f(w.sigma2_of_delta), f(w.mse_x3), f(w.mse_x2_scalar),
                     f(w.emse_s), f(w.emse_s_stderr), f(w.alpha), f(w.beta),
                     f(w.predicted_emse_l), f(w.predicted_mse_x2_amp), f(r.amp[i].mean),
                     f(r.amp[i].std_error)})
        << '\n';
    auto row = fig2_row_to_json(w);
    row["amp_mse_x2"] = mean_json(r.amp[i]);
    rows.push_back(row);
  }
  Output out{csv.str(), {{"rows", rows}}, {}, {}};
  if (check) out.checks = check_fig2(cfg, r);
  return out;
}

Output amp_output(const ExperimentConfig& cfg, bool check) {
  const auto r = run_amp_validate(cfg);
  std::ostringstream csv;
  csv << "case,n,trials,sigma_p2,sigma_q2,se_mse_p,se_mse_q,amp_mse_p,amp_mse_p_stderr,"
         "amp_mse_q,amp_mse_q_stderr,emse_l_exact,emse_l_paired,emse_l_paired_stderr\n";
  json cases = json::array();
  for (const auto& c : r.cases) {
    csv << csv_line({c.name, std::to_string(cfg.amp.n), std::to_string(cfg.amp.trials),
                     f(c.report.sigma_p2), f(c.report.sigma_q2), f(c.se_mse_p), f(c.se_mse_q),
                     f(c.amp_p.mean), f(c.amp_p.std_error), f(c.amp_q.mean),
                     f(c.amp_q.std_error), f(c.report.emse_l_exact), f(c.paired.mean),
                     f(c.paired.std_error)})
        << '\n';
    cases.push_back({{"name", c.name},
                     {"report", report_to_json(c.report)},
                     {"se_mse_p", c.se_mse_p},
                     {"se_mse_q", c.se_mse_q},
                     {"amp_mse_p", mean_json(c.amp_p)},
                     {"amp_mse_q", mean_json(c.amp_q)},
                     {"emse_l_paired", mean_json({c.paired.mean, c.paired.std_error})},
                     {"trial_mse_p", c.paired.mse_true_prior},
                     {"trial_mse_q", c.paired.mse_postulated}});
  }
  Output out{csv.str(), {{"cases", cases}}, {}, {}};
  if (check) out.checks = check_amp_validate(cfg, r);
  return out;
}

}  // namespace

AmpConfig amp_config(const AmpRunSettings& s) {
  AmpConfig a;
  a.max_iters = s.max_iters;
  a.halt_tol = s.halt_tol;
  return a;
}

TableResult run_table(const ExperimentConfig& cfg) {
  TableResult r;
  r.matched = solve_se({cfg.prior, cfg.prior}, cfg.system, cfg.eval);
  r.values = cfg.sweep.values;
  for (double v : cfg.sweep.values) {
    r.pairs.push_back({cfg.prior, swept_prior(cfg.prior, cfg.sweep, v)});
    r.rows.push_back(full_report(r.pairs.back(), cfg.system, cfg.eval));
  }
  return r;
}

Fig1Result run_fig1(const ExperimentConfig& cfg) {
  const MismatchPair matched{cfg.prior, cfg.prior};
  const MismatchPair mismatched{cfg.prior, cfg.postulated};
  Fig1Result r;
  const auto& g = cfg.grid;
  for (int i = 0; i < g.points; ++i) {
    const double s = g.lo + (g.hi - g.lo) * i / (g.points - 1);
    r.sigma2.push_back(s);
    r.psi_p.push_back(psi(matched, s, cfg.eval));
    r.psi_q.push_back(psi(mismatched, s, cfg.eval));
    r.line.push_back(cfg.system.delta * (s - cfg.system.sigma_z2));
  }
  r.report = full_report(mismatched, cfg.system, cfg.eval);
  r.a = {r.report.sigma_p2, psi(matched, r.report.sigma_p2, cfg.eval)};
  r.b = {r.report.sigma_q2, psi(mismatched, r.report.sigma_q2, cfg.eval)};
  r.c = {r.report.sigma_p2, psi(mismatched, r.report.sigma_p2, cfg.eval)};
  return r;
}

Fig2Result run_fig2(const ExperimentConfig& cfg) {
  const auto& s = cfg.fig2;
  WindowMcConfig mc = s.mc;
  mc.seed = derive_seed(cfg.seed, 0);
  Fig2Result r;
  r.rows = predict_fig2(s.chain, s.deltas, cfg.system.sigma_z2, cfg.eval, mc, s.better_window,
                        s.worse_window);
  const WindowDenoiser worse(s.chain, s.worse_window);
  for (std::size_t i = 0; i < s.deltas.size(); ++i) {
    r.amp.push_back(amp_window_mse(worse, cfg.amp.n, {s.deltas[i], cfg.system.sigma_z2},
                                   cfg.amp.trials, derive_seed(cfg.seed, 1 + i),
                                   amp_config(cfg.amp)));
  }
  return r;
}

AmpValidateResult run_amp_validate(const ExperimentConfig& cfg) {
  AmpValidateResult r;
  for (std::size_t i = 0; i < cfg.cases.size(); ++i) {
    const auto& c = cfg.cases[i];
    AmpCaseResult out;
    out.name = c.name;
    const MismatchPair pair{c.prior, c.postulated};
    out.report = emse_l_exact(pair, cfg.system, cfg.eval);
    out.se_mse_p = psi({c.prior, c.prior}, out.report.sigma_p2, cfg.eval);
    out.se_mse_q = psi(pair, out.report.sigma_q2, cfg.eval);
    out.paired = empirical_emse_l(c.prior, c.postulated, cfg.amp.n, cfg.system, cfg.amp.trials,
                                  derive_seed(cfg.seed, i), amp_config(cfg.amp));
    out.amp_p = mean_and_stderr(out.paired.mse_true_prior);
    out.amp_q = mean_and_stderr(out.paired.mse_postulated);
    r.cases.push_back(std::move(out));
  }
  return r;
}

int execute(const ExperimentConfig& cfg, bool check, std::ostream& log, std::ostream& err) {
  try {
    Output out;
    switch (cfg.kind) {
      case Kind::table1:
      case Kind::table2:
      case Kind::custom: out = table_output(cfg, check); break;
      case Kind::fig1: out = fig1_output(cfg, check); break;
      case Kind::fig2: out = fig2_output(cfg, check); break;
      case Kind::amp_validate: out = amp_output(cfg, check); break;
    }

    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw UsageError("cannot create " + cfg.output_dir.string() + ": " + ec.message());
    const auto base = cfg.output_dir / cfg.stem();
    json sidecar = {{"config", config_to_json(cfg)},
                    {"tolerances", tolerances_to_json(kTolerances)},
                    {"results", out.results}};
    if (check) sidecar["checks"] = checks_to_json(out.checks);
    write_file(base.string() + ".csv", out.csv);
    for (const auto& [suffix, text] : out.extra) write_file(base.string() + suffix + ".csv", text);
    write_file(base.string() + ".json", sidecar.dump(2) + "\n");

    for (const auto& c : out.checks) {
      log << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    }
    log << "wrote " << base.string() << ".csv\n";
    if (check && !all_passed(out.checks)) {
      err << "error: " << cfg.stem() << " failed its checks\n";
      return kCheckFailed;
    }
    return kOk;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace emse::lab
