#ifndef EMSE_LAB_CHECKS_HPP
#define EMSE_LAB_CHECKS_HPP

#include <string>
#include <vector>

#include "emse_lab/commands.hpp"

namespace emse::lab {

struct CheckResult {
  /// fixed_point, table, identity, approximation, property, oracle,
  /// fig1, fig2 or decoupling
  std::string criterion;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Tolerances {
  double fixed_point_abs = 0.005;
  double delta_rel = 0.02;
  double delta_abs = 2e-4;
  /// Relative-error columns, in percentage points and as a fraction of the
  /// reference value; the larger applies.
  double rel_err_pp = 0.3;
  double rel_err_rel = 0.15;
  /// Reference "<" entries are checked as upper bounds, in percent.
  double rel_err_upper_bound_pct = 0.01;
  double identity = 1e-8;
  double beta_continuity_rel = 1e-12;
  double ordering_slack = 1e-9;
  double kl_rel = 0.01;
  double oracle_gaussian = 1e-10;
  double oracle_pme = 1e-12;
  double fig1_gap = 1e-10;
  double fig2_rel = 0.10;
  int fig2_min_points = 8;
  double decoupling_rel = 0.05;
  double decoupling_stderr = 3.0;
};

inline const Tolerances kTolerances{};

json tolerances_to_json(const Tolerances& t);

/// Reference fixed point and table columns for table1/table2; other kinds
/// get only the structural checks.
std::vector<CheckResult> check_table(const ExperimentConfig& cfg, const TableResult& result);
std::vector<CheckResult> check_fig1(const ExperimentConfig& cfg, const Fig1Result& result);
std::vector<CheckResult> check_fig2(const ExperimentConfig& cfg, const Fig2Result& result);
std::vector<CheckResult> check_amp_validate(const ExperimentConfig& cfg,
                                            const AmpValidateResult& result);

/// Library against the closed-form and enumeration references: linear-Gaussian
/// Psi and fixed point, Bernoulli posterior mean, width-3 window posterior mean.
std::vector<CheckResult> check_oracles(const MseEvalConfig& eval);

bool all_passed(const std::vector<CheckResult>& checks);
json checks_to_json(const std::vector<CheckResult>& checks);

}  // namespace emse::lab

#endif  // EMSE_LAB_CHECKS_HPP
