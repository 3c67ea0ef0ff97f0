#ifndef EMSE_LAB_COMMANDS_HPP
#define EMSE_LAB_COMMANDS_HPP

#include <ostream>
#include <string>
#include <vector>

#include "emse_lab/config.hpp"

namespace emse::lab {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kNumerical = 3 };

struct TableResult {
  /// Matched system: sigma_p2 and Psi_p there.
  FixedPointSolution matched;
  std::vector<double> values;
  std::vector<MismatchPair> pairs;
  std::vector<EmseReport> rows;
};

struct CurvePoint {
  double sigma2 = 0.0;
  double mse = 0.0;
};

struct Fig1Result {
  std::vector<double> sigma2;
  std::vector<double> psi_p;
  std::vector<double> psi_q;
  /// delta (sigma2 - sigma_z2)
  std::vector<double> line;
  /// (sigma_p2, Psi_p(sigma_p2))
  CurvePoint a;
  /// (sigma_q2, Psi_q(sigma_q2))
  CurvePoint b;
  /// (sigma_p2, Psi_q(sigma_p2))
  CurvePoint c;
  EmseReport report;
};

struct Fig2Result {
  std::vector<Fig2Row> rows;
  /// Final MSE of AMP with the worse window, one entry per delta.
  std::vector<MeanWithError> amp;
};

struct AmpCaseResult {
  std::string name;
  EmseReport report;
  /// Psi_p(sigma_p2) and Psi_q(sigma_q2)
  double se_mse_p = 0.0;
  double se_mse_q = 0.0;
  MeanWithError amp_p;
  MeanWithError amp_q;
  EmpiricalEmse paired;
};

struct AmpValidateResult {
  std::vector<AmpCaseResult> cases;
};

TableResult run_table(const ExperimentConfig& cfg);
Fig1Result run_fig1(const ExperimentConfig& cfg);
Fig2Result run_fig2(const ExperimentConfig& cfg);
AmpValidateResult run_amp_validate(const ExperimentConfig& cfg);

AmpConfig amp_config(const AmpRunSettings& s);

/// Runs the experiment, writes <output_dir>/<stem>.csv and <stem>.json, and
/// with `check` evaluates the built-in acceptance checks. Returns an ExitCode;
/// diagnostics go to `err`, a short summary to `log`.
int execute(const ExperimentConfig& cfg, bool check, std::ostream& log, std::ostream& err);

}  // namespace emse::lab

#endif  // EMSE_LAB_COMMANDS_HPP
