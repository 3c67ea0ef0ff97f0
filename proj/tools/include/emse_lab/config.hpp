#ifndef EMSE_LAB_CONFIG_HPP
#define EMSE_LAB_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "emse/markov_window.hpp"
#include "emse/serialization.hpp"

namespace emse::lab {

/// Bad command line or config file; maps to exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Kind { table1, table2, fig1, fig2, amp_validate, custom };

std::string kind_name(Kind kind);
/// Throws UsageError on unknown names.
Kind kind_from_name(const std::string& name);

/// Postulated priors obtained by overwriting one field of the true prior's
/// JSON spec, e.g. {"parameter": "theta", "values": [0.11, 0.13]}.
struct Sweep {
  std::string parameter = "theta";
  std::vector<double> values;
};

struct Fig1Grid {
  double lo = 0.01;
  double hi = 1.0;
  int points = 200;
};

struct AmpRunSettings {
  std::size_t n = 10'000;
  int trials = 10;
  int max_iters = 200;
  double halt_tol = 1e-8;
};

struct AmpCase {
  std::string name;
  Prior prior = Prior::bernoulli(0.1);
  Prior postulated = Prior::bernoulli(0.1);
};

struct Fig2Settings {
  MarkovChainSpec chain;
  std::vector<double> deltas;
  int better_window = 3;
  int worse_window = 2;
  WindowMcConfig mc;
};

struct ExperimentConfig {
  Kind kind = Kind::custom;
  /// File stem of the outputs; defaults to the kind name.
  std::string name;
  std::filesystem::path output_dir = ".";
  std::uint64_t seed = 1;
  SystemParams system{0.2, 0.03};
  MseEvalConfig eval;

  /// table1, table2, custom, fig1
  Prior prior = Prior::bernoulli(0.1);
  Sweep sweep;
  /// fig1
  Prior postulated = Prior::bernoulli(0.1);
  Fig1Grid grid;
  /// amp-validate
  std::vector<AmpCase> cases;
  /// amp-validate, fig2
  AmpRunSettings amp;
  /// fig2; runs over `deltas` and ignores system.delta.
  Fig2Settings fig2;

  std::string stem() const { return name.empty() ? kind_name(kind) : name; }
};

/// Throws UsageError on malformed or invalid configs.
ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

/// The configurations behind the table1, table2, fig1, fig2 and amp-validate
/// subcommands.
ExperimentConfig builtin_config(Kind kind);

/// Postulated prior for one sweep value.
Prior swept_prior(const Prior& prior, const Sweep& sweep, double value);

}  // namespace emse::lab

#endif  // EMSE_LAB_CONFIG_HPP
