#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "emse_lab/checks.hpp"
#include "emse_lab/commands.hpp"

namespace fs = std::filesystem;
namespace lab = emse::lab;
using emse::json;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("emse_lab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EMSE_LAB_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int execute(const lab::ExperimentConfig& cfg, bool check, std::string* log = nullptr) {
  std::ostringstream out, err;
  const int code = lab::execute(cfg, check, out, err);
  if (log) *log = out.str() + err.str();
  return code;
}

lab::ExperimentConfig small_fig2(const fs::path& dir) {
  auto cfg = lab::builtin_config(lab::Kind::fig2);
  cfg.output_dir = dir;
  cfg.fig2.deltas = {0.3, 0.5};
  cfg.fig2.mc = {20'000, 8, 1};
  cfg.amp.n = 500;
  cfg.amp.trials = 2;
  cfg.amp.max_iters = 20;
  return cfg;
}

}  // namespace

TEST_CASE("shipped config files match the built-in subcommands") {
  for (auto kind : {lab::Kind::table1, lab::Kind::table2, lab::Kind::fig1, lab::Kind::fig2,
                    lab::Kind::amp_validate}) {
    CAPTURE(lab::kind_name(kind));
    const auto file = lab::load_config(fs::path(EMSE_SOURCE_DIR) / "configs" /
                                       (lab::kind_name(kind) + ".json"));
    auto builtin = lab::builtin_config(kind);
    builtin.output_dir = "out";
    CHECK(lab::config_to_json(file) == lab::config_to_json(builtin));
  }
}

TEST_CASE("config JSON round-trips") {
  std::vector<lab::ExperimentConfig> cfgs;
  for (auto kind : {lab::Kind::table1, lab::Kind::table2, lab::Kind::fig1, lab::Kind::fig2,
                    lab::Kind::amp_validate}) {
    cfgs.push_back(lab::builtin_config(kind));
  }
  cfgs.push_back(lab::load_config(fs::path(EMSE_SOURCE_DIR) / "configs" / "variance-sweep.json"));
  for (const auto& cfg : cfgs) {
    const auto j = lab::config_to_json(cfg);
    CHECK(lab::config_to_json(lab::config_from_json(json::parse(j.dump()))) == j);
  }
  const auto custom = cfgs.back();
  CHECK(custom.stem() == "variance_sweep");
  CHECK(custom.eval.seed == 7);
  CHECK(lab::swept_prior(custom.prior, custom.sweep, 3.0).second_moment() ==
        doctest::Approx(0.3));
}

TEST_CASE("config errors are usage errors") {
  const auto bad = [](const char* text) {
    return lab::config_from_json(json::parse(text));
  };
  CHECK_THROWS_AS(bad(R"([])"), lab::UsageError);
  CHECK_THROWS_AS(bad(R"({"kind": "table3"})"), lab::UsageError);
  CHECK_THROWS_AS(bad(R"({"kind": "custom", "sweep": {"values": [0.2]}})"), lab::UsageError);
  CHECK_THROWS_AS(bad(R"({"kind": "custom", "prior": {"type": "bernoulli", "theta": 0.1},
                          "sweep": {"parameter": "variance", "values": [0.2]}})"),
                  lab::UsageError);
  CHECK_THROWS_AS(bad(R"({"kind": "custom", "prior": {"type": "bernoulli", "theta": 0.1},
                          "sweep": {"values": [1.5]}})"),
                  lab::UsageError);
  CHECK_THROWS_AS(bad(R"({"kind": "custom", "prior": {"type": "bernoulli", "theta": 0.1},
                          "sweep": {"values": []}})"),
                  lab::UsageError);
  CHECK_THROWS_AS(bad(R"({"kind": "custom", "system": {"delta": -1},
                          "prior": {"type": "bernoulli", "theta": 0.1},
                          "sweep": {"values": [0.2]}})"),
                  lab::UsageError);
  CHECK_THROWS_AS(bad(R"({"kind": "fig2", "fig2": {"deltas": [0.3], "worse_window": 4}})"),
                  lab::UsageError);
  CHECK_THROWS_AS(bad(R"({"kind": "fig2", "fig2": {"deltas": [0.3]}, "amp": {"trials": 1}})"),
                  lab::UsageError);
  CHECK_THROWS_AS(bad(R"({"kind": "amp-validate", "cases": [{"prior": {"type": "gaussian"}}]})"),
                  lab::UsageError);
  CHECK_THROWS_AS(bad(R"({"kind": "fig1", "prior": {"type": "bernoulli", "theta": 0.1}})"),
                  lab::UsageError);
  CHECK_THROWS_AS(bad(R"({"kind": "custom", "seed": "one"})"), lab::UsageError);
  CHECK_THROWS_AS(lab::builtin_config(lab::Kind::custom), lab::UsageError);

  const auto dir = scratch("badjson");
  fs::create_directories(dir);
  std::ofstream(dir / "broken.json") << "{\"kind\": ";
  CHECK_THROWS_AS(lab::load_config(dir / "broken.json"), lab::UsageError);
  CHECK_THROWS_AS(lab::load_config(dir / "absent.json"), lab::UsageError);
}

TEST_CASE("table1 with checks writes CSV and sidecar") {
  auto cfg = lab::builtin_config(lab::Kind::table1);
  cfg.output_dir = scratch("table1");
  std::string log;
  REQUIRE(execute(cfg, true, &log) == lab::kOk);
  CHECK(log.find("FAIL") == std::string::npos);

  const auto csv = lines(slurp(cfg.output_dir / "table1.csv"));
  REQUIRE(csv.size() == 6);
  CHECK(csv[0] == emse::report_csv_header());
  CHECK(csv[3].rfind("0.15,", 0) == 0);

  const auto sidecar = json::parse(slurp(cfg.output_dir / "table1.json"));
  CHECK(sidecar.at("config") == lab::config_to_json(cfg));
  CHECK(sidecar.at("tolerances").at("delta_rel").get<double>() == 0.02);
  CHECK(sidecar.at("results").at("rows").size() == 5);
  const auto& checks = sidecar.at("checks");
  CHECK(checks.size() >= 15);
  for (const auto& c : checks) CHECK(c.at("passed").get<bool>());

  const double delta = sidecar.at("results").at("rows")[2].at("Delta").get<double>();
  CHECK(std::abs(delta - 0.0178) <= 0.02 * 0.0178);
}

TEST_CASE("outputs are deterministic given the config") {
  auto cfg = lab::builtin_config(lab::Kind::table2);
  cfg.output_dir = scratch("determinism_a");
  REQUIRE(execute(cfg, false) == lab::kOk);
  const auto first = slurp(cfg.output_dir / "table2.csv");
  const auto first_json = json::parse(slurp(cfg.output_dir / "table2.json"));
  cfg.output_dir = scratch("determinism_b");
  REQUIRE(execute(cfg, false) == lab::kOk);
  CHECK(slurp(cfg.output_dir / "table2.csv") == first);
  CHECK(json::parse(slurp(cfg.output_dir / "table2.json")).at("results") ==
        first_json.at("results"));

  auto amp = lab::builtin_config(lab::Kind::amp_validate);
  amp.amp.n = 400;
  amp.amp.trials = 2;
  amp.output_dir = scratch("determinism_amp_a");
  REQUIRE(execute(amp, false) == lab::kOk);
  const auto amp_first = slurp(amp.output_dir / "amp-validate.csv");
  amp.output_dir = scratch("determinism_amp_b");
  REQUIRE(execute(amp, false) == lab::kOk);
  CHECK(slurp(amp.output_dir / "amp-validate.csv") == amp_first);
  amp.seed = 99;
  amp.output_dir = scratch("determinism_amp_c");
  REQUIRE(execute(amp, false) == lab::kOk);
  CHECK(slurp(amp.output_dir / "amp-validate.csv") != amp_first);
}

TEST_CASE("a matched sweep value gives a zero row with n/a") {
  const auto cfg = lab::config_from_json(json::parse(R"({
    "kind": "custom", "name": "matched", "output_dir": ")" +
                                                     scratch("matched").string() + R"(",
    "prior": {"type": "bernoulli", "theta": 0.1},
    "sweep": {"values": [0.1, 0.15]}})"));
  REQUIRE(execute(cfg, true) == lab::kOk);
  const auto csv = lines(slurp(cfg.output_dir / "matched.csv"));
  REQUIRE(csv.size() == 3);
  CHECK(csv[1] == "0.1,0,n/a,n/a,n/a");
  const auto rows = json::parse(slurp(cfg.output_dir / "matched.json")).at("results").at("rows");
  CHECK(rows[0].at("emse_l_exact").get<double>() == 0.0);
  CHECK(rows[0].at("rel_err_first").is_null());
}

TEST_CASE("variance sweep names its first column") {
  auto cfg = lab::load_config(fs::path(EMSE_SOURCE_DIR) / "configs" / "variance-sweep.json");
  cfg.output_dir = scratch("variance");
  REQUIRE(execute(cfg, true) == lab::kOk);
  const auto csv = lines(slurp(cfg.output_dir / "variance_sweep.csv"));
  REQUIRE(csv.size() == 5);
  CHECK(csv[0].rfind("variance_mismatch,Delta,", 0) == 0);
}

TEST_CASE("reference checks fail on a different system") {
  auto cfg = lab::builtin_config(lab::Kind::table1);
  cfg.system.sigma_z2 = 0.05;
  cfg.output_dir = scratch("table1_shifted");
  std::string log;
  CHECK(execute(cfg, true, &log) == lab::kCheckFailed);
  CHECK(log.find("FAIL fixed point") != std::string::npos);
  CHECK(fs::exists(cfg.output_dir / "table1.csv"));
  CHECK(execute(cfg, false) == lab::kOk);
}

TEST_CASE("numerical failures map to exit code 3") {
  // The square noiseless Gaussian system converges too slowly for the solver.
  const auto cfg = lab::config_from_json(json::parse(R"({
    "kind": "custom", "output_dir": ")" + scratch("numerical").string() + R"(",
    "system": {"delta": 1.0, "sigma_z2": 1e-6},
    "prior": {"type": "gaussian", "mean": 0, "variance": 1},
    "sweep": {"parameter": "variance", "values": [2.0]}})"));
  std::string log;
  CHECK(execute(cfg, false, &log) == lab::kNumerical);
  CHECK(log.find("did not converge") != std::string::npos);
}

TEST_CASE("unwritable output is a usage error") {
  const auto dir = scratch("blocked");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  auto cfg = lab::builtin_config(lab::Kind::table1);
  cfg.output_dir = dir / "file" / "sub";
  CHECK(execute(cfg, false) == lab::kUsage);
}

TEST_CASE("fig1 curves and points") {
  auto cfg = lab::builtin_config(lab::Kind::fig1);
  cfg.output_dir = scratch("fig1");
  REQUIRE(execute(cfg, true) == lab::kOk);
  const auto csv = lines(slurp(cfg.output_dir / "fig1.csv"));
  REQUIRE(csv.size() == 201);
  CHECK(csv[0] == "sigma2,psi_p,psi_q,line");
  CHECK(csv[1].rfind("0.01,", 0) == 0);
  CHECK(csv[200].rfind("1,", 0) == 0);
  const auto pts = lines(slurp(cfg.output_dir / "fig1_points.csv"));
  REQUIRE(pts.size() == 4);

  const auto r = lab::run_fig1(cfg);
  CHECK(std::abs(r.a.sigma2 - 0.27) <= 0.005);
  CHECK(r.b.sigma2 > r.c.sigma2);
  CHECK(r.c.mse > r.a.mse);
  CHECK(r.b.mse > r.c.mse);
  for (std::size_t i = 0; i < r.sigma2.size(); ++i) CHECK(r.psi_p[i] <= r.psi_q[i] + 1e-12);
}

TEST_CASE("fig2 pipeline on a small budget") {
  const auto cfg = small_fig2(scratch("fig2"));
  std::string log;
  // Two grid points are below the minimum the built-in check requires.
  CHECK(execute(cfg, true, &log) == lab::kCheckFailed);
  CHECK(log.find("FAIL grid size") != std::string::npos);
  const auto csv = lines(slurp(cfg.output_dir / "fig2.csv"));
  REQUIRE(csv.size() == 3);
  CHECK(std::count(csv[0].begin(), csv[0].end(), ',') == 11);
  const auto rows = json::parse(slurp(cfg.output_dir / "fig2.json")).at("results").at("rows");
  CHECK(rows[1].at("amp_mse_x2").at("mean").get<double>() > 0.0);
}

TEST_CASE("amp-validate on a small budget") {
  auto cfg = lab::builtin_config(lab::Kind::amp_validate);
  cfg.amp.n = 1000;
  cfg.amp.trials = 3;
  cfg.output_dir = scratch("ampv");
  REQUIRE(execute(cfg, false) == lab::kOk);
  const auto csv = lines(slurp(cfg.output_dir / "amp-validate.csv"));
  REQUIRE(csv.size() == 3);
  CHECK(csv[1].rfind("bernoulli,1000,3,", 0) == 0);
  const auto r = lab::run_amp_validate(cfg);
  REQUIRE(r.cases.size() == 2);
  for (const auto& c : r.cases) {
    CHECK(c.se_mse_q > c.se_mse_p);
    CHECK(c.paired.mse_true_prior.size() == 3);
    CHECK(c.amp_p.mean == doctest::Approx(emse::mean_and_stderr(c.paired.mse_true_prior).mean));
  }
}

TEST_CASE("command line exit codes") {
  const auto dir = scratch("cli");
  CHECK(run_cli("") == lab::kUsage);
  CHECK(run_cli("table9") == lab::kUsage);
  CHECK(run_cli("table1 --bogus") == lab::kUsage);
  CHECK(run_cli("table1 --trials 1") == lab::kUsage);
  CHECK(run_cli("run " + (dir / "missing.json").string()) == lab::kUsage);
  CHECK(run_cli("--help") == lab::kOk);
  CHECK(run_cli("table1 --check --out " + dir.string()) == lab::kOk);
  CHECK(fs::exists(dir / "table1.csv"));
  CHECK(run_cli("run " + (fs::path(EMSE_SOURCE_DIR) / "configs" / "table2.json").string() +
                " --check --seed 5 --out " + dir.string()) == lab::kOk);
  const auto sidecar = json::parse(slurp(dir / "table2.json"));
  CHECK(sidecar.at("config").at("seed").get<std::uint64_t>() == 5);
  CHECK(sidecar.at("config").at("output_dir").get<std::string>() == dir.string());
}
