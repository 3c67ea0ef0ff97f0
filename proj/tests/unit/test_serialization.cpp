#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "emse/serialization.hpp"

using emse::json;
using emse::Prior;

TEST_CASE("priors round-trip through JSON") {
  const std::vector<Prior> priors = {
      Prior::bernoulli(0.1), Prior::bernoulli(0.3, 2.5), Prior::bernoulli_gaussian(0.2, 4.0),
      Prior::gaussian(-1.0, 0.5),
      Prior::mixture({{0.5, 0.0, 0.0}, {0.3, 1.0, 2.0}, {0.2, -2.0, 0.0}})};
  for (const auto& p : priors) {
    const auto j = emse::prior_to_json(p);
    const auto back = emse::prior_from_json(json::parse(j.dump()));
    CHECK(back.describe() == p.describe());
    CHECK(back.second_moment() == p.second_moment());
    CHECK(emse::prior_to_json(back) == j);
  }
}

TEST_CASE("prior JSON errors") {
  CHECK_THROWS_AS(emse::prior_from_json(json::parse(R"({"theta": 0.1})")), std::invalid_argument);
  CHECK_THROWS_AS(emse::prior_from_json(json::parse(R"({"type": "laplace"})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(emse::prior_from_json(json::parse(R"({"type": "bernoulli"})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(emse::prior_from_json(json::parse(R"({"type": "bernoulli", "theta": "x"})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(emse::prior_from_json(json::parse(R"({"type": "bernoulli", "theta": 1.5})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      emse::prior_from_json(json::parse(R"({"type": "mixture", "components": [{"weight": 1}]})")),
      std::invalid_argument);
  CHECK_THROWS_AS(emse::prior_from_json(json::parse(
                      R"({"type": "mixture", "components": [{"weight": 1, "gaussian": {"mean": 0, "variance": 0}}]})")),
                  std::invalid_argument);
  const auto defaulted = emse::prior_from_json(json::parse(R"({"type": "bernoulli", "theta": 0.2})"));
  CHECK(defaulted.mean() == doctest::Approx(0.2));
}

TEST_CASE("evaluation config JSON") {
  emse::MseEvalConfig cfg;
  cfg.quadrature = emse::QuadratureMethod::gauss_hermite;
  cfg.quadrature_order = 96;
  cfg.mc_samples = 1000;
  cfg.seed = 42;
  cfg.derivative_step = 2e-3;
  const auto back = emse::eval_config_from_json(emse::eval_config_to_json(cfg));
  CHECK(back.quadrature == emse::QuadratureMethod::gauss_hermite);
  CHECK(back.quadrature_order == 96);
  CHECK(back.mc_samples == 1000);
  CHECK(back.seed == 42);
  CHECK(back.derivative_step == 2e-3);

  const auto partial = emse::eval_config_from_json(json::parse(R"({"seed": 7})"));
  CHECK(partial.seed == 7);
  CHECK(partial.quadrature == emse::QuadratureMethod::adaptive);
  CHECK_THROWS_AS(emse::eval_config_from_json(json::parse(R"({"quadrature": "simpson"})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(emse::eval_config_from_json(json::parse(R"({"quadrature_order": 4})")),
                  std::invalid_argument);
}

TEST_CASE("shortest round-trip formatting") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(mant(rng), expo(rng));
    CHECK(std::stod(emse::format_double(v)) == v);
  }
  CHECK(emse::format_double(0.1) == "0.1");
  CHECK(emse::format_double(2.0) == "2");
  CHECK(emse::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(emse::format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(emse::format_optional(std::nullopt) == "n/a");
  CHECK(emse::format_optional(0.25) == "0.25");
}

TEST_CASE("report CSV and JSON layout") {
  emse::EmseReport r;
  r.delta = 0.2;
  r.alpha = 0.05;
  r.Delta = 0.0178;
  r.rel_err_first = 0.028;
  r.rel_err_second_sqrt = 0.0011;
  CHECK(emse::report_csv_header() ==
        "theta_mismatch,Delta,rel_err_first,rel_err_second_taylor,rel_err_second_sqrt");
  CHECK(emse::report_csv_row(0.15, r) == "0.15,0.0178,0.028,n/a,0.0011");
  const auto j = emse::report_to_json(r);
  CHECK(j.at("rel_err_second_taylor").is_null());
  CHECK(j.at("rel_err_first").get<double>() == 0.028);
  CHECK(j.at("amplification").get<double>() == doctest::Approx(0.2 / 0.15));
  for (const auto& [key, value] : j.items()) CHECK_FALSE(value.is_object());
}

TEST_CASE("AMP artifacts") {
  const auto inst = emse::generate_instance(Prior::bernoulli(0.1), 20, {0.5, 0.01}, 3);
  const auto j = emse::instance_to_json(inst);
  CHECK(j.at("m").get<std::size_t>() == 10);
  CHECK(j.at("matrix").size() == 10);
  CHECK(j.at("matrix")[0].size() == 20);
  CHECK(j.at("matrix")[2][7].get<double>() == inst.matrix(2, 7));

  const auto trace = emse::run_amp(inst, Prior::bernoulli(0.1));
  std::ostringstream os;
  emse::write_trace_csv(os, trace);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "iteration,mse,sigma2_est");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == trace.iterations());
  CHECK(emse::trace_to_json(trace).at("mse").size() == trace.mse.size());
}
