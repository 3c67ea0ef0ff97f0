#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "emse/prior.hpp"

using emse::MixtureComponent;
using emse::Prior;

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("second moments are exact") {
  CHECK(Prior::gaussian(0.0, 1.0).second_moment() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(Prior::bernoulli(0.1, 1.0).second_moment() == doctest::Approx(0.1).epsilon(1e-15));
  const auto mix = Prior::mixture({{0.5, 0.0, 0.0}, {0.5, 1.0, 1.0}});
  CHECK(mix.second_moment() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(Prior::bernoulli_gaussian(0.1, 1.0).second_moment() ==
        doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("sampling moments") {
  SUBCASE("standard Gaussian") {
    const auto x = Prior::gaussian(0.0, 1.0).sample(1'000'000, 7);
    const double m = mean_of(x);
    double var = 0.0;
    for (double v : x) var += (v - m) * (v - m);
    var /= static_cast<double>(x.size() - 1);
    CHECK(std::abs(m) < 4.0 / std::sqrt(1e6));
    CHECK(std::abs(var - 1.0) < 0.01);
  }
  SUBCASE("Bernoulli nonzero fraction") {
    const auto x = Prior::bernoulli(0.1, 1.0).sample(1'000'000, 7);
    std::size_t nonzero = 0;
    for (double v : x) nonzero += (v != 0.0);
    CHECK(std::abs(static_cast<double>(nonzero) / 1e6 - 0.1) < 0.002);
  }
  SUBCASE("Bernoulli-Gaussian second moment") {
    const auto x = Prior::bernoulli_gaussian(0.1, 1.0).sample(1'000'000, 7);
    double m2 = 0.0;
    for (double v : x) m2 += v * v;
    CHECK(std::abs(m2 / 1e6 - 0.1) < 0.002);
  }
}

TEST_CASE("sampling is reproducible bit for bit") {
  const auto prior = Prior::mixture({{0.3, -1.0, 0.0}, {0.7, 2.0, 0.5}});
  CHECK(prior.sample(1000, 42) == prior.sample(1000, 42));
  CHECK(prior.sample(1000, 42) != prior.sample(1000, 43));
  CHECK(prior.sample(0, 1).empty());
}

TEST_CASE("canonical form preserves the distribution") {
  const std::vector<Prior> priors = {Prior::bernoulli(0.1, 1.0), Prior::bernoulli(0.35, -2.5),
                                     Prior::bernoulli_gaussian(0.1, 1.0),
                                     Prior::bernoulli_gaussian(0.6, 3.0),
                                     Prior::gaussian(0.4, 2.0)};
  for (const auto& p : priors) {
    const auto c = p.canonical();
    CHECK(std::holds_alternative<emse::FiniteMixture>(c.spec()));
    CHECK(std::abs(p.second_moment() - c.second_moment()) <= 1e-12);
    for (double x = -4.0; x <= 4.0; x += 0.37) {
      CHECK(std::abs(p.density(x) - c.density(x)) <= 1e-12);
      CHECK(std::abs(p.smoothed_density(x, 0.3) - c.smoothed_density(x, 0.3)) <= 1e-12);
    }
    for (double atom : {0.0, 1.0, -2.5}) {
      CHECK(std::abs(p.point_mass(atom) - c.point_mass(atom)) <= 1e-12);
    }
  }
}

TEST_CASE("Bernoulli atom mass and Gaussian density") {
  const auto b = Prior::bernoulli(0.1, 1.0);
  CHECK(b.point_mass(1.0) == doctest::Approx(0.1));
  CHECK(b.point_mass(0.0) == doctest::Approx(0.9));
  CHECK(b.density(0.5) == 0.0);
  const auto g = Prior::gaussian(0.0, 1.0);
  CHECK(g.density(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));
}

TEST_CASE("invalid priors are rejected at construction") {
  CHECK_THROWS_AS(Prior::bernoulli(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(Prior::bernoulli(1.5), std::invalid_argument);
  CHECK_THROWS_AS(Prior::bernoulli_gaussian(0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Prior::gaussian(0.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(Prior::mixture({}), std::invalid_argument);
  CHECK_THROWS_AS(Prior::mixture({{0.5, 0.0, 0.0}, {0.4, 1.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(Prior::mixture({{-0.5, 0.0, 0.0}, {1.5, 1.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(Prior::mixture({{1.0, 0.0, -1.0}}), std::invalid_argument);
  CHECK_NOTHROW(Prior::mixture({{0.5, 0.0, 0.0}, {0.5 + 5e-13, 1.0, 0.0}}));
}

TEST_CASE("degenerate thetas keep a valid mixture") {
  const auto b = Prior::bernoulli(0.0);
  CHECK(b.components().size() == 1);
  CHECK(b.second_moment() == 0.0);
  CHECK(std::isfinite(b.log_smoothed_density(0.3, 0.5)));
}

TEST_CASE("eval config validation") {
  emse::MseEvalConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.quadrature_order = 7;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.quadrature_order = 64;
  cfg.derivative_step = 0.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.derivative_step = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
