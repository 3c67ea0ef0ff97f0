#include "emse/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace emse {
namespace {

constexpr double kWeightSumTol = 1e-12;

void check_probability(double theta, const char* what) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
  }
}

void check_variance(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

double log_normal_pdf(double y, double mean, double variance) {
  const double d = y - mean;
  return -0.5 * (d * d / variance + std::log(2.0 * std::numbers::pi * variance));
}

struct Canonicalize {
  std::vector<MixtureComponent> operator()(const BernoulliPointMass& b) const {
    check_probability(b.theta, "theta");
    if (!std::isfinite(b.value)) throw std::invalid_argument("atom value must be finite");
    return {{1.0 - b.theta, 0.0, 0.0}, {b.theta, b.value, 0.0}};
  }
  std::vector<MixtureComponent> operator()(const BernoulliGaussian& b) const {
    check_probability(b.theta, "theta");
    check_variance(b.variance, "Bernoulli-Gaussian variance");
    return {{1.0 - b.theta, 0.0, 0.0}, {b.theta, 0.0, b.variance}};
  }
  std::vector<MixtureComponent> operator()(const Gaussian& g) const {
    check_variance(g.variance, "Gaussian variance");
    if (!std::isfinite(g.mean)) throw std::invalid_argument("Gaussian mean must be finite");
    return {{1.0, g.mean, g.variance}};
  }
  std::vector<MixtureComponent> operator()(const FiniteMixture& m) const {
    if (m.components.empty()) throw std::invalid_argument("mixture has no components");
    double total = 0.0;
    for (const auto& c : m.components) {
      if (!(c.weight >= 0.0)) throw std::invalid_argument("mixture weights must be nonnegative");
      if (c.variance != 0.0) check_variance(c.variance, "mixture component variance");
      if (!std::isfinite(c.mean)) throw std::invalid_argument("mixture means must be finite");
      total += c.weight;
    }
    if (std::abs(total - 1.0) > kWeightSumTol) {
      throw std::invalid_argument("mixture weights must sum to 1");
    }
    return m.components;
  }
};

}  // namespace

Prior::Prior(PriorSpec spec)
    : spec_(std::move(spec)), components_(std::visit(Canonicalize{}, spec_)) {
  // Zero-weight components never contribute and would yield log(0) terms.
  std::erase_if(components_, [](const MixtureComponent& c) { return c.weight == 0.0; });
}

Prior Prior::bernoulli(double theta, double value) {
  return Prior(BernoulliPointMass{theta, value});
}

Prior Prior::bernoulli_gaussian(double theta, double variance) {
  return Prior(BernoulliGaussian{theta, variance});
}

Prior Prior::gaussian(double mean, double variance) { return Prior(Gaussian{mean, variance}); }

Prior Prior::mixture(std::vector<MixtureComponent> components) {
  return Prior(FiniteMixture{std::move(components)});
}

Prior Prior::canonical() const { return Prior(FiniteMixture{components_}); }

double Prior::mean() const {
  double m = 0.0;
  for (const auto& c : components_) m += c.weight * c.mean;
  return m;
}

double Prior::second_moment() const {
  double m2 = 0.0;
  for (const auto& c : components_) m2 += c.weight * (c.mean * c.mean + c.variance);
  return m2;
}

double Prior::density(double x) const {
  double d = 0.0;
  for (const auto& c : components_) {
    if (!c.is_atom()) d += c.weight * std::exp(log_normal_pdf(x, c.mean, c.variance));
  }
  return d;
}

double Prior::point_mass(double x) const {
  double mass = 0.0;
  for (const auto& c : components_) {
    if (c.is_atom() && c.mean == x) mass += c.weight;
  }
  return mass;
}

double Prior::smoothed_density(double y, double sigma2) const {
  return std::exp(log_smoothed_density(y, sigma2));
}

double Prior::log_smoothed_density(double y, double sigma2) const {
  if (!(sigma2 > 0.0)) throw std::domain_error("noise variance must be positive");
  double max_term = -std::numeric_limits<double>::infinity();
  thread_local std::vector<double> terms;
  terms.resize(components_.size());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    terms[k] = std::log(c.weight) + log_normal_pdf(y, c.mean, c.variance + sigma2);
    max_term = std::max(max_term, terms[k]);
  }
  double s = 0.0;
  for (double t : terms) s += std::exp(t - max_term);
  return max_term + std::log(s);
}

std::vector<double> Prior::sample(std::size_t n, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<double> weights;
  weights.reserve(components_.size());
  for (const auto& c : components_) weights.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> out(n);
  for (auto& x : out) {
    const auto& c = components_[pick(rng)];
    x = c.is_atom() ? c.mean : c.mean + std::sqrt(c.variance) * normal(rng);
  }
  return out;
}

std::string Prior::describe() const {
  std::ostringstream os;
  struct Visitor {
    std::ostringstream& os;
    void operator()(const BernoulliPointMass& b) const {
      os << "bernoulli(theta=" << b.theta << ", value=" << b.value << ")";
    }
    void operator()(const BernoulliGaussian& b) const {
      os << "bernoulli_gaussian(theta=" << b.theta << ", variance=" << b.variance << ")";
    }
    void operator()(const Gaussian& g) const {
      os << "gaussian(mean=" << g.mean << ", variance=" << g.variance << ")";
    }
    void operator()(const FiniteMixture& m) const {
      os << "mixture(" << m.components.size() << " components)";
    }
  };
  std::visit(Visitor{os}, spec_);
  return os.str();
}

void MseEvalConfig::validate() const {
  if (quadrature_order < 8) throw std::invalid_argument("quadrature_order must be >= 8");
  if (!(quadrature_tol > 0.0 && quadrature_tol <= 1e-3)) {
    throw std::invalid_argument("quadrature_tol must lie in (0, 1e-3]");
  }
  if (!(derivative_step > 0.0 && derivative_step < 0.5)) {
    throw std::invalid_argument("derivative_step must lie in (0, 0.5)");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace emse
