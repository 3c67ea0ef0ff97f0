#ifndef EMSE_PRIOR_HPP
#define EMSE_PRIOR_HPP

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace emse {

/// One component of a canonical scalar mixture. variance == 0 encodes a point
/// mass at `mean`.
struct MixtureComponent {
  double weight = 0.0;
  double mean = 0.0;
  double variance = 0.0;

  bool is_atom() const { return variance == 0.0; }
};

/// Pr[X = value] = theta, Pr[X = 0] = 1 - theta.
struct BernoulliPointMass {
  double theta = 0.0;
  double value = 1.0;
};

/// theta * N(0, variance) + (1 - theta) * delta_0.
struct BernoulliGaussian {
  double theta = 0.0;
  double variance = 1.0;
};

struct Gaussian {
  double mean = 0.0;
  double variance = 1.0;
};

struct FiniteMixture {
  std::vector<MixtureComponent> components;
};

using PriorSpec =
    std::variant<BernoulliPointMass, BernoulliGaussian, Gaussian, FiniteMixture>;

/// Validated scalar prior distribution.
///
/// Every prior is held both as the tagged description it was built from and
/// as its canonical mixture of atoms and Gaussians. All evaluation code works
/// on the mixture form. Construction throws std::invalid_argument when the
/// parameters are out of range (theta outside [0,1], non-positive variance,
/// negative weights, weights not summing to one within 1e-12).
class Prior {
 public:
  explicit Prior(PriorSpec spec);

  static Prior bernoulli(double theta, double value = 1.0);
  static Prior bernoulli_gaussian(double theta, double variance = 1.0);
  static Prior gaussian(double mean, double variance);
  static Prior mixture(std::vector<MixtureComponent> components);

  const PriorSpec& spec() const { return spec_; }
  std::span<const MixtureComponent> components() const { return components_; }

  /// The same distribution expressed as a FiniteMixture.
  Prior canonical() const;

  double mean() const;
  double second_moment() const;

  /// Density of the absolutely continuous part at x (atoms excluded).
  double density(double x) const;
  /// Total mass of atoms located exactly at x.
  double point_mass(double x) const;
  /// Density of Y = X + sqrt(sigma2) W, W ~ N(0,1).
  double smoothed_density(double y, double sigma2) const;
  double log_smoothed_density(double y, double sigma2) const;

  /// i.i.d. draws; identical (n, seed) give a bit-identical sequence.
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

  std::string describe() const;

 private:
  PriorSpec spec_;
  std::vector<MixtureComponent> components_;
};

enum class QuadratureMethod { adaptive, gauss_hermite };

/// Settings that make every mismatched-MSE evaluation deterministic.
/// `quadrature_order` applies to the Gauss-Hermite method, `quadrature_tol`
/// (relative) to the adaptive one.
struct MseEvalConfig {
  QuadratureMethod quadrature = QuadratureMethod::adaptive;
  int quadrature_order = 64;
  double quadrature_tol = 1e-13;
  std::uint64_t mc_samples = 0;
  std::uint64_t seed = 1;
  double derivative_step = 1e-3;

  /// Throws std::invalid_argument on quadrature_order < 8, quadrature_tol outside
  /// (0, 1e-3] or a step outside (0, 0.5).
  void validate() const;
};

/// splitmix64 finalizer; used to derive independent sub-seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace emse

#endif  // EMSE_PRIOR_HPP
