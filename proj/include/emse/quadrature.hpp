#ifndef EMSE_QUADRATURE_HPP
#define EMSE_QUADRATURE_HPP

#include <functional>
#include <span>
#include <vector>

namespace emse {

/// Gauss-Hermite rule normalized for the standard normal weight: for
/// Z ~ N(0,1), E[f(Z)] ~= sum_i weight_i * f(node_i), and the weights sum to 1.
/// Exact for polynomials of degree < 2 * order.
class GaussHermiteRule {
 public:
  explicit GaussHermiteRule(int order);

  int order() const { return static_cast<int>(nodes_.size()); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

  template <class F>
  double expectation(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(nodes_[i]);
    return sum;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Shared rule of the given order, built once per order. Thread-safe.
const GaussHermiteRule& gauss_hermite(int order);

/// E[f(Z)] for Z ~ N(0,1) by adaptive Gauss-Kronrod on |z| <= 13, where the
/// neglected normal mass is below 1e-37. Relative tolerance `tol`.
double normal_expectation(const std::function<double(double)>& f, double tol);

}  // namespace emse

#endif  // EMSE_QUADRATURE_HPP
