#include "emse/quadrature.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace emse {

// Newton iteration on the orthonormal Hermite recursion, with the classical
// asymptotic starting guesses for the largest roots. Roots are found for the
// physicists' weight exp(-x^2) and rescaled to the standard normal.
GaussHermiteRule::GaussHermiteRule(int order) {
  if (order < 1) throw std::invalid_argument("Gauss-Hermite order must be positive");
  const int n = order;
  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  std::vector<double> x(n), w(n);
  const int half = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double derivative = 0.0;
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      derivative = std::sqrt(2.0 * n) * p2;
      const double step = p1 / derivative;
      z -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) {
        converged = true;
        break;
      }
    }
    if (!converged) throw std::runtime_error("Gauss-Hermite root iteration did not converge");
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = w[n - 1 - i] = 2.0 / (derivative * derivative);
  }

  nodes_.resize(n);
  weights_.resize(n);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  // Ascending node order.
  for (int i = 0; i < n; ++i) {
    nodes_[i] = std::numbers::sqrt2 * x[n - 1 - i];
    weights_[i] = w[n - 1 - i] * inv_sqrt_pi;
  }
  if (n % 2 == 1) nodes_[n / 2] = 0.0;
}

const GaussHermiteRule& gauss_hermite(int order) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(order);
  return *slot;
}

double normal_expectation(const std::function<double(double)>& f, double tol) {
  constexpr double kHalfWidth = 13.0;
  constexpr int kMaxPanels = 4096;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const auto weighted = [&](double z) { return norm * std::exp(-0.5 * z * z) * f(z); };
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;

  struct Panel {
    double a, b, value, error, l1;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  const auto make = [&](double a, double b) {
    Panel p{a, b, 0.0, 0.0, 0.0};
    p.value = Rule::integrate(weighted, a, b, 0, 0.0, &p.error, &p.l1);
    return p;
  };

  std::priority_queue<Panel> panels;
  double value = 0.0, error = 0.0, l1 = 0.0;
  for (const auto& p : {make(-kHalfWidth, 0.0), make(0.0, kHalfWidth)}) {
    panels.push(p);
    value += p.value;
    error += p.error;
    l1 += p.l1;
  }
  while (static_cast<int>(panels.size()) < kMaxPanels &&
         error > std::max(tol * std::abs(value), 64.0 * kEps * l1)) {
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = make(worst.a, mid);
    const Panel right = make(mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    panels.push(left);
    panels.push(right);
  }
  double total = 0.0;
  while (!panels.empty()) {
    total += panels.top().value;
    panels.pop();
  }
  return total;
}

}  // namespace emse
