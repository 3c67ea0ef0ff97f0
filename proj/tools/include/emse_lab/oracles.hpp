// Independent reference computations for tests and --check. Nothing here calls
// into the emse library.
#ifndef EMSE_LAB_ORACLES_HPP
#define EMSE_LAB_ORACLES_HPP

#include <array>
#include <cmath>
#include <numbers>

namespace oracle {

inline double normal_pdf(double y, double mean, double variance) {
  const double d = y - mean;
  return std::exp(-d * d / (2.0 * variance)) / std::sqrt(2.0 * std::numbers::pi * variance);
}

/// Bayes rule for theta * delta_value + (1 - theta) * delta_0.
inline double bernoulli_pme(double theta, double value, double y, double sigma2) {
  const double on = theta * normal_pdf(y, value, sigma2);
  const double off = (1.0 - theta) * normal_pdf(y, 0.0, sigma2);
  return value * on / (on + off);
}

/// Explicit sum over all eight state patterns of a three-entry window of the
/// 0/1 Markov chain; returns E[x(1) | y0, y1, y2].
inline double markov_window3_middle(double p10, double p01, std::array<double, 3> y,
                                    double sigma2) {
  const double pi_on = p01 / (p01 + p10);
  const double stationary[2] = {1.0 - pi_on, pi_on};
  const double trans[2][2] = {{1.0 - p01, p01}, {p10, 1.0 - p10}};
  double num = 0.0;
  double den = 0.0;
  for (int s0 = 0; s0 < 2; ++s0) {
    for (int s1 = 0; s1 < 2; ++s1) {
      for (int s2 = 0; s2 < 2; ++s2) {
        const double w = stationary[s0] * trans[s0][s1] * trans[s1][s2] *
                         normal_pdf(y[0], s0, sigma2) * normal_pdf(y[1], s1, sigma2) *
                         normal_pdf(y[2], s2, sigma2);
        num += w * s1;
        den += w;
      }
    }
  }
  return num / den;
}

/// Positive root of delta s^2 + (delta - delta sz - 1) s - delta sz = 0, the
/// fixed point of delta (s - sz) = s / (1 + s).
inline double gaussian_fixed_point(double delta, double sz) {
  const double a = delta;
  const double b = delta - delta * sz - 1.0;
  const double c = -delta * sz;
  return (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
}

}  // namespace oracle

#endif  // EMSE_LAB_ORACLES_HPP
