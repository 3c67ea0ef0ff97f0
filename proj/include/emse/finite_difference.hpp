#ifndef EMSE_FINITE_DIFFERENCE_HPP
#define EMSE_FINITE_DIFFERENCE_HPP

#include <cmath>

namespace emse {

/// First and second derivative estimates with their extrapolation error
/// (|extrapolated - finer central difference|).
struct DerivativeEstimate {
  double first = 0.0;
  double second = 0.0;
  double first_error = 0.0;
  double second_error = 0.0;
};

/// Central differences at steps h and h/2 combined by one level of Richardson
/// extrapolation, which removes the O(h^2) truncation term. Five evaluations
/// of f.
template <class F>
DerivativeEstimate richardson_derivatives(F&& f, double x, double h) {
  const double f0 = f(x);
  const double fp = f(x + h);
  const double fm = f(x - h);
  const double fph = f(x + 0.5 * h);
  const double fmh = f(x - 0.5 * h);

  const double d1_coarse = (fp - fm) / (2.0 * h);
  const double d1_fine = (fph - fmh) / h;
  const double d2_coarse = (fp - 2.0 * f0 + fm) / (h * h);
  const double d2_fine = (fph - 2.0 * f0 + fmh) / (0.25 * h * h);

  DerivativeEstimate est;
  est.first = (4.0 * d1_fine - d1_coarse) / 3.0;
  est.second = (4.0 * d2_fine - d2_coarse) / 3.0;
  est.first_error = std::abs(est.first - d1_fine);
  est.second_error = std::abs(est.second - d2_fine);
  return est;
}

/// First derivative only; four evaluations of f.
template <class F>
double richardson_first_derivative(F&& f, double x, double h, double* error = nullptr) {
  const double d1_coarse = (f(x + h) - f(x - h)) / (2.0 * h);
  const double d1_fine = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
  const double value = (4.0 * d1_fine - d1_coarse) / 3.0;
  if (error != nullptr) *error = std::abs(value - d1_fine);
  return value;
}

}  // namespace emse

#endif  // EMSE_FINITE_DIFFERENCE_HPP
