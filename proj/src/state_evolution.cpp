#include "emse/state_evolution.hpp"

#include <cmath>
#include <stdexcept>

namespace emse {
namespace {

constexpr double kIterationRelTol = 1e-12;
constexpr double kIterationAbsTolFactor = 1e-15;
constexpr int kMaxIterations = 10000;
constexpr double kBisectionRelTol = 1e-12;

FixedPointSolution describe_root(const MismatchPair& pair, const SystemParams& params,
                                 const MseEvalConfig& cfg, double sigma2, int iterations) {
  FixedPointSolution sol;
  sol.sigma2 = sigma2;
  sol.psi_at = psi_quadrature(pair, sigma2, cfg);
  sol.residual = std::abs(params.delta * (sigma2 - params.sigma_z2) - sol.psi_at);
  sol.slope = psi_derivatives(pair, sigma2, cfg).alpha;
  sol.stable = sol.slope < params.delta;
  sol.iterations = iterations;
  return sol;
}

}  // namespace

void SystemParams::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("measurement rate must be positive");
  }
  if (!(sigma_z2 >= 0.0) || !std::isfinite(sigma_z2)) {
    throw std::invalid_argument("measurement noise variance must be nonnegative");
  }
}

double initial_sigma2(const MismatchPair& pair, const SystemParams& params) {
  return params.sigma_z2 + pair.true_prior.second_moment() / params.delta;
}

FixedPointSolution solve_se(const MismatchPair& pair, const SystemParams& params,
                            const MseEvalConfig& cfg) {
  params.validate();
  cfg.validate();
  const auto psi_fn = [&](double s) { return psi_quadrature(pair, s, cfg); };
  const double start = initial_sigma2(pair, params);
  const auto it = iterate_state_evolution(psi_fn, params, start, kIterationRelTol,
                                          kIterationAbsTolFactor * start, kMaxIterations);
  return describe_root(pair, params, cfg, it.sigma2, it.iterations);
}

std::vector<FixedPointSolution> scan_fixed_points(const MismatchPair& pair,
                                                  const SystemParams& params,
                                                  const MseEvalConfig& cfg,
                                                  std::optional<ScanGrid> grid) {
  params.validate();
  cfg.validate();
  ScanGrid g = grid.value_or(ScanGrid{params.sigma_z2, initial_sigma2(pair, params), 512});
  if (g.count < 2) throw std::invalid_argument("scan grid needs at least two points");
  if (!(g.hi > 0.0)) throw std::invalid_argument("scan grid upper end must be positive");
  if (!(g.lo > 0.0)) g.lo = 1e-9 * g.hi;

  const auto gap = [&](double s) {
    return params.delta * (s - params.sigma_z2) - psi_quadrature(pair, s, cfg);
  };
  // The line eventually dominates Psi, which is bounded for these priors.
  while (gap(g.hi) <= 0.0) g.hi *= 2.0;

  std::vector<double> points(g.count);
  std::vector<double> values(g.count);
  const double ratio = std::pow(g.hi / g.lo, 1.0 / (g.count - 1));
  for (int i = 0; i < g.count; ++i) {
    points[i] = (i == g.count - 1) ? g.hi : g.lo * std::pow(ratio, i);
    values[i] = gap(points[i]);
  }

  std::vector<FixedPointSolution> roots;
  for (int i = 0; i + 1 < g.count; ++i) {
    if (values[i] == 0.0) {
      roots.push_back(describe_root(pair, params, cfg, points[i], 0));
      continue;
    }
    if ((values[i] < 0.0) == (values[i + 1] < 0.0) || values[i + 1] == 0.0) continue;
    double a = points[i];
    double b = points[i + 1];
    double ga = values[i];
    int steps = 0;
    while (b - a > kBisectionRelTol * b) {
      const double mid = 0.5 * (a + b);
      const double gm = gap(mid);
      if ((gm < 0.0) == (ga < 0.0)) {
        a = mid;
        ga = gm;
      } else {
        b = mid;
      }
      ++steps;
    }
    roots.push_back(describe_root(pair, params, cfg, 0.5 * (a + b), steps));
  }
  if (values.back() == 0.0) roots.push_back(describe_root(pair, params, cfg, points.back(), 0));
  return roots;
}

}  // namespace emse
