#include "expfam/fenchel.hpp"

#include <cmath>

#include "expfam/log_partition.hpp"

namespace expfam {

namespace {
constexpr int kMaxIterations = 10000;
constexpr double kArmijo = 1e-4;
constexpr double kShrink = 0.5;
constexpr double kMinStep = 1e-18;
// Acceptance slack of a few ulps of f: near the maximizer the true Armijo
// increment (~|g|^2) falls below f's rounding noise and a literal test would
// stall the search at residuals around sqrt(eps).
constexpr double kFpSlack = 4.0 * 2.220446049250313e-16;
}  // namespace

FenchelResult fenchel_conjugate(const IntrinsicMeasure& h, const DualParam& eta_star,
                                double solver_tol) {
  if (dim(h) != eta_star.dim())
    throw ContractError("fenchel_conjugate: measure/parameter dimension mismatch");
  require(solver_tol > 0.0 && std::isfinite(solver_tol),
          "fenchel_conjugate: solver_tol must be positive");

  const Vec& target = eta_star.coords;
  auto objective = [&](const Vec& eta) {
    return eta.dot(target) - log_partition(h, NaturalParam(eta));
  };
  auto ascent_dir = [&](const Vec& eta) -> Vec {
    return target - grad_log_partition(h, NaturalParam(eta)).coords;
  };

  Vec eta = Vec::Zero(target.size());
  double f = objective(eta);
  Vec g = ascent_dir(eta);
  int iter = 0;
  for (; iter < kMaxIterations; ++iter) {
    const double gnorm = g.norm();
    if (gnorm <= solver_tol) {
      return {f, NaturalParam(eta), gnorm, iter};
    }
    double t = 1.0;
    const double slope = g.squaredNorm();
    const double slack = kFpSlack * (1.0 + std::abs(f));
    while (t >= kMinStep) {
      const Vec trial = eta + t * g;
      const double f_trial = objective(trial);
      if (f_trial >= f + kArmijo * t * slope - slack) {
        eta = trial;
        f = f_trial;
        break;
      }
      t *= kShrink;
    }
    if (t < kMinStep) break;  // line search stalled; report as non-convergence
    g = ascent_dir(eta);
  }
  throw ConvergenceError("fenchel_conjugate: gradient residual " + std::to_string(g.norm()) +
                             " above tolerance after " + std::to_string(iter) +
                             " iterations (eta* may lie outside the dual range)",
                         g.norm(), iter);
}

}  // namespace expfam
