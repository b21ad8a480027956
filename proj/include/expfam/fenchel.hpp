#pragma once

#include "expfam/measures.hpp"

namespace expfam {

struct FenchelResult {
  double value;          // G*(eta*) = sup_eta (eta.eta* - G(eta))
  NaturalParam argmax;   // maximizer; satisfies grad G(argmax) ~= eta*
  double grad_residual;  // |grad G(argmax) - eta*| at return
  int iterations;
};

/// Fenchel conjugate of the log normalizer, by gradient ascent on the concave
/// map eta -> eta.eta* - G(eta) with Armijo backtracking (c = 1e-4, shrink
/// 0.5), starting from eta = 0, at most 10000 iterations. Converged when the
/// gradient norm falls to solver_tol; otherwise throws ConvergenceError
/// carrying the final residual (the sup is not attained when eta* leaves the
/// interior of the dual range).
FenchelResult fenchel_conjugate(const IntrinsicMeasure& h, const DualParam& eta_star,
                                double solver_tol);

}  // namespace expfam
