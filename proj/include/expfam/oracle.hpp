#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "expfam/measures.hpp"

namespace expfam::oracle {

/// Central finite differences. Step is fixed to the central scheme; inputs
/// are expected scaled to O(1) so truncation and roundoff balance near the
/// default step.
struct FiniteDiffSpec {
  double step = 1e-5;

  explicit FiniteDiffSpec(double h = 1e-5) : step(h) {
    require(step >= 1e-9 && step <= 1e-2, "FiniteDiffSpec: step must lie in [1e-9, 1e-2]");
  }
};

struct McSpec {
  std::int64_t n_samples;
  std::uint64_t seed;

  McSpec(std::int64_t n, std::uint64_t s) : n_samples(n), seed(s) {
    require(n_samples >= 1000, "McSpec: need at least 1e3 samples");
  }
};

using ScalarFn = std::function<double(const Vec&)>;
using VectorFn = std::function<Vec(const Vec&)>;

/// (f(eta + h e_i) - f(eta - h e_i)) / 2h per coordinate. Non-finite
/// evaluations raise OracleDomainError.
Vec fd_gradient(const ScalarFn& f, const Vec& eta, const FiniteDiffSpec& spec);

/// Central-difference Jacobian of a vector-valued map (row i = d f_i / d eta).
Mat fd_jacobian(const VectorFn& f, const Vec& eta, const FiniteDiffSpec& spec);

/// Second-order central differences, symmetrized by averaging with the
/// transpose.
Mat fd_hessian(const ScalarFn& f, const Vec& eta, const FiniteDiffSpec& spec);

struct McEstimate {
  double estimate;
  double std_error;
};

/// Monte Carlo estimate of log Z(eta) for Gaussian and mixture measures:
/// draws x ~ h/W exactly, returns log W + log-mean-exp(x.eta) with the
/// delta-method standard error. Deterministic for fixed McSpec under any
/// thread count (counter-based sampling, index-ordered reduction).
/// DiscretePoints input is rejected: the closed form is already exact.
McEstimate mc_log_partition(const IntrinsicMeasure& h, const NaturalParam& eta,
                            const McSpec& spec);

struct GridResult {
  Vec argmax;
  double value;
};

/// Exhaustive grid maximization over a box, D <= 2 only.
GridResult grid_sup(const ScalarFn& f, const std::vector<std::pair<double, double>>& box,
                    double resolution);

}  // namespace expfam::oracle
