#pragma once

#include "expfam/measures.hpp"
#include "expfam/split_rng.hpp"

namespace expfam::harness {

/// Deterministic random instances for the check suites. Counter-based, so a
/// given seed produces the same instances on every platform and rerun.
class InstanceGen {
 public:
  explicit InstanceGen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.uniform01(counter_++); }

  int uniform_index(int n) {
    return static_cast<int>(rng_.bits(counter_++) % static_cast<std::uint64_t>(n));
  }

  double normal() { return rng_.normal(counter_++); }

  Vec vec(Eigen::Index d, double lo = -2.0, double hi = 2.0) {
    Vec v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = uniform(lo, hi);
    return v;
  }

  RowMat rows(Eigen::Index n, Eigen::Index d, double lo = -2.0, double hi = 2.0) {
    RowMat m(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < d; ++k) m(i, k) = uniform(lo, hi);
    return m;
  }

  /// Well-conditioned random PSD matrix with eigenvalues in roughly [0.3, 1.6].
  Mat psd(Eigen::Index d) {
    Mat a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) a(i, j) = uniform(-1.0, 1.0);
    Mat m = a * a.transpose() / static_cast<double>(d) + 0.3 * Mat::Identity(d, d);
    return 0.5 * (m + m.transpose());
  }

  /// Random symmetric PD matrix with the given condition number: random
  /// orthogonal basis, eigenvalues log-uniform over [1/sqrt(c), sqrt(c)].
  Mat pd_with_condition(Eigen::Index d, double cond) {
    Mat g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) g(i, j) = normal();
    const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
    Vec lam(d);
    const double half_log = 0.5 * std::log(cond);
    for (Eigen::Index i = 0; i < d; ++i) lam(i) = std::exp(uniform(-half_log, half_log));
    if (d >= 2) {  // pin the extremes so the condition number is attained
      lam(0) = std::exp(-half_log);
      lam(d - 1) = std::exp(half_log);
    }
    Mat m = q * lam.asDiagonal() * q.transpose();
    return 0.5 * (m + m.transpose());
  }

  Vec positive_weights(Eigen::Index n, bool normalized) {
    Vec w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = uniform(0.1, 2.0);
    if (normalized) w /= w.sum();
    return w;
  }

  DiscretePoints discrete(Eigen::Index d, Eigen::Index n, bool uniform_weights = false) {
    RowMat pts = rows(n, d);
    if (uniform_weights) return DiscretePoints(std::move(pts));
    return DiscretePoints(std::move(pts), vec(n, -1.0, 1.0));
  }

  GaussianMeasure gaussian(Eigen::Index d) { return GaussianMeasure(vec(d), PsdMatrix(psd(d))); }

  SharedCovMixture shared_cov(Eigen::Index d, Eigen::Index n, bool normalized = false) {
    return SharedCovMixture(positive_weights(n, normalized), rows(n, d), PsdMatrix(psd(d)));
  }

  GeneralMixture general(Eigen::Index d, Eigen::Index n, bool normalized = false) {
    std::vector<PsdMatrix> covs;
    covs.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) covs.emplace_back(psd(d));
    return GeneralMixture(positive_weights(n, normalized), rows(n, d), std::move(covs));
  }

  /// variant: 0 discrete, 1 gaussian, 2 shared-cov, 3 general mixture.
  IntrinsicMeasure measure(int variant, Eigen::Index d, Eigen::Index n) {
    switch (variant) {
      case 0:
        return discrete(d, n);
      case 1:
        return gaussian(d);
      case 2:
        return shared_cov(d, n);
      default:
        return general(d, n);
    }
  }

 private:
  SplitRng rng_;
  std::uint64_t counter_ = 0;
};

}  // namespace expfam::harness
