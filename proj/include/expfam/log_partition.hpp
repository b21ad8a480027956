#pragma once

#include "expfam/measures.hpp"

namespace expfam {

/// Log normalizer G(eta) = log integral h(x) exp(x.eta) dx, in closed form
/// for each supported measure family.
double log_partition(const IntrinsicMeasure& h, const NaturalParam& eta);

/// Gradient of the log normalizer: the expected sufficient statistic under
/// p(x|eta). For discrete measures this is the softmax attention average.
DualParam grad_log_partition(const IntrinsicMeasure& h, const NaturalParam& eta);

/// Hessian of the log normalizer: the covariance of the sufficient statistic
/// (the Fisher information matrix).
PsdMatrix hessian_log_partition(const IntrinsicMeasure& h, const NaturalParam& eta);

/// Softmax attention weights over a discrete measure's support:
/// softmax_n(scale * x_n.eta + log_weight_n). Requires scale > 0.
Vec attention_weights(const IntrinsicMeasure& h, const NaturalParam& eta, double scale);

/// Jensen lower bound on the log normalizer of a general Gaussian mixture
/// whose weights form a convex combination (sum to 1 within 1e-9):
/// G_LB(eta) = sum_n pi_n (eta.Sigma_n.eta / 2 + mu_n.eta).
double lower_bound_log_partition(const IntrinsicMeasure& h, const NaturalParam& eta);

/// Gradient of the Jensen bound: sum_n pi_n (mu_n + Sigma_n eta).
DualParam grad_lower_bound(const IntrinsicMeasure& h, const NaturalParam& eta);

namespace detail {

/// Softmax-average gradient over an explicit point set. SharedCovMixture's
/// gradient is exactly cov*eta plus this evaluated on its means, and
/// self-attention builds its keys from the current ensemble through it.
Vec grad_discrete(const Eigen::Ref<const RowMat>& points, const Eigen::Ref<const Vec>& log_weights,
                  const Eigen::Ref<const Vec>& eta, const Eigen::Ref<const Vec>& col_bound);

Mat hessian_discrete(const Eigen::Ref<const RowMat>& points,
                     const Eigen::Ref<const Vec>& log_weights, const Eigen::Ref<const Vec>& eta,
                     const Eigen::Ref<const Vec>& col_bound);

}  // namespace detail

}  // namespace expfam
