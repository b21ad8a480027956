#pragma once

#include "expfam/det_sum.hpp"
#include "expfam/linalg.hpp"

namespace expfam::detail {

struct SoftmaxStats {
  Vec mean;         // sum_j softmax_j(logits) * points_j
  double log_norm;  // log sum_j exp(logit_j)
};

/// Per-coordinate bound max_j |points(j,d)|, used to size the reduction grid.
Vec col_abs_max(const Eigen::Ref<const RowMat>& points);

/// Softmax-weighted average over rows of `points`, plus the log normalizer.
/// All row reductions go through BoundedSum, so the result depends only on
/// the multiset of (logit, point) pairs, not on row order or thread count.
/// `col_bound` must dominate |points| column-wise (see col_abs_max); callers
/// evaluating many parameter vectors against one point set precompute it.
SoftmaxStats softmax_mean(const Eigen::Ref<const RowMat>& points,
                          const Eigen::Ref<const Vec>& logits,
                          const Eigen::Ref<const Vec>& col_bound);

/// Normalized softmax weights exp(l_j - max)/S with the order-independent S.
Vec softmax_weights(const Eigen::Ref<const Vec>& logits);

/// Max-subtracted log-sum-exp with the order-independent accumulator.
double log_sum_exp(const Eigen::Ref<const Vec>& v);

}  // namespace expfam::detail
