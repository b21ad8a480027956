#include "expfam/softmax_kernel.hpp"

#include <cmath>
#include <vector>

namespace expfam::detail {

Vec col_abs_max(const Eigen::Ref<const RowMat>& points) {
  return points.cwiseAbs().colwise().maxCoeff().transpose();
}

SoftmaxStats softmax_mean(const Eigen::Ref<const RowMat>& points,
                          const Eigen::Ref<const Vec>& logits,
                          const Eigen::Ref<const Vec>& col_bound) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  const double m = logits.maxCoeff();

  BoundedSum denom(1.0);  // weights exp(l - m) lie in (0, 1]
  std::vector<BoundedSum> num;
  num.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index k = 0; k < d; ++k) num.emplace_back(col_bound(k));

  for (Eigen::Index j = 0; j < n; ++j) {
    const double w = std::exp(logits(j) - m);
    denom.add(w);
    const double* row = points.data() + j * d;
    for (Eigen::Index k = 0; k < d; ++k) num[static_cast<std::size_t>(k)].add(w * row[k]);
  }

  const double s = denom.value();
  Vec mean(d);
  for (Eigen::Index k = 0; k < d; ++k) mean(k) = num[static_cast<std::size_t>(k)].value() / s;
  return {std::move(mean), m + std::log(s)};
}

Vec softmax_weights(const Eigen::Ref<const Vec>& logits) {
  const Eigen::Index n = logits.size();
  const double m = logits.maxCoeff();
  BoundedSum denom(1.0);
  Vec w(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    w(j) = std::exp(logits(j) - m);
    denom.add(w(j));
  }
  w /= denom.value();
  return w;
}

double log_sum_exp(const Eigen::Ref<const Vec>& v) {
  const double m = v.maxCoeff();
  BoundedSum acc(1.0);
  for (Eigen::Index j = 0; j < v.size(); ++j) acc.add(std::exp(v(j) - m));
  return m + std::log(acc.value());
}

}  // namespace expfam::detail
