#include "expfam/log_partition.hpp"

#include <cmath>

#include "expfam/softmax_kernel.hpp"

namespace expfam {

namespace {

void check_dim(const IntrinsicMeasure& h, const NaturalParam& eta, const char* op) {
  if (dim(h) != eta.dim())
    throw ContractError(std::string(op) + ": measure dimension " + std::to_string(dim(h)) +
                        " != parameter dimension " + std::to_string(eta.dim()));
}

// Per-component logits a_n and tilted means m_n = mu_n + Sigma_n eta of a
// general mixture; the normalizer is logsumexp(a) and the gradient the
// a-softmax average of the m_n.
struct MixtureTerms {
  Vec logits;
  RowMat tilted_means;
};

MixtureTerms mixture_terms(const GeneralMixture& m, const Vec& eta) {
  const Eigen::Index n = m.size();
  MixtureTerms t;
  t.logits.resize(n);
  t.tilted_means.resize(n, m.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec sigma_eta = m.covs[static_cast<std::size_t>(i)].matrix() * eta;
    t.logits(i) =
        std::log(m.weights(i)) + m.means.row(i).dot(eta) + 0.5 * eta.dot(sigma_eta);
    t.tilted_means.row(i) = m.means.row(i).transpose() + sigma_eta;
  }
  return t;
}

const GeneralMixture& require_general_mixture(const IntrinsicMeasure& h, const char* op) {
  const auto* m = std::get_if<GeneralMixture>(&h);
  if (!m)
    throw UnsupportedMeasureError(std::string(op) + ": defined for GeneralMixture measures only");
  return *m;
}

void require_convex_weights(const GeneralMixture& m, const char* op) {
  const double total = m.weights.sum();
  if (std::abs(total - 1.0) > 1e-9)
    throw ContractError(std::string(op) + ": mixture weights must sum to 1 (got " +
                        std::to_string(total) + "); Jensen needs a convex combination");
}

}  // namespace

namespace detail {

Vec grad_discrete(const Eigen::Ref<const RowMat>& points, const Eigen::Ref<const Vec>& log_weights,
                  const Eigen::Ref<const Vec>& eta, const Eigen::Ref<const Vec>& col_bound) {
  const Vec logits = points * eta + log_weights;
  return softmax_mean(points, logits, col_bound).mean;
}

Mat hessian_discrete(const Eigen::Ref<const RowMat>& points,
                     const Eigen::Ref<const Vec>& log_weights, const Eigen::Ref<const Vec>& eta,
                     const Eigen::Ref<const Vec>& col_bound) {
  const Vec logits = points * eta + log_weights;
  const Vec g = softmax_mean(points, logits, col_bound).mean;
  const Vec w = softmax_weights(logits);
  // Centered accumulation keeps the result PSD up to roundoff.
  Mat hess = Mat::Zero(points.cols(), points.cols());
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    const Vec c = points.row(j).transpose() - g;
    hess.noalias() += w(j) * (c * c.transpose());
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace detail

double log_partition(const IntrinsicMeasure& h, const NaturalParam& eta) {
  check_dim(h, eta, "log_partition");
  const Vec& e = eta.coords;
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DiscretePoints>) {
          return detail::log_sum_exp(m.points * e + m.log_weights);
        } else if constexpr (std::is_same_v<T, GaussianMeasure>) {
          return m.mean.dot(e) + 0.5 * e.dot(m.cov.matrix() * e);
        } else if constexpr (std::is_same_v<T, SharedCovMixture>) {
          return 0.5 * e.dot(m.cov.matrix() * e) +
                 detail::log_sum_exp(m.means * e + m.weights.array().log().matrix());
        } else {
          return detail::log_sum_exp(mixture_terms(m, e).logits);
        }
      },
      h);
}

DualParam grad_log_partition(const IntrinsicMeasure& h, const NaturalParam& eta) {
  check_dim(h, eta, "grad_log_partition");
  const Vec& e = eta.coords;
  Vec g = std::visit(
      [&](const auto& m) -> Vec {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DiscretePoints>) {
          return detail::grad_discrete(m.points, m.log_weights, e, detail::col_abs_max(m.points));
        } else if constexpr (std::is_same_v<T, GaussianMeasure>) {
          return m.mean + m.cov.matrix() * e;
        } else if constexpr (std::is_same_v<T, SharedCovMixture>) {
          const Vec log_pi = m.weights.array().log().matrix();
          return m.cov.matrix() * e +
                 detail::grad_discrete(m.means, log_pi, e, detail::col_abs_max(m.means));
        } else {
          const MixtureTerms t = mixture_terms(m, e);
          return detail::softmax_mean(t.tilted_means, t.logits,
                                      detail::col_abs_max(t.tilted_means))
              .mean;
        }
      },
      h);
  return DualParam(std::move(g));
}

PsdMatrix hessian_log_partition(const IntrinsicMeasure& h, const NaturalParam& eta) {
  check_dim(h, eta, "hessian_log_partition");
  const Vec& e = eta.coords;
  Mat hess = std::visit(
      [&](const auto& m) -> Mat {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DiscretePoints>) {
          return detail::hessian_discrete(m.points, m.log_weights, e,
                                          detail::col_abs_max(m.points));
        } else if constexpr (std::is_same_v<T, GaussianMeasure>) {
          return m.cov.matrix();
        } else if constexpr (std::is_same_v<T, SharedCovMixture>) {
          const Vec log_pi = m.weights.array().log().matrix();
          return m.cov.matrix() +
                 detail::hessian_discrete(m.means, log_pi, e, detail::col_abs_max(m.means));
        } else {
          const MixtureTerms t = mixture_terms(m, e);
          const Vec r = detail::softmax_weights(t.logits);
          const Vec g =
              detail::softmax_mean(t.tilted_means, t.logits, detail::col_abs_max(t.tilted_means))
                  .mean;
          // Within-component covariances plus the between-component spread.
          Mat out = Mat::Zero(m.dim(), m.dim());
          for (Eigen::Index i = 0; i < m.size(); ++i) {
            const Vec c = t.tilted_means.row(i).transpose() - g;
            out.noalias() += r(i) * m.covs[static_cast<std::size_t>(i)].matrix();
            out.noalias() += r(i) * (c * c.transpose());
          }
          return 0.5 * (out + out.transpose());
        }
      },
      h);
  return PsdMatrix(std::move(hess));
}

Vec attention_weights(const IntrinsicMeasure& h, const NaturalParam& eta, double scale) {
  const auto* d = std::get_if<DiscretePoints>(&h);
  if (!d)
    throw UnsupportedMeasureError("attention_weights: defined for DiscretePoints measures only");
  check_dim(h, eta, "attention_weights");
  require(scale > 0.0 && std::isfinite(scale), "attention_weights: scale must be positive");
  return detail::softmax_weights(scale * (d->points * eta.coords) + d->log_weights);
}

double lower_bound_log_partition(const IntrinsicMeasure& h, const NaturalParam& eta) {
  const GeneralMixture& m = require_general_mixture(h, "lower_bound_log_partition");
  check_dim(h, eta, "lower_bound_log_partition");
  require_convex_weights(m, "lower_bound_log_partition");
  const Vec& e = eta.coords;
  double total = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    total += m.weights(i) * (0.5 * e.dot(m.covs[static_cast<std::size_t>(i)].matrix() * e) +
                             m.means.row(i).dot(e));
  }
  return total;
}

DualParam grad_lower_bound(const IntrinsicMeasure& h, const NaturalParam& eta) {
  const GeneralMixture& m = require_general_mixture(h, "grad_lower_bound");
  check_dim(h, eta, "grad_lower_bound");
  require_convex_weights(m, "grad_lower_bound");
  const Vec& e = eta.coords;
  Vec g = Vec::Zero(m.dim());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    g += m.weights(i) *
         (m.means.row(i).transpose() + m.covs[static_cast<std::size_t>(i)].matrix() * e);
  }
  return DualParam(std::move(g));
}

}  // namespace expfam
