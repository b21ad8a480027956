#include "expfam/attention.hpp"

#include <cmath>
#include <limits>

#include "expfam/log_partition.hpp"
#include "expfam/softmax_kernel.hpp"

namespace expfam {

namespace {

// Gradient evaluator with per-measure state hoisted out of the member loop.
// grad(eta) is bitwise identical to grad_log_partition(h, eta) and safe to
// call concurrently.
class GradKernel {
 public:
  explicit GradKernel(const IntrinsicMeasure& h) : h_(&h) {
    if (const auto* d = std::get_if<DiscretePoints>(&h)) {
      col_bound_ = detail::col_abs_max(d->points);
    } else if (const auto* s = std::get_if<SharedCovMixture>(&h)) {
      col_bound_ = detail::col_abs_max(s->means);
      log_pi_ = s->weights.array().log().matrix();
    }
  }

  Vec operator()(const Vec& eta) const {
    if (const auto* d = std::get_if<DiscretePoints>(h_)) {
      return detail::grad_discrete(d->points, d->log_weights, eta, col_bound_);
    }
    if (const auto* g = std::get_if<GaussianMeasure>(h_)) {
      return g->mean + g->cov.matrix() * eta;
    }
    if (const auto* s = std::get_if<SharedCovMixture>(h_)) {
      return s->cov.matrix() * eta + detail::grad_discrete(s->means, log_pi_, eta, col_bound_);
    }
    return grad_log_partition(*h_, NaturalParam(eta)).coords;
  }

 private:
  const IntrinsicMeasure* h_;
  Vec col_bound_;
  Vec log_pi_;
};

}  // namespace

ParamEnsemble ParamEnsemble::from_members(const std::vector<Vec>& members) {
  require(!members.empty(), "ParamEnsemble: need at least one member");
  RowMat p(static_cast<Eigen::Index>(members.size()), members.front().size());
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    require(members[static_cast<std::size_t>(i)].size() == p.cols(),
            "ParamEnsemble: members must share one dimension");
    p.row(i) = members[static_cast<std::size_t>(i)].transpose();
  }
  return ParamEnsemble(std::move(p));
}

ParamEnsemble attention_update(const ParamEnsemble& ensemble, const IntrinsicMeasure& h,
                               const AttentionConfig& cfg) {
  const Eigen::Index d = ensemble.dim();
  cfg.validate(d);
  if (dim(h) != d)
    throw ContractError("attention_update: measure/ensemble dimension mismatch");

  const GradKernel grad(h);
  const bool has_b = cfg.bilinear.has_value();
  const Mat* b = has_b ? &cfg.bilinear->matrix : nullptr;

  RowMat out(ensemble.size(), d);
  const RowMat& in = ensemble.params;
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < in.rows(); ++i) {
    const Vec eta = in.row(i).transpose();
    Vec tilted = has_b ? Vec((*b) * eta) : eta;
    if (cfg.scale != 1.0) tilted *= cfg.scale;
    Vec g = grad(tilted);
    if (has_b) g = b->transpose() * g;
    out.row(i) = (eta + cfg.step_size * g).transpose();
  }
  return ParamEnsemble(std::move(out));
}

ParamEnsemble softmax_attention_layer(const ParamEnsemble& queries, const ParamEnsemble& keys,
                                      const AttentionConfig& cfg) {
  const Eigen::Index d = queries.dim();
  cfg.validate(d);
  if (keys.dim() != d)
    throw ContractError("softmax_attention_layer: key/query dimension mismatch");

  const RowMat& k = keys.params;
  const Eigen::Index n_keys = k.rows();
  RowMat out(queries.size(), d);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < queries.size(); ++i) {
    const Vec q = queries.params.row(i).transpose();
    Vec v = cfg.bilinear ? Vec(cfg.bilinear->matrix * q) : q;
    v *= cfg.scale;

    double m = -std::numeric_limits<double>::infinity();
    Vec logits(n_keys);
    for (Eigen::Index j = 0; j < n_keys; ++j) {
      logits(j) = k.row(j).dot(v);
      m = std::max(m, logits(j));
    }
    double denom = 0.0;
    Vec avg = Vec::Zero(d);
    for (Eigen::Index j = 0; j < n_keys; ++j) {
      const double w = std::exp(logits(j) - m);
      denom += w;
      avg += w * k.row(j).transpose();
    }
    out.row(i) = (q + cfg.step_size * (avg / denom)).transpose();
  }
  return ParamEnsemble(std::move(out));
}

ParamEnsemble self_attention_update(const ParamEnsemble& ensemble, const AttentionConfig& cfg) {
  // Keys are the pre-update members; the measure is fixed before any member
  // moves (simultaneous update).
  const IntrinsicMeasure h = DiscretePoints(ensemble.params);
  return attention_update(ensemble, h, cfg);
}

}  // namespace expfam
