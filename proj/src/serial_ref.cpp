#include "expfam/serial_ref.hpp"

#include <cmath>

namespace expfam::serial_ref {

namespace {

// Naive softmax-weighted mean of `points` under the given logits.
Vec softmax_avg(const RowMat& points, const Vec& logits) {
  const double m = logits.maxCoeff();
  double denom = 0.0;
  Vec num = Vec::Zero(points.cols());
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    const double w = std::exp(logits(j) - m);
    denom += w;
    num += w * points.row(j).transpose();
  }
  return num / denom;
}

Vec weighted_mean(const RowMat& points, const Vec& log_w, const Vec& eta) {
  Vec logits(points.rows());
  for (Eigen::Index j = 0; j < points.rows(); ++j) logits(j) = points.row(j).dot(eta) + log_w(j);
  return softmax_avg(points, logits);
}

Vec grad_at(const IntrinsicMeasure& h, const Vec& eta) {
  if (const auto* d = std::get_if<DiscretePoints>(&h)) {
    return weighted_mean(d->points, d->log_weights, eta);
  }
  if (const auto* g = std::get_if<GaussianMeasure>(&h)) {
    return g->mean + g->cov.matrix() * eta;
  }
  if (const auto* s = std::get_if<SharedCovMixture>(&h)) {
    return s->cov.matrix() * eta +
           weighted_mean(s->means, s->weights.array().log().matrix(), eta);
  }
  const auto& m = std::get<GeneralMixture>(h);
  const Eigen::Index n = m.size();
  Vec logits(n);
  RowMat tilted(n, m.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec se = m.covs[static_cast<std::size_t>(i)].matrix() * eta;
    logits(i) = std::log(m.weights(i)) + m.means.row(i).dot(eta) + 0.5 * eta.dot(se);
    tilted.row(i) = m.means.row(i).transpose() + se;
  }
  return softmax_avg(tilted, logits);
}

}  // namespace

ParamEnsemble attention_update(const ParamEnsemble& ensemble, const IntrinsicMeasure& h,
                               const AttentionConfig& cfg) {
  const Eigen::Index d = ensemble.dim();
  cfg.validate(d);
  if (dim(h) != d) throw ContractError("serial_ref::attention_update: dimension mismatch");

  RowMat out(ensemble.size(), d);
  for (Eigen::Index i = 0; i < ensemble.size(); ++i) {
    const Vec eta = ensemble.params.row(i).transpose();
    Vec tilted = cfg.bilinear ? Vec(cfg.bilinear->matrix * eta) : eta;
    tilted *= cfg.scale;
    Vec g = grad_at(h, tilted);
    if (cfg.bilinear) g = cfg.bilinear->matrix.transpose() * g;
    out.row(i) = (eta + cfg.step_size * g).transpose();
  }
  return ParamEnsemble(std::move(out));
}

ParamEnsemble renormalize(const ParamEnsemble& ensemble, const Vec& target_mean,
                          const Mat& target_cov, double ridge) {
  const Eigen::Index n = ensemble.size();
  const Eigen::Index d = ensemble.dim();
  require(n >= 2, "serial_ref::renormalize: need at least two members");

  Vec mean = Vec::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) mean += ensemble.params.row(i).transpose();
  mean /= static_cast<double>(n);

  Mat cov = Mat::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec c = ensemble.params.row(i).transpose() - mean;
    cov += c * c.transpose();
  }
  cov /= static_cast<double>(n);
  if (n <= d || psd_rank(cov) < d) cov += ridge * Mat::Identity(d, d);

  const Mat w = sym_sqrt(target_cov) * sym_inv_sqrt(cov);
  RowMat out(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.row(i) =
        (target_mean + w * (ensemble.params.row(i).transpose() - mean)).transpose();
  }
  return ParamEnsemble(std::move(out));
}

}  // namespace expfam::serial_ref
