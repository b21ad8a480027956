#include "expfam/dynamics.hpp"

#include <cmath>

namespace expfam {

const char* phase_name(Phase p) {
  return p == Phase::after_attention ? "after_attention" : "after_renorm";
}

EnsembleMoments moments(const ParamEnsemble& ensemble) {
  const Eigen::Index n = ensemble.size();
  const Eigen::Index d = ensemble.dim();
  if (n < 2)
    throw InsufficientSamplesError("moments: need at least 2 members, got " + std::to_string(n));

  // Fixed member order; lower triangle accumulated, then mirrored so the
  // stored matrix is exactly symmetric.
  Vec mean = Vec::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) mean += ensemble.params.row(i).transpose();
  mean /= static_cast<double>(n);

  Mat acc = Mat::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec c = ensemble.params.row(i).transpose() - mean;
    acc.selfadjointView<Eigen::Lower>().rankUpdate(c, 1.0);
  }
  acc /= static_cast<double>(n);
  Mat cov = acc.selfadjointView<Eigen::Lower>();
  return {std::move(mean), PsdMatrix(std::move(cov))};
}

namespace {

double max_marginal_skewness(const ParamEnsemble& ensemble, const Vec& mean) {
  const Eigen::Index n = ensemble.size();
  const Eigen::Index d = ensemble.dim();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    double m2 = 0.0, m3 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = ensemble.params(i, k) - mean(k);
      m2 += c * c;
      m3 += c * c * c;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    if (m2 > 1e-30) worst = std::max(worst, std::abs(m3 / std::pow(m2, 1.5)));
  }
  return worst;
}

double clamped_logdet(const Mat& cov) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(cov, Eigen::EigenvaluesOnly);
  double ld = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
    ld += std::log(std::max(eig.eigenvalues()(i), 1e-300));
  return ld;
}

TrajectoryRecord make_record(int step, Phase phase, const ParamEnsemble& ensemble,
                             const EnsembleMoments& mom, const RenormSpec& spec) {
  TrajectoryRecord r;
  r.step = step;
  r.phase = phase;
  r.mean_norm = mom.mean.norm();
  r.cov_trace = mom.cov.matrix().trace();
  r.cov_logdet = clamped_logdet(mom.cov.matrix());
  r.mean_dist_to_target = (mom.mean - spec.target_mean).norm();
  r.cov_dist_to_target = (mom.cov.matrix() - spec.target_cov.matrix()).norm();
  r.max_marginal_skewness = max_marginal_skewness(ensemble, mom.mean);
  return r;
}

IntrinsicMeasure materialize(const MeasurePolicy& policy, const ParamEnsemble& ensemble) {
  if (const auto* f = std::get_if<FixedMeasure>(&policy)) return f->h;
  if (std::holds_alternative<SelfPatterns>(policy)) return DiscretePoints(ensemble.params);
  // Pointwise map x = Sigma eta: the measure is the image of the ensemble's
  // distribution, taken as the Gaussian matching its current moments,
  // h = N(Sigma etaBar, Sigma SigmaBar Sigma). The atom-set image instead
  // drifts into clusters at finite N and never stays near the theorem's
  // equilibrium; the distribution-level image is what the theorem composes.
  const auto& p = std::get<PointwiseMap>(policy);
  require(p.cov.dim() == ensemble.dim(), "PointwiseMap: covariance dimension mismatch");
  const EnsembleMoments m = moments(ensemble);
  const Mat& s = p.cov.matrix();
  Mat pushed = s * m.cov.matrix() * s.transpose();
  pushed = 0.5 * (pushed + pushed.transpose());
  return GaussianMeasure(s * m.mean, PsdMatrix(std::move(pushed)));
}

}  // namespace

ParamEnsemble renormalize(const ParamEnsemble& ensemble, const RenormSpec& spec) {
  RenormReport report;
  return renormalize(ensemble, spec, report);
}

ParamEnsemble renormalize(const ParamEnsemble& ensemble, const RenormSpec& spec,
                          RenormReport& report) {
  const Eigen::Index n = ensemble.size();
  const Eigen::Index d = ensemble.dim();
  require(spec.dim() == d, "renormalize: spec/ensemble dimension mismatch");

  const EnsembleMoments mom = moments(ensemble);
  Eigen::SelfAdjointEigenSolver<Mat> eig(mom.cov.matrix());
  Vec lam = eig.eigenvalues();
  report.rank = (lam.array() > 1e-12).count();
  report.ridge_applied = false;

  if (n <= d || report.rank < d) {
    if (spec.ridge == 0.0) {
      throw SingularCovarianceError(
          "renormalize: ensemble covariance has rank " + std::to_string(report.rank) + " in R^" +
              std::to_string(d) + " and ridge is zero",
          static_cast<int>(report.rank), static_cast<int>(d));
    }
    lam.array() += spec.ridge;
    report.ridge_applied = true;
  }

  // W = Lambda0^{1/2} (SigmaBar + ridge I)^{-1/2}, symmetric PSD roots.
  const Mat inv_root = eig.eigenvectors() *
                       lam.cwiseMax(1e-12).cwiseSqrt().cwiseInverse().asDiagonal() *
                       eig.eigenvectors().transpose();
  const Mat w = sym_sqrt(spec.target_cov.matrix()) * inv_root;

  RowMat out(n, d);
  const Vec& mean = mom.mean;
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    out.row(i) =
        (spec.target_mean + w * (ensemble.params.row(i).transpose() - mean)).transpose();
  }
  return ParamEnsemble(std::move(out));
}

LayerStepResult layer_step(const ParamEnsemble& ensemble, const MeasurePolicy& policy,
                           const AttentionConfig& cfg, const std::optional<RenormSpec>& spec,
                           int step_index) {
  const IntrinsicMeasure h = materialize(policy, ensemble);
  ParamEnsemble updated = attention_update(ensemble, h, cfg);
  const EnsembleMoments after_a = moments(updated);

  // "Renorm disabled" = RN targeting the current moments, i.e. the identity.
  const RenormSpec active = spec ? *spec : RenormSpec(after_a.mean, after_a.cov);
  TrajectoryRecord rec_a = make_record(step_index, Phase::after_attention, updated, after_a, active);

  ParamEnsemble renormed = renormalize(updated, active);
  TrajectoryRecord rec_rn =
      make_record(step_index, Phase::after_renorm, renormed, moments(renormed), active);
  return {std::move(renormed), std::move(updated), rec_a, rec_rn};
}

std::vector<TrajectoryRecord> simulate(const ParamEnsemble& initial, const MeasurePolicy& policy,
                                       const AttentionConfig& cfg,
                                       const std::optional<RenormSpec>& spec, int steps,
                                       const StepObserver& observer) {
  require(steps >= 1, "simulate: steps must be >= 1");
  std::vector<TrajectoryRecord> records;
  records.reserve(static_cast<std::size_t>(2 * steps));
  ParamEnsemble state = initial;
  for (int s = 1; s <= steps; ++s) {
    try {
      LayerStepResult r = layer_step(state, policy, cfg, spec, s);
      state = std::move(r.ensemble);
      records.push_back(r.after_attention);
      records.push_back(r.after_renorm);
      if (observer) {
        observer(s, Phase::after_attention, r.post_attention);
        observer(s, Phase::after_renorm, state);
      }
    } catch (const Error& e) {
      throw Error("simulate: step " + std::to_string(s) + ": " + e.what());
    }
  }
  return records;
}

AffineCheckReport equilibrium_affine_check(const Vec& mu, const PsdMatrix& sigma) {
  const Eigen::Index d = mu.size();
  require(all_finite(mu), "equilibrium_affine_check: mu must be finite");
  require(sigma.dim() == d, "equilibrium_affine_check: mu/sigma dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Mat> eig(sigma.matrix());
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw SingularCovarianceError(
        "equilibrium_affine_check: sigma must be strictly positive definite",
        static_cast<int>((eig.eigenvalues().array() > 0.0).count()), static_cast<int>(d));
  }

  AffineCheckReport rep;
  const Mat sigma_inv = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                        eig.eigenvectors().transpose();
  rep.equilibrium_mean = sigma_inv * mu;
  rep.equilibrium_cov = 0.5 * (sigma_inv + sigma_inv.transpose());

  // Attention map at the equilibrium measure: eta' = mu + (I + Sigma) eta.
  const Mat a = Mat::Identity(d, d) + sigma.matrix();
  rep.intermediate_mean = mu + a * rep.equilibrium_mean;
  rep.intermediate_cov = a * rep.equilibrium_cov * a.transpose();
  rep.intermediate_cov = 0.5 * (rep.intermediate_cov + rep.intermediate_cov.transpose());
  rep.intermediate_mean_err = (rep.intermediate_mean - rep.equilibrium_mean).norm();
  rep.intermediate_cov_err = (rep.intermediate_cov - rep.equilibrium_cov).norm();

  // Exact RN moment remap: mean -> eta0 identically; cov -> W cov W^T with
  // W = Lambda0^{1/2} cov^{-1/2}.
  const Mat w = sym_sqrt(rep.equilibrium_cov) * sym_inv_sqrt(rep.intermediate_cov);
  const Vec final_mean =
      rep.equilibrium_mean + w * (rep.intermediate_mean - rep.intermediate_mean);
  Mat final_cov = w * rep.intermediate_cov * w.transpose();
  final_cov = 0.5 * (final_cov + final_cov.transpose());
  rep.final_mean_err = (final_mean - rep.equilibrium_mean).norm();
  rep.final_cov_err = (final_cov - rep.equilibrium_cov).norm();
  return rep;
}

}  // namespace expfam
