#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "expfam/attention.hpp"

namespace expfam {

/// Target moments of the renormalization operator RN, the layer-norm
/// analogue: eta -> eta0 + Lambda0^{1/2} SigmaBar^{-1/2} (eta - etaBar).
struct RenormSpec {
  Vec target_mean;       // eta0
  PsdMatrix target_cov;  // Lambda0, strictly positive definite
  double ridge = 1e-8;   // added to SigmaBar when N <= D or rank-deficient

  RenormSpec(Vec mean, PsdMatrix cov, double ridge_term = 1e-8)
      : target_mean(std::move(mean)), target_cov(std::move(cov)), ridge(ridge_term) {
    require(all_finite(target_mean), "RenormSpec: target mean must be finite");
    require(target_cov.dim() == target_mean.size(), "RenormSpec: mean/cov dimension mismatch");
    require(ridge >= 0.0 && std::isfinite(ridge), "RenormSpec: ridge must be non-negative");
    Eigen::SelfAdjointEigenSolver<Mat> eig(target_cov.matrix(), Eigen::EigenvaluesOnly);
    require(eig.eigenvalues().minCoeff() >= 1e-12,
            "RenormSpec: target covariance must have eigenvalues >= 1e-12");
  }

  Eigen::Index dim() const { return target_mean.size(); }
};

/// Empirical ensemble moments with population divisor N (the ensemble is
/// the discretized distribution, not a sample from one).
struct EnsembleMoments {
  Vec mean;
  PsdMatrix cov;
};

enum class Phase { after_attention, after_renorm };

const char* phase_name(Phase p);

struct TrajectoryRecord {
  int step = 0;
  Phase phase = Phase::after_attention;
  double mean_norm = 0;
  double cov_trace = 0;
  double cov_logdet = 0;
  double mean_dist_to_target = 0;      // |etaBar - eta0|
  double cov_dist_to_target = 0;       // |SigmaBar - Lambda0|_F
  double max_marginal_skewness = 0;    // Gaussianity probe
};

/// Rule selecting the intrinsic measure each layer acts with.
struct FixedMeasure {
  IntrinsicMeasure h;
};
struct SelfPatterns {};  // keys = current ensemble (changing patterns)
struct PointwiseMap {    // measure = image of the ensemble distribution under x = Sigma eta,
  PsdMatrix cov;         // taken as the Gaussian with the pushed-forward moments
};
using MeasurePolicy = std::variant<FixedMeasure, SelfPatterns, PointwiseMap>;

/// Mean and centered covariance over members (requires N >= 2).
EnsembleMoments moments(const ParamEnsemble& ensemble);

struct RenormReport {
  bool ridge_applied = false;
  Eigen::Index rank = 0;
};

/// Affine re-whitening of the ensemble to the given target moments.
/// Matrix roots are symmetric PSD roots via eigendecomposition. When the
/// empirical covariance is rank-deficient (or N <= D) the ridge is added
/// before rooting; with ridge zero that case raises SingularCovarianceError.
ParamEnsemble renormalize(const ParamEnsemble& ensemble, const RenormSpec& spec);
ParamEnsemble renormalize(const ParamEnsemble& ensemble, const RenormSpec& spec,
                          RenormReport& report);

struct LayerStepResult {
  ParamEnsemble ensemble;        // after RN . A
  ParamEnsemble post_attention;  // after A only
  TrajectoryRecord after_attention;
  TrajectoryRecord after_renorm;
};

/// One composed layer RN after A: materialize the measure from the policy,
/// update every member, record stats, renormalize, record stats. A null
/// renorm spec means "renorm disabled", expressed as RN with the current
/// moments as its own target (the identity map).
LayerStepResult layer_step(const ParamEnsemble& ensemble, const MeasurePolicy& policy,
                           const AttentionConfig& cfg, const std::optional<RenormSpec>& spec,
                           int step_index = 1);

/// Observer invoked with each intermediate ensemble (after each phase).
using StepObserver = std::function<void(int step, Phase phase, const ParamEnsemble&)>;

/// Iterated layer_step for `steps` layers; returns the 2*steps records in
/// order. Deterministic given its inputs. Errors propagate with the step
/// index attached.
std::vector<TrajectoryRecord> simulate(const ParamEnsemble& initial, const MeasurePolicy& policy,
                                       const AttentionConfig& cfg,
                                       const std::optional<RenormSpec>& spec, int steps,
                                       const StepObserver& observer = {});

/// Sample-free verification of the equilibrium theorem: pushes the moment
/// pair (Sigma^{-1} mu, Sigma^{-1}) through the affine attention map
/// eta' = mu + (I + Sigma) eta and the exact RN moment remap, and reports
/// how far the composition lands from where it started.
struct AffineCheckReport {
  Vec equilibrium_mean;      // Sigma^{-1} mu
  Mat equilibrium_cov;       // Sigma^{-1}
  Vec intermediate_mean;     // after the attention map
  Mat intermediate_cov;
  double intermediate_mean_err = 0;  // distance from equilibrium after A
  double intermediate_cov_err = 0;
  double final_mean_err = 0;  // distance from equilibrium after RN . A
  double final_cov_err = 0;

  bool passed(double tol = 1e-10) const {
    return final_mean_err <= tol && final_cov_err <= tol;
  }
};

AffineCheckReport equilibrium_affine_check(const Vec& mu, const PsdMatrix& sigma);

}  // namespace expfam
