#pragma once

#include <variant>
#include <vector>

#include "expfam/linalg.hpp"

namespace expfam {

/// A point of the natural parameter space; doubles as a transformer hidden
/// state / query vector.
struct NaturalParam {
  Vec coords;

  explicit NaturalParam(Vec c) : coords(std::move(c)) {
    require(coords.size() >= 1, "NaturalParam: dimension must be >= 1");
    require(all_finite(coords), "NaturalParam: coordinates must be finite");
  }

  Eigen::Index dim() const { return coords.size(); }
};

/// A point of the dual (mean-parameter) space: an expected sufficient
/// statistic.
struct DualParam {
  Vec coords;

  explicit DualParam(Vec c) : coords(std::move(c)) {
    require(coords.size() >= 1, "DualParam: dimension must be >= 1");
    require(all_finite(coords), "DualParam: coordinates must be finite");
  }

  Eigen::Index dim() const { return coords.size(); }
};

/// Finitely supported measure sum_n w_n * delta(x = x_n); weights are kept in
/// log space and default to the counting measure (all log-weights zero).
struct DiscretePoints {
  RowMat points;    // N x D, one support point per row
  Vec log_weights;  // length N

  DiscretePoints(RowMat pts, Vec log_w) : points(std::move(pts)), log_weights(std::move(log_w)) {
    validate();
  }

  explicit DiscretePoints(RowMat pts)
      : points(std::move(pts)), log_weights(Vec::Zero(points.rows())) {
    validate();
  }

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }

 private:
  void validate() const {
    require(points.rows() >= 1 && points.cols() >= 1, "DiscretePoints: need N >= 1, D >= 1");
    require(all_finite(points), "DiscretePoints: points must be finite");
    require(log_weights.size() == points.rows(), "DiscretePoints: one log-weight per point");
    require(all_finite(log_weights), "DiscretePoints: log-weights must be finite");
  }
};

struct GaussianMeasure {
  Vec mean;
  PsdMatrix cov;

  GaussianMeasure(Vec mu, PsdMatrix sigma) : mean(std::move(mu)), cov(std::move(sigma)) {
    require(mean.size() >= 1, "GaussianMeasure: dimension must be >= 1");
    require(all_finite(mean), "GaussianMeasure: mean must be finite");
    require(cov.dim() == mean.size(), "GaussianMeasure: mean/cov dimension mismatch");
  }

  Eigen::Index dim() const { return mean.size(); }
};

/// Mixture of Gaussians with one shared covariance: sum_n pi_n N(mu_n, Sigma).
/// Weights must be strictly positive but need not sum to one.
struct SharedCovMixture {
  Vec weights;   // length N, strictly positive
  RowMat means;  // N x D
  PsdMatrix cov;

  SharedCovMixture(Vec w, RowMat mu, PsdMatrix sigma)
      : weights(std::move(w)), means(std::move(mu)), cov(std::move(sigma)) {
    require(means.rows() >= 1 && means.cols() >= 1, "SharedCovMixture: need N >= 1, D >= 1");
    require(weights.size() == means.rows(), "SharedCovMixture: one weight per component");
    require(all_finite(weights) && all_finite(means), "SharedCovMixture: entries must be finite");
    require((weights.array() > 0.0).all(), "SharedCovMixture: weights must be strictly positive");
    require(cov.dim() == means.cols(), "SharedCovMixture: mean/cov dimension mismatch");
  }

  Eigen::Index size() const { return means.rows(); }
  Eigen::Index dim() const { return means.cols(); }
};

/// Mixture of Gaussians with per-component covariances.
struct GeneralMixture {
  Vec weights;
  RowMat means;
  std::vector<PsdMatrix> covs;

  GeneralMixture(Vec w, RowMat mu, std::vector<PsdMatrix> sigmas)
      : weights(std::move(w)), means(std::move(mu)), covs(std::move(sigmas)) {
    require(means.rows() >= 1 && means.cols() >= 1, "GeneralMixture: need N >= 1, D >= 1");
    require(weights.size() == means.rows(), "GeneralMixture: one weight per component");
    require(all_finite(weights) && all_finite(means), "GeneralMixture: entries must be finite");
    require((weights.array() > 0.0).all(), "GeneralMixture: weights must be strictly positive");
    require(static_cast<Eigen::Index>(covs.size()) == means.rows(),
            "GeneralMixture: one covariance per component");
    for (const auto& c : covs)
      require(c.dim() == means.cols(), "GeneralMixture: mean/cov dimension mismatch");
  }

  Eigen::Index size() const { return means.rows(); }
  Eigen::Index dim() const { return means.cols(); }
};

/// The four intrinsic (carrier) measure families with closed-form log
/// normalizers.
using IntrinsicMeasure =
    std::variant<DiscretePoints, GaussianMeasure, SharedCovMixture, GeneralMixture>;

Eigen::Index dim(const IntrinsicMeasure& h);

}  // namespace expfam
