#pragma once

#include <optional>
#include <vector>

#include "expfam/measures.hpp"

namespace expfam {

/// Ordered collection of natural parameters, one per row: the discretized
/// "distribution of natural parameters" a transformer layer acts on.
struct ParamEnsemble {
  RowMat params;  // N x D

  explicit ParamEnsemble(RowMat p) : params(std::move(p)) {
    require(params.rows() >= 1 && params.cols() >= 1, "ParamEnsemble: need N >= 1, D >= 1");
    require(all_finite(params), "ParamEnsemble: members must be finite");
  }

  static ParamEnsemble from_members(const std::vector<Vec>& members);

  Eigen::Index size() const { return params.rows(); }
  Eigen::Index dim() const { return params.cols(); }
  Vec member(Eigen::Index i) const { return params.row(i).transpose(); }
};

/// Combined key/query map B, applied to logits as x.B.eta (models the product
/// Wq^T Wk; not necessarily symmetric).
struct BilinearForm {
  Mat matrix;

  explicit BilinearForm(Mat m) : matrix(std::move(m)) {
    require(matrix.rows() == matrix.cols() && matrix.rows() >= 1,
            "BilinearForm: matrix must be square");
    require(all_finite(matrix), "BilinearForm: entries must be finite");
  }
};

struct AttentionConfig {
  double step_size = 1.0;  // 1.0 is the residual connection's implicit unit step
  double scale = 1.0;      // logit scale (1/sqrt(D) in the dimensional convention)
  std::optional<BilinearForm> bilinear;  // identity when absent

  void validate(Eigen::Index d) const {
    require(std::isfinite(step_size), "AttentionConfig: step_size must be finite");
    require(scale > 0.0 && std::isfinite(scale), "AttentionConfig: scale must be positive");
    if (bilinear) require(bilinear->matrix.rows() == d, "AttentionConfig: bilinear dimension mismatch");
  }
};

/// Attention update operator A: each member moves along the log-normalizer
/// gradient, eta' = eta + step * B^T grad G(scale * B * eta). Members are
/// updated independently; with a Gaussian measure this is the affine map
/// eta' = mu + (I + Sigma) eta at the defaults.
ParamEnsemble attention_update(const ParamEnsemble& ensemble, const IntrinsicMeasure& h,
                               const AttentionConfig& cfg);

/// Conventional softmax attention with residual and values tied to keys:
/// out_i = q_i + step * sum_j softmax_j(scale * k_j.B.q_i) k_j.
/// Written as an independent reference of the equivalence with
/// attention_update over a uniform discrete measure.
ParamEnsemble softmax_attention_layer(const ParamEnsemble& queries, const ParamEnsemble& keys,
                                      const AttentionConfig& cfg);

/// Self-attention: keys are the pre-update ensemble itself (uniform weights),
/// all members updated simultaneously against it.
ParamEnsemble self_attention_update(const ParamEnsemble& ensemble, const AttentionConfig& cfg);

}  // namespace expfam
