#pragma once

#include "expfam/attention.hpp"

namespace expfam::serial_ref {

/// Single-threaded textbook implementations of the ensemble kernels, kept as
/// the reference the parallel paths are tested and benchmarked against.
/// Plain sequential summation throughout; no shared code with the kernels.

ParamEnsemble attention_update(const ParamEnsemble& ensemble, const IntrinsicMeasure& h,
                               const AttentionConfig& cfg);

ParamEnsemble renormalize(const ParamEnsemble& ensemble, const Vec& target_mean,
                          const Mat& target_cov, double ridge);

}  // namespace expfam::serial_ref
