#pragma once

#include <vector>

namespace expfam {

struct KendallResult {
  double tau = 0.0;      // tau-b (tie-corrected)
  double p_value = 1.0;  // two-sided, normal approximation
};

/// Kendall rank correlation of a series against time (its index), used as a
/// monotone-trend test. Values are first snapped to a grid of `resolution`:
/// differences below the probe's measurement resolution are ties, not
/// evidence of a trend (a rank test would otherwise flag machine-epsilon
/// drift in a stationary series as a perfect trend). Ties get the tau-b
/// correction; series shorter than 3 return tau 0, p 1.
KendallResult kendall_trend(const std::vector<double>& series, double resolution = 1e-9);

}  // namespace expfam
