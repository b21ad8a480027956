#include "expfam/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace expfam {

KendallResult kendall_trend(const std::vector<double>& series, double resolution) {
  const std::size_t n = series.size();
  if (n < 3) return {};

  std::vector<double> q(series.size());
  for (std::size_t i = 0; i < n; ++i)
    q[i] = resolution > 0.0 ? std::round(series[i] / resolution) : series[i];

  // Concordances against the time index: for i < j the time pair is always
  // ascending, so S = sum sign(x_j - x_i).
  long long s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double diff = q[j] - q[i];
      s += (diff > 0.0) - (diff < 0.0);
    }
  }

  std::map<double, long long> tie_groups;
  for (double v : q) tie_groups[v] += 1;
  double tie_pairs = 0.0;   // sum t(t-1)/2
  double tie_var = 0.0;     // sum t(t-1)(2t+5)
  for (const auto& [value, t] : tie_groups) {
    (void)value;
    if (t > 1) {
      tie_pairs += static_cast<double>(t) * static_cast<double>(t - 1) / 2.0;
      tie_var += static_cast<double>(t) * static_cast<double>(t - 1) *
                 (2.0 * static_cast<double>(t) + 5.0);
    }
  }

  const double nn = static_cast<double>(n);
  const double n0 = nn * (nn - 1.0) / 2.0;
  KendallResult r;
  const double denom = std::sqrt((n0 - tie_pairs) * n0);
  r.tau = denom > 0.0 ? static_cast<double>(s) / denom : 0.0;

  // Normal approximation with tie correction (no ties in the time index).
  const double var_s = (nn * (nn - 1.0) * (2.0 * nn + 5.0) - tie_var) / 18.0;
  if (var_s <= 0.0) {
    r.p_value = 1.0;
    return r;
  }
  const double sd = std::sqrt(var_s);
  const double cc = s > 0 ? -1.0 : (s < 0 ? 1.0 : 0.0);  // continuity correction
  const double z = (static_cast<double>(s) + cc) / sd;
  r.p_value = std::erfc(std::abs(z) / std::sqrt(2.0));
  return r;
}

}  // namespace expfam
