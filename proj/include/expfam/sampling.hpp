#pragma once

#include "expfam/linalg.hpp"
#include "expfam/split_rng.hpp"

namespace expfam {

/// n rows drawn from N(mean, cov) via the symmetric PSD root of cov; fully
/// determined by the generator's seed and the row index.
inline RowMat sample_gaussian_rows(const SplitRng& rng, Eigen::Index n, const Vec& mean,
                                   const Mat& cov) {
  require(n >= 1, "sample_gaussian_rows: need n >= 1");
  require(cov.rows() == mean.size() && cov.cols() == mean.size(),
          "sample_gaussian_rows: mean/cov dimension mismatch");
  const Eigen::Index d = mean.size();
  const Mat root = sym_sqrt(cov, 0.0);
  RowMat out(n, d);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec z(d);
    for (Eigen::Index k = 0; k < d; ++k)
      z(k) = rng.normal(static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(d) +
                        static_cast<std::uint64_t>(k));
    out.row(i) = (mean + root * z).transpose();
  }
  return out;
}

}  // namespace expfam
