#pragma once

#include <Eigen/Dense>
#include <string>

#include "expfam/errors.hpp"

namespace expfam {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// Ensembles and key sets store one point per row; row-major keeps a member's
// coordinates contiguous for the per-member kernels.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline bool all_finite(const Eigen::Ref<const Mat>& m) {
  return m.allFinite();
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

/// Symmetric positive semidefinite matrix. Construction symmetrizes (absolute
/// asymmetry up to 1e-12 is tolerated) and clamps eigenvalues in [-1e-10, 0)
/// to zero; anything below -1e-10 is rejected.
class PsdMatrix {
 public:
  static constexpr double kSymmetryTol = 1e-12;
  static constexpr double kEigenFloor = -1e-10;

  explicit PsdMatrix(Mat m);

  const Mat& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  static PsdMatrix identity(Eigen::Index d) { return PsdMatrix(Mat::Identity(d, d)); }

 private:
  Mat m_;
};

/// Symmetric PSD square root via eigendecomposition; eigenvalues are clamped
/// at `floor` before rooting.
Mat sym_sqrt(const Eigen::Ref<const Mat>& m, double floor = 1e-12);

/// Symmetric inverse square root, eigenvalues clamped at `floor` before use.
Mat sym_inv_sqrt(const Eigen::Ref<const Mat>& m, double floor = 1e-12);

/// Number of eigenvalues strictly above `tol`.
Eigen::Index psd_rank(const Eigen::Ref<const Mat>& m, double tol = 1e-12);

}  // namespace expfam
