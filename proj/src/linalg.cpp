#include "expfam/linalg.hpp"

namespace expfam {

PsdMatrix::PsdMatrix(Mat m) {
  require(m.rows() == m.cols() && m.rows() >= 1, "PsdMatrix: matrix must be square, D >= 1");
  require(all_finite(m), "PsdMatrix: entries must be finite");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  require(asym <= kSymmetryTol, "PsdMatrix: asymmetry " + std::to_string(asym) + " exceeds 1e-12");
  m_ = 0.5 * (m + m.transpose());

  Eigen::SelfAdjointEigenSolver<Mat> eig(m_);
  const Vec& lam = eig.eigenvalues();
  if (lam.minCoeff() < kEigenFloor) {
    throw ContractError("PsdMatrix: eigenvalue " + std::to_string(lam.minCoeff()) +
                        " below -1e-10; matrix is not PSD");
  }
  if (lam.minCoeff() < 0.0) {
    // Floating-point construction noise; rebuild with the negative part clamped.
    Vec clamped = lam.cwiseMax(0.0);
    m_ = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
    m_ = 0.5 * (m_ + m_.transpose());
  }
}

Mat sym_sqrt(const Eigen::Ref<const Mat>& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(m);
  Vec lam = eig.eigenvalues().cwiseMax(floor);
  return eig.eigenvectors() * lam.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
}

Mat sym_inv_sqrt(const Eigen::Ref<const Mat>& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(m);
  Vec lam = eig.eigenvalues().cwiseMax(floor);
  return eig.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

Eigen::Index psd_rank(const Eigen::Ref<const Mat>& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(m, Eigen::EigenvaluesOnly);
  return (eig.eigenvalues().array() > tol).count();
}

}  // namespace expfam
