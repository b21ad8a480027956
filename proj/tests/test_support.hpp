#pragma once

#include <cmath>

#include "expfam/harness/instance_gen.hpp"
#include "expfam/measures.hpp"

namespace test_support {

using expfam::Mat;
using expfam::RowMat;
using expfam::Vec;

inline double rel_err(const Mat& got, const Mat& want) {
  const double scale = std::max(1.0, want.cwiseAbs().maxCoeff());
  return (got - want).cwiseAbs().maxCoeff() / scale;
}

inline RowMat rows1d(std::initializer_list<double> xs) {
  RowMat m(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline RowMat rows(std::initializer_list<std::initializer_list<double>> rws) {
  const auto n = static_cast<Eigen::Index>(rws.size());
  const auto d = static_cast<Eigen::Index>(rws.begin()->size());
  RowMat m(n, d);
  Eigen::Index i = 0;
  for (const auto& r : rws) {
    Eigen::Index j = 0;
    for (double x : r) m(i, j++) = x;
    ++i;
  }
  return m;
}

}  // namespace test_support
