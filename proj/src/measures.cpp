#include "expfam/measures.hpp"

namespace expfam {

Eigen::Index dim(const IntrinsicMeasure& h) {
  return std::visit([](const auto& m) { return m.dim(); }, h);
}

}  // namespace expfam
