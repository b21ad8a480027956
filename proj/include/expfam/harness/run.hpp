#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "expfam/harness/config.hpp"

namespace expfam::harness {

/// %.17g formatting used for every float written to CSV or summary files.
std::string fmt17(double v);

void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryRecord>& records);

using SummaryLines = std::vector<std::pair<std::string, std::string>>;
void write_summary(const std::string& path, const SummaryLines& lines);

struct GradcheckOptions {
  std::vector<int> dims{1, 2, 4, 8};
  int trials = 100;
  std::uint64_t seed = 0;
  double tol = 1e-6;
};

/// Closed-form gradient/Hessian vs finite differences for every measure
/// variant; one CSV row per trial. Exit 0 iff all comparisons pass at tol,
/// 1 on tolerance failure, 2 on oracle-domain errors.
int run_gradcheck(const GradcheckOptions& opt, const std::string& out_dir, std::ostream& log);

/// Exact affine equilibrium check plus the empirical simulation with the
/// drift/skewness band verdict. Exit 0 pass, 1 quantitative failure.
int run_equilibrium(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);

/// Trajectory emission with no pass/fail semantics.
int run_dynamics(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);

/// Fenchel conjugate report; cross-checked against the grid oracle in D <= 2.
/// Exit 1 on non-convergence.
int run_conjugate(const ConjugateConfig& cfg, std::optional<double> tol_override,
                  const std::string& out_dir, std::ostream& log);

}  // namespace expfam::harness
