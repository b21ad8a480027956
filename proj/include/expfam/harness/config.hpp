#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "expfam/attention.hpp"
#include "expfam/dynamics.hpp"
#include "expfam/measures.hpp"

namespace expfam::harness {

using Json = nlohmann::json;

/// Matrix entry of a config file: "identity", {"scaled_identity": c}, or a
/// full row-major list. The shorthand is preserved through round trips.
struct MatrixSpec {
  enum class Kind { identity, scaled_identity, dense };
  Kind kind = Kind::identity;
  double scale = 1.0;
  std::vector<double> values;

  Mat materialize(Eigen::Index d) const;
  static MatrixSpec from_json(const Json& j, const std::string& context);
  Json to_json() const;
};

/// Measure description: type tag plus the fields of that measure family.
struct MeasureSpec {
  std::string type;
  std::optional<std::vector<std::vector<double>>> points;
  std::optional<std::vector<double>> log_weights;
  std::optional<std::vector<double>> mean;
  std::optional<MatrixSpec> cov;
  std::optional<std::vector<double>> weights;
  std::optional<std::vector<std::vector<double>>> means;
  std::optional<std::vector<MatrixSpec>> covs;

  IntrinsicMeasure materialize(Eigen::Index d) const;
  static MeasureSpec from_json(const Json& j, const std::string& context);
  Json to_json() const;
};

struct PolicySpec {
  std::string type;  // fixed_measure | self_patterns | pointwise_map
  std::optional<MatrixSpec> cov;  // pointwise_map only

  static PolicySpec from_json(const Json& j, const std::string& context);
  Json to_json() const;
};

struct AttentionSpec {
  std::optional<double> step_size;
  std::optional<double> scale;
  std::optional<MatrixSpec> bilinear;

  AttentionConfig materialize(Eigen::Index d) const;
  static AttentionSpec from_json(const Json& j, const std::string& context);
  Json to_json() const;
};

struct RenormConfigSpec {
  std::vector<double> target_mean;
  MatrixSpec target_cov;
  std::optional<double> ridge;

  RenormSpec materialize(Eigen::Index d) const;
  static RenormConfigSpec from_json(const Json& j, const std::string& context);
  Json to_json() const;
};

struct InitialDistSpec {
  std::vector<double> mean;
  MatrixSpec cov;

  static InitialDistSpec from_json(const Json& j, const std::string& context);
  Json to_json() const;
};

/// Acceptance band for the empirical equilibrium check. The drift and
/// skewness limits scale as coeff/sqrt(N); defaults were frozen from a
/// 30-seed calibration run (tools/calibrate_band) on the canonical
/// N=4096, D=4 equilibrium configuration.
struct BandSpec {
  std::optional<double> mean_coeff;
  std::optional<double> cov_coeff;
  std::optional<double> skew_coeff;
  std::optional<double> renorm_tol;

  static BandSpec from_json(const Json& j, const std::string& context);
  Json to_json() const;
};

inline constexpr double kDefaultMeanDriftCoeff = 16.5;
inline constexpr double kDefaultCovDriftCoeff = 92.0;
inline constexpr double kDefaultSkewCoeff = 9.0;
inline constexpr double kDefaultRenormTol = 1e-8;
/// Below this ensemble size the band statistics are too noisy to judge.
inline constexpr int kMinBandSize = 64;

struct ExperimentConfig {
  int dim = 0;
  int n_points = 0;
  std::uint64_t seed = 0;
  PolicySpec policy;
  std::optional<MeasureSpec> measure;
  std::optional<AttentionSpec> attention;
  std::optional<RenormConfigSpec> renorm;
  int steps = 0;
  InitialDistSpec initial_distribution;
  std::optional<BandSpec> band;

  MeasurePolicy materialize_policy() const;
  AttentionConfig materialize_attention() const;
  std::optional<RenormSpec> materialize_renorm() const;

  static ExperimentConfig from_json(const Json& j);
  Json to_json() const;
};

struct ConjugateConfig {
  MeasureSpec measure;
  std::vector<double> eta_star;
  std::optional<double> solver_tol;

  static ConjugateConfig from_json(const Json& j);
  Json to_json() const;
};

Json load_json_file(const std::string& path);

}  // namespace expfam::harness
