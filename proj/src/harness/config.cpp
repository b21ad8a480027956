#include "expfam/harness/config.hpp"

#include <fstream>
#include <set>

namespace expfam::harness {

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + ": expected an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key()))
      throw ConfigError(context + ": unknown key '" + item.key() + "'");
  }
}

const Json& get_required(const Json& j, const std::string& key, const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(context + ": missing required key '" + key + "'");
  return *it;
}

double as_number(const Json& j, const std::string& context) {
  if (!j.is_number()) throw ConfigError(context + ": expected a number");
  return j.get<double>();
}

std::vector<double> as_vector(const Json& j, const std::string& context) {
  if (!j.is_array()) throw ConfigError(context + ": expected an array of numbers");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(as_number(e, context));
  return v;
}

std::vector<std::vector<double>> as_vector_list(const Json& j, const std::string& context) {
  if (!j.is_array()) throw ConfigError(context + ": expected an array of vectors");
  std::vector<std::vector<double>> v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(as_vector(e, context));
  return v;
}

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

RowMat to_rows(const std::vector<std::vector<double>>& rows, const std::string& context) {
  if (rows.empty()) throw ConfigError(context + ": empty point list");
  RowMat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw ConfigError(context + ": ragged point list");
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return m;
}

}  // namespace

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
}

// ---- MatrixSpec ----

Mat MatrixSpec::materialize(Eigen::Index d) const {
  switch (kind) {
    case Kind::identity:
      return Mat::Identity(d, d);
    case Kind::scaled_identity:
      return Mat::Identity(d, d) * scale;
    case Kind::dense: {
      if (static_cast<Eigen::Index>(values.size()) != d * d)
        throw ConfigError("matrix literal has " + std::to_string(values.size()) +
                          " entries, expected " + std::to_string(d * d));
      Mat m(d, d);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          m(i, j) = values[static_cast<std::size_t>(i * d + j)];
      return m;
    }
  }
  throw ConfigError("matrix spec: invalid kind");
}

MatrixSpec MatrixSpec::from_json(const Json& j, const std::string& context) {
  MatrixSpec m;
  if (j.is_string()) {
    if (j.get<std::string>() != "identity")
      throw ConfigError(context + ": unknown matrix shorthand '" + j.get<std::string>() + "'");
    m.kind = Kind::identity;
    return m;
  }
  if (j.is_object()) {
    check_keys(j, {"scaled_identity"}, context);
    m.kind = Kind::scaled_identity;
    m.scale = as_number(get_required(j, "scaled_identity", context), context);
    return m;
  }
  if (j.is_array()) {
    m.kind = Kind::dense;
    m.values = as_vector(j, context);
    return m;
  }
  throw ConfigError(context + ": matrix must be 'identity', {scaled_identity: c}, or a row-major list");
}

Json MatrixSpec::to_json() const {
  switch (kind) {
    case Kind::identity:
      return Json("identity");
    case Kind::scaled_identity:
      return Json{{"scaled_identity", scale}};
    case Kind::dense:
      return Json(values);
  }
  return {};
}

// ---- MeasureSpec ----

MeasureSpec MeasureSpec::from_json(const Json& j, const std::string& context) {
  MeasureSpec m;
  if (!j.is_object()) throw ConfigError(context + ": expected a measure object");
  m.type = get_required(j, "type", context).get<std::string>();
  if (m.type == "discrete_points") {
    check_keys(j, {"type", "points", "log_weights"}, context);
    m.points = as_vector_list(get_required(j, "points", context), context + ".points");
    if (j.contains("log_weights"))
      m.log_weights = as_vector(j.at("log_weights"), context + ".log_weights");
  } else if (m.type == "gaussian") {
    check_keys(j, {"type", "mean", "cov"}, context);
    m.mean = as_vector(get_required(j, "mean", context), context + ".mean");
    m.cov = MatrixSpec::from_json(get_required(j, "cov", context), context + ".cov");
  } else if (m.type == "shared_cov_mixture") {
    check_keys(j, {"type", "weights", "means", "cov"}, context);
    m.weights = as_vector(get_required(j, "weights", context), context + ".weights");
    m.means = as_vector_list(get_required(j, "means", context), context + ".means");
    m.cov = MatrixSpec::from_json(get_required(j, "cov", context), context + ".cov");
  } else if (m.type == "general_mixture") {
    check_keys(j, {"type", "weights", "means", "covs"}, context);
    m.weights = as_vector(get_required(j, "weights", context), context + ".weights");
    m.means = as_vector_list(get_required(j, "means", context), context + ".means");
    m.covs = std::vector<MatrixSpec>();
    for (const auto& c : get_required(j, "covs", context))
      m.covs->push_back(MatrixSpec::from_json(c, context + ".covs"));
  } else {
    throw ConfigError(context + ": unknown measure type '" + m.type + "'");
  }
  return m;
}

IntrinsicMeasure MeasureSpec::materialize(Eigen::Index d) const {
  if (type == "discrete_points") {
    RowMat pts = to_rows(*points, "measure.points");
    if (pts.cols() != d) throw ConfigError("measure.points dimension does not match dim");
    if (log_weights) {
      if (static_cast<Eigen::Index>(log_weights->size()) != pts.rows())
        throw ConfigError("measure.log_weights length does not match point count");
      return DiscretePoints(std::move(pts), to_vec(*log_weights));
    }
    return DiscretePoints(std::move(pts));
  }
  if (type == "gaussian") {
    if (static_cast<Eigen::Index>(mean->size()) != d)
      throw ConfigError("measure.mean dimension does not match dim");
    return GaussianMeasure(to_vec(*mean), PsdMatrix(cov->materialize(d)));
  }
  if (type == "shared_cov_mixture") {
    RowMat mu = to_rows(*means, "measure.means");
    if (mu.cols() != d) throw ConfigError("measure.means dimension does not match dim");
    return SharedCovMixture(to_vec(*weights), std::move(mu), PsdMatrix(cov->materialize(d)));
  }
  RowMat mu = to_rows(*means, "measure.means");
  if (mu.cols() != d) throw ConfigError("measure.means dimension does not match dim");
  std::vector<PsdMatrix> sigmas;
  for (const auto& c : *covs) sigmas.emplace_back(c.materialize(d));
  return GeneralMixture(to_vec(*weights), std::move(mu), std::move(sigmas));
}

Json MeasureSpec::to_json() const {
  Json j;
  j["type"] = type;
  if (points) j["points"] = *points;
  if (log_weights) j["log_weights"] = *log_weights;
  if (mean) j["mean"] = *mean;
  if (cov) j["cov"] = cov->to_json();
  if (weights) j["weights"] = *weights;
  if (means) j["means"] = *means;
  if (covs) {
    Json arr = Json::array();
    for (const auto& c : *covs) arr.push_back(c.to_json());
    j["covs"] = arr;
  }
  return j;
}

// ---- PolicySpec ----

PolicySpec PolicySpec::from_json(const Json& j, const std::string& context) {
  PolicySpec p;
  if (!j.is_object()) throw ConfigError(context + ": expected a policy object");
  p.type = get_required(j, "type", context).get<std::string>();
  if (p.type == "pointwise_map") {
    check_keys(j, {"type", "cov"}, context);
    p.cov = MatrixSpec::from_json(get_required(j, "cov", context), context + ".cov");
  } else if (p.type == "fixed_measure" || p.type == "self_patterns") {
    check_keys(j, {"type"}, context);
  } else {
    throw ConfigError(context + ": unknown policy type '" + p.type + "'");
  }
  return p;
}

Json PolicySpec::to_json() const {
  Json j;
  j["type"] = type;
  if (cov) j["cov"] = cov->to_json();
  return j;
}

// ---- AttentionSpec ----

AttentionSpec AttentionSpec::from_json(const Json& j, const std::string& context) {
  check_keys(j, {"step_size", "scale", "bilinear"}, context);
  AttentionSpec a;
  if (j.contains("step_size")) a.step_size = as_number(j.at("step_size"), context + ".step_size");
  if (j.contains("scale")) a.scale = as_number(j.at("scale"), context + ".scale");
  if (j.contains("bilinear"))
    a.bilinear = MatrixSpec::from_json(j.at("bilinear"), context + ".bilinear");
  return a;
}

AttentionConfig AttentionSpec::materialize(Eigen::Index d) const {
  AttentionConfig cfg;
  if (step_size) cfg.step_size = *step_size;
  if (scale) cfg.scale = *scale;
  if (bilinear) cfg.bilinear = BilinearForm(bilinear->materialize(d));
  return cfg;
}

Json AttentionSpec::to_json() const {
  Json j = Json::object();
  if (step_size) j["step_size"] = *step_size;
  if (scale) j["scale"] = *scale;
  if (bilinear) j["bilinear"] = bilinear->to_json();
  return j;
}

// ---- RenormConfigSpec ----

RenormConfigSpec RenormConfigSpec::from_json(const Json& j, const std::string& context) {
  check_keys(j, {"target_mean", "target_cov", "ridge"}, context);
  RenormConfigSpec r;
  r.target_mean = as_vector(get_required(j, "target_mean", context), context + ".target_mean");
  r.target_cov =
      MatrixSpec::from_json(get_required(j, "target_cov", context), context + ".target_cov");
  if (j.contains("ridge")) r.ridge = as_number(j.at("ridge"), context + ".ridge");
  return r;
}

RenormSpec RenormConfigSpec::materialize(Eigen::Index d) const {
  if (static_cast<Eigen::Index>(target_mean.size()) != d)
    throw ConfigError("renorm.target_mean dimension does not match dim");
  return RenormSpec(to_vec(target_mean), PsdMatrix(target_cov.materialize(d)),
                    ridge.value_or(1e-8));
}

Json RenormConfigSpec::to_json() const {
  Json j;
  j["target_mean"] = target_mean;
  j["target_cov"] = target_cov.to_json();
  if (ridge) j["ridge"] = *ridge;
  return j;
}

// ---- InitialDistSpec ----

InitialDistSpec InitialDistSpec::from_json(const Json& j, const std::string& context) {
  check_keys(j, {"gaussian"}, context);
  const Json& g = get_required(j, "gaussian", context);
  check_keys(g, {"mean", "cov"}, context + ".gaussian");
  InitialDistSpec d;
  d.mean = as_vector(get_required(g, "mean", context), context + ".gaussian.mean");
  d.cov = MatrixSpec::from_json(get_required(g, "cov", context), context + ".gaussian.cov");
  return d;
}

Json InitialDistSpec::to_json() const {
  return Json{{"gaussian", Json{{"mean", mean}, {"cov", cov.to_json()}}}};
}

// ---- BandSpec ----

BandSpec BandSpec::from_json(const Json& j, const std::string& context) {
  check_keys(j, {"mean_coeff", "cov_coeff", "skew_coeff", "renorm_tol"}, context);
  BandSpec b;
  if (j.contains("mean_coeff")) b.mean_coeff = as_number(j.at("mean_coeff"), context);
  if (j.contains("cov_coeff")) b.cov_coeff = as_number(j.at("cov_coeff"), context);
  if (j.contains("skew_coeff")) b.skew_coeff = as_number(j.at("skew_coeff"), context);
  if (j.contains("renorm_tol")) b.renorm_tol = as_number(j.at("renorm_tol"), context);
  return b;
}

Json BandSpec::to_json() const {
  Json j = Json::object();
  if (mean_coeff) j["mean_coeff"] = *mean_coeff;
  if (cov_coeff) j["cov_coeff"] = *cov_coeff;
  if (skew_coeff) j["skew_coeff"] = *skew_coeff;
  if (renorm_tol) j["renorm_tol"] = *renorm_tol;
  return j;
}

// ---- ExperimentConfig ----

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  check_keys(j,
             {"dim", "n_points", "seed", "policy", "measure", "attention", "renorm", "steps",
              "initial_distribution", "band"},
             "config");
  ExperimentConfig c;
  c.dim = get_required(j, "dim", "config").get<int>();
  c.n_points = get_required(j, "n_points", "config").get<int>();
  const Json& seed = get_required(j, "seed", "config");
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    throw ConfigError("config.seed: expected an unsigned integer (seeds are mandatory)");
  c.seed = seed.get<std::uint64_t>();
  c.policy = PolicySpec::from_json(get_required(j, "policy", "config"), "config.policy");
  if (j.contains("measure"))
    c.measure = MeasureSpec::from_json(j.at("measure"), "config.measure");
  if (j.contains("attention"))
    c.attention = AttentionSpec::from_json(j.at("attention"), "config.attention");
  if (j.contains("renorm"))
    c.renorm = RenormConfigSpec::from_json(j.at("renorm"), "config.renorm");
  c.steps = get_required(j, "steps", "config").get<int>();
  c.initial_distribution = InitialDistSpec::from_json(
      get_required(j, "initial_distribution", "config"), "config.initial_distribution");
  if (j.contains("band")) c.band = BandSpec::from_json(j.at("band"), "config.band");

  if (c.dim < 1) throw ConfigError("config.dim must be >= 1");
  if (c.n_points < 1) throw ConfigError("config.n_points must be >= 1");
  if (c.steps < 1) throw ConfigError("config.steps must be >= 1");
  if (c.policy.type == "fixed_measure" && !c.measure)
    throw ConfigError("config: fixed_measure policy requires a measure");
  if (c.policy.type != "fixed_measure" && c.measure)
    throw ConfigError("config: measure is only valid with the fixed_measure policy");
  if (static_cast<Eigen::Index>(c.initial_distribution.mean.size()) != c.dim)
    throw ConfigError("config.initial_distribution mean dimension does not match dim");
  return c;
}

MeasurePolicy ExperimentConfig::materialize_policy() const {
  if (policy.type == "fixed_measure") return FixedMeasure{measure->materialize(dim)};
  if (policy.type == "self_patterns") return SelfPatterns{};
  return PointwiseMap{PsdMatrix(policy.cov->materialize(dim))};
}

AttentionConfig ExperimentConfig::materialize_attention() const {
  return attention ? attention->materialize(dim) : AttentionConfig{};
}

std::optional<RenormSpec> ExperimentConfig::materialize_renorm() const {
  if (!renorm) return std::nullopt;
  return renorm->materialize(dim);
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["dim"] = dim;
  j["n_points"] = n_points;
  j["seed"] = seed;
  j["policy"] = policy.to_json();
  if (measure) j["measure"] = measure->to_json();
  if (attention) j["attention"] = attention->to_json();
  if (renorm) j["renorm"] = renorm->to_json();
  j["steps"] = steps;
  j["initial_distribution"] = initial_distribution.to_json();
  if (band) j["band"] = band->to_json();
  return j;
}

// ---- ConjugateConfig ----

ConjugateConfig ConjugateConfig::from_json(const Json& j) {
  check_keys(j, {"measure", "eta_star", "solver_tol"}, "config");
  ConjugateConfig c{MeasureSpec::from_json(get_required(j, "measure", "config"), "config.measure"),
                    as_vector(get_required(j, "eta_star", "config"), "config.eta_star"),
                    std::nullopt};
  if (j.contains("solver_tol")) c.solver_tol = as_number(j.at("solver_tol"), "config.solver_tol");
  if (c.eta_star.empty()) throw ConfigError("config.eta_star must be non-empty");
  return c;
}

Json ConjugateConfig::to_json() const {
  Json j;
  j["measure"] = measure.to_json();
  j["eta_star"] = eta_star;
  if (solver_tol) j["solver_tol"] = *solver_tol;
  return j;
}

}  // namespace expfam::harness
