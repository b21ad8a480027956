#include "expfam/oracle.hpp"

#include <cmath>
#include <limits>

#include "expfam/split_rng.hpp"

namespace expfam::oracle {

namespace {

double checked_eval(const ScalarFn& f, const Vec& x) {
  const double v = f(x);
  if (!std::isfinite(v))
    throw OracleDomainError("finite differences: function evaluated to a non-finite value");
  return v;
}

// Sampling state for one mixture component: mean and a PSD root of the
// covariance. Independent of the closed-form code paths by construction.
struct ComponentSampler {
  Vec mean;
  Mat root;
};

struct MeasureSampler {
  std::vector<ComponentSampler> components;
  std::vector<double> cum_prob;  // cumulative normalized weights
  double log_mass = 0.0;         // log W

  Eigen::Index pick(double u) const {
    for (std::size_t c = 0; c + 1 < cum_prob.size(); ++c)
      if (u < cum_prob[c]) return static_cast<Eigen::Index>(c);
    return static_cast<Eigen::Index>(cum_prob.size() - 1);
  }
};

MeasureSampler build_sampler(const IntrinsicMeasure& h) {
  MeasureSampler s;
  if (const auto* g = std::get_if<GaussianMeasure>(&h)) {
    s.components.push_back({g->mean, sym_sqrt(g->cov.matrix(), 0.0)});
    s.cum_prob = {1.0};
    return s;
  }
  Vec weights;
  if (const auto* m = std::get_if<SharedCovMixture>(&h)) {
    const Mat root = sym_sqrt(m->cov.matrix(), 0.0);
    for (Eigen::Index i = 0; i < m->size(); ++i)
      s.components.push_back({m->means.row(i).transpose(), root});
    weights = m->weights;
  } else if (const auto* m2 = std::get_if<GeneralMixture>(&h)) {
    for (Eigen::Index i = 0; i < m2->size(); ++i)
      s.components.push_back({m2->means.row(i).transpose(),
                              sym_sqrt(m2->covs[static_cast<std::size_t>(i)].matrix(), 0.0)});
    weights = m2->weights;
  } else {
    throw UnsupportedMeasureError(
        "mc_log_partition: DiscretePoints has an exact closed form; no Monte Carlo oracle");
  }
  const double mass = weights.sum();
  s.log_mass = std::log(mass);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    acc += weights(i) / mass;
    s.cum_prob.push_back(acc);
  }
  return s;
}

}  // namespace

Vec fd_gradient(const ScalarFn& f, const Vec& eta, const FiniteDiffSpec& spec) {
  const double h = spec.step;
  Vec g(eta.size());
  Vec x = eta;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    x(i) = eta(i) + h;
    const double up = checked_eval(f, x);
    x(i) = eta(i) - h;
    const double down = checked_eval(f, x);
    x(i) = eta(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

Mat fd_jacobian(const VectorFn& f, const Vec& eta, const FiniteDiffSpec& spec) {
  const double h = spec.step;
  Vec x = eta;
  Mat j;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    x(i) = eta(i) + h;
    const Vec up = f(x);
    x(i) = eta(i) - h;
    const Vec down = f(x);
    x(i) = eta(i);
    if (!all_finite(up) || !all_finite(down))
      throw OracleDomainError("fd_jacobian: function evaluated to a non-finite value");
    if (j.size() == 0) j.resize(up.size(), eta.size());
    j.col(i) = (up - down) / (2.0 * h);
  }
  return j;
}

Mat fd_hessian(const ScalarFn& f, const Vec& eta, const FiniteDiffSpec& spec) {
  const double h = spec.step;
  const Eigen::Index d = eta.size();
  const double f0 = checked_eval(f, eta);
  Mat hess(d, d);
  Vec x = eta;
  for (Eigen::Index i = 0; i < d; ++i) {
    x(i) = eta(i) + h;
    const double up = checked_eval(f, x);
    x(i) = eta(i) - h;
    const double down = checked_eval(f, x);
    x(i) = eta(i);
    hess(i, i) = (up - 2.0 * f0 + down) / (h * h);
    for (Eigen::Index j = i + 1; j < d; ++j) {
      x(i) = eta(i) + h;
      x(j) = eta(j) + h;
      const double pp = checked_eval(f, x);
      x(j) = eta(j) - h;
      const double pm = checked_eval(f, x);
      x(i) = eta(i) - h;
      const double mm = checked_eval(f, x);
      x(j) = eta(j) + h;
      const double mp = checked_eval(f, x);
      x(i) = eta(i);
      x(j) = eta(j);
      hess(i, j) = hess(j, i) = (pp - pm - mp + mm) / (4.0 * h * h);
    }
  }
  return 0.5 * (hess + hess.transpose());
}

McEstimate mc_log_partition(const IntrinsicMeasure& h, const NaturalParam& eta,
                            const McSpec& spec) {
  if (dim(h) != eta.dim())
    throw ContractError("mc_log_partition: measure/parameter dimension mismatch");
  const MeasureSampler sampler = build_sampler(h);
  const Eigen::Index d = eta.dim();
  const std::int64_t n = spec.n_samples;

  const SplitRng pick_rng = SplitRng(spec.seed).stream(0x6d6378);   // component picks
  const SplitRng normal_rng = SplitRng(spec.seed).stream(0x6e726d); // normal draws

  // Exponents x_i . eta, filled by sample index; the reduction below runs in
  // index order regardless of thread count.
  std::vector<double> y(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& comp =
        sampler.components[static_cast<std::size_t>(sampler.pick(pick_rng.uniform01(
            static_cast<std::uint64_t>(i))))];
    Vec z(d);
    for (Eigen::Index k = 0; k < d; ++k)
      z(k) = normal_rng.normal(static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(d) +
                               static_cast<std::uint64_t>(k));
    const Vec x = comp.mean + comp.root * z;
    y[static_cast<std::size_t>(i)] = x.dot(eta.coords);
  }

  double m = y[0];
  for (std::int64_t i = 1; i < n; ++i) m = std::max(m, y[static_cast<std::size_t>(i)]);
  double sum = 0.0;
  for (std::int64_t i = 0; i < n; ++i) sum += std::exp(y[static_cast<std::size_t>(i)] - m);
  const double mean_e = sum / static_cast<double>(n);

  double ss = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double c = std::exp(y[static_cast<std::size_t>(i)] - m) - mean_e;
    ss += c * c;
  }
  const double se_mean = std::sqrt(ss / (static_cast<double>(n) - 1.0) / static_cast<double>(n));

  McEstimate out;
  out.estimate = sampler.log_mass + m + std::log(mean_e);
  out.std_error = se_mean / mean_e;  // delta method on log of the exp-mean
  return out;
}

GridResult grid_sup(const ScalarFn& f, const std::vector<std::pair<double, double>>& box,
                    double resolution) {
  const std::size_t d = box.size();
  if (d == 0 || d > 2)
    throw OracleScaleError("grid_sup: exhaustive grid oracle is limited to D <= 2");
  require(resolution > 0.0 && std::isfinite(resolution), "grid_sup: resolution must be positive");
  for (const auto& [lo, hi] : box)
    require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, "grid_sup: box must be finite");

  auto steps = [&](std::size_t k) {
    return static_cast<std::int64_t>(std::floor((box[k].second - box[k].first) / resolution)) + 1;
  };

  GridResult best;
  best.value = -std::numeric_limits<double>::infinity();
  best.argmax = Vec(static_cast<Eigen::Index>(d));
  Vec x(static_cast<Eigen::Index>(d));
  const std::int64_t n0 = steps(0);
  const std::int64_t n1 = d == 2 ? steps(1) : 1;
  for (std::int64_t i = 0; i < n0; ++i) {
    x(0) = box[0].first + static_cast<double>(i) * resolution;
    for (std::int64_t j = 0; j < n1; ++j) {
      if (d == 2) x(1) = box[1].first + static_cast<double>(j) * resolution;
      const double v = f(x);
      if (v > best.value) {
        best.value = v;
        best.argmax = x;
      }
    }
  }
  return best;
}

}  // namespace expfam::oracle
