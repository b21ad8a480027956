#include <doctest.h>

#include <cmath>

#include "expfam/log_partition.hpp"
#include "expfam/oracle.hpp"
#include "test_support.hpp"

using namespace expfam;
using test_support::rel_err;
using test_support::rows;
using test_support::rows1d;
using test_support::vec;

namespace {

NaturalParam nat(std::initializer_list<double> xs) { return NaturalParam(test_support::vec(xs)); }

IntrinsicMeasure two_point_line() { return DiscretePoints(rows1d({1.0, -1.0})); }

}  // namespace

TEST_CASE("log_partition: two symmetric points at eta=0 give log 2") {
  CHECK(log_partition(two_point_line(), nat({0.0})) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("log_partition: standard Gaussian gives |eta|^2/2") {
  const IntrinsicMeasure h = GaussianMeasure(vec({0.0, 0.0}), PsdMatrix::identity(2));
  CHECK(log_partition(h, nat({2.0, 0.0})) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("log_partition: general mixture closed form, with the Monte Carlo oracle") {
  const IntrinsicMeasure h =
      GeneralMixture(vec({0.5, 0.5}), rows1d({1.0, -1.0}),
                     {PsdMatrix::identity(1), PsdMatrix::identity(1)});
  const double expected = std::log(0.5 * std::exp(1.5) + 0.5 * std::exp(-0.5));
  const double got = log_partition(h, nat({1.0}));
  CHECK(got == doctest::Approx(expected).epsilon(1e-15));

  const auto mc = oracle::mc_log_partition(h, nat({1.0}), oracle::McSpec(1000000, 2024));
  CHECK(std::abs(got - mc.estimate) <= 4.0 * mc.std_error);
}

TEST_CASE("grad_log_partition: softmax average of two symmetric points") {
  const NaturalParam eta(vec({0.5 * std::log(3.0)}));
  const Vec g = grad_log_partition(two_point_line(), eta).coords;
  CHECK(g(0) == doctest::Approx(0.5).epsilon(1e-14));
  const auto fd = oracle::fd_gradient(
      [&](const Vec& e) { return log_partition(two_point_line(), NaturalParam(e)); }, eta.coords,
      oracle::FiniteDiffSpec());
  CHECK(rel_err(g, fd) <= 1e-9);
}

TEST_CASE("grad_log_partition: Gaussian update mu + Sigma eta") {
  const IntrinsicMeasure h = GaussianMeasure(vec({1.0, 0.0}), PsdMatrix::identity(2));
  const Vec g = grad_log_partition(h, nat({0.0, 2.0})).coords;
  CHECK(g(0) == doctest::Approx(1.0));
  CHECK(g(1) == doctest::Approx(2.0));
}

TEST_CASE("grad_log_partition: shared-cov mixture at eta=0 is the weighted mean of means") {
  const IntrinsicMeasure h = SharedCovMixture(vec({0.5, 0.5}), rows({{2.0, 0.0}, {0.0, 0.0}}),
                                              PsdMatrix::identity(2));
  const Vec g = grad_log_partition(h, nat({0.0, 0.0})).coords;
  CHECK(g(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g(1) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("hessian_log_partition: Gaussian Hessian is exactly Sigma") {
  harness::InstanceGen gen(5);
  for (int t = 0; t < 5; ++t) {
    const Mat sigma = gen.psd(3);
    const IntrinsicMeasure h = GaussianMeasure(gen.vec(3), PsdMatrix(sigma));
    const Mat hess = hessian_log_partition(h, NaturalParam(gen.vec(3))).matrix();
    CHECK(rel_err(hess, sigma) <= 1e-14);
  }
}

TEST_CASE("hessian_log_partition: two symmetric points at eta=0 have unit variance") {
  const Mat hess = hessian_log_partition(two_point_line(), nat({0.0})).matrix();
  CHECK(hess(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("hessian_log_partition: shared-cov mixture matches finite differences") {
  harness::InstanceGen gen(17);
  const IntrinsicMeasure h = gen.shared_cov(3, 5);
  const Vec eta = gen.vec(3);
  const Mat hess = hessian_log_partition(h, NaturalParam(eta)).matrix();
  const Mat fd = oracle::fd_hessian(
      [&](const Vec& e) { return log_partition(h, NaturalParam(e)); }, eta,
      oracle::FiniteDiffSpec());
  CHECK(rel_err(hess, fd) <= 1e-5);
}

TEST_CASE("attention_weights: equal logits, exact softmax, extended-precision oracle") {
  const IntrinsicMeasure two_same = DiscretePoints(rows({{1.0, 2.0}, {1.0, 2.0}}));
  const Vec w = attention_weights(two_same, nat({0.3, -0.7}), 1.0);
  CHECK(w(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w(1) == doctest::Approx(0.5).epsilon(1e-15));

  const IntrinsicMeasure keys10 = DiscretePoints(rows1d({1.0, 0.0}));
  const Vec w2 = attention_weights(keys10, nat({std::log(3.0)}), 1.0);
  CHECK(w2(0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(w2(1) == doctest::Approx(0.25).epsilon(1e-14));

  // five random keys against a long-double softmax
  harness::InstanceGen gen(23);
  const Eigen::Index n = 5, d = 4;
  const RowMat pts = gen.rows(n, d);
  const Vec eta = gen.vec(d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const Vec w3 = attention_weights(DiscretePoints(pts), NaturalParam(eta), scale);
  long double denom = 0.0L;
  std::vector<long double> ws(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    long double logit = 0.0L;
    for (Eigen::Index k = 0; k < d; ++k)
      logit += static_cast<long double>(pts(j, k)) * static_cast<long double>(eta(k));
    ws[static_cast<std::size_t>(j)] = std::exp(static_cast<long double>(scale) * logit);
    denom += ws[static_cast<std::size_t>(j)];
  }
  for (Eigen::Index j = 0; j < n; ++j)
    CHECK(std::abs(static_cast<long double>(w3(j)) - ws[static_cast<std::size_t>(j)] / denom) <=
          1e-14L);
}

TEST_CASE("attention_weights: rejects non-discrete measures and bad scales") {
  const IntrinsicMeasure g = GaussianMeasure(vec({0.0}), PsdMatrix::identity(1));
  CHECK_THROWS_AS(attention_weights(g, nat({0.0}), 1.0), UnsupportedMeasureError);
  CHECK_THROWS_AS(attention_weights(two_point_line(), nat({0.0}), 0.0), ContractError);
  CHECK_THROWS_AS(attention_weights(two_point_line(), nat({0.0}), -1.0), ContractError);
}

TEST_CASE("lower bound: zero at the origin for normalized mixtures, tight there") {
  harness::InstanceGen gen(31);
  const IntrinsicMeasure h = gen.general(3, 4, /*normalized=*/true);
  const NaturalParam zero(Vec::Zero(3));
  CHECK(lower_bound_log_partition(h, zero) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(log_partition(h, zero)) <= 1e-12);
}

TEST_CASE("lower bound: worked 1-D example sits below the exact value") {
  const IntrinsicMeasure h =
      GeneralMixture(vec({0.5, 0.5}), rows1d({1.0, -1.0}),
                     {PsdMatrix::identity(1), PsdMatrix::identity(1)});
  const double lb = lower_bound_log_partition(h, nat({1.0}));
  const double exact = log_partition(h, nat({1.0}));
  CHECK(lb == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(lb <= exact + 1e-12);
  CHECK(exact == doctest::Approx(0.93378083048302719).epsilon(1e-12));
}

TEST_CASE("lower bound: single-component mixture is exact for all eta") {
  harness::InstanceGen gen(37);
  const Mat sigma = gen.psd(2);
  const Vec mu = gen.vec(2);
  const IntrinsicMeasure h = GeneralMixture(vec({1.0}), RowMat(mu.transpose()), {PsdMatrix(sigma)});
  for (int t = 0; t < 10; ++t) {
    const NaturalParam eta(gen.vec(2));
    CHECK(lower_bound_log_partition(h, eta) ==
          doctest::Approx(log_partition(h, eta)).epsilon(1e-13));
  }
}

TEST_CASE("lower bound: unnormalized weights are a contract violation") {
  const IntrinsicMeasure h =
      GeneralMixture(vec({0.5, 0.6}), rows1d({1.0, -1.0}),
                     {PsdMatrix::identity(1), PsdMatrix::identity(1)});
  CHECK_THROWS_AS(lower_bound_log_partition(h, nat({0.0})), ContractError);
  CHECK_THROWS_AS(grad_lower_bound(h, nat({0.0})), ContractError);
}

TEST_CASE("grad_lower_bound: origin, single component, and finite differences") {
  harness::InstanceGen gen(41);
  const IntrinsicMeasure h = gen.general(3, 4, /*normalized=*/true);
  const auto& m = std::get<GeneralMixture>(h);

  Vec mean_of_means = Vec::Zero(3);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    mean_of_means += m.weights(i) * m.means.row(i).transpose();
  CHECK(rel_err(grad_lower_bound(h, NaturalParam(Vec::Zero(3))).coords, mean_of_means) <= 1e-14);

  const Mat sigma = gen.psd(2);
  const Vec mu = gen.vec(2);
  const IntrinsicMeasure one =
      GeneralMixture(vec({1.0}), RowMat(mu.transpose()), {PsdMatrix(sigma)});
  const Vec eta2 = gen.vec(2);
  CHECK(rel_err(grad_lower_bound(one, NaturalParam(eta2)).coords, Vec(mu + sigma * eta2)) <=
        1e-14);

  const Vec eta = gen.vec(3);
  const Vec fd = oracle::fd_gradient(
      [&](const Vec& e) { return lower_bound_log_partition(h, NaturalParam(e)); }, eta,
      oracle::FiniteDiffSpec());
  CHECK(rel_err(grad_lower_bound(h, NaturalParam(eta)).coords, fd) <= 1e-6);
}

// ---- module invariants ----

TEST_CASE("invariant: gradients match finite differences on random instances") {
  harness::InstanceGen gen(101);
  const oracle::FiniteDiffSpec spec;
  for (int variant = 0; variant < 4; ++variant) {
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Eigen::Index d = 1 + gen.uniform_index(8);
      const Eigen::Index n = 1 + gen.uniform_index(16);
      const IntrinsicMeasure h = gen.measure(variant, d, n);
      const Vec eta = gen.vec(d);
      const Vec g = grad_log_partition(h, NaturalParam(eta)).coords;
      const Vec fd = oracle::fd_gradient(
          [&](const Vec& e) { return log_partition(h, NaturalParam(e)); }, eta, spec);
      worst = std::max(worst, rel_err(g, fd));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("invariant: Hessians match finite differences of the gradient and are PSD") {
  harness::InstanceGen gen(103);
  const oracle::FiniteDiffSpec spec;
  for (int variant = 0; variant < 4; ++variant) {
    for (int t = 0; t < 20; ++t) {
      const Eigen::Index d = 1 + gen.uniform_index(6);
      const Eigen::Index n = 1 + gen.uniform_index(12);
      const IntrinsicMeasure h = gen.measure(variant, d, n);
      const Vec eta = gen.vec(d);
      const Mat hess = hessian_log_partition(h, NaturalParam(eta)).matrix();
      const Mat fd = oracle::fd_jacobian(
          [&](const Vec& e) { return grad_log_partition(h, NaturalParam(e)).coords; }, eta, spec);
      CHECK(rel_err(hess, fd) <= 1e-5);
      Eigen::SelfAdjointEigenSolver<Mat> eig(hess, Eigen::EigenvaluesOnly);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-9);
      CHECK((hess - hess.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("invariant: the log normalizer is convex along random segments") {
  harness::InstanceGen gen(107);
  for (int variant = 0; variant < 4; ++variant) {
    for (int t = 0; t < 25; ++t) {
      const Eigen::Index d = 1 + gen.uniform_index(5);
      const IntrinsicMeasure h = gen.measure(variant, d, 1 + gen.uniform_index(8));
      const Vec a = gen.vec(d), b = gen.vec(d);
      const double ga = log_partition(h, NaturalParam(a));
      const double gb = log_partition(h, NaturalParam(b));
      for (double w : {0.25, 0.5, 0.75}) {
        const double mid = log_partition(h, NaturalParam(Vec(w * a + (1.0 - w) * b)));
        CHECK(mid <= w * ga + (1.0 - w) * gb + 1e-10);
      }
    }
  }
}

TEST_CASE("invariant: Jensen bound never exceeds the exact log normalizer") {
  harness::InstanceGen gen(109);
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Index d = 1 + gen.uniform_index(4);
    const IntrinsicMeasure h = gen.general(d, 1 + gen.uniform_index(6), /*normalized=*/true);
    const NaturalParam eta(gen.vec(d));
    CHECK(lower_bound_log_partition(h, eta) <= log_partition(h, eta) + 1e-12);
  }
}

TEST_CASE("invariant: attention weights are shift invariant") {
  harness::InstanceGen gen(113);
  for (int t = 0; t < 25; ++t) {
    const Eigen::Index d = 1 + gen.uniform_index(5);
    const Eigen::Index n = 2 + gen.uniform_index(10);
    const RowMat pts = gen.rows(n, d);
    const Vec eta = gen.vec(d);
    const Vec shift = gen.vec(d);
    const Vec w1 = attention_weights(DiscretePoints(pts), NaturalParam(eta), 1.0);
    const Vec w2 = attention_weights(DiscretePoints(RowMat(pts.rowwise() + shift.transpose())),
                                     NaturalParam(eta), 1.0);
    CHECK((w1 - w2).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("invariant: shared-cov gradient decomposes into Sigma eta plus the discrete update") {
  harness::InstanceGen gen(127);
  for (int t = 0; t < 25; ++t) {
    const Eigen::Index d = 1 + gen.uniform_index(5);
    const Eigen::Index n = 1 + gen.uniform_index(8);
    const auto mix = gen.shared_cov(d, n);
    const Vec eta = gen.vec(d);

    const Vec whole = grad_log_partition(IntrinsicMeasure(mix), NaturalParam(eta)).coords;
    const Vec log_pi = mix.weights.array().log().matrix();
    const Vec discrete =
        grad_log_partition(IntrinsicMeasure(DiscretePoints(mix.means, log_pi)), NaturalParam(eta))
            .coords;
    const Vec recomposed = mix.cov.matrix() * eta + discrete;
    CHECK((whole - recomposed).cwiseAbs().maxCoeff() == 0.0);  // same softmax computation
  }
}

TEST_CASE("invariant: closed-form log Z within 4 standard errors of Monte Carlo") {
  harness::InstanceGen gen(131);
  const IntrinsicMeasure cases[] = {gen.gaussian(3), gen.shared_cov(2, 3), gen.general(2, 3)};
  std::uint64_t seed = 900;
  for (const auto& h : cases) {
    const Eigen::Index d = dim(h);
    const NaturalParam eta(gen.vec(d, -1.5, 1.5));
    const auto mc = oracle::mc_log_partition(h, eta, oracle::McSpec(1000000, seed++));
    CHECK(std::abs(log_partition(h, eta) - mc.estimate) <= 4.0 * mc.std_error);
  }
}

TEST_CASE("errors: dimension mismatches are contract violations") {
  const IntrinsicMeasure h = GaussianMeasure(vec({0.0, 0.0}), PsdMatrix::identity(2));
  CHECK_THROWS_AS(log_partition(h, nat({1.0})), ContractError);
  CHECK_THROWS_AS(grad_log_partition(h, nat({1.0})), ContractError);
  CHECK_THROWS_AS(hessian_log_partition(h, nat({1.0})), ContractError);
}

TEST_CASE("types: construction validates invariants") {
  CHECK_THROWS_AS(NaturalParam(vec({1.0, std::nan("")})), ContractError);
  CHECK_THROWS_AS(NaturalParam{Vec{}}, ContractError);

  Mat asym(2, 2);
  asym << 1.0, 0.5, 0.3, 1.0;
  CHECK_THROWS_AS(PsdMatrix{asym}, ContractError);

  Mat negdef(2, 2);
  negdef << 1.0, 0.0, 0.0, -0.5;
  CHECK_THROWS_AS(PsdMatrix{negdef}, ContractError);

  // tiny negative eigenvalues are clamped to zero
  Mat noisy = Mat::Identity(2, 2);
  noisy(1, 1) = -5e-11;
  const PsdMatrix cleaned(noisy);
  Eigen::SelfAdjointEigenSolver<Mat> eig(cleaned.matrix(), Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-16);

  CHECK_THROWS_AS(SharedCovMixture(vec({0.5, 0.0}), rows({{1.0}, {2.0}}), PsdMatrix::identity(1)),
                  ContractError);
}
