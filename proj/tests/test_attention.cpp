#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "expfam/attention.hpp"
#include "expfam/log_partition.hpp"
#include "expfam/serial_ref.hpp"
#include "test_support.hpp"

using namespace expfam;
using test_support::rows;
using test_support::rows1d;
using test_support::vec;

namespace {

ParamEnsemble random_ensemble(harness::InstanceGen& gen, Eigen::Index n, Eigen::Index d) {
  return ParamEnsemble(gen.rows(n, d));
}

ParamEnsemble permuted(const ParamEnsemble& e, const std::vector<Eigen::Index>& perm) {
  RowMat p(e.size(), e.dim());
  for (Eigen::Index i = 0; i < e.size(); ++i)
    p.row(i) = e.params.row(perm[static_cast<std::size_t>(i)]);
  return ParamEnsemble(std::move(p));
}

double max_diff(const ParamEnsemble& a, const ParamEnsemble& b) {
  return (a.params - b.params).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("attention_update: a single key shifts every member by that key") {
  harness::InstanceGen gen(201);
  const Vec key = vec({0.3, -1.2, 0.8});
  const IntrinsicMeasure h = DiscretePoints(RowMat(key.transpose()));
  const ParamEnsemble in = random_ensemble(gen, 6, 3);
  const ParamEnsemble out = attention_update(in, h, AttentionConfig{});
  const RowMat expected = in.params.rowwise() + key.transpose();
  CHECK((out.params - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("attention_update: Gaussian measure is the affine map mu + (I + Sigma) eta") {
  harness::InstanceGen gen(203);
  const Mat sigma = gen.psd(3);
  const Vec mu = gen.vec(3);
  const IntrinsicMeasure h = GaussianMeasure(mu, PsdMatrix(sigma));
  const ParamEnsemble in = random_ensemble(gen, 5, 3);
  const ParamEnsemble out = attention_update(in, h, AttentionConfig{});
  for (Eigen::Index i = 0; i < in.size(); ++i) {
    const Vec eta = in.member(i);
    const Vec expected = mu + (Mat::Identity(3, 3) + sigma) * eta;
    CHECK((out.member(i) - expected).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("equivalence: gradient update equals the independent softmax layer") {
  harness::InstanceGen gen(207);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index d = 1 + gen.uniform_index(16);
    const Eigen::Index nq = 1 + gen.uniform_index(64);
    const Eigen::Index nk = 1 + gen.uniform_index(64);
    const ParamEnsemble queries = random_ensemble(gen, nq, d);
    const ParamEnsemble keys = random_ensemble(gen, nk, d);
    AttentionConfig cfg;
    cfg.step_size = gen.uniform(-1.0, 2.0);
    cfg.scale = t % 3 == 0 ? 1.0 : (t % 3 == 1 ? 0.5 : 1.0 / std::sqrt(static_cast<double>(d)));

    const ParamEnsemble via_grad = attention_update(queries, DiscretePoints(keys.params), cfg);
    const ParamEnsemble via_layer = softmax_attention_layer(queries, keys, cfg);
    worst = std::max(worst, max_diff(via_grad, via_layer));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("softmax_attention_layer: single key, scale monotonicity") {
  harness::InstanceGen gen(209);
  const ParamEnsemble queries = random_ensemble(gen, 4, 2);
  const ParamEnsemble key(rows({{0.5, -0.25}}));
  const ParamEnsemble out = softmax_attention_layer(queries, key, AttentionConfig{});
  const RowMat expected = queries.params.rowwise() + key.params.row(0);
  CHECK((out.params - expected).cwiseAbs().maxCoeff() == 0.0);

  // positive logit scaling never changes the argmax weight
  const ParamEnsemble keys = random_ensemble(gen, 8, 4);
  const Vec eta = gen.vec(4);
  const Vec w1 = attention_weights(DiscretePoints(keys.params), NaturalParam(eta), 1.0);
  const Vec w2 = attention_weights(DiscretePoints(keys.params), NaturalParam(eta), 0.5);
  Eigen::Index i1, i2;
  w1.maxCoeff(&i1);
  w2.maxCoeff(&i2);
  CHECK(i1 == i2);
  // and scale = 1/sqrt(D) with D = 4 exactly halves the logit gaps
  const Vec l1 = keys.params * eta;
  CHECK(0.5 * (l1(0) - l1(1)) ==
        doctest::Approx((keys.params * (0.5 * eta))(0) - (keys.params * (0.5 * eta))(1))
            .epsilon(1e-14));
}

TEST_CASE("self_attention_update: one member doubles, identical members move together") {
  const ParamEnsemble solo(rows({{0.7, -0.3}}));
  const ParamEnsemble out = self_attention_update(solo, AttentionConfig{});
  CHECK((out.params - 2.0 * solo.params).cwiseAbs().maxCoeff() == 0.0);

  RowMat same(4, 2);
  for (int i = 0; i < 4; ++i) same.row(i) << 0.4, 1.1;
  const ParamEnsemble out2 = self_attention_update(ParamEnsemble(same), AttentionConfig{});
  for (int i = 1; i < 4; ++i)
    CHECK((out2.params.row(i) - out2.params.row(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("permutation equivariance is exact in fixed-measure and self-attention modes") {
  harness::InstanceGen gen(211);
  std::mt19937_64 shuffler(99);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index n = 2 + gen.uniform_index(24);
    const Eigen::Index d = 1 + gen.uniform_index(6);
    const ParamEnsemble e = random_ensemble(gen, n, d);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), shuffler);

    const IntrinsicMeasure h = gen.discrete(d, 3);
    const ParamEnsemble fixed_then_perm = permuted(attention_update(e, h, {}), perm);
    const ParamEnsemble perm_then_fixed = attention_update(permuted(e, perm), h, {});
    CHECK(max_diff(fixed_then_perm, perm_then_fixed) == 0.0);

    const ParamEnsemble self_then_perm = permuted(self_attention_update(e, {}), perm);
    const ParamEnsemble perm_then_self = self_attention_update(permuted(e, perm), {});
    CHECK(max_diff(self_then_perm, perm_then_self) == 0.0);
  }
}

TEST_CASE("pointwise independence: sub-ensembles update identically under a fixed measure") {
  harness::InstanceGen gen(213);
  const IntrinsicMeasure h = gen.discrete(3, 7);
  const ParamEnsemble whole = random_ensemble(gen, 10, 3);
  const ParamEnsemble part(RowMat(whole.params.topRows(4)));
  const ParamEnsemble whole_out = attention_update(whole, h, {});
  const ParamEnsemble part_out = attention_update(part, h, {});
  CHECK((whole_out.params.topRows(4) - part_out.params).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("affine form: Gaussian-measure updates commute with convex combinations") {
  harness::InstanceGen gen(217);
  const IntrinsicMeasure h = GaussianMeasure(gen.vec(3), PsdMatrix(gen.psd(3)));
  for (int t = 0; t < 10; ++t) {
    const Vec a = gen.vec(3), b = gen.vec(3);
    const double alpha = gen.uniform(0.0, 1.0);
    const ParamEnsemble stacked = ParamEnsemble::from_members({a, b, alpha * a + (1 - alpha) * b});
    const ParamEnsemble out = attention_update(stacked, h, {});
    const Vec mixed = alpha * out.member(0) + (1 - alpha) * out.member(1);
    CHECK((out.member(2) - mixed).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("norm expansion: centered Gaussian measures never shrink a member") {
  harness::InstanceGen gen(219);
  for (int t = 0; t < 500; ++t) {
    const Eigen::Index d = 1 + gen.uniform_index(6);
    const IntrinsicMeasure h = GaussianMeasure(Vec::Zero(d), PsdMatrix(gen.psd(d)));
    const Vec eta = gen.vec(d);
    const ParamEnsemble out = attention_update(ParamEnsemble::from_members({eta}), h, {});
    CHECK(out.member(0).norm() >= eta.norm());
  }
}

TEST_CASE("gradient ascent: the log normalizer increases along every update") {
  harness::InstanceGen gen(223);
  for (int variant = 0; variant < 4; ++variant) {
    for (int t = 0; t < 10; ++t) {
      const Eigen::Index d = 1 + gen.uniform_index(4);
      const IntrinsicMeasure h = gen.measure(variant, d, 1 + gen.uniform_index(8));
      const Vec eta = gen.vec(d);
      const double g0 = log_partition(h, NaturalParam(eta));
      for (double step : {1e-3, 1.0}) {
        AttentionConfig cfg;
        cfg.step_size = step;
        const ParamEnsemble out = attention_update(ParamEnsemble::from_members({eta}), h, cfg);
        const double g1 = log_partition(h, NaturalParam(out.member(0)));
        CHECK(g1 >= g0 - 1e-13);
      }
    }
  }
}

TEST_CASE("bilinear form: logits use x.B.eta and the gradient is pulled back through B") {
  harness::InstanceGen gen(227);
  const Eigen::Index d = 3;
  Mat b(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) b(i, j) = gen.uniform(-1.0, 1.0);

  const RowMat keys = gen.rows(5, d);
  const Vec eta = gen.vec(d);
  AttentionConfig cfg;
  cfg.bilinear = BilinearForm(b);
  cfg.scale = 0.7;
  cfg.step_size = 0.9;

  const IntrinsicMeasure h = DiscretePoints(keys);
  const ParamEnsemble out = attention_update(ParamEnsemble::from_members({eta}), h, cfg);
  const Vec tilted = cfg.scale * (b * eta);
  const Vec expected =
      eta + cfg.step_size * (b.transpose() * grad_log_partition(h, NaturalParam(tilted)).coords);
  CHECK((out.member(0) - expected).cwiseAbs().maxCoeff() <= 1e-14);

  // the layer applies softmax(scale * k.B.q) without the pullback
  const ParamEnsemble layer =
      softmax_attention_layer(ParamEnsemble::from_members({eta}), ParamEnsemble(keys), cfg);
  const Vec w = attention_weights(h, NaturalParam(Vec(b * eta)), cfg.scale);
  Vec avg = Vec::Zero(d);
  for (Eigen::Index j = 0; j < keys.rows(); ++j) avg += w(j) * keys.row(j).transpose();
  CHECK((layer.member(0) - (eta + cfg.step_size * avg)).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("serial reference: parallel kernels agree with the naive implementation") {
  harness::InstanceGen gen(229);
  for (int variant = 0; variant < 4; ++variant) {
    const Eigen::Index d = 2 + gen.uniform_index(4);
    const IntrinsicMeasure h = gen.measure(variant, d, 1 + gen.uniform_index(10));
    const ParamEnsemble e = random_ensemble(gen, 12, d);
    AttentionConfig cfg;
    cfg.step_size = 0.8;
    CHECK(max_diff(attention_update(e, h, cfg), serial_ref::attention_update(e, h, cfg)) <=
          1e-12);
  }
}

#ifdef _OPENMP
TEST_CASE("determinism: results are bit-identical across thread counts") {
  harness::InstanceGen gen(233);
  const ParamEnsemble e = random_ensemble(gen, 33, 5);
  const IntrinsicMeasure h = gen.discrete(5, 17);

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const ParamEnsemble serial = attention_update(e, h, {});
  const ParamEnsemble self_serial = self_attention_update(e, {});
  omp_set_num_threads(4);
  const ParamEnsemble parallel = attention_update(e, h, {});
  const ParamEnsemble self_parallel = self_attention_update(e, {});
  omp_set_num_threads(saved);

  CHECK(max_diff(serial, parallel) == 0.0);
  CHECK(max_diff(self_serial, self_parallel) == 0.0);
}
#endif

TEST_CASE("contracts: dimension mismatches and bad configs are rejected") {
  harness::InstanceGen gen(239);
  const ParamEnsemble e = random_ensemble(gen, 3, 2);
  CHECK_THROWS_AS(attention_update(e, IntrinsicMeasure(gen.gaussian(3)), AttentionConfig{}),
                  ContractError);
  AttentionConfig bad;
  bad.scale = -1.0;
  CHECK_THROWS_AS(attention_update(e, IntrinsicMeasure(gen.gaussian(2)), bad), ContractError);
  CHECK_THROWS_AS(softmax_attention_layer(e, random_ensemble(gen, 3, 4), AttentionConfig{}),
                  ContractError);
}
