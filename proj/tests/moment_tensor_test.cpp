#include "interfere/moment_tensor.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "interfere/conjugation.hpp"
#include "interfere/gaussian.hpp"
#include "interfere/series_json.hpp"
#include "interfere/state.hpp"
#include "interfere/theorem_scan.hpp"
#include "test_util.hpp"

using namespace interfere;

namespace {

constexpr double kPi = std::numbers::pi;

MomentTensor random_tensor(int order, int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> e(std::size_t(std::pow(dim, order)));
  for (double& v : e) v = u(rng);
  return MomentTensor(order, dim, std::move(e));
}

ExponentSeries random_series(int dim, int n_max, std::mt19937_64& rng) {
  ExponentSeries s(dim, n_max);
  for (int n = 0; n <= n_max; ++n) s.set(random_tensor(n, dim, rng));
  return s;
}

ExponentSeries scaled(const ExponentSeries& s, double factor) {
  std::vector<MomentTensor> out;
  for (const auto& t : s.tensors()) {
    auto e = t.entries();
    if (t.order() > 0)
      for (double& v : e) v *= factor;
    out.push_back(MomentTensor::from_symmetric(t.order(), t.dim(), e));
  }
  return ExponentSeries(out);
}

}  // namespace

TEST(MomentTensor, SymmetrizesOnConstruction) {
  const MomentTensor t(2, 2, {1, 2, 4, 3});
  EXPECT_EQ(t.at({0, 1}), 3.0);
  EXPECT_EQ(t.at({1, 0}), 3.0);
  EXPECT_EQ(t.asymmetry(), 0.0);
  std::mt19937_64 rng(1);
  for (int n = 0; n <= 6; ++n) EXPECT_LT(random_tensor(n, 4, rng).asymmetry(), 1e-14);
  EXPECT_THROW(MomentTensor(2, 2, {1, 2, 3}), std::invalid_argument);
  EXPECT_THROW(ExponentSeries(2, 7), std::invalid_argument);
  EXPECT_NO_THROW(ExponentSeries(2, 7, 8));
}

TEST(EmbedProduct, Examples) {
  ExponentSeries f(2, 3), g(2, 3);
  f.set(MomentTensor(1, 2, {1, 0}));
  g.set(MomentTensor(1, 2, {0, 2}));
  f.set(MomentTensor(2, 2, {1, 0, 0, 1}));
  g.set(MomentTensor(2, 2, {1, 0, 0, 1}));
  f.set(MomentTensor(3, 2, {1, 2, 2, 3, 2, 3, 3, 4}));
  g.set(MomentTensor(3, 2, {5, 6, 6, 7, 6, 7, 7, 8}));
  f.set(MomentTensor::scalar(0.5, 2));
  g.set(MomentTensor::scalar(-2, 2));
  const auto h = embed_product(f, g);
  EXPECT_EQ(h[0][0], -1.5);
  EXPECT_EQ(h[1].entries(), (std::vector<double>{1, 0, 0, 2}));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(h[2].at({i, j}), i == j ? 1.0 : 0.0);
  EXPECT_EQ(h[3].at({0, 0, 2}), 0.0);
  EXPECT_EQ(h[3].at({0, 1, 1}), 3.0);
  EXPECT_EQ(h[3].at({2, 3, 3}), 7.0);
  EXPECT_THROW(embed_product(ExponentSeries(2, 2), ExponentSeries(2, 3)), std::invalid_argument);
  EXPECT_THROW(embed_product(ExponentSeries(4, 2), ExponentSeries(2, 2)), std::invalid_argument);
}

TEST(Transform, Examples) {
  ExponentSeries h(4, 2);
  h.set(MomentTensor(1, 4, {1, 0, 0, 0}));
  h.set(MomentTensor::scalar(0.7, 4));

  const auto same = transform(h, BeamSplitterSpec(0.0));
  EXPECT_EQ(same[1].entries(), h[1].entries());

  // q_a -> U q_a U† = t q_a - r q_b for the beam splitter whose Heisenberg
  // action is the quadrature matrix M (checked at operator level below).
  const auto out = transform(h, BeamSplitterSpec(kPi / 2));
  const double s = std::sqrt(0.5);
  EXPECT_NEAR(out[1].at({0}), s, 1e-15);
  EXPECT_NEAR(out[1].at({1}), 0, 1e-15);
  EXPECT_NEAR(out[1].at({2}), -s, 1e-15);
  EXPECT_NEAR(out[1].at({3}), 0, 1e-15);
  EXPECT_EQ(out[0][0], 0.7);
}

TEST(Transform, MatchesNaiveContraction) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int trial = 0; trial < 20; ++trial) {
    const BeamSplitterSpec bs(angle(rng));
    ExponentSeries h(4, 3);
    h.set(random_tensor(2, 4, rng));
    h.set(random_tensor(3, 4, rng));
    const auto out = transform(h, bs);
    const Eigen::Matrix4d l = lambda_matrix(bs);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double acc = 0;
        for (int k = 0; k < 4; ++k)
          for (int m = 0; m < 4; ++m) acc += l(k, i) * l(m, j) * h[2].at({k, m});
        EXPECT_NEAR(out[2].at({i, j}), acc, 1e-13);
        for (int c = 0; c < 4; ++c) {
          double acc3 = 0;
          for (int k = 0; k < 4; ++k)
            for (int m = 0; m < 4; ++m)
              for (int n = 0; n < 4; ++n) acc3 += l(k, i) * l(m, j) * l(n, c) * h[3].at({k, m, n});
          EXPECT_NEAR(out[3].at({i, j, c}), acc3, 1e-13);
        }
      }
  }
}

TEST(Transform, LambdaIsTransposeAndInverseOfM) {
  for (double theta : {0.2, 1.3, -2.0}) {
    const BeamSplitterSpec bs(theta);
    const Eigen::Matrix4d l = lambda_matrix(bs);
    EXPECT_LT((l - quadrature_transform(bs).transpose()).norm(), 1e-15);
    EXPECT_LT((l * quadrature_transform(bs) - Eigen::Matrix4d::Identity()).norm(), 1e-15);
  }
}

TEST(Transform, PreservesSymmetryAndComposes) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int trial = 0; trial < 10; ++trial) {
    const auto h = random_series(4, 6, rng);
    const double a = angle(rng), b = angle(rng);
    const auto once = transform(h, BeamSplitterSpec(a + b));
    const auto twice = transform(transform(h, BeamSplitterSpec(b)), BeamSplitterSpec(a));
    const auto back = transform(once, BeamSplitterSpec(a + b).inverse());
    for (int n = 0; n <= 6; ++n) {
      EXPECT_LT(once[n].asymmetry(), 1e-13);
      for (std::size_t k = 0; k < once[n].size(); ++k) {
        EXPECT_NEAR(once[n][k], twice[n][k], 1e-12);
        EXPECT_NEAR(back[n][k], h[n][k], 1e-12);
      }
    }
  }
}

TEST(CheckFactorizable, Examples) {
  ExponentSeries f(2, 3), g(2, 3);
  f.set(MomentTensor(2, 2, {1, 0, 0, 1}));
  g.set(MomentTensor(2, 2, {1, 0, 0, 1}));
  for (double theta : {0.3, kPi / 2, 2.9}) {
    const auto r = check_factorizable(f, g, BeamSplitterSpec(theta));
    EXPECT_TRUE(r.factorizable);
    EXPECT_LT(r.max_residual, 1e-14);
  }

  ExponentSeries a(2, 2), b(2, 2);
  a.set(MomentTensor(2, 2, {1, 0, 0, 2}));
  b.set(MomentTensor(2, 2, {2, 0, 0, 1}));
  const auto r = check_factorizable(a, b, BeamSplitterSpec(kPi / 2));
  EXPECT_FALSE(r.factorizable);
  EXPECT_NEAR(r.max_residual, 0.5, 1e-12);
  EXPECT_EQ(r.residual_by_order.size(), 3u);

  auto c = f;
  c.set(MomentTensor(3, 2, {0, 0, 0, 0, 0, 0, 0, 1e-3}));
  for (double theta : {0.3, kPi / 2, 2.9}) {
    const auto rc = check_factorizable(c, c, BeamSplitterSpec(theta));
    EXPECT_FALSE(rc.factorizable);
    EXPECT_GT(rc.residual_by_order[3], 0);
    EXPECT_LT(rc.residual_by_order[2], 1e-15);
  }

  EXPECT_THROW(check_factorizable(f, g, BeamSplitterSpec(0.0)), std::invalid_argument);
  EXPECT_THROW(check_factorizable(f, g, BeamSplitterSpec(kPi)), std::invalid_argument);
}

TEST(CheckFactorizable, RedundantMixedEntriesAgree) {
  // The (i, j+2) and (i+2, j) second-order conditions are the same condition.
  std::mt19937_64 rng(4);
  for (double theta : {0.4, 1.1, 2.7}) {
    const auto h = transform(embed_product(random_series(2, 2, rng), random_series(2, 2, rng)),
                             BeamSplitterSpec(theta));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(h[2].at({i, j + 2}), h[2].at({i + 2, j}), 1e-15);
  }
}

TEST(CheckFactorizable, DirectConditionsAgreeForOddOrders) {
  // Odd orders: the two conditions vanish together only for f = g = 0.
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    ExponentSeries f(2, 3), g(2, 3);
    f.set(random_tensor(3, 2, rng));
    if (trial % 2 == 0) g.set(random_tensor(3, 2, rng));
    const BeamSplitterSpec bs(0.5 + 0.1 * trial);
    const auto lam = check_factorizable(f, g, bs);
    const auto direct = direct_condition_residuals(f, g, bs);
    EXPECT_FALSE(lam.factorizable);
    EXPECT_GT(direct[3], 1e-6);
  }
  const ExponentSeries zero(2, 3);
  EXPECT_TRUE(check_factorizable(zero, zero, BeamSplitterSpec(1.0)).factorizable);
}

TEST(TheoremScan, NoCounterexamples) {
  const auto report = theorem_scan(4, 1000, 20240611);
  EXPECT_TRUE(report.counterexamples.empty());
  EXPECT_EQ(report.trials_by_class, (std::vector<int>{250, 250, 250, 250}));
  EXPECT_LT(report.max_pass_residual, 1e-14);
  EXPECT_GT(report.min_fail_residual, 1e-6);
}

TEST(TheoremScan, EdgeCasesAndDeterminism) {
  const auto empty = theorem_scan(4, 0, 1);
  EXPECT_TRUE(empty.counterexamples.empty());
  EXPECT_EQ(empty.trials_by_class, (std::vector<int>{0, 0, 0, 0}));
  EXPECT_THROW(theorem_scan(2, 10, 1), std::invalid_argument);

  const auto a = theorem_scan(5, 200, 77);
  const auto b = theorem_scan(5, 200, 77);
  ScanOptions parallel;
  parallel.workers = 4;
  const auto c = theorem_scan(5, 200, 77, parallel);
  EXPECT_TRUE(a == b);
  EXPECT_TRUE(a == c);
  EXPECT_FALSE(a == theorem_scan(5, 200, 78));
}

TEST(TheoremScan, FlagsAWrongVerdict) {
  // A tolerance far above the residual scale turns every class into a pass,
  // which the scan must report.
  ScanOptions loose;
  loose.tolerance = 1e3;
  const auto report = theorem_scan(3, 8, 5, loose);
  EXPECT_EQ(report.counterexamples.size(), 6u * 3u);
}

TEST(SeriesJson, RoundTripAndErrors) {
  const auto s = parse_series(
      R"({"dim":2,"tensors":{"0":0.5,"1":[1,2],"2":[[1,0.5],[0.5,3]],"3":[[[0,0],[0,0]],[[0,0],[0,1]]]}})");
  EXPECT_EQ(s.max_order(), 3);
  EXPECT_EQ(s[2].at({0, 1}), 0.5);
  EXPECT_EQ(s[3].at({1, 1, 1}), 1.0);
  const auto again = series_from_json(to_json(s));
  for (int n = 0; n <= 3; ++n) EXPECT_EQ(again[n].entries(), s[n].entries());

  const auto sparse = parse_series(R"({"dim":2,"tensors":{"2":[[1,0],[2,1]]}})");
  EXPECT_EQ(sparse[0][0], 0.0);
  EXPECT_EQ(sparse[2].at({1, 0}), 1.0);

  EXPECT_THROW(parse_series("{"), SeriesFormatError);
  EXPECT_THROW(parse_series(R"({"dim":3,"tensors":{}})"), SeriesFormatError);
  EXPECT_THROW(parse_series(R"({"dim":2,"tensors":{"1":[1]}})"), SeriesFormatError);
  EXPECT_THROW(parse_series(R"({"dim":2,"tensors":{"x":1}})"), SeriesFormatError);
  EXPECT_THROW(parse_series(R"({"dim":2,"tensors":{"7":1}})"), SeriesFormatError);
  EXPECT_THROW(parse_series(R"({"dim":2,"tensors":{"1":[1,"a"]}})"), SeriesFormatError);
}

TEST(SeriesOperator, MatchesFockQuadratures) {
  // q_a^2 + p_b from the series must equal the dense operators on the window.
  const int n = 8;
  ExponentSeries h(4, 2);
  h.set(MomentTensor(1, 4, {0, 0, 0, 1}));
  MomentTensor sq(2, 4);
  sq.set_symmetric({0, 0}, 1.0);
  sq.set_symmetric({1, 2}, 0.25);
  h.set(sq);
  const ComplexMatrix op = series_operator(h, n);

  const int big = n + 3;
  const ComplexMatrix qa = embed(mode_operator(OperatorKind::position, big).data, Mode::a);
  const ComplexMatrix pa = embed(mode_operator(OperatorKind::momentum, big).data, Mode::a);
  const ComplexMatrix qb = embed(mode_operator(OperatorKind::position, big).data, Mode::b);
  const ComplexMatrix pb = embed(mode_operator(OperatorKind::momentum, big).data, Mode::b);
  const ComplexMatrix dense = qa * qa + 0.25 * (pa * qb + qb * pa) + pb;
  const TotalNumberBasis window(n);
  double worst = 0;
  for (Eigen::Index r = 0; r < window.size(); ++r)
    for (Eigen::Index c = 0; c < window.size(); ++c) {
      const auto [ra, rb] = window.state(r);
      const auto [ca, cb] = window.state(c);
      worst = std::max(worst, std::abs(op(r, c) - dense(ra * big + rb, ca * big + cb)));
    }
  EXPECT_LT(worst, 1e-13);
  EXPECT_LT((op - op.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ExponentConjugation, Examples) {
  const ExponentSeries zero(2, 3);
  const auto dz = exponent_conjugation_check(zero, zero, BeamSplitterSpec(kPi / 3), 10);
  EXPECT_LT(dz.max(), 1e-14);

  ExponentSeries f(2, 1), g(2, 1);
  f.set(MomentTensor(1, 2, {0.2, -0.1}));
  g.set(MomentTensor(1, 2, {-0.05, 0.1}));
  for (double theta : {0.4, kPi / 2, 2.5}) {
    EXPECT_LT(exponent_conjugation_check(f, g, BeamSplitterSpec(theta), 20).max(), 1e-8);
  }

  ExponentSeries big(2, 2);
  big.set(MomentTensor(2, 2, {1, 0, 0, 1}));
  EXPECT_THROW(exponent_conjugation_check(big, ExponentSeries(2, 2), BeamSplitterSpec(1.0), 5),
               std::domain_error);
}

TEST(ExponentConjugation, RandomCappedSeries) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    auto f = random_series(2, 4, rng), g = random_series(2, 4, rng);
    const double mass = f.l1_mass() + g.l1_mass();
    f = scaled(f, 0.45 / mass);
    g = scaled(g, 0.45 / mass);
    const auto dev = exponent_conjugation_check(f, g, BeamSplitterSpec(kPi / 3), 25);
    EXPECT_LT(dev.max(), 1e-6) << "exponent " << dev.exponent << " density " << dev.density;
  }
}

TEST(ExponentConjugation, DetectsTheTransposedConvention) {
  // Contracting with Lambda instead of Lambda^T corresponds to the opposite
  // angle and must be caught by the operator check.
  ExponentSeries f(2, 2), g(2, 2);
  f.set(MomentTensor(1, 2, {0.2, 0.0}));
  f.set(MomentTensor(2, 2, {-0.05, 0.01, 0.01, -0.02}));
  g.set(MomentTensor(2, 2, {-0.03, 0.0, 0.0, -0.04}));
  const BeamSplitterSpec bs(kPi / 3);
  const auto h = embed_product(f, g);
  const ComplexMatrix a = series_operator(h, 12);
  const RealMatrix u = window_unitary(bs, 12);
  const ComplexMatrix right = series_operator(transform(h, bs), 12);
  const ComplexMatrix wrong = series_operator(transform(h, bs.inverse()), 12);
  const ComplexMatrix conj = u * a * u.transpose();
  EXPECT_LT((conj - right).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT((conj - wrong).cwiseAbs().maxCoeff(), 1e-2);
}

TEST(ExponentSeriesOfGaussian, ReproducesTheFockState) {
  // exp of the series operator of a one-mode Gaussian (padded with the
  // vacuum-like b factor) must match gaussian_to_fock on mode a.
  const GaussianParams gp{{0.05, 0.03}, 0.8, {0.3, -0.2}};
  const auto fa = exponent_series(gp);
  const auto fb = exponent_series(GaussianParams::thermal(0.3));
  const int n = 30;
  const ComplexMatrix a = series_operator(embed_product(fa, fb), n);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a);
  const ComplexMatrix rho =
      es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
      es.eigenvectors().adjoint();
  const auto expected = tensor_product(gaussian_to_fock(gp, n).state,
                                       make_state("thermal:0.3", n).state);
  const TotalNumberBasis window(n);
  double worst = 0;
  for (Eigen::Index r = 0; r < window.size(); ++r) {
    const auto [ra, rb] = window.state(r);
    if (ra + rb > 10) continue;
    for (Eigen::Index c = 0; c < window.size(); ++c) {
      const auto [ca, cb] = window.state(c);
      if (ca + cb > 10) continue;
      worst = std::max(worst, std::abs(rho(r, c) - expected.data()(ra * n + rb, ca * n + cb)));
    }
  }
  EXPECT_LT(worst, 1e-6);
}
