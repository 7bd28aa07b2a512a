#include "interfere/fock.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "interfere/state.hpp"
#include "test_util.hpp"

using namespace interfere;
using interfere::testing::basis_state;
using interfere::testing::max_abs_diff;
using interfere::testing::taylor_exp;

namespace {

constexpr double kPi = std::numbers::pi;
const double kLn2 = std::log(2.0);

DensityMatrix state(const char* descriptor, int cutoff) {
  return make_state(descriptor, cutoff).state;
}

DensityMatrix pure(int cutoff, const ComplexVector& psi) {
  return DensityMatrix::from_pure(2, cutoff, psi);
}

// Block of a†b − ab† on the fixed-total-photon subspace, built from the
// ladder rules alone. Basis: |total,0>, |total-1,1>, ..., |0,total>.
ComplexMatrix generator_block(int total) {
  const int d = total + 1;
  ComplexMatrix g = ComplexMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const int na = total - k, nb = k;
    if (nb > 0) g(k - 1, k) += std::sqrt((na + 1.0) * nb);  // a†b
    if (na > 0) g(k + 1, k) -= std::sqrt(na * (nb + 1.0));  // ab†
  }
  return g;
}

}  // namespace

TEST(MakeState, Vacuum) {
  const auto rho = state("vacuum", 10);
  EXPECT_DOUBLE_EQ(rho(0, 0).real(), 1.0);
  EXPECT_DOUBLE_EQ(rho.data().cwiseAbs().sum(), 1.0);
}

TEST(MakeState, ThermalGroundPopulation) {
  const auto rho = state("thermal:1.0", 30);
  EXPECT_NEAR(rho(0, 0).real(), 0.5, 1e-9);

  // Independent route: integrate the thermal P-function against |<0|alpha>|^2.
  const double nbar = 1.0;
  const int steps = 200000;
  const double rmax = 12.0, h = rmax / steps;
  double acc = 0;
  for (int k = 0; k <= steps; ++k) {
    const double r = k * h;
    const double f = 2 * kPi * r * std::exp(-r * r / nbar) * std::exp(-r * r) / (kPi * nbar);
    acc += (k == 0 || k == steps) ? 0.5 * f : f;
  }
  EXPECT_NEAR(rho(0, 0).real(), acc * h, 1e-8);
}

TEST(MakeState, CoherentVacuumOverlap) {
  const auto rho = state("coherent:1.0", 30);
  EXPECT_NEAR(rho(0, 0).real(), std::exp(-1.0), 1e-12);
  const auto tilted = state("coherent:0.3,-0.4", 30);
  EXPECT_NEAR(tilted(0, 0).real(), std::exp(-0.25), 1e-12);
}

TEST(MakeState, ErrorsAndTailDiagnostics) {
  EXPECT_THROW(make_state("fock:10", 10), DescriptorError);
  EXPECT_THROW(make_state("bogus", 10), DescriptorError);
  EXPECT_THROW(make_state("thermal:-1", 10), DescriptorError);
  EXPECT_THROW(make_state("coherent:", 10), DescriptorError);
  EXPECT_THROW(make_state("coherent:1,2,3", 10), DescriptorError);
  EXPECT_THROW(make_state("squeezed:0.3", 10), DescriptorError);
  EXPECT_THROW(make_state("gaussian:0,0,0.2,0,0", 10), DescriptorError);
  EXPECT_THROW(make_state("vacuum", 1), std::invalid_argument);

  const auto hot = make_state("thermal:2.0", 30);
  EXPECT_NEAR(hot.tail_mass, std::pow(2.0 / 3.0, 30), 1e-15);
  EXPECT_TRUE(hot.leakage_warning());
  EXPECT_NEAR(hot.state.trace(), 1.0, 1e-12);
  EXPECT_FALSE(make_state("thermal:1.0", 30).leakage_warning());
  EXPECT_FALSE(make_state("coherent:1.0", 30).leakage_warning());
}

TEST(MakeState, EveryKindIsAValidState) {
  for (const char* d : {"vacuum", "fock:3", "coherent:0.7,0.2", "thermal:0.8", "squeezed:0.3,0.5",
                        "gaussian:0.05,0.02,0.9,0.3,-0.2"}) {
    SCOPED_TRACE(d);
    EXPECT_NO_THROW(state(d, 30).validate());
  }
}

TEST(ModeOperator, MatrixConventions) {
  const int n = 6;
  const auto a = mode_operator(OperatorKind::annihilation, n).data;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      EXPECT_EQ(a(i, j), cplx(j == i + 1 ? std::sqrt(double(j)) : 0.0, 0.0));
  const auto q = mode_operator(OperatorKind::position, n).data;
  const auto p = mode_operator(OperatorKind::momentum, n).data;
  const ComplexMatrix ad = a.adjoint();
  EXPECT_LT(max_abs_diff(q, (ad + a) / std::sqrt(2.0)), 1e-15);
  EXPECT_LT(max_abs_diff(p, cplx(0, 1) * (ad - a) / std::sqrt(2.0)), 1e-15);
  const auto num = mode_operator(OperatorKind::number, n).data;
  for (int i = 0; i < n; ++i) EXPECT_NEAR(num(i, i).real(), i, 1e-14);
}

TEST(TensorProduct, Examples) {
  const auto vv = tensor_product(state("vacuum", 5), state("vacuum", 5));
  EXPECT_EQ(vv(0, 0), cplx(1, 0));
  EXPECT_DOUBLE_EQ(vv.data().cwiseAbs().sum(), 1.0);

  const auto f1 = tensor_product(state("fock:1", 5), state("vacuum", 5));
  EXPECT_LT(max_abs_diff(f1.data(), pure(5, basis_state(5, 1, 0)).data()), 1e-15);

  const int n = 12;
  const auto th = state("thermal:1", n);
  const auto tt = tensor_product(th, th);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      EXPECT_NEAR(tt(tt.index(m, k), tt.index(m, k)).real(), th(m, m).real() * th(k, k).real(),
                  1e-15);
  EXPECT_LT((tt.data() - ComplexMatrix(tt.data().diagonal().asDiagonal())).cwiseAbs().maxCoeff(),
            1e-15);

  EXPECT_THROW(tensor_product(state("vacuum", 5), state("vacuum", 6)), std::invalid_argument);
  EXPECT_THROW(tensor_product(vv, state("vacuum", 5)), std::invalid_argument);
}

TEST(BeamSplitter, ZeroAngleIsIdentity) {
  std::mt19937_64 rng(7);
  const auto rho = interfere::testing::random_two_mode_state(6, 6, rng);
  const auto out = apply_beamsplitter(rho, BeamSplitterSpec(0.0));
  EXPECT_LT(max_abs_diff(out.data(), rho.data()), 1e-15);
  // also through the dense exponential path
  EXPECT_LT(max_abs_diff(beamsplitter_unitary(6, BeamSplitterSpec(0.0)).cast<cplx>(),
                         ComplexMatrix::Identity(36, 36)),
            1e-15);
}

TEST(BeamSplitter, OnePhotonMatchesBlockExponential) {
  const int n = 8;
  const double theta = kPi / 2;
  const ComplexMatrix u1 = taylor_exp(generator_block(1) * (theta / 2));
  // input |1,0> is basis vector 0 of the block
  ComplexVector expected = ComplexVector::Zero(n * n);
  expected(n * 1 + 0) = u1(0, 0);
  expected(n * 0 + 1) = u1(1, 0);

  const auto out = apply_beamsplitter(pure(n, basis_state(n, 1, 0)), BeamSplitterSpec(theta));
  EXPECT_LT(max_abs_diff(out.data(), pure(n, expected).data()), 1e-12);
  // (|1,0> - |0,1>)/sqrt2 in this phase convention
  EXPECT_NEAR(out(n, n).real(), 0.5, 1e-12);
  EXPECT_NEAR(out(1, 1).real(), 0.5, 1e-12);
  EXPECT_NEAR(out(n, 1).real(), -0.5, 1e-12);
}

TEST(BeamSplitter, HongOuMandel) {
  const int n = 8;
  const double theta = kPi / 2;
  const ComplexMatrix u2 = taylor_exp(generator_block(2) * (theta / 2));
  ComplexVector expected = ComplexVector::Zero(n * n);
  const int idx[3] = {2 * n + 0, 1 * n + 1, 0 * n + 2};
  for (int k = 0; k < 3; ++k) expected(idx[k]) = u2(k, 1);

  const auto out = apply_beamsplitter(pure(n, basis_state(n, 1, 1)), BeamSplitterSpec(theta));
  EXPECT_LT(max_abs_diff(out.data(), pure(n, expected).data()), 1e-12);
  EXPECT_LT(std::abs(out(out.index(1, 1), out.index(1, 1))), 1e-10);
  EXPECT_NEAR(out(out.index(2, 0), out.index(2, 0)).real(), 0.5, 1e-12);
  EXPECT_NEAR(out(out.index(0, 2), out.index(0, 2)).real(), 0.5, 1e-12);
  EXPECT_GT(mutual_information(out), 0.1);
}

TEST(BeamSplitter, RejectsSingleMode) {
  EXPECT_THROW(apply_beamsplitter(state("vacuum", 4), BeamSplitterSpec(1.0)),
               std::invalid_argument);
}

TEST(PartialTrace, Examples) {
  const auto a = state("thermal:0.7", 10);
  const auto b = state("coherent:0.5,0.5", 10);
  const auto ab = tensor_product(a, b);
  EXPECT_LT(max_abs_diff(partial_trace(ab, Mode::a).data(), a.data()), 1e-12);
  EXPECT_LT(max_abs_diff(partial_trace(ab, Mode::b).data(), b.data()), 1e-12);

  const int n = 6;
  const auto bell = apply_beamsplitter(pure(n, basis_state(n, 1, 0)), BeamSplitterSpec(kPi / 2));
  const auto ra = partial_trace(bell, Mode::a);
  EXPECT_NEAR(ra(0, 0).real(), 0.5, 1e-12);
  EXPECT_NEAR(ra(1, 1).real(), 0.5, 1e-12);
  EXPECT_LT(std::abs(ra(0, 1)), 1e-12);
  EXPECT_NEAR(ra.trace(), bell.trace(), 1e-12);

  const auto rb = partial_trace(pure(n, basis_state(n, 1, 1)), Mode::b);
  EXPECT_NEAR(rb(1, 1).real(), 1.0, 1e-15);
  EXPECT_THROW(partial_trace(state("vacuum", 4), Mode::a), std::invalid_argument);
}

TEST(ProjectMode, Examples) {
  const int n = 6;
  const auto p0 = project_mode(pure(n, basis_state(n, 1, 0)), Mode::b, 0);
  EXPECT_NEAR(p0.probability, 1.0, 1e-15);
  EXPECT_NEAR(p0.state(1, 1).real(), 1.0, 1e-15);

  const auto bell = apply_beamsplitter(pure(n, basis_state(n, 1, 0)), BeamSplitterSpec(kPi / 2));
  const auto p1 = project_mode(bell, Mode::b, 1);
  EXPECT_NEAR(p1.probability, 0.5, 1e-12);
  EXPECT_NEAR(p1.state(0, 0).real(), 1.0, 1e-12);

  EXPECT_THROW(project_mode(pure(n, basis_state(n, 1, 0)), Mode::b, 3), std::domain_error);
  EXPECT_THROW(project_mode(bell, Mode::b, n), std::invalid_argument);
}

TEST(ProjectMode, EqualThermalsConditioningIsInert) {
  const int n = 30;
  const auto th = state("thermal:1", n);
  const auto out = apply_beamsplitter(tensor_product(th, th), BeamSplitterSpec(kPi / 2));
  const auto proj = project_mode(out, Mode::b, 1);
  EXPECT_LT(max_abs_diff(proj.state.data(), partial_trace(out, Mode::a).data()), 1e-6);
  EXPECT_LT(max_abs_diff(proj.state.data(), th.data()), 1e-6);
}

TEST(Entropy, Examples) {
  EXPECT_NEAR(von_neumann_entropy(state("coherent:0.8,0.1", 20)), 0.0, 1e-9);
  ComplexMatrix half = ComplexMatrix::Zero(4, 4);
  half(0, 0) = half(1, 1) = 0.5;
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix(1, 4, half)), kLn2, 1e-12);
  EXPECT_NEAR(von_neumann_entropy(state("thermal:1", 30)), 2 * kLn2, 1e-6);

  ComplexMatrix bad = ComplexMatrix::Zero(2, 2);
  bad(0, 0) = 1.1;
  bad(1, 1) = -0.1;
  EXPECT_THROW(von_neumann_entropy(DensityMatrix(1, 2, bad)), std::domain_error);
  // noise-level negatives are clamped
  bad(0, 0) = 1 + 1e-8;
  bad(1, 1) = -1e-8;
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix(1, 2, bad)), 0.0, 1e-7);
}

TEST(MutualInformation, Examples) {
  const int n = 8;
  const auto product = tensor_product(state("thermal:0.4", n), state("coherent:0.3", n));
  EXPECT_NEAR(mutual_information(product), 0.0, 1e-8);

  const auto bell = apply_beamsplitter(pure(n, basis_state(n, 1, 0)), BeamSplitterSpec(kPi / 2));
  EXPECT_NEAR(mutual_information(bell), 2 * kLn2, 1e-10);

  const auto mixed = apply_beamsplitter(
      tensor_product(state("thermal:0.5", 30), state("thermal:2.0", 30)), BeamSplitterSpec(kPi / 2));
  EXPECT_GT(mutual_information(mixed), 0.01);
  EXPECT_THROW(mutual_information(state("vacuum", 4)), std::invalid_argument);
}

TEST(DistanceToProduct, Examples) {
  const int n = 10;
  EXPECT_NEAR(distance_to_product(tensor_product(state("thermal:0.4", n), state("fock:2", n))), 0.0,
              1e-9);

  const auto coh = apply_beamsplitter(
      tensor_product(state("coherent:1", 30), state("vacuum", 30)), BeamSplitterSpec(kPi / 2));
  EXPECT_LT(distance_to_product(coh), 1e-8);

  // Bell-like (|1,0> - |0,1>)/sqrt2 against the maximally mixed product of
  // its marginals: eigenvalues of rho - I/4 are {3/4, -1/4, -1/4, -1/4}.
  const auto bell = apply_beamsplitter(pure(n, basis_state(n, 1, 0)), BeamSplitterSpec(kPi / 2));
  Eigen::Matrix4cd diff = Eigen::Matrix4cd::Zero();
  const int idx[4] = {0, 1, n, n + 1};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) diff(i, j) = bell(idx[i], idx[j]) - (i == j ? 0.25 : 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(diff);
  const double oracle = 0.5 * es.eigenvalues().cwiseAbs().sum();
  EXPECT_NEAR(oracle, 0.75, 1e-12);
  EXPECT_NEAR(distance_to_product(bell), oracle, 1e-10);
}

// ---- properties ----------------------------------------------------------

TEST(BeamSplitterProperties, UnitarityCompositionInversion) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  const int n = 6;
  for (int trial = 0; trial < 40; ++trial) {
    SCOPED_TRACE(trial);
    const auto rho = interfere::testing::random_two_mode_state(n, n, rng);
    const double t1 = angle(rng), t2 = angle(rng);
    const auto out = apply_beamsplitter(rho, BeamSplitterSpec(t1));
    EXPECT_NEAR(out.trace(), rho.trace(), 1e-10);
    EXPECT_LT((out.eigenvalues() - rho.eigenvalues()).cwiseAbs().maxCoeff(), 1e-8);

    const auto two_step = apply_beamsplitter(out, BeamSplitterSpec(t2));
    const auto one_step = apply_beamsplitter(rho, BeamSplitterSpec(t1 + t2));
    EXPECT_LT(max_abs_diff(two_step.data(), one_step.data()), 1e-9);

    const auto back = apply_beamsplitter(out, BeamSplitterSpec(t1).inverse());
    EXPECT_LT(max_abs_diff(back.data(), rho.data()), 1e-10);
  }
}

TEST(BeamSplitterProperties, FirstMomentLaw) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_real_distribution<double> angle(0.05, kPi - 0.05);
  const int n = 14;
  const ComplexMatrix a = embed(annihilation_matrix(n), Mode::a);
  const ComplexMatrix b = embed(annihilation_matrix(n), Mode::b);
  for (int trial = 0; trial < 20; ++trial) {
    const cplx alpha(u(rng), u(rng)), beta(u(rng), u(rng));
    const BeamSplitterSpec bs(angle(rng));
    StateDescriptor da, db;
    da.kind = db.kind = StateDescriptor::Kind::coherent;
    da.alpha = alpha;
    db.alpha = beta;
    const auto in = tensor_product(make_state(da, n).state, make_state(db, n).state);
    const auto out = apply_beamsplitter(in, bs);
    EXPECT_LT(std::abs(expectation(out, a) - (bs.t() * alpha + bs.r() * beta)), 1e-8);
    EXPECT_LT(std::abs(expectation(out, b) - (bs.t() * beta - bs.r() * alpha)), 1e-8);
  }
}

TEST(BeamSplitterProperties, MutualInformationAndTraceDistanceVanishTogether) {
  const int n = 20;
  struct Case {
    const char* a;
    const char* b;
  };
  for (const Case& c : {Case{"thermal:0.6", "thermal:0.6"}, Case{"coherent:0.5", "vacuum"},
                        Case{"coherent:0.3,0.2", "coherent:-0.4"}, Case{"fock:1", "vacuum"},
                        Case{"thermal:0.3", "thermal:0.9"}, Case{"squeezed:0.2,0", "vacuum"}}) {
    SCOPED_TRACE(std::string(c.a) + " x " + c.b);
    const auto out =
        apply_beamsplitter(tensor_product(state(c.a, n), state(c.b, n)), BeamSplitterSpec(1.1));
    const double mi = mutual_information(out);
    const double td = distance_to_product(out);
    EXPECT_EQ(mi < 1e-6, td < 1e-5);
  }
}
