#pragma once

// Single-mode Gaussian states in the (mu, tau, z0) parametrization of the
// Wigner function
//
//   W1(z) = exp(-[mu (z-z0)^2 + mu* (z*-z0*)^2 + tau |z-z0|^2] / (tau^2 - 4|mu|^2))
//           / (pi sqrt(tau^2 - 4|mu|^2)),        z = (q + i p)/sqrt(2),
//
// and the mean/covariance description of one or two modes. Quadratures are
// q = (a† + a)/√2 and p = i(a† − a)/√2, so the vacuum variance is 1/2.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "interfere/beam_splitter.hpp"
#include "interfere/fock.hpp"
#include "interfere/moment_tensor.hpp"

namespace interfere {

struct GaussianParams {
  cplx mu{0.0, 0.0};
  double tau = 0.5;
  cplx z0{0.0, 0.0};

  double denominator() const { return tau * tau - 4.0 * std::norm(mu); }

  /// sqrt(tau^2 - 4|mu|^2) >= 1/2, the positivity condition of the state.
  bool physical(double tol = 1e-12) const {
    const double d = denominator();
    return d > 0 && std::sqrt(d) >= 0.5 - tol;
  }

  /// Symplectic eigenvalue; 1/2 for pure states.
  double symplectic_eigenvalue() const { return std::sqrt(denominator()); }

  static GaussianParams vacuum() { return {}; }
  static GaussianParams thermal(double nbar) { return {{0, 0}, nbar + 0.5, {0, 0}}; }
  static GaussianParams coherent(cplx alpha) { return {{0, 0}, 0.5, alpha}; }

  /// S(zeta)|0> displaced by z0, with S(zeta) = exp[(zeta* a^2 - zeta a†^2)/2]
  /// and zeta = amplitude * e^{i phase}.
  static GaussianParams squeezed(double amplitude, double phase, cplx z0 = {0, 0}) {
    return {std::polar(std::sinh(2 * amplitude) / 4, -phase), std::cosh(2 * amplitude) / 2, z0};
  }

  bool operator==(const GaussianParams&) const = default;
};

inline void require_physical(const GaussianParams& g) {
  if (!g.physical()) {
    throw std::domain_error("unphysical Gaussian parameters: sqrt(tau^2 - 4|mu|^2) = " +
                            std::to_string(std::sqrt(std::max(0.0, g.denominator()))) +
                            " < 1/2");
  }
}

/// Means (<q>, <p>) per mode and symmetric-ordered central second moments.
struct CovarianceState {
  RealVector mean;
  RealMatrix cov;

  int modes() const { return int(mean.size() / 2); }

  void validate(double tol = 1e-9) const {
    if (mean.size() != 2 && mean.size() != 4) throw std::invalid_argument("one or two modes only");
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
      throw std::invalid_argument("covariance shape does not match the mean");
    }
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw std::domain_error("covariance matrix is not symmetric");
    }
    if (uncertainty_margin() < -tol) {
      throw std::domain_error("covariance violates the uncertainty relation");
    }
  }

  /// Smallest eigenvalue of cov + (i/2) Omega; negative means unphysical.
  double uncertainty_margin() const;
};

inline RealMatrix symplectic_form(int modes) {
  RealMatrix omega = RealMatrix::Zero(2 * modes, 2 * modes);
  for (int k = 0; k < modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1;
    omega(2 * k + 1, 2 * k) = -1;
  }
  return omega;
}

inline double CovarianceState::uncertainty_margin() const {
  ComplexMatrix m = cov.cast<cplx>() + cplx(0, 0.5) * symplectic_form(modes()).cast<cplx>();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

/// Heisenberg action of the beam splitter on (q_a, p_a, q_b, p_b):
/// a -> t a + r b, b -> t b - r a.
struct QuadratureTransform {
  Eigen::Matrix4d matrix;

  explicit QuadratureTransform(const BeamSplitterSpec& bs) {
    const double t = bs.t(), r = bs.r();
    matrix << t, 0, r, 0,  //
        0, t, 0, r,        //
        -r, 0, t, 0,       //
        0, -r, 0, t;
  }
};

inline Eigen::Matrix4d quadrature_transform(const BeamSplitterSpec& bs) {
  return QuadratureTransform(bs).matrix;
}

/// <q> = sqrt2 Re z0, <p> = sqrt2 Im z0, and from <a^2> - <a>^2 = -2 mu*,
/// <a†a> - |<a>|^2 = tau - 1/2:
///   Var q = tau - 2 Re mu,  Var p = tau + 2 Re mu,  Cov_s(q, p) = 2 Im mu.
inline CovarianceState gaussian_to_moments(const GaussianParams& g) {
  require_physical(g);
  CovarianceState s;
  s.mean = RealVector(2);
  s.mean << std::sqrt(2.0) * g.z0.real(), std::sqrt(2.0) * g.z0.imag();
  s.cov = RealMatrix(2, 2);
  s.cov << g.tau - 2 * g.mu.real(), 2 * g.mu.imag(),  //
      2 * g.mu.imag(), g.tau + 2 * g.mu.real();
  return s;
}

/// Inverse of gaussian_to_moments for a single mode.
inline GaussianParams moments_to_gaussian(const CovarianceState& s) {
  if (s.modes() != 1) throw std::invalid_argument("moments_to_gaussian expects one mode");
  GaussianParams g;
  g.tau = 0.5 * (s.cov(0, 0) + s.cov(1, 1));
  g.mu = cplx(0.25 * (s.cov(1, 1) - s.cov(0, 0)), 0.5 * s.cov(0, 1));
  g.z0 = cplx(s.mean(0), s.mean(1)) / std::sqrt(2.0);
  return g;
}

inline CovarianceState product_state(const CovarianceState& a, const CovarianceState& b) {
  if (a.modes() != 1 || b.modes() != 1) throw std::invalid_argument("product of single modes only");
  CovarianceState s;
  s.mean = RealVector(4);
  s.mean << a.mean, b.mean;
  s.cov = RealMatrix::Zero(4, 4);
  s.cov.topLeftCorner(2, 2) = a.cov;
  s.cov.bottomRightCorner(2, 2) = b.cov;
  return s;
}

inline CovarianceState marginal(const CovarianceState& s, Mode mode) {
  if (s.modes() != 2) throw std::invalid_argument("marginal expects two modes");
  const int o = mode == Mode::a ? 0 : 2;
  return {s.mean.segment(o, 2), s.cov.block(o, o, 2, 2)};
}

inline CovarianceState bs_transform_covariance(const CovarianceState& s,
                                               const BeamSplitterSpec& bs) {
  if (s.modes() != 2) throw std::invalid_argument("beam splitter acts on two-mode moments");
  const Eigen::Matrix4d m = quadrature_transform(bs);
  CovarianceState out{m * s.mean, m * s.cov * m.transpose()};
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

/// Frobenius norm of the a-b cross block of the covariance.
inline double covariance_cross_norm(const CovarianceState& s) {
  if (s.modes() != 2) throw std::invalid_argument("cross norm needs two modes");
  return s.cov.block(0, 2, 2, 2).norm();
}

/// Moduli of the eigenvalues of i*Omega*cov, each listed once.
inline RealVector symplectic_eigenvalues(const RealMatrix& cov) {
  const int modes = int(cov.rows() / 2);
  if (modes == 1) {
    RealVector v(1);
    v(0) = std::sqrt(std::max(0.0, cov.determinant()));
    return v;
  }
  // Two modes: nu_pm^2 = (Delta +- sqrt(Delta^2 - 4 det V)) / 2.
  const RealMatrix a = cov.topLeftCorner(2, 2);
  const RealMatrix b = cov.bottomRightCorner(2, 2);
  const RealMatrix c = cov.topRightCorner(2, 2);
  const double delta = a.determinant() + b.determinant() + 2 * c.determinant();
  const double det = cov.determinant();
  const double disc = std::sqrt(std::max(0.0, delta * delta - 4 * det));
  RealVector v(2);
  v << std::sqrt(std::max(0.0, 0.5 * (delta + disc))), std::sqrt(std::max(0.0, 0.5 * (delta - disc)));
  return v;
}

inline double gaussian_entropy(const RealMatrix& cov) {
  double s = 0;
  for (double nu : symplectic_eigenvalues(cov)) {
    const double hi = nu + 0.5, lo = nu - 0.5;
    if (hi > 0) s += hi * std::log(hi);
    if (lo > 1e-300) s -= lo * std::log(lo);
  }
  return s;
}

inline double gaussian_mutual_information(const CovarianceState& s) {
  if (s.modes() != 2) throw std::invalid_argument("mutual information needs two modes");
  return gaussian_entropy(s.cov.topLeftCorner(2, 2)) + gaussian_entropy(s.cov.bottomRightCorner(2, 2)) -
         gaussian_entropy(s.cov);
}

/// First and second quadrature moments of a Fock-space state. The state is
/// padded by two levels so that q^2 and p^2 are exact on its support.
inline CovarianceState fock_moments(const DensityMatrix& rho) {
  const int n = rho.cutoff() + 2;
  const DensityMatrix big = pad(rho, n);
  const ComplexMatrix q = mode_operator(OperatorKind::position, n).data;
  const ComplexMatrix p = mode_operator(OperatorKind::momentum, n).data;
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  std::vector<ComplexMatrix> single{q, p};
  const int dim = 2 * rho.modes();

  auto op = [&](int i) -> ComplexMatrix {
    if (rho.modes() == 1) return single[std::size_t(i)];
    return i < 2 ? kron(single[std::size_t(i)], id) : kron(id, single[std::size_t(i - 2)]);
  };
  auto product = [&](int i, int j) -> ComplexMatrix {
    if (rho.modes() == 1) return single[std::size_t(i)] * single[std::size_t(j)];
    const bool ia = i < 2, ja = j < 2;
    const ComplexMatrix& x = single[std::size_t(i % 2)];
    const ComplexMatrix& y = single[std::size_t(j % 2)];
    if (ia && ja) return kron(ComplexMatrix(x * y), id);
    if (!ia && !ja) return kron(id, ComplexMatrix(x * y));
    return ia ? kron(x, y) : kron(y, x);
  };

  CovarianceState s{RealVector(dim), RealMatrix(dim, dim)};
  for (int i = 0; i < dim; ++i) s.mean(i) = expectation(big, op(i)).real();
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      const double sym = expectation(big, product(i, j)).real();  // Re<xi_i xi_j> = <{xi_i xi_j}_s>
      s.cov(i, j) = s.cov(j, i) = sym - s.mean(i) * s.mean(j);
    }
  }
  return s;
}

/// Squeezing amplitude, squeezing phase and thermal occupation of the
/// displaced squeezed thermal state D(z0) S(zeta) rho_th S† D† equal to g.
struct SqueezedThermalForm {
  double thermal_occupation = 0;
  double squeeze_amplitude = 0;
  double squeeze_phase = 0;
};

inline SqueezedThermalForm squeezed_thermal_form(const GaussianParams& g) {
  require_physical(g);
  const double nu = g.symplectic_eigenvalue();
  SqueezedThermalForm form;
  form.thermal_occupation = nu - 0.5 < 1e-14 ? 0.0 : nu - 0.5;
  // tau = nu cosh 2r, |mu| = nu sinh(2r) / 2, mu = |mu| e^{-i phase}
  form.squeeze_amplitude = 0.5 * std::atanh(std::min(1.0, 2 * std::abs(g.mu) / g.tau));
  form.squeeze_phase = std::abs(g.mu) > 0 ? -std::arg(g.mu) : 0.0;
  return form;
}

/// Builds the Gaussian state in Fock space from its moments: a thermal
/// core, then squeezing and displacement matrix exponentials, all in a
/// padded working space before truncation to `cutoff` and renormalization.
inline PreparedState gaussian_to_fock(const GaussianParams& g, int cutoff) {
  if (cutoff < 2) throw std::invalid_argument("cutoff must be at least 2");
  const SqueezedThermalForm form = squeezed_thermal_form(g);
  const int w = std::max(2 * cutoff, cutoff + 40);

  const double nth = form.thermal_occupation;
  ComplexMatrix rho = ComplexMatrix::Zero(w, w);
  for (int n = 0; n < w; ++n) {
    rho(n, n) = nth == 0.0 ? (n == 0 ? 1.0 : 0.0)
                           : std::exp(n * std::log(nth / (1 + nth))) / (1 + nth);
  }

  const ComplexMatrix a = annihilation_matrix(w);
  const ComplexMatrix ad = a.adjoint();
  if (form.squeeze_amplitude > 0) {
    const cplx zeta = std::polar(form.squeeze_amplitude, form.squeeze_phase);
    const ComplexMatrix gen = 0.5 * (std::conj(zeta) * a * a - zeta * ad * ad);
    const ComplexMatrix s = gen.exp();
    rho = s * rho * s.adjoint();
  }
  if (g.z0 != cplx(0, 0)) {
    const ComplexMatrix gen = g.z0 * ad - std::conj(g.z0) * a;
    const ComplexMatrix d = gen.exp();
    rho = d * rho * d.adjoint();
  }

  ComplexMatrix block = rho.topLeftCorner(cutoff, cutoff);
  const double kept = block.trace().real();
  block = 0.5 * (block + block.adjoint()).eval();
  PreparedState out{DensityMatrix(1, cutoff, block / kept), std::max(0.0, 1.0 - kept)};
  return out;
}

/// Exponent series (orders 0..2) of rho = exp(f) for a Gaussian state:
/// f = f0 + f1.xi + xi^T f2 xi with f2 = -G/2, G = 2 nu arcoth(2 nu) V^{-1},
/// f1 = G m. Pure states use a thermal-occupation floor of 1e-14.
inline ExponentSeries exponent_series(const GaussianParams& g) {
  const CovarianceState s = gaussian_to_moments(g);
  const double nu = std::max(s.cov.determinant() > 0 ? std::sqrt(s.cov.determinant()) : 0.5,
                             0.5 + 1e-14);
  const double beta = std::log((nu + 0.5) / (nu - 0.5));  // 2 arcoth(2 nu)
  const RealMatrix gram = beta * nu * s.cov.inverse();
  const RealVector lin = gram * s.mean;
  const double f0 = 0.5 * beta + std::log1p(-std::exp(-beta)) - 0.5 * s.mean.dot(lin);

  ExponentSeries out(2, 2);
  out.set(MomentTensor::scalar(f0, 2));
  out.set(MomentTensor(1, 2, {lin(0), lin(1)}));
  out.set(MomentTensor(2, 2, {-0.5 * gram(0, 0), -0.5 * gram(0, 1), -0.5 * gram(1, 0), -0.5 * gram(1, 1)}));
  return out;
}

}  // namespace interfere
