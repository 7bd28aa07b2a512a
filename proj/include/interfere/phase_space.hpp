#pragma once

// Phase-space pictures: Wigner functions on grids, the thermal-mixing
// P-functions and their heralded conditional state, and the cross terms of
// the output Gaussian Wigner exponent.
//
// W(q, p) is normalized over dq dp, so the vacuum peak is 1/pi and
// W >= -1/pi. The Gaussian closed form W1(z) of the (mu, tau, z0) family is
// normalized over d^2z = dq dp / 2, hence W(q, p) = W1(z) / 2.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "interfere/beam_splitter.hpp"
#include "interfere/fock.hpp"
#include "interfere/gaussian.hpp"
#include "interfere/moment_tensor.hpp"

namespace interfere {

// ---------------------------------------------------------------- Wigner

struct WignerGridSpec {
  double q_min = -5, q_max = 5;
  int q_steps = 101;
  double p_min = -5, p_max = 5;
  int p_steps = 101;

  void validate() const {
    for (double v : {q_min, q_max, p_min, p_max}) {
      if (!std::isfinite(v)) throw std::invalid_argument("grid bounds must be finite");
    }
    if (!(q_min < q_max) || !(p_min < p_max)) {
      throw std::invalid_argument("grid bounds must satisfy min < max");
    }
    if (q_steps < 2 || p_steps < 2) throw std::invalid_argument("grid needs at least 2 steps");
  }
  double q(int i) const { return q_min + (q_max - q_min) * i / (q_steps - 1); }
  double p(int j) const { return p_min + (p_max - p_min) * j / (p_steps - 1); }
};

struct WignerGrid {
  WignerGridSpec spec;
  RealMatrix values;  // rows: q samples, cols: p samples
  std::vector<std::string> warnings;

  /// Trapezoidal estimate of the integral over the window.
  double integral() const {
    const double dq = (spec.q_max - spec.q_min) / (spec.q_steps - 1);
    const double dp = (spec.p_max - spec.p_min) / (spec.p_steps - 1);
    double s = 0;
    for (int i = 0; i < spec.q_steps; ++i) {
      const double wi = (i == 0 || i == spec.q_steps - 1) ? 0.5 : 1.0;
      for (int j = 0; j < spec.p_steps; ++j) {
        const double wj = (j == 0 || j == spec.p_steps - 1) ? 0.5 : 1.0;
        s += wi * wj * values(i, j);
      }
    }
    return s * dq * dp;
  }
  double min() const { return values.minCoeff(); }
  double max() const { return values.maxCoeff(); }

  void write_csv(std::ostream& out) const {
    out << "q,p,w\n";
    out.precision(17);
    for (int i = 0; i < spec.q_steps; ++i)
      for (int j = 0; j < spec.p_steps; ++j)
        out << spec.q(i) << ',' << spec.p(j) << ',' << values(i, j) << '\n';
  }

  nlohmann::json to_json() const {
    nlohmann::json q = nlohmann::json::array(), p = nlohmann::json::array(),
                   w = nlohmann::json::array();
    for (int i = 0; i < spec.q_steps; ++i) q.push_back(spec.q(i));
    for (int j = 0; j < spec.p_steps; ++j) p.push_back(spec.p(j));
    for (int i = 0; i < spec.q_steps; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < spec.p_steps; ++j) row.push_back(values(i, j));
      w.push_back(std::move(row));
    }
    return {{"q", q}, {"p", p}, {"w", w}, {"integral", integral()}, {"min", min()},
            {"warnings", warnings}};
  }
};

/// W at one point, from the Fock matrix elements of the displaced parity:
/// for m >= n the |m><n| element contributes
///   (1/pi) (-1)^n sqrt(n!/m!) (2 a*)^(m-n) e^(-2|a|^2) L_n^(m-n)(4|a|^2)
/// with a = (q + i p)/sqrt2, and |n><m| the complex conjugate.
inline double wigner_point(const DensityMatrix& rho, double q, double p) {
  if (rho.modes() != 1) throw std::invalid_argument("wigner expects a single-mode state");
  const int n_cut = rho.cutoff();
  const cplx alpha = cplx(q, p) / std::sqrt(2.0);
  const double x = 4 * std::norm(alpha);
  const double envelope = std::exp(-0.5 * x);
  const cplx two_conj = 2.0 * std::conj(alpha);

  double w = 0;
  std::vector<double> lag(static_cast<std::size_t>(n_cut));
  cplx power = 1.0;  // (2 a*)^k
  for (int k = 0; k < n_cut; ++k) {
    const int len = n_cut - k;
    lag[0] = 1;
    if (len > 1) lag[1] = 1 + k - x;
    for (int n = 1; n + 1 < len; ++n) {
      lag[std::size_t(n + 1)] = ((2 * n + 1 + k - x) * lag[std::size_t(n)] -
                                 (n + k) * lag[std::size_t(n - 1)]) /
                                (n + 1);
    }
    double ratio = 1;  // sqrt(n!/(n+k)!)
    for (int j = 1; j <= k; ++j) ratio /= std::sqrt(double(j));
    for (int n = 0; n < len; ++n) {
      if (n > 0) ratio *= std::sqrt(double(n) / double(n + k));
      const double base = (n % 2 ? -1.0 : 1.0) * ratio * lag[std::size_t(n)];
      if (k == 0) {
        w += base * rho(n, n).real();
      } else {
        w += 2 * base * (rho(n + k, n) * power).real();
      }
    }
    power *= two_conj;
  }
  return w * envelope / std::numbers::pi;
}

inline WignerGrid wigner(const DensityMatrix& rho, const WignerGridSpec& spec,
                         unsigned workers = 1) {
  if (rho.modes() != 1) throw std::invalid_argument("wigner expects a single-mode state");
  spec.validate();
  WignerGrid grid{spec, RealMatrix(spec.q_steps, spec.p_steps), {}};
  workers = std::max(1u, std::min<unsigned>(workers, unsigned(spec.q_steps)));
  auto rows = [&](unsigned w) {
    for (int i = int(w); i < spec.q_steps; i += int(workers))
      for (int j = 0; j < spec.p_steps; ++j) grid.values(i, j) = wigner_point(rho, spec.q(i), spec.p(j));
  };
  if (workers == 1) {
    rows(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(rows, w);
  }
  const double mass = grid.integral();
  if (std::abs(1 - mass) > 0.01) {
    grid.warnings.push_back("grid window holds " + std::to_string(mass) +
                            " of the state's Wigner mass; more than 1% lies outside");
  }
  return grid;
}

/// Closed-form Gaussian Wigner function in the dq dp normalization.
inline double wigner_gaussian(const GaussianParams& g, double q, double p) {
  require_physical(g);
  const double d = g.denominator();
  const cplx z = cplx(q, p) / std::sqrt(2.0) - g.z0;
  const double quad = 2 * (g.mu * z * z).real() + g.tau * std::norm(z);
  return std::exp(-quad / d) / (2 * std::numbers::pi * std::sqrt(d));
}

// ------------------------------------------------------- P-functions

struct ThermalPair {
  double nbar_a = 0;
  double nbar_b = 0;

  void require_positive() const {
    if (!(nbar_a > 0) || !(nbar_b > 0) || !std::isfinite(nbar_a) || !std::isfinite(nbar_b)) {
      throw std::domain_error("thermal occupations must be positive for the P-function forms");
    }
  }
};

/// Output P-function of thermal(nbar_a) x thermal(nbar_b) after the beam
/// splitter.
inline double p_function_thermal_mix(const ThermalPair& pair, const BeamSplitterSpec& bs,
                                     cplx alpha, cplx beta) {
  pair.require_positive();
  const double t = bs.t(), r = bs.r();
  const double e = std::norm(t * alpha - r * beta) / pair.nbar_a +
                   std::norm(r * alpha + t * beta) / pair.nbar_b;
  const double pi = std::numbers::pi;
  return std::exp(-e) / (pi * pi * pair.nbar_a * pair.nbar_b);
}

struct ConditionalClosedForm {
  double A = 0;
  double B = 0;
  double width = 0;  // t^2/nbar_a + r^2/nbar_b - B^2/A
  double nbar_a = 0;
  double nbar_b = 0;

  /// P-function of mode a after one photon is found in mode b; its integral
  /// is the probability of that outcome.
  double operator()(cplx alpha) const {
    const double n2 = std::norm(alpha);
    return std::exp(-width * n2) * (B * B / (A * A) * n2 + 1 / A) /
           (std::numbers::pi * A * nbar_a * nbar_b);
  }
};

inline ConditionalClosedForm conditional_closed_form(const ThermalPair& pair,
                                                     const BeamSplitterSpec& bs) {
  pair.require_positive();
  const double t = bs.t(), r = bs.r();
  ConditionalClosedForm c;
  c.nbar_a = pair.nbar_a;
  c.nbar_b = pair.nbar_b;
  c.A = 1 + r * r / pair.nbar_a + t * t / pair.nbar_b;
  c.B = r * t * (1 / pair.nbar_b - 1 / pair.nbar_a);
  c.width = t * t / pair.nbar_a + r * r / pair.nbar_b - c.B * c.B / c.A;
  if (!(c.width > 0)) throw std::domain_error("conditional P-function width is not positive");
  return c;
}

/// Gauss-Legendre nodes and weights on [lo, hi].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n, double lo,
                                                                          double hi) {
  if (n < 1) throw std::invalid_argument("need at least one quadrature node");
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1, p1 = 0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2 * k - 1) * z * p1 - (k - 1) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[std::size_t(i)] = mid - half * z;
    x[std::size_t(n - 1 - i)] = mid + half * z;
    w[std::size_t(i)] = w[std::size_t(n - 1 - i)] = 2 * half / ((1 - z * z) * dp * dp);
  }
  return {x, w};
}

struct ConditionalQuadrature {
  int radial_nodes = 200;
  int angular_nodes = 64;
  int max_doublings = 4;
  double mean_photon_tolerance = 1e-4;
};

struct ConditionalPState {
  DensityMatrix state;
  double probability = 0;   // integral of the closed form: the herald probability
  double tail_mass = 0;     // fraction of that mass at n >= cutoff
  double mean_photon = 0;
  int radial_nodes = 0;
  int angular_nodes = 0;
};

class QuadratureConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline ConditionalPState integrate_conditional(const ConditionalClosedForm& form, int cutoff,
                                               int radial, int angular) {
  const double radius = 5 * std::max({std::sqrt(form.nbar_a), std::sqrt(form.nbar_b), 1.0});
  const auto [rs, ws] = gauss_legendre(radial, 0, radius);
  ComplexMatrix rho = ComplexMatrix::Zero(cutoff, cutoff);
  ComplexVector amp(cutoff);
  double total = 0;
  const double dphi = 2 * std::numbers::pi / angular;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    for (int k = 0; k < angular; ++k) {
      const cplx alpha = std::polar(rs[i], k * dphi);
      const double weight = ws[i] * rs[i] * dphi * form(alpha);
      total += weight;
      amp(0) = std::exp(-0.5 * std::norm(alpha));
      for (int n = 1; n < cutoff; ++n) amp(n) = amp(n - 1) * alpha / std::sqrt(double(n));
      rho.noalias() += weight * amp * amp.adjoint();
    }
  }
  const double kept = rho.trace().real();
  ConditionalPState out{DensityMatrix(1, cutoff, rho / kept), total,
                        std::max(0.0, 1 - kept / total), 0, radial, angular};
  for (int n = 0; n < cutoff; ++n) out.mean_photon += n * out.state(n, n).real();
  return out;
}

}  // namespace detail

/// Mode-a state heralded by one photon in mode b, from the closed-form
/// P-function integrated against coherent projectors on a polar grid.
/// The grid is doubled until the mean photon number is stable.
inline ConditionalPState conditional_p_state(const ThermalPair& pair, const BeamSplitterSpec& bs,
                                             int cutoff, const ConditionalQuadrature& quad = {}) {
  if (cutoff < 2) throw std::invalid_argument("cutoff must be at least 2");
  const auto form = conditional_closed_form(pair, bs);
  int radial = quad.radial_nodes, angular = quad.angular_nodes;
  auto prev = detail::integrate_conditional(form, cutoff, radial, angular);
  for (int d = 0; d < quad.max_doublings; ++d) {
    radial *= 2;
    angular *= 2;
    auto next = detail::integrate_conditional(form, cutoff, radial, angular);
    if (std::abs(next.mean_photon - prev.mean_photon) <= quad.mean_photon_tolerance) return next;
    prev = std::move(next);
  }
  throw QuadratureConvergenceError("conditional P-state quadrature did not stabilize <n> to " +
                                   std::to_string(quad.mean_photon_tolerance));
}

/// Excess kurtosis of the quadrature x_phi = q cos(phi) + p sin(phi).
inline double quadrature_excess_kurtosis(const DensityMatrix& rho, double phi = 0) {
  if (rho.modes() != 1) throw std::invalid_argument("kurtosis expects a single-mode state");
  const int n = rho.cutoff() + 4;
  const DensityMatrix padded = pad(rho, n);
  const ComplexMatrix x = std::cos(phi) * mode_operator(OperatorKind::position, n).data +
                          std::sin(phi) * mode_operator(OperatorKind::momentum, n).data;
  const double mean = expectation(padded, x).real();
  const ComplexMatrix c = x - mean * ComplexMatrix::Identity(n, n);
  const ComplexMatrix c2 = c * c;
  const double m2 = expectation(padded, c2).real();
  const double m4 = expectation(padded, c2 * c2).real();
  return m4 / (m2 * m2) - 3;
}

// ------------------------------------------------------- cross terms

struct CrossTerms {
  double qq = 0;
  double pp = 0;
  double qp = 0;
  double pq = 0;
  double max_abs() const {
    return std::max({std::abs(qq), std::abs(pp), std::abs(qp), std::abs(pq)});
  }
};

/// Coefficients of q_a q_b, p_a p_b, q_a p_b (and p_a q_b) in the output
/// Gaussian Wigner exponent, for mode-a parameters g_a and mode-b g_b:
///   2rt (mu'+mu'*+tau')/D' - 2rt (mu+mu*+tau)/D
///   2rt (-mu'-mu'*+tau')/D' - 2rt (-mu-mu*+tau)/D
///   2irt (mu'-mu'*)/D' - 2irt (mu-mu*)/D
/// with D = tau^2 - 4|mu|^2 and primes on mode b.
inline CrossTerms cross_term_coefficients(const GaussianParams& g_a, const GaussianParams& g_b,
                                          const BeamSplitterSpec& bs) {
  const double d = g_a.denominator(), dp = g_b.denominator();
  if (d == 0 || dp == 0 || !std::isfinite(d) || !std::isfinite(dp)) {
    throw std::domain_error("degenerate denominator tau^2 - 4|mu|^2 = 0");
  }
  const double k = 2 * bs.r() * bs.t();
  const double x = g_a.mu.real(), y = g_a.mu.imag();
  const double xp = g_b.mu.real(), yp = g_b.mu.imag();
  CrossTerms c;
  c.qq = k * ((2 * xp + g_b.tau) / dp - (2 * x + g_a.tau) / d);
  c.pp = k * ((-2 * xp + g_b.tau) / dp - (-2 * x + g_a.tau) / d);
  c.qp = k * (-2 * yp / dp + 2 * y / d);
  c.pq = c.qp;
  return c;
}

struct SearchDomain {
  double re_mu_min = -2, re_mu_max = 2;
  double im_mu_min = -2, im_mu_max = 2;
  double tau_min = -1, tau_max = 5;
  int starts_per_axis = 4;

  bool contains(cplx mu, double tau, double slack = 1e-9) const {
    return mu.real() >= re_mu_min - slack && mu.real() <= re_mu_max + slack &&
           mu.imag() >= im_mu_min - slack && mu.imag() <= im_mu_max + slack &&
           tau >= tau_min - slack && tau <= tau_max + slack;
  }
};

struct CrossTermRoot {
  cplx mu;
  double tau = 0;
  bool physical = false;
  double cleared_residual = 0;  // max |F_k| of the denominator-cleared system
  std::optional<double> coefficient_residual;  // max |cross term| where defined
};

struct CrossTermSolution {
  std::vector<CrossTermRoot> roots;
  int starts = 0;
  int failed_starts = 0;
};

/// Solves cross_term_coefficients(g, g_b) = 0 for g = (mu, tau) in the
/// domain. The equations are multiplied through by D, giving
///   F_k = 2rt (P'_k D / D' - P_k),
/// whose roots are (0, 0) and (mu', tau'); damped Newton runs from a grid
/// of start points and distinct converged roots are collected.
inline CrossTermSolution solve_cross_terms_zero(const GaussianParams& g_b,
                                                const BeamSplitterSpec& bs,
                                                const SearchDomain& domain = {}) {
  require_mixing(bs);
  const double dp = g_b.denominator();
  if (dp == 0 || !std::isfinite(dp)) throw std::domain_error("degenerate mode-b denominator");
  const double k = 2 * bs.r() * bs.t();
  const Eigen::Vector3d pb(2 * g_b.mu.real() + g_b.tau, -2 * g_b.mu.real() + g_b.tau,
                           -2 * g_b.mu.imag());
  Eigen::Matrix3d grad_p;  // d(P_qq, P_pp, P_qp) / d(X, Y, tau)
  grad_p << 2, 0, 1, -2, 0, 1, 0, -2, 0;

  auto residual = [&](const Eigen::Vector3d& v) {
    const double d = v(2) * v(2) - 4 * (v(0) * v(0) + v(1) * v(1));
    return Eigen::Vector3d(k * (pb * d / dp - grad_p * v));
  };
  auto jacobian = [&](const Eigen::Vector3d& v) {
    const Eigen::RowVector3d grad_d(-8 * v(0), -8 * v(1), 2 * v(2));
    return Eigen::Matrix3d(k * (pb * grad_d / dp - grad_p));
  };

  CrossTermSolution out;
  const int s = std::max(1, domain.starts_per_axis);
  auto axis = [s](double lo, double hi, int i) {
    return s == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * (i + 0.5) / s;
  };
  const double scale = std::max(1.0, pb.cwiseAbs().maxCoeff());
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j)
      for (int l = 0; l < s; ++l) {
        ++out.starts;
        Eigen::Vector3d v(axis(domain.re_mu_min, domain.re_mu_max, i),
                          axis(domain.im_mu_min, domain.im_mu_max, j),
                          axis(domain.tau_min, domain.tau_max, l));
        bool converged = false;
        Eigen::Vector3d f = residual(v);
        for (int iter = 0; iter < 200 && !converged; ++iter) {
          const Eigen::Vector3d step = jacobian(v).fullPivLu().solve(-f);
          if (!step.allFinite()) break;
          double lambda = 1;
          Eigen::Vector3d trial = v + step, ft = residual(trial);
          while (ft.norm() > (1 - 1e-4 * lambda) * f.norm() && lambda > 1e-6) {
            lambda *= 0.5;
            trial = v + lambda * step;
            ft = residual(trial);
          }
          v = trial;
          f = ft;
          converged = f.cwiseAbs().maxCoeff() < 1e-14 * scale ||
                      (step.norm() * lambda < 1e-15 * std::max(1.0, v.norm()) &&
                       f.cwiseAbs().maxCoeff() < 1e-10);
        }
        if (!converged) {
          ++out.failed_starts;
          continue;
        }
        const cplx mu(v(0), v(1));
        if (!domain.contains(mu, v(2))) continue;
        const bool seen = std::any_of(out.roots.begin(), out.roots.end(), [&](const auto& r) {
          return std::abs(r.mu - mu) + std::abs(r.tau - v(2)) < 1e-7;
        });
        if (seen) continue;
        CrossTermRoot root;
        root.mu = mu;
        root.tau = v(2);
        const GaussianParams g{mu, v(2), {0, 0}};
        root.physical = g.physical();
        root.cleared_residual = f.cwiseAbs().maxCoeff();
        if (std::abs(g.denominator()) > 1e-12) {
          root.coefficient_residual = cross_term_coefficients(g, g_b, bs).max_abs();
        }
        out.roots.push_back(root);
      }
  std::sort(out.roots.begin(), out.roots.end(),
            [](const auto& a, const auto& b) { return a.tau < b.tau; });
  return out;
}

}  // namespace interfere
