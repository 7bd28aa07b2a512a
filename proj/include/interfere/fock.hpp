#pragma once

// Truncated Fock-space states of one or two bosonic modes.
//
// Basis convention: single-mode index n in [0, cutoff); two-mode index
// n_a * cutoff + n_b, so mode a is the slow (major) index everywhere.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "interfere/beam_splitter.hpp"

namespace interfere {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

enum class Mode { a = 0, b = 1 };

inline Mode other(Mode m) { return m == Mode::a ? Mode::b : Mode::a; }

inline const char* to_string(Mode m) { return m == Mode::a ? "a" : "b"; }

class DensityMatrix {
 public:
  DensityMatrix(int modes, int cutoff, ComplexMatrix data)
      : modes_(modes), cutoff_(cutoff), data_(std::move(data)) {
    if (modes != 1 && modes != 2) {
      throw std::invalid_argument("density matrix supports one or two modes");
    }
    if (cutoff < 1) throw std::invalid_argument("cutoff must be positive");
    const Eigen::Index d = modes == 1 ? cutoff : Eigen::Index(cutoff) * cutoff;
    if (data_.rows() != d || data_.cols() != d) {
      throw std::invalid_argument("density matrix data has dimension " +
                                  std::to_string(data_.rows()) + "x" +
                                  std::to_string(data_.cols()) + ", expected " +
                                  std::to_string(d));
    }
  }

  static DensityMatrix from_pure(int modes, int cutoff, const ComplexVector& psi) {
    return DensityMatrix(modes, cutoff, psi * psi.adjoint());
  }

  static DensityMatrix vacuum(int modes, int cutoff) {
    const Eigen::Index d = modes == 1 ? cutoff : Eigen::Index(cutoff) * cutoff;
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    m(0, 0) = 1.0;
    return DensityMatrix(modes, cutoff, std::move(m));
  }

  int modes() const { return modes_; }
  int cutoff() const { return cutoff_; }
  Eigen::Index dim() const { return data_.rows(); }
  const ComplexMatrix& data() const { return data_; }

  cplx operator()(Eigen::Index i, Eigen::Index j) const { return data_(i, j); }

  Eigen::Index index(int na, int nb) const { return Eigen::Index(na) * cutoff_ + nb; }

  double trace() const { return data_.trace().real(); }

  RealVector populations() const { return data_.diagonal().real(); }

  double hermiticity_error() const {
    return (data_ - data_.adjoint()).cwiseAbs().maxCoeff();
  }

  RealVector eigenvalues() const {
    ComplexMatrix h = 0.5 * (data_ + data_.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
  }

  DensityMatrix normalized() const {
    const double tr = trace();
    if (!(tr > 0)) throw std::domain_error("cannot normalize a state with non-positive trace");
    return DensityMatrix(modes_, cutoff_, data_ / tr);
  }

  /// Throws std::domain_error when the Hermiticity, unit-trace or
  /// positivity invariants are violated beyond the given tolerances.
  void validate(double herm_tol = 1e-12, double trace_tol = 1e-9,
                double eig_tol = 1e-9) const {
    if (hermiticity_error() > herm_tol) {
      throw std::domain_error("density matrix is not Hermitian");
    }
    if (std::abs(trace() - 1.0) > trace_tol) {
      throw std::domain_error("density matrix trace " + std::to_string(trace()) + " != 1");
    }
    if (eigenvalues().minCoeff() < -eig_tol) {
      throw std::domain_error("density matrix has a negative eigenvalue");
    }
  }

 private:
  int modes_;
  int cutoff_;
  ComplexMatrix data_;
};

enum class OperatorKind { annihilation, creation, position, momentum, number };

struct ModeOperator {
  OperatorKind kind;
  int cutoff;
  ComplexMatrix data;
};

inline ComplexMatrix annihilation_matrix(int cutoff) {
  ComplexMatrix a = ComplexMatrix::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

/// Single-mode operator in the truncated basis; the quadratures are built
/// from the truncated annihilation matrix as q = (a† + a)/√2, p = i(a† − a)/√2.
inline ModeOperator mode_operator(OperatorKind kind, int cutoff) {
  const ComplexMatrix a = annihilation_matrix(cutoff);
  const ComplexMatrix ad = a.adjoint();
  const double s = 1.0 / std::sqrt(2.0);
  switch (kind) {
    case OperatorKind::annihilation:
      return {kind, cutoff, a};
    case OperatorKind::creation:
      return {kind, cutoff, ad};
    case OperatorKind::position:
      return {kind, cutoff, s * (ad + a)};
    case OperatorKind::momentum:
      return {kind, cutoff, cplx(0, s) * (ad - a)};
    case OperatorKind::number:
      return {kind, cutoff, ad * a};
  }
  throw std::logic_error("unknown operator kind");
}

template <typename Lhs, typename Rhs>
Eigen::Matrix<typename Lhs::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<Lhs>& x, const Eigen::MatrixBase<Rhs>& y) {
  Eigen::Matrix<typename Lhs::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(x.rows() * y.rows(),
                                                                          x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return out;
}

/// Lifts a single-mode operator onto one factor of the two-mode space.
inline ComplexMatrix embed(const ComplexMatrix& op, Mode mode) {
  const ComplexMatrix id = ComplexMatrix::Identity(op.rows(), op.cols());
  return mode == Mode::a ? kron(op, id) : kron(id, op);
}

inline cplx expectation(const DensityMatrix& rho, const ComplexMatrix& op) {
  if (op.rows() != rho.dim() || op.cols() != rho.dim()) {
    throw std::invalid_argument("operator dimension does not match the state");
  }
  // Tr(rho op) without forming the product.
  return rho.data().cwiseProduct(op.transpose()).sum();
}

/// Re-embeds a state into a larger cutoff by zero padding.
inline DensityMatrix pad(const DensityMatrix& rho, int new_cutoff) {
  const int n = rho.cutoff();
  if (new_cutoff < n) throw std::invalid_argument("pad cannot shrink the cutoff");
  if (rho.modes() == 1) {
    ComplexMatrix m = ComplexMatrix::Zero(new_cutoff, new_cutoff);
    m.topLeftCorner(n, n) = rho.data();
    return DensityMatrix(1, new_cutoff, std::move(m));
  }
  const Eigen::Index d = Eigen::Index(new_cutoff) * new_cutoff;
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (int ia = 0; ia < n; ++ia)
    for (int ib = 0; ib < n; ++ib)
      for (int ja = 0; ja < n; ++ja)
        for (int jb = 0; jb < n; ++jb)
          m(ia * new_cutoff + ib, ja * new_cutoff + jb) = rho(rho.index(ia, ib), rho.index(ja, jb));
  return DensityMatrix(2, new_cutoff, std::move(m));
}

inline DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.modes() != 1 || b.modes() != 1) {
    throw std::invalid_argument("tensor_product expects two single-mode states");
  }
  if (a.cutoff() != b.cutoff()) {
    throw std::invalid_argument("tensor_product requires equal cutoffs");
  }
  return DensityMatrix(2, a.cutoff(), kron(a.data(), b.data()));
}

/// Real generator a†b − ab† on the truncated two-mode space. It conserves
/// n_a + n_b, so the matrix is block diagonal in total photon number.
inline RealMatrix beamsplitter_generator(int cutoff) {
  const Eigen::Index d = Eigen::Index(cutoff) * cutoff;
  RealMatrix g = RealMatrix::Zero(d, d);
  for (int na = 0; na < cutoff; ++na) {
    for (int nb = 0; nb < cutoff; ++nb) {
      const Eigen::Index col = Eigen::Index(na) * cutoff + nb;
      if (na + 1 < cutoff && nb > 0) {
        g((na + 1) * cutoff + nb - 1, col) += std::sqrt((na + 1.0) * nb);
      }
      if (na > 0 && nb + 1 < cutoff) {
        g((na - 1) * cutoff + nb + 1, col) -= std::sqrt(na * (nb + 1.0));
      }
    }
  }
  return g;
}

/// U = exp[(theta/2)(a†b − ab†)], so that U† a U = t a + r b and
/// U† b U = t b − r a. Exponentiated one total-photon-number block at a time.
inline RealMatrix beamsplitter_unitary(int cutoff, const BeamSplitterSpec& bs) {
  const RealMatrix g = beamsplitter_generator(cutoff);
  const Eigen::Index d = g.rows();
  RealMatrix u = RealMatrix::Zero(d, d);
  std::vector<Eigen::Index> idx;
  for (int total = 0; total <= 2 * (cutoff - 1); ++total) {
    idx.clear();
    for (int na = std::max(0, total - cutoff + 1); na <= std::min(total, cutoff - 1); ++na) {
      idx.push_back(Eigen::Index(na) * cutoff + (total - na));
    }
    const auto k = Eigen::Index(idx.size());
    RealMatrix block(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) block(i, j) = g(idx[i], idx[j]) * bs.theta() / 2;
    const RealMatrix e = block.exp();
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) u(idx[i], idx[j]) = e(i, j);
  }
  return u;
}

/// U rho U^T for a real (block-sparse) two-mode unitary.
inline DensityMatrix apply_unitary(const DensityMatrix& rho, const RealMatrix& u) {
  if (rho.modes() != 2) throw std::invalid_argument("beam splitter acts on two-mode states");
  if (u.rows() != rho.dim() || u.cols() != rho.dim()) {
    throw std::invalid_argument("unitary does not match the state dimension");
  }
  const Eigen::SparseMatrix<cplx> us = u.cast<cplx>().sparseView();
  const ComplexMatrix half = us * rho.data();
  ComplexMatrix out = (us * half.adjoint()).adjoint();
  return DensityMatrix(2, rho.cutoff(), std::move(out));
}

inline DensityMatrix apply_beamsplitter(const DensityMatrix& rho, const BeamSplitterSpec& bs) {
  if (rho.modes() != 2) throw std::invalid_argument("beam splitter acts on two-mode states");
  if (bs.theta() == 0.0) return rho;
  return apply_unitary(rho, beamsplitter_unitary(rho.cutoff(), bs));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, Mode keep) {
  if (rho.modes() != 2) throw std::invalid_argument("partial_trace expects a two-mode state");
  const int n = rho.cutoff();
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cplx acc = 0;
      for (int k = 0; k < n; ++k) {
        acc += keep == Mode::a ? rho(rho.index(i, k), rho.index(j, k))
                               : rho(rho.index(k, i), rho.index(k, j));
      }
      out(i, j) = acc;
    }
  }
  return DensityMatrix(1, n, std::move(out));
}

/// A constructed state together with the population its ideal
/// (untruncated) counterpart places at or above the cutoff.
struct PreparedState {
  DensityMatrix state;
  double tail_mass = 0;

  bool leakage_warning(double threshold = 1e-6) const { return tail_mass > threshold; }
};

struct Projection {
  DensityMatrix state;  // normalized state of the unmeasured mode
  double probability;
};

/// Projects `measured` onto the Fock state |outcome⟩ and returns the
/// conditional state of the other mode.
inline Projection project_mode(const DensityMatrix& rho, Mode measured, int outcome) {
  if (rho.modes() != 2) throw std::invalid_argument("project_mode expects a two-mode state");
  const int n = rho.cutoff();
  if (outcome < 0 || outcome >= n) {
    throw std::invalid_argument("projection outcome outside the truncated basis");
  }
  ComplexMatrix out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out(i, j) = measured == Mode::b ? rho(rho.index(i, outcome), rho.index(j, outcome))
                                      : rho(rho.index(outcome, i), rho.index(outcome, j));
    }
  }
  const double p = out.trace().real();
  if (p < 1e-14) {
    throw std::domain_error("conditioning on a null event (probability " + std::to_string(p) +
                            ")");
  }
  return {DensityMatrix(1, n, out / p), std::min(1.0, p)};
}

// Eigenvalues in [-1e-6, 0] are truncation noise and contribute nothing;
// anything more negative means the state is invalid.
inline double entropy_of_spectrum(const RealVector& eigenvalues) {
  double s = 0;
  for (double lambda : eigenvalues) {
    if (lambda < -1e-6) {
      throw std::domain_error("state has eigenvalue " + std::to_string(lambda) + " < -1e-6");
    }
    if (lambda > 0) s -= lambda * std::log(lambda);
  }
  return std::max(s, 0.0);
}

/// von Neumann entropy in nats.
inline double von_neumann_entropy(const DensityMatrix& rho) {
  return entropy_of_spectrum(rho.eigenvalues());
}

inline double mutual_information(const DensityMatrix& rho) {
  if (rho.modes() != 2) throw std::invalid_argument("mutual_information expects two modes");
  return von_neumann_entropy(partial_trace(rho, Mode::a)) +
         von_neumann_entropy(partial_trace(rho, Mode::b)) - von_neumann_entropy(rho);
}

/// Trace distance between the state and the product of its marginals.
inline double distance_to_product(const DensityMatrix& rho) {
  if (rho.modes() != 2) throw std::invalid_argument("distance_to_product expects two modes");
  const DensityMatrix product =
      tensor_product(partial_trace(rho, Mode::a), partial_trace(rho, Mode::b));
  ComplexMatrix diff = rho.data() - product.data();
  diff = 0.5 * (diff + diff.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(diff, Eigen::EigenvaluesOnly);
  return std::clamp(0.5 * solver.eigenvalues().cwiseAbs().sum(), 0.0, 1.0);
}

}  // namespace interfere
