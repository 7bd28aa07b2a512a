#pragma once

// Operator-level check of the coefficient transformation law: the operator
// built from transform(h) must equal U h U†, and exp of it must equal
// U exp(h) U†.
//
// Everything is evaluated on the photon-number window n_a + n_b < N. The
// beam splitter conserves total photon number, so its restriction to the
// window is exact, and the polynomial operators are built in a basis large
// enough that their window entries are exact as well.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "interfere/beam_splitter.hpp"
#include "interfere/fock.hpp"
#include "interfere/moment_tensor.hpp"

namespace interfere {

/// States |n_a, n_b> with n_a + n_b < limit, ordered by total then n_a.
class TotalNumberBasis {
 public:
  explicit TotalNumberBasis(int limit) : limit_(limit) {
    for (int total = 0; total < limit; ++total)
      for (int na = total; na >= 0; --na) states_.push_back({na, total - na});
  }

  int limit() const { return limit_; }
  Eigen::Index size() const { return Eigen::Index(states_.size()); }
  std::pair<int, int> state(Eigen::Index i) const { return states_[std::size_t(i)]; }

  /// Position of |na, nb>, or -1 outside the basis.
  Eigen::Index index(int na, int nb) const {
    if (na < 0 || nb < 0 || na + nb >= limit_) return -1;
    const int total = na + nb;
    return Eigen::Index(total) * (total + 1) / 2 + (total - na);
  }

 private:
  int limit_;
  std::vector<std::pair<int, int>> states_;
};

using SparseComplex = Eigen::SparseMatrix<cplx>;

/// q_a, p_a, q_b, p_b on the basis (transitions leaving it are dropped).
inline std::vector<SparseComplex> quadrature_operators(const TotalNumberBasis& basis) {
  const double s = std::sqrt(0.5);
  const cplx i(0, 1);
  std::vector<std::vector<Eigen::Triplet<cplx>>> trip(4);
  for (Eigen::Index col = 0; col < basis.size(); ++col) {
    const auto [na, nb] = basis.state(col);
    auto add = [&](int mode, int dna, int dnb, double amp, bool raising) {
      const Eigen::Index row = basis.index(na + dna, nb + dnb);
      if (row < 0) return;
      // q = (a + a†)/sqrt2, p = i(a† - a)/sqrt2
      trip[std::size_t(2 * mode)].emplace_back(row, col, s * amp);
      trip[std::size_t(2 * mode + 1)].emplace_back(row, col, (raising ? i : -i) * s * amp);
    };
    if (na > 0) add(0, -1, 0, std::sqrt(double(na)), false);
    add(0, 1, 0, std::sqrt(double(na + 1)), true);
    if (nb > 0) add(1, 0, -1, std::sqrt(double(nb)), false);
    add(1, 0, 1, std::sqrt(double(nb + 1)), true);
  }
  std::vector<SparseComplex> ops;
  for (auto& t : trip) {
    SparseComplex m(basis.size(), basis.size());
    m.setFromTriplets(t.begin(), t.end());
    ops.push_back(std::move(m));
  }
  return ops;
}

/// Window block (n_a + n_b < cutoff) of the operator
///   sum_n h^{i1..in} {xi_i1 .. xi_in}_s
/// for a dim-4 series. Because h is symmetric the symmetrized products can
/// be replaced by plain products, and the partial sums
///   F(S) = h^S + sum_i xi_i F(S + {i})
/// depend only on the multiset S.
inline ComplexMatrix series_operator(const ExponentSeries& h, int cutoff) {
  if (h.dim() != 4) throw std::invalid_argument("series_operator expects a dim-4 series");
  if (cutoff < 1) throw std::invalid_argument("cutoff must be positive");
  const int top = h.max_order();
  const TotalNumberBasis work(cutoff + top);
  const TotalNumberBasis window(cutoff);
  const auto xi = quadrature_operators(work);
  const Eigen::Index rows = work.size(), cols = window.size();

  auto coefficient = [&](const std::vector<int>& s) {
    return s.empty() ? h[0][0] : h[int(s.size())].at(s);
  };
  auto identity = [&] {
    ComplexMatrix m = ComplexMatrix::Zero(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) m(c, c) = 1.0;  // window is a prefix of work
    return m;
  };

  // multisets of size k over {0..3}, as sorted index vectors
  auto multisets = [](int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(std::size_t(k), 0);
    if (k == 0) return std::vector<std::vector<int>>{{}};
    while (true) {
      out.push_back(cur);
      int pos = k - 1;
      while (pos >= 0 && cur[std::size_t(pos)] == 3) --pos;
      if (pos < 0) break;
      const int v = cur[std::size_t(pos)] + 1;
      for (int j = pos; j < k; ++j) cur[std::size_t(j)] = v;
    }
    return out;
  };
  auto extend = [](std::vector<int> s, int i) {
    s.insert(std::upper_bound(s.begin(), s.end(), i), i);
    return s;
  };

  if (top == 0) return h[0][0] * identity().topRows(cols);

  // level top - 1: F(S) = h^S + sum_i h^{S+i} xi_i, no stored level above
  std::map<std::vector<int>, ComplexMatrix> upper;
  for (const auto& s : multisets(top - 1)) {
    SparseComplex lin(rows, rows);
    for (int i = 0; i < 4; ++i) lin += coefficient(extend(s, i)) * xi[std::size_t(i)];
    ComplexMatrix m = lin * identity();
    const cplx c = coefficient(s);
    for (Eigen::Index k = 0; k < cols; ++k) m(k, k) += c;
    upper.emplace(s, std::move(m));
  }
  for (int k = top - 2; k >= 0; --k) {
    std::map<std::vector<int>, ComplexMatrix> level;
    for (const auto& s : multisets(k)) {
      ComplexMatrix m = ComplexMatrix::Zero(rows, cols);
      for (int i = 0; i < 4; ++i) m += xi[std::size_t(i)] * upper.at(extend(s, i));
      const cplx c = coefficient(s);
      for (Eigen::Index j = 0; j < cols; ++j) m(j, j) += c;
      level.emplace(s, std::move(m));
    }
    upper = std::move(level);
  }
  return upper.at({}).topRows(cols);
}

/// The beam-splitter unitary restricted to the window, in window ordering.
inline RealMatrix window_unitary(const BeamSplitterSpec& bs, int cutoff) {
  const TotalNumberBasis window(cutoff);
  const ComplexMatrix full = beamsplitter_unitary(cutoff, bs);
  RealMatrix u(window.size(), window.size());
  for (Eigen::Index r = 0; r < window.size(); ++r) {
    const auto [ra, rb] = window.state(r);
    for (Eigen::Index c = 0; c < window.size(); ++c) {
      const auto [ca, cb] = window.state(c);
      u(r, c) = full(Eigen::Index(ra) * cutoff + rb, Eigen::Index(ca) * cutoff + cb).real();
    }
  }
  return u;
}

struct ConjugationDeviation {
  double exponent = 0;  // max |U h U† - hbar| / max(1, max |hbar|)
  double density = 0;   // max |U e^h U† - e^hbar| after a common spectral shift
  double max() const { return std::max(exponent, density); }
};

inline constexpr double kDefaultSeriesNormCap = 0.5;

/// Compares U exp(f + g) U† with exp(transform(f + g)) on the window.
/// Both exponentials are scaled by exp(-lambda_max(f + g)) so that large
/// positive exponents do not overflow.
inline ConjugationDeviation exponent_conjugation_check(const ExponentSeries& f,
                                                       const ExponentSeries& g,
                                                       const BeamSplitterSpec& bs, int cutoff,
                                                       double norm_cap = kDefaultSeriesNormCap) {
  const double mass = f.l1_mass() + g.l1_mass();
  if (mass > norm_cap) {
    throw std::domain_error("series coefficient mass " + std::to_string(mass) +
                            " exceeds the cap " + std::to_string(norm_cap));
  }
  const ExponentSeries h = embed_product(f, g);
  const ComplexMatrix a = series_operator(h, cutoff);
  const ComplexMatrix abar = series_operator(transform(h, bs), cutoff);
  const RealMatrix u = window_unitary(bs, cutoff);

  ConjugationDeviation out;
  const ComplexMatrix conj = u * a * u.transpose();
  out.exponent = (conj - abar).cwiseAbs().maxCoeff() / std::max(1.0, abar.cwiseAbs().maxCoeff());

  auto hermitian_exp = [](const ComplexMatrix& m, double shift) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (m + m.adjoint()));
    const RealVector w = (es.eigenvalues().array() - shift).exp().matrix();
    return ComplexMatrix(es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint());
  };
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> spectrum(0.5 * (a + a.adjoint()),
                                                        Eigen::EigenvaluesOnly);
  const double shift = spectrum.eigenvalues().maxCoeff();
  const ComplexMatrix lhs = u * hermitian_exp(a, shift) * u.transpose();
  out.density = (lhs - hermitian_exp(abar, shift)).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace interfere
