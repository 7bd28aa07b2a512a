#pragma once

// Symmetric coefficient tensors of the symmetric-ordered exponent expansion
//
//   f = f0 + f1^i xi_i + f2^{ij} {xi_i xi_j}_s + f3^{ijk} {xi_i xi_j xi_k}_s + ...
//
// with xi = (q, p) for one mode and (q_a, p_a, q_b, p_b) for two. Indices
// are 0-based here: 0,1 belong to mode a and 2,3 to mode b.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "interfere/beam_splitter.hpp"

namespace interfere {

class MomentTensor {
 public:
  MomentTensor() : MomentTensor(0, 2) {}

  MomentTensor(int order, int dim) : order_(order), dim_(dim) {
    if (order < 0) throw std::invalid_argument("tensor order must be non-negative");
    if (dim < 1) throw std::invalid_argument("tensor dimension must be positive");
    entries_.assign(power(dim, order), 0.0);
  }

  /// Row-major entries; the tensor is symmetrized on construction.
  MomentTensor(int order, int dim, std::vector<double> entries) : MomentTensor(order, dim) {
    if (entries.size() != entries_.size()) {
      throw std::invalid_argument("order-" + std::to_string(order) + " tensor over dim " +
                                  std::to_string(dim) + " needs " +
                                  std::to_string(entries_.size()) + " entries");
    }
    entries_ = std::move(entries);
    symmetrize();
  }

  /// Stores entries that are already symmetric (e.g. results of a
  /// contraction) without averaging them.
  static MomentTensor from_symmetric(int order, int dim, std::vector<double> entries) {
    MomentTensor t(order, dim);
    if (entries.size() != t.entries_.size()) throw std::invalid_argument("entry count mismatch");
    t.entries_ = std::move(entries);
    return t;
  }

  static MomentTensor scalar(double c, int dim) { return MomentTensor(0, dim, {c}); }

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<double>& entries() const { return entries_; }
  double operator[](std::size_t flat) const { return entries_[flat]; }

  std::size_t flatten(std::span<const int> index) const {
    if (int(index.size()) != order_) throw std::invalid_argument("index rank mismatch");
    std::size_t flat = 0;
    for (int i : index) {
      if (i < 0 || i >= dim_) throw std::out_of_range("tensor index out of range");
      flat = flat * dim_ + std::size_t(i);
    }
    return flat;
  }

  std::vector<int> unflatten(std::size_t flat) const {
    std::vector<int> index(order_);
    for (int k = order_ - 1; k >= 0; --k) {
      index[k] = int(flat % dim_);
      flat /= dim_;
    }
    return index;
  }

  double at(std::span<const int> index) const { return entries_[flatten(index)]; }
  double at(std::initializer_list<int> index) const {
    return at(std::span<const int>(index.begin(), index.size()));
  }

  /// Writes `value` at every permutation of `index`.
  void set_symmetric(std::span<const int> index, double value) {
    std::vector<int> perm(index.begin(), index.end());
    std::sort(perm.begin(), perm.end());
    do {
      entries_[flatten(perm)] = value;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  void set_symmetric(std::initializer_list<int> index, double value) {
    set_symmetric(std::span<const int>(index.begin(), index.size()), value);
  }

  /// Largest deviation from full permutation symmetry.
  double asymmetry() const {
    double worst = 0;
    for (std::size_t flat = 0; flat < entries_.size(); ++flat) {
      worst = std::max(worst, std::abs(entries_[flat] - entries_[canonical(flat)]));
    }
    return worst;
  }

  double l1_norm() const {
    double s = 0;
    for (double v : entries_) s += std::abs(v);
    return s;
  }

  double max_abs() const {
    double m = 0;
    for (double v : entries_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Flat index of the sorted permutation of `flat`'s multi-index.
  std::size_t canonical(std::size_t flat) const {
    auto index = unflatten(flat);
    std::sort(index.begin(), index.end());
    return flatten(index);
  }

 private:
  static std::size_t power(int base, int exp) {
    std::size_t p = 1;
    for (int k = 0; k < exp; ++k) p *= std::size_t(base);
    return p;
  }

  // Averaging over an orbit equals averaging over all index permutations.
  void symmetrize() {
    std::map<std::size_t, std::pair<double, int>> orbit;
    for (std::size_t flat = 0; flat < entries_.size(); ++flat) {
      auto& acc = orbit[canonical(flat)];
      acc.first += entries_[flat];
      acc.second += 1;
    }
    for (std::size_t flat = 0; flat < entries_.size(); ++flat) {
      const auto& acc = orbit[canonical(flat)];
      entries_[flat] = acc.first / acc.second;
    }
  }

  int order_;
  int dim_;
  std::vector<double> entries_;
};

/// Coefficient tensors of orders 0..max_order over a common dimension.
class ExponentSeries {
 public:
  static constexpr int kDefaultOrderBound = 6;

  ExponentSeries(int dim, int max_order, int order_bound = kDefaultOrderBound) : dim_(dim) {
    if (max_order < 0 || max_order > order_bound) {
      throw std::invalid_argument("series order " + std::to_string(max_order) +
                                  " outside [0, " + std::to_string(order_bound) + "]");
    }
    for (int n = 0; n <= max_order; ++n) tensors_.emplace_back(n, dim);
  }

  explicit ExponentSeries(std::vector<MomentTensor> tensors,
                          int order_bound = kDefaultOrderBound)
      : tensors_(std::move(tensors)) {
    if (tensors_.empty()) throw std::invalid_argument("series needs at least the order-0 term");
    if (int(tensors_.size()) - 1 > order_bound) {
      throw std::invalid_argument("series order exceeds the configured bound");
    }
    dim_ = tensors_.front().dim();
    for (std::size_t n = 0; n < tensors_.size(); ++n) {
      if (tensors_[n].order() != int(n)) throw std::invalid_argument("series orders out of place");
      if (tensors_[n].dim() != dim_) throw std::invalid_argument("inconsistent series dimension");
    }
  }

  int dim() const { return dim_; }
  int max_order() const { return int(tensors_.size()) - 1; }
  const MomentTensor& operator[](int n) const { return tensors_.at(std::size_t(n)); }
  const std::vector<MomentTensor>& tensors() const { return tensors_; }

  void set(const MomentTensor& t) {
    if (t.dim() != dim_) throw std::invalid_argument("tensor dimension does not match series");
    if (t.order() > max_order()) throw std::invalid_argument("tensor order exceeds series order");
    tensors_[std::size_t(t.order())] = t;
  }

  /// l1 mass of all coefficients of order >= 1 (order 0 only rescales).
  double l1_mass() const {
    double s = 0;
    for (std::size_t n = 1; n < tensors_.size(); ++n) s += tensors_[n].l1_norm();
    return s;
  }

 private:
  int dim_;
  std::vector<MomentTensor> tensors_;
};

/// The coefficient matrix Lambda exactly as printed for the beam splitter:
///
///   ( t 0 -r 0 / 0 t 0 -r / r 0 t 0 / 0 r 0 t )
///
/// Stored with the operator (lower) index as the row, i.e.
/// U xi_i U† = Lambda(i, j) xi_j. It is the transpose of the Heisenberg
/// quadrature matrix M of `quadrature_transform`.
inline Eigen::Matrix4d lambda_matrix(const BeamSplitterSpec& bs) {
  const double t = bs.t(), r = bs.r();
  Eigen::Matrix4d l;
  l << t, 0, -r, 0,  //
      0, t, 0, -r,   //
      r, 0, t, 0,    //
      0, r, 0, t;
  return l;
}

/// out^{i1..in} = C(i1, j1) ... C(in, jn) in^{j1..jn}, one axis at a time.
inline MomentTensor contract(const MomentTensor& in, const Eigen::MatrixXd& c) {
  const int d = in.dim();
  if (c.rows() != d || c.cols() != d) throw std::invalid_argument("contraction matrix shape");
  std::vector<double> cur = in.entries();
  std::vector<double> next(cur.size());
  std::size_t stride = cur.size();
  for (int axis = 0; axis < in.order(); ++axis) {
    stride /= std::size_t(d);
    for (std::size_t flat = 0; flat < cur.size(); ++flat) {
      const std::size_t digit = (flat / stride) % std::size_t(d);
      const std::size_t base = flat - digit * stride;
      double acc = 0;
      for (int j = 0; j < d; ++j) acc += c(Eigen::Index(digit), j) * cur[base + std::size_t(j) * stride];
      next[flat] = acc;
    }
    std::swap(cur, next);
  }
  return MomentTensor::from_symmetric(in.order(), d, std::move(cur));
}

/// Coefficients of f + g for a product state, as one two-mode series:
/// pure-a entries come from f, pure-b entries from g (indices shifted by 2),
/// mixed entries are zero.
inline ExponentSeries embed_product(const ExponentSeries& f, const ExponentSeries& g) {
  if (f.dim() != 2 || g.dim() != 2) throw std::invalid_argument("embed_product expects dim-2 series");
  if (f.max_order() != g.max_order()) {
    throw std::invalid_argument("embed_product expects equal series orders");
  }
  ExponentSeries h(4, f.max_order());
  h.set(MomentTensor::scalar(f[0][0] + g[0][0], 4));
  for (int n = 1; n <= f.max_order(); ++n) {
    MomentTensor out(n, 4);
    std::vector<double> entries(out.size(), 0.0);
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
      auto index = out.unflatten(flat);
      const bool all_a = std::all_of(index.begin(), index.end(), [](int i) { return i < 2; });
      const bool all_b = std::all_of(index.begin(), index.end(), [](int i) { return i >= 2; });
      if (all_a) {
        entries[flat] = f[n].at(index);
      } else if (all_b) {
        for (int& i : index) i -= 2;
        entries[flat] = g[n].at(index);
      }
    }
    h.set(MomentTensor::from_symmetric(n, 4, std::move(entries)));
  }
  return h;
}

/// Beam-splitter action on exponent coefficients. With U xi_i U† =
/// Lambda(i, j) xi_j, the exponent U f U† has coefficients
/// fbar^{j..} = Lambda(i1, j1) ... f^{i..}, i.e. every index is contracted
/// with Lambda^T.
inline ExponentSeries transform(const ExponentSeries& h, const BeamSplitterSpec& bs) {
  if (h.dim() != 4) throw std::invalid_argument("transform expects a two-mode (dim 4) series");
  const Eigen::MatrixXd c = lambda_matrix(bs).transpose();
  std::vector<MomentTensor> out;
  out.reserve(std::size_t(h.max_order() + 1));
  for (const auto& t : h.tensors()) out.push_back(contract(t, c));
  return ExponentSeries(std::move(out));
}

inline bool is_mixed_index(std::span<const int> index) {
  bool has_a = false, has_b = false;
  for (int i : index) (i < 2 ? has_a : has_b) = true;
  return has_a && has_b;
}

struct FactorizabilityReport {
  bool factorizable = true;
  double max_residual = 0;
  double tolerance = 0;
  std::vector<double> residual_by_order;  // max |mixed coefficient| per order
};

inline void require_mixing(const BeamSplitterSpec& bs) {
  if (bs.trivial()) {
    throw std::invalid_argument(
        "beam splitter with r*t = 0 does not mix the modes; the trivial cases are excluded");
  }
}

/// Transforms the product-state coefficients and collects every mixed-index
/// coefficient of order >= 2; factorizable output needs them all to vanish.
inline FactorizabilityReport check_factorizable(const ExponentSeries& f, const ExponentSeries& g,
                                                const BeamSplitterSpec& bs, double tol = 1e-10) {
  require_mixing(bs);
  const ExponentSeries h = transform(embed_product(f, g), bs);
  FactorizabilityReport report;
  report.tolerance = tol;
  report.residual_by_order.assign(std::size_t(h.max_order() + 1), 0.0);
  for (int n = 2; n <= h.max_order(); ++n) {
    const MomentTensor& t = h[n];
    double worst = 0;
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
      if (is_mixed_index(t.unflatten(flat))) worst = std::max(worst, std::abs(t[flat]));
    }
    report.residual_by_order[std::size_t(n)] = worst;
    report.max_residual = std::max(report.max_residual, worst);
  }
  report.factorizable = report.max_residual <= tol;
  return report;
}

/// The per-order conditions r^j t^(n-j) f + (-r)^(n-j) t^j g = 0
/// (j = 1..n-1, every index tuple), evaluated directly on dim-2 inputs.
inline std::vector<double> direct_condition_residuals(const ExponentSeries& f,
                                                      const ExponentSeries& g,
                                                      const BeamSplitterSpec& bs) {
  if (f.dim() != 2 || g.dim() != 2 || f.max_order() != g.max_order()) {
    throw std::invalid_argument("direct conditions expect matching dim-2 series");
  }
  const double t = bs.t(), r = bs.r();
  std::vector<double> out(std::size_t(f.max_order() + 1), 0.0);
  for (int n = 2; n <= f.max_order(); ++n) {
    double worst = 0;
    for (std::size_t flat = 0; flat < f[n].size(); ++flat) {
      for (int j = 1; j < n; ++j) {
        const double v = std::pow(r, j) * std::pow(t, n - j) * f[n][flat] +
                         std::pow(-r, n - j) * std::pow(t, j) * g[n][flat];
        worst = std::max(worst, std::abs(v));
      }
    }
    out[std::size_t(n)] = worst;
  }
  return out;
}

}  // namespace interfere
