#pragma once

// The acceptance criteria as executable checks. Each criterion returns a
// verdict with a one-line detail; the suite is shared by the ctest binary
// and the CLI self-test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "interfere/conjugation.hpp"
#include "interfere/experiments.hpp"
#include "interfere/fock.hpp"
#include "interfere/gaussian.hpp"
#include "interfere/moment_tensor.hpp"
#include "interfere/phase_space.hpp"
#include "interfere/state.hpp"
#include "interfere/theorem_scan.hpp"

namespace interfere::acceptance {

struct Options {
  bool fast = false;  // reduced sample counts; criteria 2, 6 and 9 are skipped
  unsigned workers = 1;
  std::uint64_t seed = 20240611;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  Verdict verdict = Verdict::fail;
  std::string detail;
  double seconds = 0;
};

inline std::string format_line(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %2d %-34s", r.verdict == Verdict::pass      ? "PASS"
                                                    : r.verdict == Verdict::skipped ? "SKIP"
                                                                                    : "FAIL",
                r.id, r.name.c_str());
  char tail[32];
  std::snprintf(tail, sizeof tail, " (%.1f s)", r.seconds);
  return std::string(head) + r.detail + tail;
}

namespace detail {

constexpr double kPi = std::numbers::pi;

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline DensityMatrix propagate(const std::string& a, const std::string& b, int cutoff,
                               const BeamSplitterSpec& bs, double* max_tail = nullptr) {
  const auto pa = make_state(a, cutoff), pb = make_state(b, cutoff);
  if (max_tail) *max_tail = std::max({*max_tail, pa.tail_mass, pb.tail_mass});
  return apply_beamsplitter(tensor_product(pa.state, pb.state), bs);
}

inline double gaussian_oracle_mi(const GaussianParams& a, const GaussianParams& b,
                                 const BeamSplitterSpec& bs) {
  return gaussian_mutual_information(
      bs_transform_covariance(product_state(gaussian_to_moments(a), gaussian_to_moments(b)), bs));
}

// Random state supported on n_a + n_b < cutoff.
inline DensityMatrix random_low_state(int cutoff, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const int d = cutoff * cutoff, rank = 3;
  ComplexMatrix v = ComplexMatrix::Zero(d, rank);
  for (int i = 0; i < cutoff; ++i)
    for (int j = 0; i + j < cutoff; ++j)
      for (int k = 0; k < rank; ++k) v(i * cutoff + j, k) = cplx(g(rng), g(rng));
  ComplexMatrix rho = v * v.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(2, cutoff, rho);
}

inline RealVector sorted_spectrum(const DensityMatrix& rho) { return rho.eigenvalues(); }

// Tr(a rho) and Tr(b rho) straight from the matrix entries.
inline std::pair<cplx, cplx> first_moments(const DensityMatrix& rho) {
  const int n = rho.cutoff();
  cplx ea{0, 0}, eb{0, 0};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i + 1 < n) ea += std::sqrt(double(i + 1)) * rho((i + 1) * n + j, i * n + j);
      if (j + 1 < n) eb += std::sqrt(double(j + 1)) * rho(i * n + j + 1, i * n + j);
    }
  return {ea, eb};
}

inline ExponentSeries random_capped_series(int n_max, double mass, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<MomentTensor> tensors;
  for (int n = 0; n <= n_max; ++n) {
    std::vector<double> e(static_cast<std::size_t>(std::pow(2, n)));
    for (double& v : e) v = u(rng);
    tensors.emplace_back(n, 2, std::move(e));
  }
  ExponentSeries s(tensors);
  const double scale = mass / s.l1_mass();
  for (auto& t : tensors) {
    if (t.order() == 0) continue;
    auto e = t.entries();
    for (double& v : e) v *= scale;
    t = MomentTensor(t.order(), 2, std::move(e));
  }
  return ExponentSeries(tensors);
}

inline GaussianParams random_physical(std::mt19937_64& rng, double tau_max) {
  std::uniform_real_distribution<double> u(0, 1);
  const double tau = 0.5 + (tau_max - 0.5) * u(rng);
  const double lim = 0.5 * std::sqrt(tau * tau - 0.25);
  return {std::polar(lim * u(rng), 2 * kPi * u(rng)), tau, {0, 0}};
}

struct Check {
  bool ok = true;
  std::string first_failure;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) first_failure = what;
    ok = ok && cond;
  }
};

}  // namespace detail

// 1. identical Gaussian inputs leave as a product
inline CriterionResult identical_gaussian_independence(const Options& opt) {
  using namespace detail;
  CriterionResult r{1, "identical-gaussian-independence"};
  const auto sq_a = to_descriptor(GaussianParams::squeezed(0.3, 0, {0.5, 0}));
  const auto sq_b = to_descriptor(GaussianParams::squeezed(0.3, 0, {-0.4, 0.3}));
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"thermal:1", "thermal:1"}, {"coherent:1", "coherent:0.3,0.7"}, {sq_a, sq_b}};
  std::vector<double> angles{kPi / 6, kPi / 2, 2 * kPi / 3};
  if (opt.fast) angles = {kPi / 2};
  double worst_mi = 0, worst_td = 0;
  for (const auto& [a, b] : pairs)
    for (double theta : angles) {
      const auto out = propagate(a, b, 30, BeamSplitterSpec(theta));
      worst_mi = std::max(worst_mi, mutual_information(out));
      worst_td = std::max(worst_td, distance_to_product(out));
    }
  r.verdict = worst_mi < 1e-6 && worst_td < 1e-6 ? Verdict::pass : Verdict::fail;
  r.detail = "max MI " + sci(worst_mi) + ", max trace distance " + sci(worst_td) + " over " +
             std::to_string(pairs.size() * angles.size()) + " cases";
  return r;
}

// 2. unequal Gaussian inputs become correlated, in agreement with the
// covariance oracle
inline CriterionResult unequal_gaussian_correlation(const Options&) {
  using namespace detail;
  CriterionResult r{2, "unequal-gaussian-correlation"};
  const BeamSplitterSpec bs(kPi / 2);
  double tail = 0;
  const double mi_thermal = mutual_information(propagate("thermal:0.5", "thermal:2", 30, bs, &tail));
  const double oracle_thermal =
      gaussian_oracle_mi(GaussianParams::thermal(0.5), GaussianParams::thermal(2.0), bs);
  const double mi_sq = mutual_information(propagate("squeezed:0.3,0", "vacuum", 30, bs, &tail));
  const double oracle_sq = gaussian_oracle_mi(GaussianParams::squeezed(0.3, 0), GaussianParams::vacuum(), bs);
  const double gap = std::max(std::abs(mi_thermal - oracle_thermal), std::abs(mi_sq - oracle_sq));
  r.verdict = mi_thermal > 0.01 && mi_sq > 0.01 && gap < 1e-3 ? Verdict::pass : Verdict::fail;
  r.detail = "MI thermal " + sci(mi_thermal) + ", squeezed " + sci(mi_sq) + ", oracle gap " +
             sci(gap) + ", input tail " + sci(tail);
  return r;
}

// 3. coherent state against vacuum
inline CriterionResult coherent_through_vacuum(const Options&) {
  using namespace detail;
  CriterionResult r{3, "coherent-through-vacuum"};
  double worst = 0;
  for (double theta : {kPi / 6, kPi / 2, 2 * kPi / 3, 2.9}) {
    worst = std::max(worst, distance_to_product(propagate("coherent:1", "vacuum", 30, BeamSplitterSpec(theta))));
  }
  r.verdict = worst < 1e-8 ? Verdict::pass : Verdict::fail;
  r.detail = "max trace distance to product " + sci(worst);
  return r;
}

// 4. Hong-Ou-Mandel
inline CriterionResult hong_ou_mandel(const Options&) {
  using namespace detail;
  CriterionResult r{4, "hong-ou-mandel"};
  const auto out = propagate("fock:1", "fock:1", 30, BeamSplitterSpec(kPi / 2));
  const double coincidence = std::abs(out(31, 31));
  const double mi = mutual_information(out);
  r.verdict = coincidence < 1e-10 && mi > 0 ? Verdict::pass : Verdict::fail;
  r.detail = "<1,1|rho|1,1> " + sci(coincidence) + ", MI " + sci(mi);
  return r;
}

// 5. moment-condition theorem scan
inline CriterionResult moment_theorem_scan(const Options& opt) {
  using namespace detail;
  CriterionResult r{5, "moment-condition-scan"};
  const int trials = opt.fast ? 200 : 1000;
  ScanOptions so;
  so.workers = opt.workers;
  const auto scan = theorem_scan(4, trials, opt.seed, so);

  ExponentSeries f(2, 2), g(2, 2);
  f.set(MomentTensor(2, 2, {1, 0, 0, 2}));
  g.set(MomentTensor(2, 2, {2, 0, 0, 1}));
  const double residual = check_factorizable(f, g, BeamSplitterSpec(kPi / 2)).max_residual;
  r.verdict = scan.counterexamples.empty() && std::abs(residual - 0.5) < 1e-12 ? Verdict::pass
                                                                                : Verdict::fail;
  r.detail = std::to_string(trials) + " trials, " + std::to_string(scan.counterexamples.size()) +
             " counterexamples, worst pass residual " + sci(scan.max_pass_residual) +
             ", least fail residual " + sci(scan.min_fail_residual) +
             ", diag example residual " + sci(residual);
  return r;
}

// 6. operator-level witness for the coefficient transform
inline CriterionResult exponent_conjugation(const Options& opt) {
  using namespace detail;
  CriterionResult r{6, "exponent-conjugation"};
  if (opt.fast) {
    r.verdict = Verdict::skipped;
    r.detail = "skipped in fast mode";
    return r;
  }
  std::mt19937_64 rng(opt.seed ^ 6);
  double worst = 0;
  const int cases = 50;
  for (int k = 0; k < cases; ++k) {
    const auto f = random_capped_series(4, 0.225, rng);
    const auto g = random_capped_series(4, 0.225, rng);
    worst = std::max(worst, exponent_conjugation_check(f, g, BeamSplitterSpec(kPi / 3), 25).max());
  }
  r.verdict = worst < 1e-6 ? Verdict::pass : Verdict::fail;
  r.detail = std::to_string(cases) + " series, max deviation " + sci(worst);
  return r;
}

// 7. cross-term roots
inline CriterionResult cross_term_uniqueness(const Options& opt) {
  using namespace detail;
  CriterionResult r{7, "cross-term-uniqueness"};
  std::mt19937_64 rng(opt.seed ^ 7);
  std::uniform_real_distribution<double> angle(0.2, kPi - 0.2);
  const int cases = opt.fast ? 20 : 100;
  Check c;
  double worst = 0;
  for (int k = 0; k < cases; ++k) {
    const auto gb = random_physical(rng, 3.0);
    const auto sol = solve_cross_terms_zero(gb, BeamSplitterSpec(angle(rng)));
    const bool shape = sol.roots.size() == 2 && !sol.roots[0].physical && sol.roots[1].physical;
    c.require(shape, "root set for " + to_descriptor(gb));
    if (!shape) continue;
    const auto& zero = sol.roots[0];
    const auto& phys = sol.roots[1];
    c.require(std::abs(zero.mu) + std::abs(zero.tau) < 1e-9, "unphysical root not at the origin");
    c.require(std::abs(phys.mu - gb.mu) + std::abs(phys.tau - gb.tau) < 1e-9,
              "physical root away from the input for " + to_descriptor(gb));
    const double res = phys.coefficient_residual.value_or(INFINITY);
    worst = std::max(worst, res);
    c.require(res < 1e-10, "residual " + sci(res));
  }
  r.verdict = c.ok ? Verdict::pass : Verdict::fail;
  r.detail = std::to_string(cases) + " parameter sets, max residual at the physical root " + sci(worst);
  if (!c.ok) r.detail += "; " + c.first_failure;
  return r;
}

// 8. P-function and conditional closed forms
inline CriterionResult closed_forms(const Options&) {
  using namespace detail;
  CriterionResult r{8, "closed-forms"};
  const BeamSplitterSpec bs(kPi / 2);
  double p_err = 0;
  for (auto [na, nb] : {std::pair{0.5, 2.0}, {1.0, 1.0}, {0.3, 0.7}}) {
    const ThermalPair pair{na, nb};
    const double p0 = p_function_thermal_mix(pair, bs, {0, 0}, {0, 0});
    p_err = std::max(p_err, std::abs(p0 - 1 / (kPi * kPi * na * nb)));
  }
  const auto c = conditional_prep({0.5, 2.0}, bs, 1, 30);
  double route = 0;
  for (int n = 0; n <= 15; ++n) {
    route = std::max(route, std::abs(c.closed_form->state(n, n).real() - c.fock_populations[std::size_t(n)]));
  }
  const auto same = conditional_p_state({1.0, 1.0}, bs, 30);
  const double inert = (same.state.data() - make_state("thermal:1", 30).state.data()).cwiseAbs().maxCoeff();
  r.verdict = p_err < 1e-12 && route < 1e-3 && inert < 1e-4 ? Verdict::pass : Verdict::fail;
  r.detail = "P(0) error " + sci(p_err) + ", route gap n<=15 " + sci(route) +
             ", identical-input conditional vs thermal:1 " + sci(inert);
  return r;
}

// 9. Fock-space invariants on randomized cases
inline CriterionResult invariant_suite(const Options& opt) {
  using namespace detail;
  CriterionResult r{9, "invariant-suite"};
  if (opt.fast) {
    r.verdict = Verdict::skipped;
    r.detail = "skipped in fast mode";
    return r;
  }
  std::mt19937_64 rng(opt.seed ^ 9);
  std::uniform_real_distribution<double> angle(-kPi, kPi), u(-1, 1);
  const int cases = 200, small = 8, coherent_cutoff = 20;
  WignerGridSpec grid;
  grid.q_min = grid.p_min = -4;
  grid.q_max = grid.p_max = 4;
  grid.q_steps = grid.p_steps = 17;
  Check c;
  double wigner_min = INFINITY;
  for (int k = 0; k < cases; ++k) {
    const BeamSplitterSpec b1(angle(rng)), b2(angle(rng));
    const auto rho = random_low_state(small, rng);
    const auto out = apply_beamsplitter(rho, b1);
    c.require(std::abs(out.trace() - 1) < 1e-10, "trace");
    c.require((sorted_spectrum(out) - sorted_spectrum(rho)).cwiseAbs().maxCoeff() < 1e-8, "spectrum");
    const auto twice = apply_beamsplitter(out, b2);
    const auto once = apply_beamsplitter(rho, BeamSplitterSpec(b1.theta() + b2.theta()));
    c.require((twice.data() - once.data()).cwiseAbs().maxCoeff() < 1e-9, "composition");
    c.require((apply_beamsplitter(out, b1.inverse()).data() - rho.data()).cwiseAbs().maxCoeff() < 1e-10,
              "inversion");

    const cplx alpha(u(rng), u(rng)), beta(u(rng), u(rng));
    const auto coh = apply_beamsplitter(
        tensor_product(make_state(StateDescriptor{StateDescriptor::Kind::coherent, 0, alpha}, coherent_cutoff).state,
                       make_state(StateDescriptor{StateDescriptor::Kind::coherent, 0, beta}, coherent_cutoff).state),
        b1);
    const auto [ea, eb] = first_moments(coh);
    const double t = b1.t(), rr = b1.r();
    c.require(std::abs(ea - (t * alpha + rr * beta)) < 1e-8 && std::abs(eb - (t * beta - rr * alpha)) < 1e-8,
              "first-moment law");

    if (k % 10 == 0) {
      for (Mode m : {Mode::a, Mode::b}) wigner_min = std::min(wigner_min, wigner(partial_trace(out, m), grid).min());
    }
  }
  for (const char* d : {"fock:1", "fock:2", "fock:3", "squeezed:0.5,1"}) {
    wigner_min = std::min(wigner_min, wigner(make_state(d, 20).state, grid).min());
  }
  c.require(wigner_min >= -1 / kPi - 1e-9, "Wigner lower bound");
  r.verdict = c.ok ? Verdict::pass : Verdict::fail;
  r.detail = std::to_string(cases) + " cases (unitarity, composition, inversion, first moments), Wigner min " +
             sci(wigner_min) + " vs -1/pi";
  if (!c.ok) r.detail += "; first failure: " + c.first_failure;
  return r;
}

// 10. MI, covariance and moment conditions agree
inline CriterionResult bridge_consistency(const Options& opt) {
  using namespace detail;
  CriterionResult r{10, "bridge-consistency"};
  std::mt19937_64 rng(opt.seed ^ 10);
  std::uniform_real_distribution<double> u(-0.6, 0.6), angle(0.2, kPi - 0.2);
  const int cases = opt.fast ? 10 : 50, cutoff = 30;
  int discordant = 0, independent = 0;
  double tail = 0;
  // Truncation alone puts about 100x the tail mass into the Fock mutual
  // information, so pairs are redrawn until both tails fit the budget.
  const double tail_budget = 1e-9;
  int redrawn = 0;
  for (int k = 0; k < cases; ++k) {
    GaussianParams a, b;
    std::optional<PreparedState> pa, pb;
    for (;;) {
      a = random_physical(rng, 1.2);
      b = k % 2 == 0 ? a : random_physical(rng, 1.2);
      a.z0 = {u(rng), u(rng)};
      b.z0 = {u(rng), u(rng)};
      pa = gaussian_to_fock(a, cutoff);
      pb = gaussian_to_fock(b, cutoff);
      if (pa->tail_mass <= tail_budget && pb->tail_mass <= tail_budget) break;
      ++redrawn;
    }
    const BeamSplitterSpec bs(angle(rng));
    tail = std::max({tail, pa->tail_mass, pb->tail_mass});
    const double mi = mutual_information(apply_beamsplitter(tensor_product(pa->state, pb->state), bs));
    const double cross = covariance_cross_norm(
        bs_transform_covariance(product_state(gaussian_to_moments(a), gaussian_to_moments(b)), bs));
    const bool moments = check_factorizable(exponent_series(a), exponent_series(b), bs).factorizable;
    const bool mi_zero = mi < 1e-6, cross_zero = cross < 1e-6;
    if (mi_zero != cross_zero || cross_zero != moments) ++discordant;
    if (mi_zero) ++independent;
  }
  r.verdict = discordant == 0 ? Verdict::pass : Verdict::fail;
  r.detail = std::to_string(cases) + " pairs (" + std::to_string(independent) + " independent), " +
             std::to_string(discordant) + " discordant, max input tail " + sci(tail) + " (" +
             std::to_string(redrawn) + " redrawn over the budget)";
  return r;
}

using Criterion = std::function<CriterionResult(const Options&)>;

inline std::vector<Criterion> criteria() {
  return {identical_gaussian_independence, unequal_gaussian_correlation, coherent_through_vacuum,
          hong_ou_mandel, moment_theorem_scan, exponent_conjugation, cross_term_uniqueness,
          closed_forms, invariant_suite, bridge_consistency};
}

/// Runs every criterion in order; `on_result` sees each result as it lands.
inline std::vector<CriterionResult> run_all(
    const Options& opt, const std::function<void(const CriterionResult&)>& on_result = {}) {
  std::vector<CriterionResult> out;
  int id = 0;
  for (const auto& criterion : criteria()) {
    ++id;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = criterion(opt);
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion-" + std::to_string(id);
      r.verdict = Verdict::fail;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

inline bool all_passed(const std::vector<CriterionResult>& results) {
  return std::none_of(results.begin(), results.end(),
                      [](const auto& r) { return r.verdict == Verdict::fail; });
}

}  // namespace interfere::acceptance
