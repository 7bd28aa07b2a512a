#pragma once

// Randomized check of the factorizability theorem on coefficient series:
// the output of a mixing beam splitter is a product state exactly when the
// inputs share their second-order coefficients and carry nothing above
// second order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "interfere/beam_splitter.hpp"
#include "interfere/moment_tensor.hpp"

namespace interfere {

enum class TrialClass {
  same_second_order,   // f2 = g2, f1 != g1, no higher orders: must pass
  unequal_second_order,
  identical_higher_order,  // f = g with a nonzero order >= 3
  generic,
};

inline std::string to_string(TrialClass c) {
  switch (c) {
    case TrialClass::same_second_order:
      return "same-second-order";
    case TrialClass::unequal_second_order:
      return "unequal-second-order";
    case TrialClass::identical_higher_order:
      return "identical-higher-order";
    case TrialClass::generic:
      return "generic";
  }
  return "unknown";
}

struct Counterexample {
  int trial = 0;
  TrialClass trial_class = TrialClass::generic;
  double theta = 0;
  bool expected_pass = false;
  bool lambda_pass = false;  // embed + transform route
  bool direct_pass = false;  // per-order r^j t^(n-j) conditions
  double residual = 0;
  bool operator==(const Counterexample&) const = default;
};

struct ScanReport {
  int n_max = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  double tolerance = 0;
  int angles_per_trial = 0;
  std::vector<int> trials_by_class = std::vector<int>(4, 0);
  double max_pass_residual = 0;  // worst residual among expected passes
  double min_fail_residual = 0;  // smallest residual among expected failures
  std::vector<Counterexample> counterexamples;
  bool operator==(const ScanReport&) const = default;
};

struct ScanOptions {
  double tolerance = 1e-10;
  int angles_per_trial = 3;
  double angle_margin = 0.1;
  unsigned workers = 1;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline MomentTensor random_tensor(int order, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> e(std::size_t(std::pow(2, order)));
  for (double& v : e) v = u(rng);
  return MomentTensor(order, 2, std::move(e));
}

inline ExponentSeries random_series(int n_max, int top, std::mt19937_64& rng) {
  ExponentSeries s(2, n_max);
  for (int n = 0; n <= top; ++n) s.set(random_tensor(n, rng));
  return s;
}

struct TrialResult {
  TrialClass trial_class = TrialClass::generic;
  double pass_residual = 0;
  double fail_residual = 0;
  std::vector<Counterexample> counterexamples;
};

inline TrialResult run_trial(int n_max, int trial, std::uint64_t seed, const ScanOptions& opt) {
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(std::uint64_t(trial))));
  TrialResult out;
  out.trial_class = TrialClass(trial % 4);

  ExponentSeries f(2, n_max), g(2, n_max);
  switch (out.trial_class) {
    case TrialClass::same_second_order:
      f = random_series(n_max, 2, rng);
      g = random_series(n_max, 1, rng);
      g.set(f[2]);
      break;
    case TrialClass::unequal_second_order:
      f = random_series(n_max, 2, rng);
      g = random_series(n_max, 2, rng);
      break;
    case TrialClass::identical_higher_order: {
      f = random_series(n_max, 2, rng);
      std::uniform_int_distribution<int> pick(3, n_max);
      const int order = pick(rng);
      for (int n = 3; n <= n_max; ++n) {
        if (n == order || std::bernoulli_distribution(0.5)(rng)) f.set(random_tensor(n, rng));
      }
      g = f;
      break;
    }
    case TrialClass::generic:
      f = random_series(n_max, n_max, rng);
      g = random_series(n_max, n_max, rng);
      break;
  }
  const bool expected = out.trial_class == TrialClass::same_second_order;

  std::uniform_real_distribution<double> angle(opt.angle_margin,
                                               std::numbers::pi - opt.angle_margin);
  out.fail_residual = INFINITY;
  for (int k = 0; k < opt.angles_per_trial; ++k) {
    const BeamSplitterSpec bs(angle(rng));
    const auto report = check_factorizable(f, g, bs, opt.tolerance);
    const auto direct = direct_condition_residuals(f, g, bs);
    const bool direct_pass = *std::max_element(direct.begin(), direct.end()) <= opt.tolerance;
    if (expected) {
      out.pass_residual = std::max(out.pass_residual, report.max_residual);
    } else {
      out.fail_residual = std::min(out.fail_residual, report.max_residual);
    }
    if (report.factorizable != expected || direct_pass != expected) {
      out.counterexamples.push_back({trial, out.trial_class, bs.theta(), expected,
                                     report.factorizable, direct_pass, report.max_residual});
    }
  }
  return out;
}

}  // namespace detail

/// Runs `trials` independent trials cycling through the four classes. Each
/// trial draws its own generator from (seed, trial), so the report does not
/// depend on the number of workers.
inline ScanReport theorem_scan(int n_max, int trials, std::uint64_t seed,
                               const ScanOptions& opt = {}) {
  if (n_max < 3) throw std::invalid_argument("theorem_scan needs n_max >= 3");
  if (trials < 0) throw std::invalid_argument("trial count must be non-negative");
  ScanReport report;
  report.n_max = n_max;
  report.trials = trials;
  report.seed = seed;
  report.tolerance = opt.tolerance;
  report.angles_per_trial = opt.angles_per_trial;
  if (trials == 0) return report;

  std::vector<detail::TrialResult> results(static_cast<std::size_t>(trials));
  const unsigned workers = std::max(1u, std::min<unsigned>(opt.workers, unsigned(trials)));
  auto work = [&](unsigned w) {
    for (int t = int(w); t < trials; t += int(workers))
      results[std::size_t(t)] = detail::run_trial(n_max, t, seed, opt);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  report.min_fail_residual = INFINITY;
  for (const auto& r : results) {
    report.trials_by_class[std::size_t(r.trial_class)] += 1;
    report.max_pass_residual = std::max(report.max_pass_residual, r.pass_residual);
    report.min_fail_residual = std::min(report.min_fail_residual, r.fail_residual);
    report.counterexamples.insert(report.counterexamples.end(), r.counterexamples.begin(),
                                  r.counterexamples.end());
  }
  return report;
}

}  // namespace interfere
