#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage or input error,
// 2 verdict failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "interfere/acceptance.hpp"
#include "interfere/canonical_json.hpp"
#include "interfere/experiments.hpp"
#include "interfere/moment_tensor.hpp"
#include "interfere/phase_space.hpp"
#include "interfere/series_json.hpp"
#include "interfere/state.hpp"

namespace interfere::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerdict = 2;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline int default_cutoff() {
  const char* env = std::getenv("INTERFERE_CUTOFF");
  if (!env || !*env) return 30;
  const std::string text(env);
  std::size_t used = 0;
  int n = 0;
  try {
    n = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || n < 2) {
    throw UsageError("INTERFERE_CUTOFF must be an integer >= 2, got '" + text + "'");
  }
  return n;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v)) {
      throw UsageError(flag + ": '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag + " needs at least one value");
  return out;
}

inline cplx parse_complex(const std::string& text, const std::string& flag) {
  const auto v = parse_list(text, flag);
  if (v.size() > 2) throw UsageError(flag + " takes <re>[,<im>]");
  return {v[0], v.size() == 2 ? v[1] : 0.0};
}

inline std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read '" + path + "'");
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

struct GridFlags {
  double q_min = -5, q_max = 5, p_min = -5, p_max = 5;
  int steps = 101;

  void add(CLI::App* app) {
    app->add_option("--qmin", q_min, "Lower q bound")->capture_default_str();
    app->add_option("--qmax", q_max, "Upper q bound")->capture_default_str();
    app->add_option("--pmin", p_min, "Lower p bound")->capture_default_str();
    app->add_option("--pmax", p_max, "Upper p bound")->capture_default_str();
    app->add_option("--steps", steps, "Samples per axis")->capture_default_str();
  }
  WignerGridSpec spec() const { return {q_min, q_max, steps, p_min, p_max, steps}; }
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << text;
}

}  // namespace detail

/// Runs one invocation. `out` receives the machine-readable result and
/// `err` diagnostics.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Beam-splitter interference of two-mode quantum states", "interfere"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::string theta_text = "half";
  std::string cutoff_text;
  bool strict = false, reproducible = false, allow_truncation = false;
  unsigned workers = hw;

  auto add_theta = [&](CLI::App* sub) {
    sub->add_option("--theta", theta_text, "Mixing angle in radians, or 'half' for pi/2")
        ->capture_default_str();
  };
  auto add_cutoff = [&](CLI::App* sub) {
    sub->add_option("--cutoff", cutoff_text, "Fock cutoff per mode (default 30 or $INTERFERE_CUTOFF)");
  };

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and print its report");
  std::string state_a, state_b, analyses = "mutual-information", scenario_path, out_dir;
  std::uint64_t seed = 0;
  detail::GridFlags grid;
  simulate->add_option("--state-a", state_a, "Mode-a input descriptor");
  simulate->add_option("--state-b", state_b, "Mode-b input descriptor");
  add_theta(simulate);
  add_cutoff(simulate);
  simulate->add_option("--analyses", analyses, "Comma-separated analyses")->capture_default_str();
  simulate->add_option("--scenario", scenario_path, "Scenario JSON file (replaces the state flags)");
  simulate->add_option("--out", out_dir, "Directory under which the run directory is created");
  simulate->add_option("--seed", seed, "Scenario seed");
  simulate->add_flag("--strict", strict, "Exit 2 when any analysis fails");
  simulate->add_flag("--reproducible", reproducible, "Omit wall time from the report");
  simulate->add_flag("--allow-truncation", allow_truncation, "Accept inputs whose tail exceeds the threshold");
  simulate->add_option("--workers", workers, "Worker threads for grid evaluation");
  grid.add(simulate);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Factorizability sweep over a Gaussian family");
  std::string family = "thermal", values_text, displacement_a = "0", displacement_b = "0", format = "json",
              out_path;
  std::vector<std::string> points_text;
  double squeeze_phase = 0;
  sweep->add_option("--family", family, "thermal | squeezed | gaussian")->capture_default_str();
  sweep->add_option("--values", values_text, "Comma-separated nbar or squeezing amplitudes");
  sweep->add_option("--point", points_text, "gaussian:<mu_re>,<mu_im>,<tau>[,..] grid point (repeatable)");
  sweep->add_option("--squeeze-phase", squeeze_phase, "Phase for the squeezed family");
  sweep->add_option("--displacement-a", displacement_a, "Mode-a displacement <re>[,<im>]");
  sweep->add_option("--displacement-b", displacement_b, "Mode-b displacement <re>[,<im>]");
  add_theta(sweep);
  add_cutoff(sweep);
  sweep->add_option("--format", format, "json | csv")->capture_default_str();
  sweep->add_option("--out", out_path, "Output file (default stdout)");
  sweep->add_option("--workers", workers, "Worker threads");
  sweep->add_flag("--allow-truncation", allow_truncation, "Accept inputs whose tail exceeds the threshold");

  // check-factorizable
  auto* check = app.add_subcommand("check-factorizable", "Moment conditions for two exponent series");
  std::string f_path, g_path;
  double tol = 1e-10;
  check->add_option("--f", f_path, "Mode-a series JSON")->required();
  check->add_option("--g", g_path, "Mode-b series JSON")->required();
  add_theta(check);
  check->add_option("--tol", tol, "Residual tolerance")->capture_default_str();

  // wigner
  auto* wig = app.add_subcommand("wigner", "Wigner function of a single-mode state on a grid");
  std::string state, wformat = "csv";
  detail::GridFlags wgrid;
  wig->add_option("--state", state, "State descriptor")->required();
  add_cutoff(wig);
  wgrid.add(wig);
  wig->add_option("--format", wformat, "csv | json")->capture_default_str();
  wig->add_option("--out", out_path, "Output file (default stdout, summary then goes to stderr)");
  wig->add_flag("--strict", strict, "Exit 1 when the window misses more than 1% of the mass");
  wig->add_option("--workers", workers, "Worker threads");

  // conditional
  auto* cond = app.add_subcommand("conditional", "Heralded state of mode a after counting photons in b");
  double nbar_a = 0.5, nbar_b = 2.0, agreement = 1e-3;
  int project_b = 1;
  cond->add_option("--nbar-a", nbar_a, "Mode-a thermal occupation")->capture_default_str();
  cond->add_option("--nbar-b", nbar_b, "Mode-b thermal occupation")->capture_default_str();
  add_theta(cond);
  add_cutoff(cond);
  cond->add_option("--project-b", project_b, "Photon number detected in mode b")->capture_default_str();
  cond->add_option("--tol", agreement, "Route agreement tolerance")->capture_default_str();

  // self-test
  auto* self = app.add_subcommand("self-test", "Run the acceptance criteria");
  bool fast = false;
  self->add_flag("--fast", fast, "Reduced subset");
  self->add_option("--workers", workers, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const double theta = parse_angle(theta_text);
    auto cutoff = [&]() {
      if (cutoff_text.empty()) return detail::default_cutoff();
      std::size_t used = 0;
      int n = 0;
      try {
        n = std::stoi(cutoff_text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cutoff_text.size() || n < 2) {
        throw UsageError("--cutoff must be an integer >= 2");
      }
      return n;
    };
    workers = std::max(1u, workers);

    if (simulate->parsed()) {
      Scenario s;
      if (!scenario_path.empty()) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(detail::slurp(scenario_path));
        } catch (const nlohmann::json::parse_error& e) {
          throw UsageError(std::string("scenario is not valid JSON: ") + e.what());
        }
        s = Scenario::from_json(j);
      } else {
        if (state_a.empty() || state_b.empty()) {
          throw UsageError("simulate needs --state-a and --state-b (or --scenario)");
        }
        s.state_a = state_a;
        s.state_b = state_b;
        s.theta = theta;
        s.cutoff = cutoff();
        s.analyses = parse_analyses(analyses);
        s.seed = seed;
        s.allow_truncation = allow_truncation;
        s.grid = grid.spec();
        s.validate();
      }
      RunOptions opt;
      if (!out_dir.empty()) opt.output_root = out_dir;
      opt.include_timing = !reproducible;
      opt.workers = workers;
      const auto report = interfere::run(s, opt);
      out << canonical_dump(report.to_json(!reproducible)) << '\n';
      return strict && report.any_failed() ? kExitVerdict : kExitOk;
    }

    if (sweep->parsed()) {
      SweepSpec spec;
      spec.family = parse_family(family);
      if (spec.family == SweepFamily::gaussian) {
        if (points_text.empty()) throw UsageError("the gaussian family needs --point entries");
        for (const auto& p : points_text) {
          auto g = gaussian_params(parse_descriptor(p));
          if (!g) throw UsageError("'" + p + "' is not a Gaussian state");
          g->z0 = {0, 0};
          spec.points.push_back(*g);
        }
      } else {
        if (values_text.empty()) throw UsageError("sweep needs --values");
        spec.values = detail::parse_list(values_text, "--values");
      }
      spec.squeeze_phase = squeeze_phase;
      spec.displacement_a = detail::parse_complex(displacement_a, "--displacement-a");
      spec.displacement_b = detail::parse_complex(displacement_b, "--displacement-b");
      spec.theta = theta;
      spec.cutoff = cutoff();
      spec.allow_truncation = allow_truncation;
      spec.workers = workers;
      if (format != "json" && format != "csv") throw UsageError("--format must be json or csv");
      const auto table = factorizability_sweep(spec);
      std::ostringstream text;
      if (format == "csv") {
        table.write_csv(text);
      } else {
        text << canonical_dump(table.to_json()) << '\n';
      }
      if (out_path.empty()) {
        out << text.str();
      } else {
        detail::write_text(out_path, text.str());
        out << (table.coincides() ? "zero set coincides with the diagonal" : "discordant rows present")
            << '\n';
      }
      return table.coincides() ? kExitOk : kExitVerdict;
    }

    if (check->parsed()) {
      const BeamSplitterSpec bs(theta);
      const auto f = parse_series(detail::slurp(f_path));
      const auto g = parse_series(detail::slurp(g_path));
      const auto rep = check_factorizable(f, g, bs, tol);
      nlohmann::json j{{"theta", theta},
                       {"tolerance", tol},
                       {"max_residual", rep.max_residual},
                       {"residual_by_order", rep.residual_by_order},
                       {"verdict", rep.factorizable ? "pass" : "fail"}};
      out << canonical_dump(j) << '\n';
      return rep.factorizable ? kExitOk : kExitVerdict;
    }

    if (wig->parsed()) {
      if (wformat != "json" && wformat != "csv") throw UsageError("--format must be json or csv");
      const auto prepared = make_state(state, cutoff());
      const auto g = wigner(prepared.state, wgrid.spec(), workers);
      std::ostringstream text;
      if (wformat == "csv") {
        g.write_csv(text);
      } else {
        text << canonical_dump(g.to_json()) << '\n';
      }
      std::ostringstream summary;
      summary.precision(10);
      summary << "min " << g.min() << " integral " << g.integral() << " tail " << prepared.tail_mass << '\n';
      if (out_path.empty()) {
        out << text.str();
        err << summary.str();
      } else {
        detail::write_text(out_path, text.str());
        out << summary.str();
      }
      for (const auto& w : g.warnings) err << "warning: " << w << '\n';
      if (strict && !g.warnings.empty()) return kExitUsage;
      return kExitOk;
    }

    if (cond->parsed()) {
      const auto c = conditional_prep({nbar_a, nbar_b}, BeamSplitterSpec(theta), project_b, cutoff(), agreement);
      out << canonical_dump(c.to_json()) << '\n';
      return c.verdict == Verdict::fail ? kExitVerdict : kExitOk;
    }

    if (self->parsed()) {
      acceptance::Options opt;
      opt.fast = fast;
      opt.workers = workers;
      const auto results = acceptance::run_all(opt, [&](const acceptance::CriterionResult& r) {
        out << acceptance::format_line(r) << '\n' << std::flush;
      });
      const bool ok = acceptance::all_passed(results);
      out << (ok ? "self-test passed" : "self-test FAILED") << '\n';
      return ok ? kExitOk : kExitVerdict;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  err << "error: no subcommand\n";
  return kExitUsage;
}

}  // namespace interfere::cli
