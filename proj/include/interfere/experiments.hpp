#pragma once

// Scenario runner: parses a scenario, prepares the two inputs, sends them
// through the beam splitter and evaluates the requested analyses into a
// structured report. Also the parameter sweep over Gaussian families and
// the two-route conditional preparation.

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "interfere/beam_splitter.hpp"
#include "interfere/canonical_json.hpp"
#include "interfere/fock.hpp"
#include "interfere/gaussian.hpp"
#include "interfere/moment_tensor.hpp"
#include "interfere/phase_space.hpp"
#include "interfere/state.hpp"

namespace interfere {

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TruncationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ------------------------------------------------------------ tolerances

struct Tolerances {
  double mutual_information = 1e-6;
  double trace_distance = 1e-6;
  double moment_residual = 1e-10;
  double covariance_cross = 1e-6;
  double truncation_tail = 1e-6;
  double route_agreement = 1e-3;

  nlohmann::json to_json() const {
    return {{"covariance-cross", covariance_cross},   {"moment-residual", moment_residual},
            {"mutual-information", mutual_information}, {"route-agreement", route_agreement},
            {"trace-distance", trace_distance},       {"truncation-tail", truncation_tail}};
  }

  static Tolerances from_json(const nlohmann::json& j) {
    Tolerances t;
    if (!j.is_object()) throw ScenarioError("'tolerances' must be an object");
    const std::map<std::string, double*> slots{{"covariance-cross", &t.covariance_cross},
                                               {"moment-residual", &t.moment_residual},
                                               {"mutual-information", &t.mutual_information},
                                               {"route-agreement", &t.route_agreement},
                                               {"trace-distance", &t.trace_distance},
                                               {"truncation-tail", &t.truncation_tail}};
    for (const auto& [key, value] : j.items()) {
      const auto it = slots.find(key);
      if (it == slots.end()) throw ScenarioError("unknown tolerance '" + key + "'");
      if (!value.is_number() || !(value.get<double>() > 0)) {
        throw ScenarioError("tolerance '" + key + "' must be a positive number");
      }
      *it->second = value.get<double>();
    }
    return t;
  }
};

// ------------------------------------------------------------ scenario

enum class AnalysisKind {
  mutual_information,
  trace_distance,
  covariance_cross,
  wigner_grid,
  moment_conditions,
  conditional_prep,
};

struct Analysis {
  AnalysisKind kind = AnalysisKind::mutual_information;
  int outcome = 1;  // conditional_prep only

  std::string name() const {
    switch (kind) {
      case AnalysisKind::mutual_information:
        return "mutual-information";
      case AnalysisKind::trace_distance:
        return "trace-distance";
      case AnalysisKind::covariance_cross:
        return "covariance-cross";
      case AnalysisKind::wigner_grid:
        return "wigner-grid";
      case AnalysisKind::moment_conditions:
        return "moment-conditions";
      case AnalysisKind::conditional_prep:
        return "conditional-prep:" + std::to_string(outcome);
    }
    return {};
  }

  static Analysis parse(const std::string& text) {
    static const std::map<std::string, AnalysisKind> names{
        {"mutual-information", AnalysisKind::mutual_information},
        {"trace-distance", AnalysisKind::trace_distance},
        {"covariance-cross", AnalysisKind::covariance_cross},
        {"wigner-grid", AnalysisKind::wigner_grid},
        {"moment-conditions", AnalysisKind::moment_conditions}};
    if (const auto it = names.find(text); it != names.end()) return {it->second, 1};
    const std::string prefix = "conditional-prep";
    if (text == prefix) return {AnalysisKind::conditional_prep, 1};
    if (text.rfind(prefix + ":", 0) == 0) {
      const std::string arg = text.substr(prefix.size() + 1);
      std::size_t used = 0;
      int n = -1;
      try {
        n = std::stoi(arg, &used);
      } catch (const std::exception&) {
      }
      if (used == arg.size() && n >= 0) return {AnalysisKind::conditional_prep, n};
    }
    throw ScenarioError("unknown analysis '" + text + "'");
  }
};

inline std::vector<Analysis> parse_analyses(const std::string& comma_list) {
  std::vector<Analysis> out;
  std::string item;
  std::stringstream in(comma_list);
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw ScenarioError("empty entry in analysis list");
    out.push_back(Analysis::parse(item));
  }
  return out;
}

struct Scenario {
  std::string state_a = "vacuum";
  std::string state_b = "vacuum";
  double theta = std::numbers::pi / 2;
  int cutoff = 30;
  std::vector<Analysis> analyses;
  std::uint64_t seed = 0;
  Tolerances tolerances;
  bool allow_truncation = false;
  WignerGridSpec grid;

  void validate() const {
    parse_descriptor(state_a);
    parse_descriptor(state_b);
    (void)BeamSplitterSpec(theta);
    if (cutoff < 2) throw ScenarioError("cutoff must be at least 2");
    if (analyses.empty()) throw ScenarioError("scenario needs at least one analysis");
    std::set<std::string> seen;
    for (const auto& a : analyses) {
      if (!seen.insert(a.name()).second) {
        throw ScenarioError("analysis '" + a.name() + "' requested twice");
      }
      if (a.kind == AnalysisKind::conditional_prep && a.outcome >= cutoff) {
        throw ScenarioError("conditional-prep outcome must be below the cutoff");
      }
    }
    grid.validate();
  }

  nlohmann::json to_json() const {
    nlohmann::json names = nlohmann::json::array();
    for (const auto& a : analyses) names.push_back(a.name());
    return {{"state_a", state_a},
            {"state_b", state_b},
            {"theta", theta},
            {"cutoff", cutoff},
            {"analyses", names},
            {"seed", seed},
            {"tolerances", tolerances.to_json()},
            {"allow_truncation", allow_truncation},
            {"grid",
             {{"q_min", grid.q_min},
              {"q_max", grid.q_max},
              {"q_steps", grid.q_steps},
              {"p_min", grid.p_min},
              {"p_max", grid.p_max},
              {"p_steps", grid.p_steps}}}};
  }

  static Scenario from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
    static const std::set<std::string> known{"state_a", "state_b",    "theta",
                                             "cutoff",  "analyses",   "seed",
                                             "tolerances", "allow_truncation", "grid"};
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw ScenarioError("unknown scenario field '" + key + "'");
    }
    Scenario s;
    try {
      if (j.contains("state_a")) s.state_a = j.at("state_a").get<std::string>();
      if (j.contains("state_b")) s.state_b = j.at("state_b").get<std::string>();
      if (j.contains("theta")) {
        const auto& t = j.at("theta");
        s.theta = t.is_string() ? parse_angle(t.get<std::string>()) : t.get<double>();
      }
      if (j.contains("cutoff")) s.cutoff = j.at("cutoff").get<int>();
      if (j.contains("analyses")) {
        for (const auto& a : j.at("analyses")) s.analyses.push_back(Analysis::parse(a.get<std::string>()));
      }
      if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("tolerances")) s.tolerances = Tolerances::from_json(j.at("tolerances"));
      if (j.contains("allow_truncation")) s.allow_truncation = j.at("allow_truncation").get<bool>();
      if (j.contains("grid")) {
        const auto& g = j.at("grid");
        s.grid.q_min = g.value("q_min", s.grid.q_min);
        s.grid.q_max = g.value("q_max", s.grid.q_max);
        s.grid.p_min = g.value("p_min", s.grid.p_min);
        s.grid.p_max = g.value("p_max", s.grid.p_max);
        const int steps = g.value("steps", s.grid.q_steps);
        s.grid.q_steps = g.value("q_steps", steps);
        s.grid.p_steps = g.value("p_steps", steps);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ScenarioError(std::string("malformed scenario: ") + e.what());
    }
    s.validate();
    return s;
  }

  /// Content hash of the canonical serialization.
  std::string run_id() const { return "run-" + hex64(fnv1a64(canonical_dump(to_json()))); }
};

// ------------------------------------------------------------ report

enum class Verdict { pass, fail, skipped };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::skipped:
      return "skipped";
  }
  return "unknown";
}

struct AnalysisResult {
  std::string name;
  Verdict verdict = Verdict::skipped;
  std::string label;   // e.g. "independent" / "correlated"
  std::string reason;  // why it was skipped or errored
  nlohmann::json values = nlohmann::json::object();
  std::vector<std::string> artifacts;  // relative to the run directory

  nlohmann::json to_json() const {
    nlohmann::json j{{"name", name}, {"verdict", to_string(verdict)}, {"values", values},
                     {"artifacts", artifacts}};
    if (!label.empty()) j["label"] = label;
    if (!reason.empty()) j["reason"] = reason;
    return j;
  }
};

struct RunReport {
  Scenario scenario;
  std::string run_id;
  std::vector<AnalysisResult> analyses;
  double tail_mass_a = 0;
  double tail_mass_b = 0;
  nlohmann::json classicality = nlohmann::json::object();
  double wall_time = 0;
  std::optional<std::filesystem::path> run_dir;

  bool any_failed() const {
    return std::any_of(analyses.begin(), analyses.end(),
                       [](const auto& a) { return a.verdict == Verdict::fail; });
  }

  const AnalysisResult& at(const std::string& name) const {
    for (const auto& a : analyses)
      if (a.name == name) return a;
    throw std::out_of_range("no analysis '" + name + "' in the report");
  }

  nlohmann::json to_json(bool include_timing = true) const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& a : analyses) list.push_back(a.to_json());
    nlohmann::json j{{"scenario", scenario.to_json()},
                     {"run_id", run_id},
                     {"analyses", list},
                     {"truncation",
                      {{"tail_mass_a", tail_mass_a},
                       {"tail_mass_b", tail_mass_b},
                       {"threshold", scenario.tolerances.truncation_tail},
                       {"allow_truncation", scenario.allow_truncation}}},
                     {"classicality", classicality}};
    if (include_timing) j["wall_time_s"] = wall_time;
    return j;
  }
};

// ------------------------------------------------------ conditional prep

struct ConditionalPrepResult {
  ThermalPair pair;
  double theta = 0;
  int outcome = 1;
  std::vector<double> fock_populations;
  double fock_probability = 0;
  double fock_mean_photon = 0;
  double fock_excess_kurtosis = 0;
  std::optional<ConditionalPState> closed_form;
  std::string closed_form_skipped;
  double route_agreement = 0;  // max population difference between routes
  Verdict verdict = Verdict::skipped;

  nlohmann::json to_json() const {
    nlohmann::json j{{"nbar_a", pair.nbar_a},
                     {"nbar_b", pair.nbar_b},
                     {"theta", theta},
                     {"outcome", outcome},
                     {"fock",
                      {{"populations", fock_populations},
                       {"probability", fock_probability},
                       {"mean_photon", fock_mean_photon},
                       {"excess_kurtosis", fock_excess_kurtosis}}},
                     {"verdict", to_string(verdict)}};
    if (closed_form) {
      std::vector<double> pops;
      for (int n = 0; n < closed_form->state.cutoff(); ++n) pops.push_back(closed_form->state(n, n).real());
      j["closed_form"] = {{"populations", pops},
                          {"probability", closed_form->probability},
                          {"mean_photon", closed_form->mean_photon},
                          {"excess_kurtosis", quadrature_excess_kurtosis(closed_form->state)},
                          {"radial_nodes", closed_form->radial_nodes},
                          {"angular_nodes", closed_form->angular_nodes}};
      j["route_agreement"] = route_agreement;
    } else {
      j["closed_form_skipped"] = closed_form_skipped;
    }
    return j;
  }
};

/// Heralded state of mode a after finding `outcome` photons in mode b, by
/// the Fock simulation and, for one photon, by the closed-form P-function.
/// `output` may supply the already-propagated two-mode state.
inline ConditionalPrepResult conditional_prep(const ThermalPair& pair, const BeamSplitterSpec& bs,
                                              int outcome, int cutoff,
                                              double agreement_tolerance = 1e-3,
                                              const DensityMatrix* output = nullptr) {
  if (outcome < 0 || outcome >= cutoff) {
    throw std::invalid_argument("conditioning outcome must lie in [0, cutoff)");
  }
  if (pair.nbar_a < 0 || pair.nbar_b < 0) throw std::domain_error("negative thermal occupation");
  ConditionalPrepResult r;
  r.pair = pair;
  r.theta = bs.theta();
  r.outcome = outcome;

  auto thermal = [cutoff](double nbar) {
    StateDescriptor d;
    d.kind = nbar == 0 ? StateDescriptor::Kind::vacuum : StateDescriptor::Kind::thermal;
    d.nbar = nbar;
    return make_state(d, cutoff).state;
  };
  std::optional<DensityMatrix> local;
  if (!output) {
    local = apply_beamsplitter(tensor_product(thermal(pair.nbar_a), thermal(pair.nbar_b)), bs);
    output = &*local;
  }
  const auto heralded = project_mode(*output, Mode::b, outcome);
  for (int n = 0; n < cutoff; ++n) {
    r.fock_populations.push_back(heralded.state(n, n).real());
    r.fock_mean_photon += n * heralded.state(n, n).real();
  }
  r.fock_probability = heralded.probability;
  r.fock_excess_kurtosis = quadrature_excess_kurtosis(heralded.state);

  if (outcome != 1) {
    r.closed_form_skipped = "closed form exists only for the one-photon outcome";
  } else if (pair.nbar_a == 0 || pair.nbar_b == 0) {
    r.closed_form_skipped = "an input with nbar = 0 is the vacuum; the closed form needs nbar > 0";
  } else if (bs.trivial()) {
    r.closed_form_skipped = "beam splitter does not mix the modes";
  }
  if (!r.closed_form_skipped.empty()) {
    r.verdict = Verdict::skipped;
    return r;
  }
  r.closed_form = conditional_p_state(pair, bs, cutoff);
  for (int n = 0; n < cutoff; ++n) {
    r.route_agreement = std::max(
        r.route_agreement, std::abs(r.closed_form->state(n, n).real() - r.fock_populations[std::size_t(n)]));
  }
  r.verdict = r.route_agreement <= agreement_tolerance ? Verdict::pass : Verdict::fail;
  return r;
}

// ------------------------------------------------------------ run

struct RunOptions {
  std::optional<std::filesystem::path> output_root;  // artifacts are written only when set
  bool include_timing = true;
  unsigned workers = 1;
};

namespace detail {

inline std::optional<ThermalPair> thermal_pair(const StateDescriptor& a, const StateDescriptor& b) {
  auto nbar = [](const StateDescriptor& d) -> std::optional<double> {
    if (d.kind == StateDescriptor::Kind::thermal) return d.nbar;
    if (d.kind == StateDescriptor::Kind::vacuum) return 0.0;
    if (d.kind == StateDescriptor::Kind::fock && d.photons == 0) return 0.0;
    return std::nullopt;
  };
  const auto na = nbar(a), nb = nbar(b);
  if (!na || !nb) return std::nullopt;
  return ThermalPair{*na, *nb};
}

inline nlohmann::json classicality(const std::optional<ThermalPair>& pair,
                                   const BeamSplitterSpec& bs) {
  if (!pair) {
    return {{"applicable", false}, {"reason", "inputs are not both thermal"}};
  }
  if (pair->nbar_a == 0 || pair->nbar_b == 0) {
    return {{"applicable", false},
            {"reason", "an input with nbar = 0 is the vacuum; the P-function form needs nbar > 0"}};
  }
  const double lim = 3 * std::sqrt(std::max(pair->nbar_a, pair->nbar_b));
  const int k = 9;
  double pmin = INFINITY;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (int l = 0; l < k; ++l)
        for (int m = 0; m < k; ++m) {
          auto x = [&](int s) { return -lim + 2 * lim * s / (k - 1); };
          pmin = std::min(pmin, p_function_thermal_mix(*pair, bs, {x(i), x(j)}, {x(l), x(m)}));
        }
  return {{"applicable", true}, {"p_function_min", pmin}, {"classically_correlated", pmin >= 0}};
}

}  // namespace detail

inline RunReport run(const Scenario& s, const RunOptions& opt = {}) {
  s.validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.scenario = s;
  report.run_id = s.run_id();
  const BeamSplitterSpec bs(s.theta);
  const StateDescriptor da = parse_descriptor(s.state_a), db = parse_descriptor(s.state_b);

  const PreparedState pa = make_state(da, s.cutoff), pb = make_state(db, s.cutoff);
  report.tail_mass_a = pa.tail_mass;
  report.tail_mass_b = pb.tail_mass;
  using Tail = std::pair<const char*, double>;
  for (auto [name, tail] : {Tail{"state_a", pa.tail_mass}, Tail{"state_b", pb.tail_mass}}) {
    if (tail > s.tolerances.truncation_tail && !s.allow_truncation) {
      throw TruncationError(std::string(name) + " leaves " + std::to_string(tail) +
                            " of its population above cutoff " + std::to_string(s.cutoff) +
                            "; raise the cutoff or allow truncation");
    }
  }

  if (opt.output_root) {
    report.run_dir = *opt.output_root / report.run_id;
    std::filesystem::create_directories(*report.run_dir);
  }

  std::optional<DensityMatrix> out;
  auto output = [&]() -> const DensityMatrix& {
    if (!out) out = apply_beamsplitter(tensor_product(pa.state, pb.state), bs);
    return *out;
  };
  const auto ga = gaussian_params(da), gb = gaussian_params(db);
  const auto pair = detail::thermal_pair(da, db);
  report.classicality = detail::classicality(pair, bs);

  for (const auto& analysis : s.analyses) {
    AnalysisResult r;
    r.name = analysis.name();
    try {
      switch (analysis.kind) {
        case AnalysisKind::mutual_information: {
          const double mi = mutual_information(output());
          r.values["mutual_information"] = mi;
          if (ga && gb) {
            r.values["gaussian_oracle"] = gaussian_mutual_information(bs_transform_covariance(
                product_state(gaussian_to_moments(*ga), gaussian_to_moments(*gb)), bs));
          }
          r.verdict = mi < s.tolerances.mutual_information ? Verdict::pass : Verdict::fail;
          r.label = r.verdict == Verdict::pass ? "independent" : "correlated";
          break;
        }
        case AnalysisKind::trace_distance: {
          const double td = distance_to_product(output());
          r.values["trace_distance"] = td;
          r.verdict = td < s.tolerances.trace_distance ? Verdict::pass : Verdict::fail;
          r.label = r.verdict == Verdict::pass ? "independent" : "correlated";
          break;
        }
        case AnalysisKind::covariance_cross: {
          if (!ga || !gb) {
            r.reason = "covariance analysis needs two Gaussian inputs";
            break;
          }
          const auto cov = bs_transform_covariance(
              product_state(gaussian_to_moments(*ga), gaussian_to_moments(*gb)), bs);
          const double norm = covariance_cross_norm(cov);
          r.values["cross_norm"] = norm;
          r.values["fock_cross_norm"] = covariance_cross_norm(fock_moments(output()));
          r.verdict = norm < s.tolerances.covariance_cross ? Verdict::pass : Verdict::fail;
          r.label = r.verdict == Verdict::pass ? "independent" : "correlated";
          break;
        }
        case AnalysisKind::wigner_grid: {
          bool ok = true;
          for (Mode m : {Mode::a, Mode::b}) {
            const auto grid = wigner(partial_trace(output(), m), s.grid, opt.workers);
            const std::string tag = to_string(m);
            r.values["min_" + tag] = grid.min();
            r.values["integral_" + tag] = grid.integral();
            if (!grid.warnings.empty()) r.values["warnings_" + tag] = grid.warnings;
            ok = ok && grid.min() >= -1 / std::numbers::pi - 1e-9;
            if (report.run_dir) {
              const std::string file = "wigner_" + tag + ".csv";
              std::ofstream f(*report.run_dir / file);
              grid.write_csv(f);
              r.artifacts.push_back(file);
            }
          }
          r.verdict = ok ? Verdict::pass : Verdict::fail;
          break;
        }
        case AnalysisKind::moment_conditions: {
          if (!ga || !gb) {
            r.reason = "moment conditions need the exponent series of two Gaussian inputs";
            break;
          }
          if (bs.trivial()) {
            r.reason = "beam splitter with r*t = 0 is excluded from the moment conditions";
            break;
          }
          const auto rep = check_factorizable(exponent_series(*ga), exponent_series(*gb), bs,
                                              s.tolerances.moment_residual);
          r.values["max_residual"] = rep.max_residual;
          r.values["residual_by_order"] = rep.residual_by_order;
          r.verdict = rep.factorizable ? Verdict::pass : Verdict::fail;
          r.label = rep.factorizable ? "factorizable" : "not factorizable";
          break;
        }
        case AnalysisKind::conditional_prep: {
          if (!pair) {
            r.reason = "conditional preparation needs thermal (or vacuum) inputs";
            break;
          }
          const auto c = conditional_prep(*pair, bs, analysis.outcome, s.cutoff,
                                          s.tolerances.route_agreement, &output());
          r.values = c.to_json();
          r.verdict = c.verdict;
          if (c.verdict == Verdict::skipped) r.reason = c.closed_form_skipped;
          break;
        }
      }
    } catch (const std::exception& e) {
      r.verdict = Verdict::fail;
      r.reason = std::string("error: ") + e.what();
    }
    report.analyses.push_back(std::move(r));
  }

  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (report.run_dir) {
    std::ofstream f(*report.run_dir / "report.json");
    f << canonical_dump(report.to_json(opt.include_timing)) << '\n';
  }
  return report;
}

// ------------------------------------------------------------ sweep

enum class SweepFamily { thermal, squeezed, gaussian };

inline SweepFamily parse_family(const std::string& name) {
  if (name == "thermal") return SweepFamily::thermal;
  if (name == "squeezed") return SweepFamily::squeezed;
  if (name == "gaussian") return SweepFamily::gaussian;
  throw ScenarioError("unknown sweep family '" + name + "'");
}

struct SweepSpec {
  SweepFamily family = SweepFamily::thermal;
  std::vector<double> values;         // nbar or squeezing amplitude per grid point
  std::vector<GaussianParams> points;  // gaussian family
  double squeeze_phase = 0;
  cplx displacement_a{0, 0};
  cplx displacement_b{0, 0};
  double theta = std::numbers::pi / 2;
  int cutoff = 30;
  bool allow_truncation = false;
  Tolerances tolerances;
  unsigned workers = 1;

  /// Grid points as Gaussian parameters without displacement.
  std::vector<GaussianParams> grid() const {
    if (family == SweepFamily::gaussian) return points;
    std::vector<GaussianParams> out;
    for (double v : values) {
      if (v < 0) throw ScenarioError("sweep parameters must be non-negative");
      out.push_back(family == SweepFamily::thermal ? GaussianParams::thermal(v)
                                                   : GaussianParams::squeezed(v, squeeze_phase));
    }
    return out;
  }
};

struct SweepRow {
  std::size_t index_a = 0, index_b = 0;
  std::string state_a, state_b;
  double mutual_information = 0;
  double gaussian_mutual_information = 0;
  double cross_norm = 0;
  double moment_residual = 0;
  bool on_diagonal = false;
  bool consistent = false;  // MI, cross norm and moments all agree with the diagonal test
};

struct SweepTable {
  std::vector<SweepRow> rows;
  double max_tail_mass = 0;
  bool coincides() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.consistent; });
  }

  nlohmann::json to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& r : rows) {
      list.push_back({{"state_a", r.state_a},
                      {"state_b", r.state_b},
                      {"mutual_information", r.mutual_information},
                      {"gaussian_mutual_information", r.gaussian_mutual_information},
                      {"cross_norm", r.cross_norm},
                      {"moment_residual", r.moment_residual},
                      {"on_diagonal", r.on_diagonal},
                      {"verdict", r.consistent ? "consistent" : "discordant"}});
    }
    return {{"rows", list}, {"coincides", coincides()}, {"max_tail_mass", max_tail_mass}};
  }

  void write_csv(std::ostream& out) const {
    out << "state_a,state_b,mutual_information,cross_norm,moment_residual,on_diagonal,verdict\n";
    out.precision(17);
    for (const auto& r : rows) {
      out << '"' << r.state_a << "\",\"" << r.state_b << "\"," << r.mutual_information << ','
          << r.cross_norm << ',' << r.moment_residual << ',' << (r.on_diagonal ? 1 : 0) << ','
          << (r.consistent ? "consistent" : "discordant") << '\n';
    }
  }
};

/// Every ordered pair of grid points through the beam splitter. The zero set
/// of the mutual information must be the diagonal (equal mu and tau;
/// displacements are ignored).
inline SweepTable factorizability_sweep(const SweepSpec& spec) {
  const auto grid = spec.grid();
  if (grid.empty()) throw ScenarioError("sweep grid is empty");
  const BeamSplitterSpec bs(spec.theta);
  require_mixing(bs);

  auto displaced = [](GaussianParams g, cplx z) {
    g.z0 = z;
    return g;
  };
  SweepTable table;
  std::vector<DensityMatrix> states_a, states_b;
  for (const auto& g : grid) {
    using Slot = std::pair<cplx, std::vector<DensityMatrix>*>;
    for (auto [z, bucket] : {Slot{spec.displacement_a, &states_a}, Slot{spec.displacement_b, &states_b}}) {
      const auto prepared = gaussian_to_fock(displaced(g, z), spec.cutoff);
      table.max_tail_mass = std::max(table.max_tail_mass, prepared.tail_mass);
      if (prepared.tail_mass > spec.tolerances.truncation_tail && !spec.allow_truncation) {
        throw TruncationError(to_descriptor(displaced(g, z)) + " leaves " +
                              std::to_string(prepared.tail_mass) +
                              " of its population above the cutoff; raise it or allow truncation");
      }
      bucket->push_back(prepared.state);
    }
  }
  const RealMatrix u = beamsplitter_unitary(spec.cutoff, bs);

  const std::size_t n = grid.size();
  table.rows.resize(n * n);
  auto work = [&](unsigned w, unsigned workers) {
    for (std::size_t k = w; k < n * n; k += workers) {
      const std::size_t i = k / n, j = k % n;
      SweepRow& row = table.rows[k];
      const auto ga = displaced(grid[i], spec.displacement_a);
      const auto gb = displaced(grid[j], spec.displacement_b);
      row.index_a = i;
      row.index_b = j;
      row.state_a = to_descriptor(ga);
      row.state_b = to_descriptor(gb);
      row.mutual_information = mutual_information(apply_unitary(tensor_product(states_a[i], states_b[j]), u));
      const auto cov = bs_transform_covariance(
          product_state(gaussian_to_moments(ga), gaussian_to_moments(gb)), bs);
      row.gaussian_mutual_information = gaussian_mutual_information(cov);
      row.cross_norm = covariance_cross_norm(cov);
      row.moment_residual =
          check_factorizable(exponent_series(ga), exponent_series(gb), bs, spec.tolerances.moment_residual)
              .max_residual;
      row.on_diagonal = std::abs(grid[i].mu - grid[j].mu) < 1e-12 &&
                        std::abs(grid[i].tau - grid[j].tau) < 1e-12;
      const bool mi_zero = row.mutual_information < spec.tolerances.mutual_information;
      const bool cross_zero = row.cross_norm < spec.tolerances.covariance_cross;
      const bool moments_zero = row.moment_residual <= spec.tolerances.moment_residual;
      row.consistent = mi_zero == row.on_diagonal && cross_zero == row.on_diagonal &&
                       moments_zero == row.on_diagonal;
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(spec.workers, unsigned(n * n)));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }
  return table;
}

}  // namespace interfere
