#pragma once

// State-descriptor mini-language shared by the library and the CLI:
//
//   vacuum
//   fock:<n>
//   coherent:<re>[,<im>]
//   thermal:<nbar>
//   squeezed:<amp>,<phase>
//   gaussian:<mu_re>,<mu_im>,<tau>,<z0_re>,<z0_im>

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "interfere/fock.hpp"
#include "interfere/gaussian.hpp"

namespace interfere {

class DescriptorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct StateDescriptor {
  enum class Kind { vacuum, fock, coherent, thermal, squeezed, gaussian };

  Kind kind = Kind::vacuum;
  int photons = 0;          // fock
  cplx alpha{0, 0};         // coherent
  double nbar = 0;          // thermal
  double amplitude = 0;     // squeezed
  double phase = 0;         // squeezed
  GaussianParams gaussian;  // gaussian
};

namespace detail {

inline std::vector<double> parse_numbers(std::string_view text, std::string_view full) {
  std::vector<double> out;
  std::string item;
  std::stringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size() || !std::isfinite(v)) {
      throw DescriptorError("malformed number '" + item + "' in state descriptor '" +
                            std::string(full) + "'");
    }
    out.push_back(v);
  }
  if (!text.empty() && text.back() == ',') {
    throw DescriptorError("trailing comma in state descriptor '" + std::string(full) + "'");
  }
  return out;
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline StateDescriptor parse_descriptor(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view tail = colon == std::string_view::npos ? "" : text.substr(colon + 1);
  const bool has_args = colon != std::string_view::npos;

  auto args = [&](std::size_t lo, std::size_t hi) {
    if (!has_args || tail.empty()) {
      throw DescriptorError("state descriptor '" + std::string(text) + "' needs arguments");
    }
    auto v = detail::parse_numbers(tail, text);
    if (v.size() < lo || v.size() > hi) {
      throw DescriptorError("wrong number of arguments in state descriptor '" +
                            std::string(text) + "'");
    }
    return v;
  };

  StateDescriptor d;
  if (head == "vacuum") {
    if (has_args) throw DescriptorError("'vacuum' takes no arguments");
    d.kind = StateDescriptor::Kind::vacuum;
  } else if (head == "fock") {
    const auto v = args(1, 1);
    if (v[0] < 0 || v[0] != std::floor(v[0])) {
      throw DescriptorError("fock photon number must be a non-negative integer");
    }
    d.kind = StateDescriptor::Kind::fock;
    d.photons = int(v[0]);
  } else if (head == "coherent") {
    const auto v = args(1, 2);
    d.kind = StateDescriptor::Kind::coherent;
    d.alpha = cplx(v[0], v.size() > 1 ? v[1] : 0.0);
  } else if (head == "thermal") {
    const auto v = args(1, 1);
    if (v[0] < 0) throw DescriptorError("thermal occupation must be non-negative");
    d.kind = StateDescriptor::Kind::thermal;
    d.nbar = v[0];
  } else if (head == "squeezed") {
    const auto v = args(2, 2);
    if (v[0] < 0) throw DescriptorError("squeezing amplitude must be non-negative");
    d.kind = StateDescriptor::Kind::squeezed;
    d.amplitude = v[0];
    d.phase = v[1];
  } else if (head == "gaussian") {
    const auto v = args(5, 5);
    d.kind = StateDescriptor::Kind::gaussian;
    d.gaussian = GaussianParams{cplx(v[0], v[1]), v[2], cplx(v[3], v[4])};
    if (!d.gaussian.physical()) {
      throw DescriptorError("gaussian parameters in '" + std::string(text) + "' are unphysical");
    }
  } else {
    throw DescriptorError("unknown state descriptor '" + std::string(text) + "'");
  }
  return d;
}

inline std::string to_string(const StateDescriptor& d) {
  using detail::format_number;
  switch (d.kind) {
    case StateDescriptor::Kind::vacuum:
      return "vacuum";
    case StateDescriptor::Kind::fock:
      return "fock:" + std::to_string(d.photons);
    case StateDescriptor::Kind::coherent:
      return "coherent:" + format_number(d.alpha.real()) + "," + format_number(d.alpha.imag());
    case StateDescriptor::Kind::thermal:
      return "thermal:" + format_number(d.nbar);
    case StateDescriptor::Kind::squeezed:
      return "squeezed:" + format_number(d.amplitude) + "," + format_number(d.phase);
    case StateDescriptor::Kind::gaussian:
      return "gaussian:" + format_number(d.gaussian.mu.real()) + "," +
             format_number(d.gaussian.mu.imag()) + "," + format_number(d.gaussian.tau) + "," +
             format_number(d.gaussian.z0.real()) + "," + format_number(d.gaussian.z0.imag());
  }
  return {};
}

inline std::string to_descriptor(const GaussianParams& g) {
  StateDescriptor d;
  d.kind = StateDescriptor::Kind::gaussian;
  d.gaussian = g;
  return to_string(d);
}

/// Gaussian parameters of the described state, if it is Gaussian.
inline std::optional<GaussianParams> gaussian_params(const StateDescriptor& d) {
  switch (d.kind) {
    case StateDescriptor::Kind::vacuum:
      return GaussianParams::vacuum();
    case StateDescriptor::Kind::fock:
      if (d.photons == 0) return GaussianParams::vacuum();
      return std::nullopt;
    case StateDescriptor::Kind::coherent:
      return GaussianParams::coherent(d.alpha);
    case StateDescriptor::Kind::thermal:
      return GaussianParams::thermal(d.nbar);
    case StateDescriptor::Kind::squeezed:
      return GaussianParams::squeezed(d.amplitude, d.phase);
    case StateDescriptor::Kind::gaussian:
      return d.gaussian;
  }
  return std::nullopt;
}

inline PreparedState make_state(const StateDescriptor& d, int cutoff) {
  if (cutoff < 2) throw std::invalid_argument("cutoff must be at least 2");
  switch (d.kind) {
    case StateDescriptor::Kind::vacuum:
      return {DensityMatrix::vacuum(1, cutoff), 0.0};
    case StateDescriptor::Kind::fock: {
      if (d.photons >= cutoff) {
        throw DescriptorError("fock:" + std::to_string(d.photons) + " needs cutoff > " +
                              std::to_string(d.photons));
      }
      ComplexMatrix m = ComplexMatrix::Zero(cutoff, cutoff);
      m(d.photons, d.photons) = 1.0;
      return {DensityMatrix(1, cutoff, std::move(m)), 0.0};
    }
    case StateDescriptor::Kind::coherent: {
      // e^{-|alpha|^2/2} alpha^n / sqrt(n!) by recurrence
      ComplexVector psi(cutoff);
      psi(0) = std::exp(-0.5 * std::norm(d.alpha));
      for (int n = 1; n < cutoff; ++n) psi(n) = psi(n - 1) * d.alpha / std::sqrt(double(n));
      const double kept = psi.squaredNorm();
      const double tail = std::max(0.0, 1.0 - kept);
      return {DensityMatrix::from_pure(1, cutoff, psi / std::sqrt(kept)), tail};
    }
    case StateDescriptor::Kind::thermal: {
      // p_n = nbar^n / (1 + nbar)^(n+1); the mass at n >= N is (nbar/(1+nbar))^N.
      ComplexMatrix m = ComplexMatrix::Zero(cutoff, cutoff);
      const double x = d.nbar / (1 + d.nbar);
      double p = 1 / (1 + d.nbar), kept = 0;
      for (int n = 0; n < cutoff; ++n) {
        m(n, n) = p;
        kept += p;
        p *= x;
      }
      return {DensityMatrix(1, cutoff, m / kept), std::pow(x, cutoff)};
    }
    case StateDescriptor::Kind::squeezed:
    case StateDescriptor::Kind::gaussian:
      return gaussian_to_fock(*gaussian_params(d), cutoff);
  }
  throw std::logic_error("unhandled descriptor kind");
}

inline PreparedState make_state(std::string_view descriptor, int cutoff) {
  return make_state(parse_descriptor(descriptor), cutoff);
}

}  // namespace interfere
