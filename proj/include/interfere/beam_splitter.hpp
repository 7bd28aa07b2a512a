#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace interfere {

/// Lossless two-mode mixer parametrized by the mixing angle theta.
///
/// Transmissivity t = cos(theta/2) and reflectivity r = sin(theta/2). The
/// angles 0 and pi do not mix the modes; they are representable (identity and
/// mode swap up to signs) but reported as trivial.
class BeamSplitterSpec {
 public:
  explicit BeamSplitterSpec(double theta) : theta_(theta) {
    if (!std::isfinite(theta)) {
      throw std::invalid_argument("beam splitter angle must be finite");
    }
  }

  static BeamSplitterSpec balanced() { return BeamSplitterSpec(std::numbers::pi / 2); }

  double theta() const { return theta_; }
  double t() const { return std::cos(theta_ / 2); }
  double r() const { return std::sin(theta_ / 2); }

  // r*t == 0 means the element does not mix the modes.
  bool trivial(double tol = 1e-14) const { return std::abs(r() * t()) <= tol; }

  BeamSplitterSpec inverse() const { return BeamSplitterSpec(-theta_); }

 private:
  double theta_;
};

/// Parses an angle in radians; "half" is the 50:50 alias for pi/2.
inline double parse_angle(const std::string& text) {
  if (text == "half") return std::numbers::pi / 2;
  std::size_t used = 0;
  double value = 0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid angle '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(value)) {
    throw std::invalid_argument("invalid angle '" + text + "'");
  }
  return value;
}

}  // namespace interfere
