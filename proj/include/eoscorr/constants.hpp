#pragma once

#include <numbers>

namespace eoscorr {

// CODATA 2018 / SI-2019 exact values. Fixed, never configurable; all internal
// physics is SI, outputs are labeled in fs / THz / V/m / uW where convenient.
struct PhysicalConstants {
  double h = 6.62607015e-34;        // Planck constant, J s (exact)
  double hbar = 6.62607015e-34 / (2.0 * std::numbers::pi);  // J s
  double c = 299792458.0;           // vacuum speed of light, m/s (exact)
  double eps0 = 8.8541878128e-12;   // vacuum permittivity, F/m
  double e_charge = 1.602176634e-19;  // elementary charge, C (exact)
};

inline constexpr PhysicalConstants kConst{};

}  // namespace eoscorr
