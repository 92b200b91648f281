// constants.hpp - physical constants (SI) and boundary unit conversions

#pragma once

#include <cmath>
#include <numbers>

namespace ramanflow {

namespace phys {
inline constexpr double c = 299792458.0;             // m/s
inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double eps0 = 8.8541878128e-12;     // F/m
inline constexpr double au_polarizability = 1.64877727436e-41;  // C m^2 / V
}  // namespace phys

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

namespace units {
inline constexpr double nm = 1e-9;
inline constexpr double um = 1e-6;
inline constexpr double mm = 1e-3;
inline constexpr double cm = 1e-2;
inline constexpr double ns = 1e-9;
inline constexpr double thz = 1e12;
inline constexpr double ghz = 1e9;
inline constexpr double mhz = 1e6;
inline constexpr double per_cm3 = 1e6;        // cm^-3 -> m^-3
inline constexpr double gw_per_cm2 = 1e13;    // GW/cm^2 -> W/m^2
}  // namespace units

/// Peak field amplitude (V/m) for a plane-wave intensity I = eps0 c |E|^2 / 2.
inline double amplitude_from_intensity(double intensity_w_m2) {
  return std::sqrt(2.0 * intensity_w_m2 / (phys::eps0 * phys::c));
}

inline double intensity_from_amplitude(double amplitude_v_m) {
  return 0.5 * phys::eps0 * phys::c * amplitude_v_m * amplitude_v_m;
}

/// Wraps an angle into (-pi, pi].
inline double wrap_phase(double phi) {
  double w = std::remainder(phi, two_pi);
  if (w <= -pi) w += two_pi;
  return w;
}

}  // namespace ramanflow
