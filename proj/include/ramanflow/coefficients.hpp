// coefficients.hpp - synthetic parahydrogen-like coefficient dataset
//
// NOT authoritative molecular data. The tables are generated from a
// single-resonance polarizability model,
//
//   alpha(w) = alpha_static / (1 - (w / w_r)^2),
//
// with a_q = alpha_00(w_q) / (2 hbar), b_q = alpha_11(w_q) / (2 hbar) and
// d_q = alpha_01(w_mid) / (2 hbar) evaluated at the pair's mean frequency.
// With this normalisation N hbar w a / (eps0 c) is the usual (n - 1) w / c
// phase rate of the ground-state gas. The static strengths are chosen to
// put the comb in the coupling-dominated regime on the VUV side and the
// dispersion-dominated regime in the mid-infrared; replace the table with
// real data for quantitative work.

#pragma once

#include <string>

#include "spectrum.hpp"

namespace ramanflow {

struct PolarizabilityModel {
  std::string name;
  double ground_au = 0.0;   // static ground-state polarizability (atomic units)
  double excited_au = 0.0;  // static v=1 polarizability
  double raman_au = 0.0;    // static 0-1 transition polarizability
  double resonance_wavelength_m = 0.0;

  double polarizability(double static_au, double omega) const {
    const double wr = two_pi * phys::c / resonance_wavelength_m;
    const double x = omega / wr;
    if (x >= 1.0) throw ConfigError("ladder frequency above the model resonance in " + name);
    return static_au * phys::au_polarizability / (1.0 - x * x);
  }

  CoefficientTable table_for(const ModeLadder& ladder) const {
    CoefficientTable t;
    t.q_min = ladder.q_min();
    const std::size_t m = ladder.size();
    for (std::size_t i = 0; i < m; ++i) {
      const double w = ladder.angular_frequency(ladder.order(i));
      t.a.push_back(polarizability(ground_au, w) / (2.0 * phys::hbar));
      t.b.push_back(polarizability(excited_au, w) / (2.0 * phys::hbar));
      if (i + 1 < m) {
        const double wm = 0.5 * (w + ladder.angular_frequency(ladder.order(i + 1)));
        t.d.emplace_back(polarizability(raman_au, wm) / (2.0 * phys::hbar), 0.0);
      }
    }
    return t;
  }
};

/// Versioned default dataset. Bump the suffix whenever a number changes.
inline PolarizabilityModel synthetic_parahydrogen() {
  return {"synthetic-parahydrogen-v1", 0.5, 0.535, 0.75, 80.0e-9};
}

}  // namespace ramanflow
