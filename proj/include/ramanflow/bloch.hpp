// bloch.hpp - two-level optical Bloch equations for the Raman coherence
//
//   d rho00/dtau = i (W rho01* - W* rho01) + gamma_a rho11
//   d rho11/dtau = -i (W rho01* - W* rho01) - gamma_b rho11
//   d rho01/dtau = i (S0 - S1 + delta + i gamma_c) rho01 + i W (rho11 - rho00)
//
// with S0, S1 the ac-Stark shifts and W the two-photon Rabi frequency built
// from the field comb:
//
//   S0 = k sum a_q |E_q|^2,  S1 = k sum b_q |E_q|^2,  W = k sum d_q E_q E_{q+1}^*
//
// W pairs E_q with the conjugate of its upper neighbour. This is the pairing
// for which the medium absorbs exactly the energy the fields lose through the
// d-terms of the propagation equation, and for which a common group delay of
// all orders leaves the flow phases unchanged.

#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rk4.hpp"
#include "spectrum.hpp"

namespace ramanflow {

struct RabiSample {
  double stark_ground = 0.0;   // rad/s
  double stark_excited = 0.0;  // rad/s
  cplx two_photon{};           // rad/s

  RabiSample& operator+=(const RabiSample& o) {
    stark_ground += o.stark_ground;
    stark_excited += o.stark_excited;
    two_photon += o.two_photon;
    return *this;
  }
};

inline RabiSample lerp(const RabiSample& a, const RabiSample& b, double t) {
  return {a.stark_ground + t * (b.stark_ground - a.stark_ground),
          a.stark_excited + t * (b.stark_excited - a.stark_excited),
          a.two_photon + t * (b.two_photon - a.two_photon)};
}

/// Per-tau Rabi terms.
using RabiTerms = std::vector<RabiSample>;

/// Adds the contribution of one field series to existing Rabi terms.
inline void accumulate_rabi(RabiTerms& terms, const FieldState& fs, const LadderCoupling& lc,
                            double rabi_scale) {
  if (terms.size() != fs.samples()) terms.resize(fs.samples());
  const std::size_t m = fs.orders();
  for (std::size_t j = 0; j < fs.samples(); ++j) {
    RabiSample r;
    for (std::size_t i = 0; i < m; ++i) {
      const double e2 = std::norm(fs.amplitude(i, j));
      r.stark_ground += lc.a[i] * e2;
      r.stark_excited += lc.b[i] * e2;
      if (i + 1 < m) r.two_photon += lc.d[i] * fs.amplitude(i, j) * std::conj(fs.amplitude(i + 1, j));
    }
    r.stark_ground *= rabi_scale;
    r.stark_excited *= rabi_scale;
    r.two_photon *= rabi_scale;
    terms[j] += r;
  }
}

inline RabiTerms rabi_from_fields(const FieldState& fs, const MediumSpec& medium) {
  RabiTerms terms(fs.samples());
  accumulate_rabi(terms, fs, resolve_coupling(fs.ladder, medium), medium.rabi_scale);
  return terms;
}

namespace detail {

using BlochVector = std::array<double, 4>;  // rho00, rho11, Re rho01, Im rho01

inline BlochVector bloch_rhs(const BlochVector& y, const RabiSample& r, const MediumSpec& m) {
  const cplx rho01{y[2], y[3]};
  const cplx w = r.two_photon;
  // i (W rho01* - W* rho01) = -2 Im(W rho01*)
  const double exchange = -2.0 * std::imag(w * std::conj(rho01));
  const cplx i{0.0, 1.0};
  const cplx drho01 =
      i * cplx(r.stark_ground - r.stark_excited + m.detuning, m.gamma_c) * rho01 +
      i * w * (y[1] - y[0]);
  return {exchange + m.gamma_a * y[1], -exchange - m.gamma_b * y[1], drho01.real(),
          drho01.imag()};
}

}  // namespace detail

/// One fixed RK4 step of length dtau with the Rabi terms varying linearly
/// from `begin` to `end` across the step. `substeps` splits the interval.
inline DensityMatrix step_bloch(const DensityMatrix& state, const RabiSample& begin,
                                const RabiSample& end, const MediumSpec& medium, double dtau,
                                int substeps = 1) {
  if (!(dtau > 0.0)) throw ConfigError("Bloch step must be positive");
  if (substeps < 1) throw ConfigError("Bloch substeps must be >= 1");
  detail::BlochVector y{state.rho00, state.rho11, state.rho01.real(), state.rho01.imag()};
  Rk4Stepper<detail::BlochVector> rk;
  const double h = dtau / substeps;
  for (int s = 0; s < substeps; ++s) {
    const double t0 = static_cast<double>(s) / substeps;
    const double t1 = static_cast<double>(s + 1) / substeps;
    const std::array<RabiSample, 3> at{lerp(begin, end, t0), lerp(begin, end, 0.5 * (t0 + t1)),
                                       lerp(begin, end, t1)};
    rk.step(y, h, [&](const detail::BlochVector& v, StepPoint p, detail::BlochVector& out) {
      out = detail::bloch_rhs(v, at[static_cast<int>(p)], medium);
    });
  }
  DensityMatrix next{y[0], y[1], {y[2], y[3]}};
  for (double v : y)
    if (!std::isfinite(v)) throw NumericalError("Bloch step produced a non-finite state");
  if (std::abs(next.rho01) > 0.5 + 1e-6)
    throw NumericalError("Bloch step violated |rho01| <= 1/2 (|rho01| = " +
                         std::to_string(std::abs(next.rho01)) + "); reduce the tau step");
  return next;
}

inline DensityMatrix step_bloch(const DensityMatrix& state, const RabiSample& rabi,
                                const MediumSpec& medium, double dtau) {
  return step_bloch(state, rabi, rabi, medium, dtau);
}

/// Integrates the Bloch equations across the whole tau grid.
inline CoherenceState drive_adiabatic(const RabiTerms& rabi, std::span<const double> tau,
                                      const MediumSpec& medium, const DensityMatrix& initial = {},
                                      int substeps = 1) {
  if (rabi.size() != tau.size()) throw ConfigError("Rabi terms and tau grid differ in length");
  CoherenceState out(tau.size());
  if (tau.empty()) return out;
  out[0] = initial;
  for (std::size_t j = 0; j + 1 < tau.size(); ++j)
    out[j + 1] = step_bloch(out[j], rabi[j], rabi[j + 1], medium, tau[j + 1] - tau[j], substeps);
  return out;
}

inline CoherenceState drive_adiabatic(const FieldState& fs, const MediumSpec& medium,
                                      const DensityMatrix& initial = {}, int substeps = 1) {
  return drive_adiabatic(rabi_from_fields(fs, medium), fs.tau, medium, initial, substeps);
}

}  // namespace ramanflow
