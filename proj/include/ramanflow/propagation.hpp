// propagation.hpp - coupled propagation of the Raman comb along xi
//
// Two equivalent formulations are integrated with fixed-step RK4:
//
//  * field form, per tau sample:
//      dE_q/dxi = i K_q (a_q rho00 E_q + b_q rho11 E_q
//                        + d_{q-1} rho01^* E_{q-1} + d_q^* rho01 E_{q+1}),
//      K_q = N hbar w_q / (eps0 c)
//
//  * flow form in (sqrt(n_q), phi_q), whose sin / cos terms expose the
//    direction of the photon exchange between neighbouring orders.
//
// Orders outside the ladder are dropped together with their coupling terms,
// which keeps sum_q n_q exactly conserved by the continuous equations.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "rk4.hpp"
#include "spectrum.hpp"

namespace ramanflow {

/// Phase jump added to every order at one point along xi.
struct PhaseResetEvent {
  double position = 0.0;               // m
  std::vector<double> phase_offsets;   // rad, by ladder index
};

struct FlowSchedule {
  std::vector<PhaseResetEvent> events;
  std::vector<int> target_orders;  // intermediate concentration target per event (diagnostic)

  void validate(double length, std::size_t orders) const {
    for (std::size_t k = 0; k < events.size(); ++k) {
      const auto& e = events[k];
      if (!(e.position >= 0.0) || e.position > length * (1.0 + 1e-12))
        throw ConfigError("phase-reset event outside the interaction length");
      if (k > 0 && !(e.position > events[k - 1].position))
        throw ConfigError("phase-reset events must have strictly increasing positions");
      if (e.phase_offsets.size() != orders)
        throw ConfigError("phase-reset event has " + std::to_string(e.phase_offsets.size()) +
                          " offsets for a ladder of " + std::to_string(orders));
      for (double v : e.phase_offsets)
        if (!std::isfinite(v)) throw ConfigError("non-finite phase offset");
    }
  }
};

/// Photons removed from the comb at one point (summed over tau samples).
struct LossRecord {
  double position = 0.0;
  std::string source;
  std::vector<double> photons;  // by ladder index

  double total() const {
    double s = 0.0;
    for (double v : photons) s += v;
    return s;
  }
};

struct PropagationResult {
  std::vector<double> xi;  // m
  Grid2<double> fraction;  // rows: xi records, cols: orders; normalised to the input total
  FieldState final_field;
  std::vector<LossRecord> losses;
  double input_photons = 0.0;

  /// Cumulative recorded loss as a fraction of the input, up to and including xi.
  double loss_fraction_until(double xi_m) const {
    double s = 0.0;
    for (const auto& l : losses)
      if (l.position <= xi_m) s += l.total();
    return input_photons > 0.0 ? s / input_photons : 0.0;
  }

  std::vector<double> final_fraction() const {
    auto r = fraction.row(fraction.rows() - 1);
    return {r.begin(), r.end()};
  }
};

struct PropagationOptions {
  std::size_t output_stride = 1;  // record every n-th step (the final state is always recorded)
  unsigned threads = 1;           // tau slices are split across threads
  double flow_floor = 1e-30;      // flow form: photon floor relative to the slice total
};

inline void apply_phase_offsets(FieldState& fs, const std::vector<double>& offsets) {
  if (offsets.size() != fs.orders()) throw ConfigError("phase offsets do not match ladder");
  for (std::size_t i = 0; i < fs.orders(); ++i) {
    const cplx rot = std::polar(1.0, offsets[i]);
    for (cplx& e : fs.amplitude.row(i)) e *= rot;
  }
}

/// Advances a field comb along xi for a fixed coherence series.
class FieldIntegrator {
 public:
  FieldIntegrator(LadderCoupling coupling, unsigned threads = 1)
      : lc_(std::move(coupling)), threads_(std::max(1u, threads)), work_(threads_) {}

  const LadderCoupling& coupling() const { return lc_; }

  void advance(FieldState& fs, const CoherenceState& rho, double dxi) {
    if (rho.size() != fs.samples()) throw ConfigError("coherence series does not match tau grid");
    const std::size_t m = fs.orders();
    parallel_for(fs.samples(), threads_, [&](std::size_t b, std::size_t e, unsigned t) {
      Work& w = work_[t];
      w.resize(m);
      for (std::size_t j = b; j < e; ++j) {
        const DensityMatrix& r = rho[j];
        for (std::size_t i = 0; i < m; ++i) {
          const cplx ik{0.0, lc_.prefactor[i]};
          w.diag[i] = ik * (lc_.a[i] * r.rho00 + lc_.b[i] * r.rho11);
          w.lower[i] = i > 0 ? ik * lc_.d[i - 1] * std::conj(r.rho01) : cplx{};
          w.upper[i] = i + 1 < m ? ik * std::conj(lc_.d[i]) * r.rho01 : cplx{};
          w.y[i] = fs.amplitude(i, j);
        }
        w.rk.step(w.y, dxi, [&](const std::vector<cplx>& y, StepPoint, std::vector<cplx>& dy) {
          for (std::size_t i = 0; i < m; ++i) {
            cplx v = w.diag[i] * y[i];
            if (i > 0) v += w.lower[i] * y[i - 1];
            if (i + 1 < m) v += w.upper[i] * y[i + 1];
            dy[i] = v;
          }
        });
        for (std::size_t i = 0; i < m; ++i) fs.amplitude(i, j) = w.y[i];
      }
    });
  }

 private:
  struct Work {
    std::vector<cplx> y, diag, lower, upper;
    Rk4Stepper<std::vector<cplx>> rk;
    void resize(std::size_t m) {
      if (y.size() == m) return;
      y.resize(m);
      diag.resize(m);
      lower.resize(m);
      upper.resize(m);
      rk.resize(m);
    }
  };

  LadderCoupling lc_;
  unsigned threads_;
  std::vector<Work> work_;
};

namespace detail {

inline void check_finite(const FieldState& fs, double xi) {
  for (std::size_t i = 0; i < fs.orders(); ++i)
    for (std::size_t j = 0; j < fs.samples(); ++j) {
      const cplx e = fs.amplitude(i, j);
      if (!std::isfinite(e.real()) || !std::isfinite(e.imag()))
        throw NumericalError("non-finite field at xi = " + std::to_string(xi) + " m, order " +
                             std::to_string(fs.ladder.order(i)) + ", tau index " +
                             std::to_string(j) + "; reduce the xi step or check coefficients");
    }
}

inline void record_fractions(PropagationResult& out, const FieldState& fs, double xi) {
  std::vector<double> per = photons_per_order(fs);
  for (double& v : per) v = out.input_photons > 0.0 ? v / out.input_photons : 0.0;
  out.xi.push_back(xi);
  out.fraction.append_row(per);
}

/// Shared xi-march: advance(state, h), apply(state, event) and
/// snapshot(state) -> FieldState are supplied by the formulation.
template <class State, class Advance, class ApplyEvent, class Snapshot>
PropagationResult march(State& state, double input_photons, double dxi, std::size_t n_steps,
                        const FlowSchedule& events, std::size_t stride, Advance&& advance,
                        ApplyEvent&& apply, Snapshot&& snapshot) {
  if (!(dxi > 0.0)) throw ConfigError("xi step must be positive");
  PropagationResult out;
  out.input_photons = input_photons;
  stride = std::max<std::size_t>(stride, 1);
  const double length = dxi * static_cast<double>(n_steps);
  std::size_t next_event = 0;
  auto apply_due = [&](double upto) {
    while (next_event < events.events.size() && events.events[next_event].position <= upto) {
      apply(state, events.events[next_event]);
      ++next_event;
    }
  };
  apply_due(0.0);
  detail::record_fractions(out, snapshot(state), 0.0);
  for (std::size_t s = 0; s < n_steps; ++s) {
    const double x0 = dxi * static_cast<double>(s);
    const double x1 = s + 1 == n_steps ? length : dxi * static_cast<double>(s + 1);
    double pos = x0;
    while (next_event < events.events.size() && events.events[next_event].position < x1) {
      const double at = events.events[next_event].position;
      if (at > pos) advance(state, at - pos, at);
      apply(state, events.events[next_event]);
      ++next_event;
      pos = std::max(pos, at);
    }
    if (x1 > pos) advance(state, x1 - pos, x1);
    if (s + 1 == n_steps) apply_due(std::numeric_limits<double>::infinity());
    if ((s + 1) % stride == 0 || s + 1 == n_steps) detail::record_fractions(out, snapshot(state), x1);
  }
  out.final_field = snapshot(state);
  return out;
}

}  // namespace detail

inline PropagationResult propagate_field(const FieldState& fs, const CoherenceState& rho,
                                         const MediumSpec& medium, double dxi, std::size_t n_steps,
                                         const FlowSchedule& events,
                                         const PropagationOptions& opt = {}) {
  events.validate(dxi * static_cast<double>(n_steps), fs.orders());
  FieldIntegrator integrator(resolve_coupling(fs.ladder, medium), opt.threads);
  FieldState state = fs;
  return detail::march(
      state, total_photons(fs), dxi, n_steps, events, opt.output_stride,
      [&](FieldState& s, double h, double xi) {
        integrator.advance(s, rho, h);
        detail::check_finite(s, xi);
      },
      [](FieldState& s, const PhaseResetEvent& e) { apply_phase_offsets(s, e.phase_offsets); },
      [](const FieldState& s) -> const FieldState& { return s; });
}

// ---------------------------------------------------------------------------
// Flow formulation

/// Per-slice flow variables. amplitude is sqrt(n_q) carried with a sign, so a
/// mode that empties and refills continues smoothly (a sign flip is a pi jump).
struct FlowSlice {
  std::vector<double> amplitude;
  std::vector<double> phase;
};

namespace detail {

struct FlowCoefficients {
  std::vector<double> dispersion;  // N hbar w_q (a_q rho00 + b_q rho11) / (eps0 c)
  std::vector<double> pair_gain;   // N hbar |rho| |d_q| sqrt(w_q w_{q+1}) / (eps0 c), pair (q, q+1)
  std::vector<double> pair_phase;  // phi_rho - arg d_q
};

inline FlowCoefficients flow_coefficients(const LadderCoupling& lc, const DensityMatrix& r) {
  const std::size_t m = lc.size();
  FlowCoefficients fc;
  fc.dispersion.resize(m);
  fc.pair_gain.resize(m > 0 ? m - 1 : 0);
  fc.pair_phase.resize(fc.pair_gain.size());
  const double g = lc.prefactor.empty() ? 0.0 : lc.prefactor[0] / lc.omega[0];  // N hbar/(eps0 c)
  const double rho_abs = std::abs(r.rho01);
  const double phi_rho = std::arg(r.rho01);
  for (std::size_t i = 0; i < m; ++i) {
    fc.dispersion[i] = g * lc.omega[i] * (lc.a[i] * r.rho00 + lc.b[i] * r.rho11);
    if (i + 1 < m) {
      fc.pair_gain[i] = g * rho_abs * std::abs(lc.d[i]) * std::sqrt(lc.omega[i] * lc.omega[i + 1]);
      fc.pair_phase[i] = phi_rho - std::arg(lc.d[i]);
    }
  }
  return fc;
}

/// Right-hand side of the flow equations. y = [amplitude..., phase...].
inline void flow_rhs(const FlowCoefficients& fc, double amplitude_floor, const std::vector<double>& y,
                     std::vector<double>& dy) {
  const std::size_t m = fc.dispersion.size();
  const double* s = y.data();
  const double* phi = y.data() + m;
  for (std::size_t i = 0; i < m; ++i) {
    double ds = 0.0;
    double dphi = fc.dispersion[i];
    const bool resolved = std::abs(s[i]) > amplitude_floor;
    if (i > 0) {
      const double theta = phi[i] - phi[i - 1] + fc.pair_phase[i - 1];
      const double g = fc.pair_gain[i - 1];
      ds += g * std::sin(theta) * s[i - 1];
      if (resolved) dphi += g * std::cos(theta) * s[i - 1] / s[i];
    }
    if (i + 1 < m) {
      const double theta = phi[i + 1] - phi[i] + fc.pair_phase[i];
      const double g = fc.pair_gain[i];
      ds -= g * std::sin(theta) * s[i + 1];
      if (resolved) dphi += g * std::cos(theta) * s[i + 1] / s[i];
    }
    dy[i] = ds;
    dy[m + i] = dphi;
  }
}

}  // namespace detail

inline PropagationResult propagate_flow(const FlowState& fl, const CoherenceState& rho,
                                        const MediumSpec& medium, double dxi, std::size_t n_steps,
                                        const FlowSchedule& events,
                                        const PropagationOptions& opt = {}) {
  const ModeLadder& ladder = fl.ladder;
  const std::size_t m = ladder.size();
  const std::size_t t = fl.tau.size();
  if (rho.size() != t) throw ConfigError("coherence series does not match tau grid");
  events.validate(dxi * static_cast<double>(n_steps), m);
  const LadderCoupling lc = resolve_coupling(ladder, medium);

  // Per-slice state [sqrt(n)..., phi...] in photon-density units.
  std::vector<std::vector<double>> slices(t, std::vector<double>(2 * m));
  std::vector<detail::FlowCoefficients> coeff(t);
  std::vector<double> floor(t);
  double input = 0.0;
  for (std::size_t j = 0; j < t; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double n = fl.photon_density(i, j);
      if (n < 0.0) throw ConfigError("negative photon density in flow state");
      slices[j][i] = std::sqrt(n);
      slices[j][m + i] = fl.phase(i, j);
      total += n;
    }
    input += total;
    floor[j] = std::sqrt(opt.flow_floor * total);
    coeff[j] = detail::flow_coefficients(lc, rho[j]);
  }

  const unsigned threads = std::max(1u, opt.threads);
  std::vector<Rk4Stepper<std::vector<double>>> steppers(threads, Rk4Stepper<std::vector<double>>(2 * m));

  auto snapshot = [&](const std::vector<std::vector<double>>& st) {
    FieldState fs = FieldState::zeros(ladder, fl.tau);
    for (std::size_t j = 0; j < t; ++j)
      for (std::size_t i = 0; i < m; ++i) {
        const double s = st[j][i];
        fs.amplitude(i, j) =
            std::polar(std::copysign(amplitude_of(s * s, lc.omega[i]), s), st[j][m + i]);
      }
    return fs;
  };

  return detail::march(
      slices, input, dxi, n_steps, events, opt.output_stride,
      [&](std::vector<std::vector<double>>& st, double h, double xi) {
        parallel_for(t, threads, [&](std::size_t b, std::size_t e, unsigned th) {
          for (std::size_t j = b; j < e; ++j)
            steppers[th].step(st[j], h, [&](const std::vector<double>& y, StepPoint, std::vector<double>& dy) {
              detail::flow_rhs(coeff[j], floor[j], y, dy);
            });
        });
        for (std::size_t j = 0; j < t; ++j)
          for (double v : st[j])
            if (!std::isfinite(v))
              throw NumericalError("non-finite flow state at xi = " + std::to_string(xi) +
                                   " m, tau index " + std::to_string(j));
      },
      [&](std::vector<std::vector<double>>& st, const PhaseResetEvent& e) {
        for (auto& sl : st)
          for (std::size_t i = 0; i < m; ++i) sl[m + i] += e.phase_offsets[i];
      },
      snapshot);
}

// ---------------------------------------------------------------------------
// Exchange diagnostics

/// Rate (photons / m^3 per m) at which order q_min + i + 1 gains photons from
/// order q_min + i through their shared coupling term, computed from the
/// field equations: (N / c) Re(i d rho01^* E_lower E_upper^*).
inline std::vector<double> pair_exchange_field(std::span<const cplx> slice, const DensityMatrix& r,
                                               const LadderCoupling& lc, double density) {
  std::vector<double> out(slice.size() > 0 ? slice.size() - 1 : 0);
  const cplx i1{0.0, 1.0};
  for (std::size_t i = 0; i + 1 < slice.size(); ++i)
    out[i] = density / phys::c *
             std::real(i1 * lc.d[i] * std::conj(r.rho01) * slice[i] * std::conj(slice[i + 1]));
  return out;
}

/// Relative phase of pair (q, q+1) entering the sin / cos factors of the
/// flow form, with the phase of d folded in:
///   phi_{q+1} - phi_q + phi_rho - arg d_q.
inline std::vector<double> pair_flow_phase(std::span<const double> phase, const DensityMatrix& r,
                                           const LadderCoupling& lc) {
  std::vector<double> out(phase.size() > 0 ? phase.size() - 1 : 0);
  for (std::size_t i = 0; i + 1 < phase.size(); ++i)
    out[i] = wrap_phase(phase[i + 1] - phase[i] + std::arg(r.rho01) - std::arg(lc.d[i]));
  return out;
}

/// Same exchange rate predicted from the flow form: 2 sqrt(n_{q+1}) times the
/// first term of d sqrt(n_{q+1}) / dxi.
inline std::vector<double> pair_exchange_flow(std::span<const double> photon_density,
                                              std::span<const double> phase, const DensityMatrix& r,
                                              const LadderCoupling& lc) {
  const auto theta = pair_flow_phase(phase, r, lc);
  const DensityMatrix rr = r;
  const auto fc = detail::flow_coefficients(lc, rr);
  std::vector<double> out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i)
    out[i] = 2.0 * std::sqrt(photon_density[i + 1]) * fc.pair_gain[i] * std::sin(theta[i]) *
             std::sqrt(photon_density[i]);
  return out;
}

}  // namespace ramanflow
