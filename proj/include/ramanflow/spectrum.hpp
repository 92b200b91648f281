// spectrum.hpp - frequency ladder, field / photon-flow states, medium data
//
// Everything here is SI internally: Hz, rad/s, m, s, V/m. Interface units
// (nm, THz, cm) are converted at the boundaries only.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "grid.hpp"

namespace ramanflow {

using cplx = std::complex<double>;

/// The comb of Raman orders, frequency(q) = base + q * shift.
class ModeLadder {
 public:
  ModeLadder() = default;

  ModeLadder(double base_frequency_hz, double raman_shift_hz, int q_min, int q_max)
      : base_(base_frequency_hz), shift_(raman_shift_hz), q_min_(q_min), q_max_(q_max) {
    if (!(base_ > 0.0) || !std::isfinite(base_))
      throw ConfigError("ladder base frequency must be positive");
    if (!(shift_ > 0.0) || !std::isfinite(shift_))
      throw ConfigError("ladder Raman shift must be positive");
    if (q_min_ > 0 || q_max_ < 0)
      throw ConfigError("ladder order range must contain q = 0");
    if (frequency(q_min_) <= 0.0)
      throw ConfigError("ladder order " + std::to_string(q_min_) +
                        " has non-positive frequency; truncate the Stokes side");
  }

  double base_frequency() const { return base_; }
  double raman_shift() const { return shift_; }
  int q_min() const { return q_min_; }
  int q_max() const { return q_max_; }
  std::size_t size() const { return static_cast<std::size_t>(q_max_ - q_min_ + 1); }

  bool contains(int q) const { return q >= q_min_ && q <= q_max_; }

  std::size_t index(int q) const {
    if (!contains(q)) throw ConfigError("order " + std::to_string(q) + " is outside the ladder");
    return static_cast<std::size_t>(q - q_min_);
  }
  int order(std::size_t i) const { return q_min_ + static_cast<int>(i); }

  double frequency(int q) const { return base_ + q * shift_; }
  double angular_frequency(int q) const { return two_pi * frequency(q); }
  double wavelength(int q) const { return phys::c / frequency(q); }

  std::vector<double> angular_frequencies() const {
    std::vector<double> w(size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = angular_frequency(order(i));
    return w;
  }

  /// Same orders with the base moved by delta_hz (probe tuning).
  ModeLadder retuned(double delta_hz) const {
    return ModeLadder(base_ + delta_hz, shift_, q_min_, q_max_);
  }

  bool operator==(const ModeLadder&) const = default;

 private:
  double base_ = 1.0;
  double shift_ = 1.0;
  int q_min_ = 0;
  int q_max_ = 0;
};

inline ModeLadder build_ladder(double base_wavelength_nm, double raman_shift_thz, int q_min,
                               int q_max) {
  if (!(base_wavelength_nm > 0.0)) throw ConfigError("base wavelength must be positive");
  return ModeLadder(phys::c / (base_wavelength_nm * units::nm), raman_shift_thz * units::thz,
                    q_min, q_max);
}

/// Dispersion (a, b) per order and coupling d per adjacent pair (q, q+1).
/// a and b are in rad/s per (V/m)^2, i.e. m^2 / (V^2 s).
struct CoefficientTable {
  int q_min = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<cplx> d;  // d[i] couples orders q_min + i and q_min + i + 1

  int q_max() const { return q_min + static_cast<int>(a.size()) - 1; }

  bool covers(const ModeLadder& ladder) const {
    return !a.empty() && b.size() == a.size() && d.size() + 1 == a.size() &&
           q_min <= ladder.q_min() && q_max() >= ladder.q_max();
  }
};

struct MediumSpec {
  double density = 0.0;  // molecules / m^3
  CoefficientTable coefficients;
  double gamma_a = 0.0;  // 1/s
  double gamma_b = 0.0;
  double gamma_c = 0.0;
  double detuning = 0.0;    // two-photon detuning delta, rad/s
  double rabi_scale = 0.5;  // kappa in Omega = kappa * sum(coefficient * field products)

  void validate(const ModeLadder& ladder) const {
    if (!(density > 0.0)) throw ConfigError("medium density must be positive");
    if (!coefficients.covers(ladder))
      throw ConfigError("coefficient table does not cover ladder orders [" +
                        std::to_string(ladder.q_min()) + ", " + std::to_string(ladder.q_max()) +
                        "]");
    if (gamma_a < 0.0 || gamma_b < 0.0 || gamma_c < 0.0)
      throw ConfigError("decay rates must be non-negative");
  }
};

/// Coefficients resolved onto a ladder, indexed by ladder position.
struct LadderCoupling {
  std::vector<double> omega;      // rad/s
  std::vector<double> prefactor;  // N hbar omega / (eps0 c), units of V^2 s / m^3
  std::vector<double> a;
  std::vector<double> b;
  std::vector<cplx> d;  // size() - 1 entries

  std::size_t size() const { return omega.size(); }
};

inline LadderCoupling resolve_coupling(const ModeLadder& ladder, const MediumSpec& medium) {
  medium.validate(ladder);
  LadderCoupling lc;
  const std::size_t m = ladder.size();
  const std::size_t offset = static_cast<std::size_t>(ladder.q_min() - medium.coefficients.q_min);
  lc.omega = ladder.angular_frequencies();
  lc.prefactor.resize(m);
  lc.a.resize(m);
  lc.b.resize(m);
  lc.d.resize(m > 0 ? m - 1 : 0);
  for (std::size_t i = 0; i < m; ++i) {
    lc.prefactor[i] = medium.density * phys::hbar * lc.omega[i] / (phys::eps0 * phys::c);
    lc.a[i] = medium.coefficients.a[offset + i];
    lc.b[i] = medium.coefficients.b[offset + i];
    if (i + 1 < m) lc.d[i] = medium.coefficients.d[offset + i];
  }
  return lc;
}

/// Complex envelopes E_q(tau), one row per order.
struct FieldState {
  ModeLadder ladder;
  std::vector<double> tau;  // s
  Grid2<cplx> amplitude;    // (orders) x (tau samples), V/m

  static FieldState zeros(const ModeLadder& ladder, std::vector<double> tau) {
    FieldState fs{ladder, std::move(tau), {}};
    fs.amplitude = Grid2<cplx>(ladder.size(), fs.tau.size());
    return fs;
  }

  std::size_t orders() const { return amplitude.rows(); }
  std::size_t samples() const { return amplitude.cols(); }

  cplx& at(int q, std::size_t j) { return amplitude(ladder.index(q), j); }
  const cplx& at(int q, std::size_t j) const { return amplitude(ladder.index(q), j); }

  bool all_finite() const {
    for (const cplx& e : amplitude.flat())
      if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) return false;
    return true;
  }
};

/// Photon number density n_q (photons/m^3) and phase phi_q per order and tau sample.
struct FlowState {
  ModeLadder ladder;
  std::vector<double> tau;
  Grid2<double> photon_density;
  Grid2<double> phase;
};

inline double photon_density_of(cplx amplitude, double omega) {
  return phys::eps0 * std::norm(amplitude) / (2.0 * phys::hbar * omega);
}

inline double amplitude_of(double photon_density, double omega) {
  return std::sqrt(2.0 * phys::hbar * omega * photon_density / phys::eps0);
}

inline FlowState to_flow(const FieldState& fs) {
  FlowState fl{fs.ladder, fs.tau, Grid2<double>(fs.orders(), fs.samples()),
               Grid2<double>(fs.orders(), fs.samples())};
  for (std::size_t i = 0; i < fs.orders(); ++i) {
    const double omega = fs.ladder.angular_frequency(fs.ladder.order(i));
    bool have_previous = false;
    double previous = 0.0;
    for (std::size_t j = 0; j < fs.samples(); ++j) {
      const cplx e = fs.amplitude(i, j);
      fl.photon_density(i, j) = photon_density_of(e, omega);
      if (e == cplx{}) {
        fl.phase(i, j) = 0.0;
        continue;
      }
      double phi = std::arg(e);
      if (have_previous) phi += two_pi * std::round((previous - phi) / two_pi);
      fl.phase(i, j) = phi;
      previous = phi;
      have_previous = true;
    }
  }
  return fl;
}

inline FieldState to_field(const FlowState& fl, const ModeLadder& ladder) {
  if (fl.photon_density.rows() != ladder.size())
    throw ConfigError("flow state does not match ladder size");
  FieldState fs = FieldState::zeros(ladder, fl.tau);
  for (std::size_t i = 0; i < fs.orders(); ++i) {
    const double omega = ladder.angular_frequency(ladder.order(i));
    for (std::size_t j = 0; j < fs.samples(); ++j) {
      const double n = fl.photon_density(i, j);
      if (n < 0.0) throw ConfigError("negative photon density in flow state");
      fs.amplitude(i, j) = std::polar(amplitude_of(n, omega), fl.phase(i, j));
    }
  }
  return fs;
}

inline FieldState to_field(const FlowState& fl) { return to_field(fl, fl.ladder); }

inline double total_photons(const FlowState& fl, std::size_t tau_index) {
  if (tau_index >= fl.photon_density.cols()) throw ConfigError("tau index out of range");
  double s = 0.0;
  for (std::size_t i = 0; i < fl.photon_density.rows(); ++i) s += fl.photon_density(i, tau_index);
  return s;
}

/// Photon density summed over orders and tau samples (proportional to the
/// number of photons crossing unit area for a uniform tau grid).
inline double total_photons(const FieldState& fs) {
  double s = 0.0;
  for (std::size_t i = 0; i < fs.orders(); ++i) {
    const double omega = fs.ladder.angular_frequency(fs.ladder.order(i));
    for (std::size_t j = 0; j < fs.samples(); ++j) s += photon_density_of(fs.amplitude(i, j), omega);
  }
  return s;
}

inline std::vector<double> photons_per_order(const FieldState& fs) {
  std::vector<double> out(fs.orders(), 0.0);
  for (std::size_t i = 0; i < fs.orders(); ++i) {
    const double omega = fs.ladder.angular_frequency(fs.ladder.order(i));
    for (std::size_t j = 0; j < fs.samples(); ++j)
      out[i] += photon_density_of(fs.amplitude(i, j), omega);
  }
  return out;
}

/// Two-level vibrational density matrix at one tau sample.
struct DensityMatrix {
  double rho00 = 1.0;
  double rho11 = 0.0;
  cplx rho01{};

  double trace() const { return rho00 + rho11; }
  bool operator==(const DensityMatrix&) const = default;
};

/// rho(tau) on the field's tau grid.
using CoherenceState = std::vector<DensityMatrix>;

/// Pure state with |rho01| = magnitude and the given phase (ground-side branch).
inline DensityMatrix pure_coherence(double magnitude, double phase = 0.0) {
  if (magnitude < 0.0 || magnitude > 0.5) throw ConfigError("|rho01| must lie in [0, 0.5]");
  const double rho11 = 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * magnitude * magnitude));
  return {1.0 - rho11, rho11, std::polar(magnitude, phase)};
}

}  // namespace ramanflow
