// scenario.hpp - full numerical experiments: a driving comb builds the Raman
// coherence, a weak probe comb rides on it, plates act on both.
//
// Per xi step: solve the Bloch equations across tau from the current driving
// fields (plus the probe in fully-coupled mode), advance both combs with that
// coherence, then apply any plate that sits at the new position. Steps are
// split at plate positions so results vary continuously with plate placement.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bloch.hpp"
#include "coefficients.hpp"
#include "plates.hpp"
#include "propagation.hpp"

namespace ramanflow {

/// Medium parameters independent of any particular ladder.
struct MediumModel {
  double density = 2.6e18 * units::per_cm3;
  PolarizabilityModel model = synthetic_parahydrogen();
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  double gamma_c = 0.0;
  double detuning = -two_pi * 500.0 * units::mhz;  // rad/s
  double rabi_scale = 0.5;

  MediumSpec for_ladder(const ModeLadder& ladder) const {
    MediumSpec m;
    m.density = density;
    m.coefficients = model.table_for(ladder);
    m.gamma_a = gamma_a;
    m.gamma_b = gamma_b;
    m.gamma_c = gamma_c;
    m.detuning = detuning;
    m.rabi_scale = rabi_scale;
    m.validate(ladder);
    return m;
  }
};

/// Gaussian pulse on one order, duration given as intensity FWHM.
struct PulseSpec {
  int order = 0;
  double peak_intensity = 0.0;  // W/m^2
  double fwhm = 0.0;            // s
  double delay = 0.0;           // s, centre relative to tau = 0
  double phase = 0.0;           // rad
};

struct SeriesSpec {
  ModeLadder ladder;
  std::vector<PulseSpec> pulses;
  int target_order = 0;  // order whose output fraction is the efficiency
};

enum class CouplingMode { weak_probe, fully_coupled };

struct GridSpec {
  std::size_t tau_samples = 201;
  double tau_half_span_fwhm = 1.5;  // tau grid covers +-this many driving FWHM
  double dxi = 0.25 * units::mm;
  std::size_t output_stride = 4;
  int bloch_substeps = 4;
  unsigned threads = 1;
};

struct Scenario {
  std::string name = "scenario";
  MediumModel medium;
  double length = 37.295 * units::cm;
  SeriesSpec drive;
  SeriesSpec probe;
  bool probe_enabled = true;
  CouplingMode coupling = CouplingMode::weak_probe;
  double weak_probe_ratio = 0.01;  // max probe / driving peak intensity in weak-probe mode
  double ideal_coherence = 0.3;    // |rho01| used by the ideal (fixed coherence) mode
  PlateStack plates;
  GridSpec grid;

  double drive_fwhm() const {
    double w = 0.0;
    for (const auto& p : drive.pulses) w = std::max(w, p.fwhm);
    if (w == 0.0)
      for (const auto& p : probe.pulses) w = std::max(w, p.fwhm);
    return w;
  }

  std::vector<double> tau_grid() const {
    const std::size_t n = grid.tau_samples;
    const double half = grid.tau_half_span_fwhm * drive_fwhm();
    std::vector<double> tau(n);
    for (std::size_t j = 0; j < n; ++j)
      tau[j] = n == 1 ? 0.0 : -half + 2.0 * half * static_cast<double>(j) / static_cast<double>(n - 1);
    return tau;
  }

  std::size_t steps() const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(length / grid.dxi)));
  }
  double step_length() const { return length / static_cast<double>(steps()); }

  void validate() const {
    if (!(length > 0.0)) throw ConfigError("interaction length must be positive");
    if (!(grid.dxi > 0.0)) throw ConfigError("xi step must be positive");
    if (grid.tau_samples < 1) throw ConfigError("need at least one tau sample");
    if (grid.bloch_substeps < 1) throw ConfigError("Bloch substeps must be >= 1");
    if (!(medium.density > 0.0)) throw ConfigError("medium density must be positive");
    auto check_series = [](const SeriesSpec& s, const char* what) {
      for (const auto& p : s.pulses) {
        if (!s.ladder.contains(p.order))
          throw ConfigError(std::string(what) + " pulse order outside its ladder");
        if (p.peak_intensity < 0.0 || !(p.fwhm > 0.0))
          throw ConfigError(std::string(what) + " pulse needs intensity >= 0 and fwhm > 0");
      }
      if (!s.ladder.contains(s.target_order))
        throw ConfigError(std::string(what) + " target order outside its ladder");
    };
    check_series(drive, "driving");
    if (probe_enabled) check_series(probe, "probe");
    if (!(drive_fwhm() > 0.0)) throw ConfigError("scenario needs at least one pulse");
    if (probe_enabled && coupling == CouplingMode::weak_probe) {
      double dmax = 0.0, pmax = 0.0;
      for (const auto& p : drive.pulses) dmax = std::max(dmax, p.peak_intensity);
      for (const auto& p : probe.pulses) pmax = std::max(pmax, p.peak_intensity);
      if (pmax > dmax * weak_probe_ratio * (1.0 + 1e-12))
        throw ConfigError("probe too strong for weak-probe mode; use fully-coupled");
    }
    plates.validate(length);
    for (const Plate& p : plates.plates) {
      const ModeLadder* ls[2] = {&drive.ladder, &probe.ladder};
      const Axis ax[2] = {p.drive_axis, p.probe_axis};
      for (int k = 0; k < (probe_enabled ? 2 : 1); ++k)
        for (int q = ls[k]->q_min(); q <= ls[k]->q_max(); ++q)
          if (!p.material.axis(ax[k]).in_range(ls[k]->wavelength(q)))
            throw ConfigError("order " + std::to_string(q) + " at " +
                              std::to_string(ls[k]->wavelength(q) / units::nm) +
                              " nm is outside the plate material data");
    }
  }
};

inline FieldState initial_field(const SeriesSpec& s, const std::vector<double>& tau) {
  FieldState fs = FieldState::zeros(s.ladder, tau);
  for (const PulseSpec& p : s.pulses) {
    const double e0 = amplitude_from_intensity(p.peak_intensity);
    // intensity exp(-4 ln2 t^2 / fwhm^2) -> amplitude exp(-2 ln2 t^2 / fwhm^2)
    for (std::size_t j = 0; j < tau.size(); ++j) {
      const double t = (tau[j] - p.delay) / p.fwhm;
      fs.at(p.order, j) += std::polar(e0 * std::exp(-2.0 * std::log(2.0) * t * t), p.phase);
    }
  }
  return fs;
}

/// Driving pair at 801/1201 nm building the coherence, weak 210 nm probe comb
/// up to order +8, 37.295 cm of gas at 2.6e18 cm^-3, no plates.
inline Scenario default_scenario() {
  Scenario sc;
  sc.name = "default";
  const double shift_thz = 124.7451;
  sc.drive.ladder = build_ladder(801.0817, shift_thz, -1, 0);
  sc.drive.pulses = {{0, 10.0 * units::gw_per_cm2, 10.0 * units::ns},
                     {-1, 10.0 * units::gw_per_cm2, 10.0 * units::ns}};
  sc.drive.target_order = 0;
  sc.probe.ladder = build_ladder(210.0, shift_thz, -1, 8);
  sc.probe.pulses = {{0, 0.1 * units::gw_per_cm2, 5.0 * units::ns}};
  sc.probe.target_order = 8;
  return sc;
}

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
};

struct ExperimentResult {
  PropagationResult drive;
  PropagationResult probe;
  std::vector<double> coherence_xi;  // m
  Grid2<cplx> coherence;             // rows: coherence_xi, cols: tau
  std::vector<double> tau;
  Provenance provenance;

  double efficiency(int order) const {
    const auto& pr = probe.fraction.rows() ? probe : drive;
    return pr.fraction(pr.fraction.rows() - 1, pr.final_field.ladder.index(order));
  }
};

/// Step-by-step driver of one experiment; copies are independent checkpoints.
class ExperimentMarch {
 public:
  explicit ExperimentMarch(const Scenario& sc, bool keep_history = true)
      : sc_(sc), record_(keep_history), tau_(sc.tau_grid()),
        drive_medium_(sc.medium.for_ladder(sc.drive.ladder)),
        drive_(initial_field(sc.drive, tau_)),
        drive_int_(resolve_coupling(sc.drive.ladder, drive_medium_), sc.grid.threads) {
    sc.validate();
    if (sc.probe_enabled) {
      probe_medium_ = sc.medium.for_ladder(sc.probe.ladder);
      probe_ = initial_field(sc.probe, tau_);
      probe_int_.emplace(resolve_coupling(sc.probe.ladder, *probe_medium_), sc.grid.threads);
    }
    h_ = sc.step_length();
    n_steps_ = sc.steps();
    result_.tau = tau_;
    result_.drive.input_photons = total_photons(drive_);
    if (probe_) result_.probe.input_photons = total_photons(*probe_);
    apply_plates_upto(0.0, true);
    solve_coherence();
    record();
  }

  double position() const { return xi_; }
  std::size_t step_index() const { return step_; }
  bool finished() const { return step_ >= n_steps_; }
  const FieldState& drive_field() const { return drive_; }
  const FieldState* probe_field() const { return probe_ ? &*probe_ : nullptr; }
  const CoherenceState& coherence() const { return rho_; }
  const Scenario& scenario() const { return sc_; }

  /// Advances one grid step (split at plates inside it).
  void step() {
    if (finished()) return;
    const double target = (step_ + 1 == n_steps_) ? sc_.length : h_ * static_cast<double>(step_ + 1);
    while (next_plate_ < sc_.plates.size() && sc_.plates.plates[next_plate_].position < target) {
      const double p = sc_.plates.plates[next_plate_].position;
      if (p > xi_) {
        advance_fields(p - xi_);
        xi_ = p;
      }
      apply_plates_upto(p, false);
      solve_coherence();
    }
    advance_fields(target - xi_);
    xi_ = target;
    ++step_;
    apply_plates_upto(xi_, true);
    solve_coherence();
    if (step_ % std::max<std::size_t>(sc_.grid.output_stride, 1) == 0 || finished()) record();
  }

  void run_until(double xi) {
    while (!finished() && h_ * static_cast<double>(step_ + 1) <= xi * (1.0 + 1e-12)) step();
  }
  void run() {
    while (!finished()) step();
  }

  /// Probe (or, without a probe, driving) fraction of one order at the current position.
  double fraction(int order) const {
    const FieldState& fs = probe_ ? *probe_ : drive_;
    const PropagationResult& pr = probe_ ? result_.probe : result_.drive;
    const std::size_t i = fs.ladder.index(order);
    double s = 0.0;
    const double w = fs.ladder.angular_frequency(order);
    for (const cplx& e : fs.amplitude.row(i)) s += photon_density_of(e, w);
    return pr.input_photons > 0.0 ? s / pr.input_photons : 0.0;
  }

  ExperimentResult finish() && {
    result_.drive.final_field = std::move(drive_);
    if (probe_) result_.probe.final_field = std::move(*probe_);
    return std::move(result_);
  }

  /// Swaps in a different plate stack for the part of the run not yet reached.
  void replace_plates(const PlateStack& stack) {
    sc_.plates = stack;
    sc_.plates.validate(sc_.length);
    next_plate_ = 0;
    while (next_plate_ < sc_.plates.size() && sc_.plates.plates[next_plate_].position <= xi_) ++next_plate_;
  }

 private:
  void advance_fields(double dxi) {
    if (dxi <= 0.0) return;
    drive_int_.advance(drive_, rho_, dxi);
    if (probe_) probe_int_->advance(*probe_, rho_, dxi);
    detail::check_finite(drive_, xi_ + dxi);
    if (probe_) detail::check_finite(*probe_, xi_ + dxi);
  }

  void apply_plates_upto(double xi, bool inclusive) {
    while (next_plate_ < sc_.plates.size()) {
      const Plate& p = sc_.plates.plates[next_plate_];
      if (inclusive ? p.position > xi : p.position != xi) break;
      auto ld = apply_screen(drive_, plate_screen(p, drive_.ladder, p.drive_axis), p.position,
                             p.material.name);
      result_.drive.losses.push_back(std::move(ld));
      if (probe_) {
        auto lp = apply_screen(*probe_, plate_screen(p, probe_->ladder, p.probe_axis), p.position,
                               p.material.name);
        result_.probe.losses.push_back(std::move(lp));
      }
      ++next_plate_;
    }
  }

  void solve_coherence() {
    RabiTerms rabi(tau_.size());
    accumulate_rabi(rabi, drive_, drive_int_.coupling(), sc_.medium.rabi_scale);
    if (probe_ && sc_.coupling == CouplingMode::fully_coupled)
      accumulate_rabi(rabi, *probe_, probe_int_->coupling(), sc_.medium.rabi_scale);
    try {
      rho_ = drive_adiabatic(rabi, tau_, drive_medium_, {}, sc_.grid.bloch_substeps);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at xi = " + std::to_string(xi_ / units::cm) +
                           " cm");
    }
  }

  void record() {
    if (!record_) return;
    detail::record_fractions(result_.drive, drive_, xi_);
    if (probe_) detail::record_fractions(result_.probe, *probe_, xi_);
    result_.coherence_xi.push_back(xi_);
    std::vector<cplx> row(rho_.size());
    for (std::size_t j = 0; j < rho_.size(); ++j) row[j] = rho_[j].rho01;
    result_.coherence.append_row(row);
  }

  Scenario sc_;
  bool record_;
  std::vector<double> tau_;
  MediumSpec drive_medium_;
  std::optional<MediumSpec> probe_medium_;
  FieldState drive_;
  std::optional<FieldState> probe_;
  FieldIntegrator drive_int_;
  std::optional<FieldIntegrator> probe_int_;
  CoherenceState rho_;
  ExperimentResult result_;
  double xi_ = 0.0;
  double h_ = 0.0;
  std::size_t n_steps_ = 0;
  std::size_t step_ = 0;
  std::size_t next_plate_ = 0;
};

inline ExperimentResult run_experiment(const Scenario& sc) {
  ExperimentMarch m(sc);
  m.run();
  return std::move(m).finish();
}

/// Probe comb only, with a fixed uniform coherence and explicit phase resets.
inline ExperimentResult run_ideal(const Scenario& sc, const FlowSchedule& schedule,
                                  const PropagationOptions& opt = {}) {
  if (!(sc.ideal_coherence >= 0.0) || sc.ideal_coherence > 0.5)
    throw ConfigError("ideal coherence must lie in [0, 0.5]");
  const auto tau = sc.tau_grid();
  const SeriesSpec& s = sc.probe_enabled ? sc.probe : sc.drive;
  FieldState fs = initial_field(s, tau);
  const MediumSpec medium = sc.medium.for_ladder(s.ladder);
  CoherenceState rho(tau.size(), pure_coherence(sc.ideal_coherence));
  PropagationOptions o = opt;
  o.output_stride = std::max<std::size_t>(sc.grid.output_stride, 1);
  o.threads = sc.grid.threads;
  ExperimentResult out;
  out.tau = tau;
  out.probe = propagate_field(fs, rho, medium, sc.step_length(), sc.steps(), schedule, o);
  out.coherence_xi = {0.0, sc.length};
  std::vector<cplx> row(tau.size(), rho.front().rho01);
  out.coherence.append_row(row);
  out.coherence.append_row(row);
  return out;
}

struct SweepPoint {
  double offset_hz = 0.0;
  double efficiency = 0.0;
};

/// Target-order efficiency with the probe base frequency shifted by each offset.
inline std::vector<SweepPoint> tunability_sweep(const Scenario& sc, const PlateStack& stack,
                                                const std::vector<double>& offsets_hz) {
  std::vector<SweepPoint> out;
  for (double off : offsets_hz) {
    Scenario s = sc;
    s.plates = stack;
    s.probe.ladder = sc.probe.ladder.retuned(off);
    double eff = 0.0;
    try {
      ExperimentMarch m(s, false);
      m.run();
      eff = m.fraction(s.probe.target_order);
    } catch (const NumericalError&) {
      eff = 0.0;
    }
    out.push_back({off, eff});
  }
  return out;
}

}  // namespace ramanflow
