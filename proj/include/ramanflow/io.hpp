// io.hpp - JSON configs, CSV outputs, config hashing
//
// Config keys carry their units (wavelength_nm, intensity_gw_cm2, ...);
// everything is converted to SI on load. Number formatting is fixed
// ("%.12g") so identical runs produce identical files.

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "design.hpp"
#include "scenario.hpp"

namespace ramanflow {

inline constexpr const char* version = "0.1.0";

using json = nlohmann::json;

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string config_hash(const json& j) { return fnv1a_hex(j.dump()); }

inline json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open " + p.string());
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <class T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  return get_or<T>(j, key, T{});
}

}  // namespace detail

// ---- materials -------------------------------------------------------------

inline MaterialDispersion dispersion_from_json(const json& j, const std::string& name) {
  MaterialDispersion m;
  m.name = name;
  m.sellmeier_b = detail::get_or<std::vector<double>>(j, "sellmeier_B", {});
  m.sellmeier_c_um2 = detail::get_or<std::vector<double>>(j, "sellmeier_C_um2", {});
  const auto range = detail::get_or<std::vector<double>>(j, "range_nm", {});
  if (!range.empty()) {
    if (range.size() != 2) throw ConfigError(name + ": range_nm needs two values");
    m.min_wavelength = range[0] * units::nm;
    m.max_wavelength = range[1] * units::nm;
  }
  for (const auto& row : detail::get_or<std::vector<std::vector<double>>>(j, "absorption", {})) {
    if (row.size() != 2) throw ConfigError(name + ": absorption rows are [wavelength_nm, alpha_per_cm]");
    m.absorption.emplace_back(row[0] * units::nm, row[1] / units::cm);
  }
  m.plate_transmission = detail::get_or(j, "plate_transmission", default_plate_transmission());
  m.transparent_above = detail::get_or(j, "transparent_above_nm", 0.0) * units::nm;
  m.validate();
  return m;
}

inline Material material_from_json(const json& j) {
  Material m;
  m.name = detail::require<std::string>(j, "name");
  if (!j.contains("axes")) throw ConfigError(m.name + ": missing 'axes'");
  for (const auto& [key, val] : j.at("axes").items())
    m.axes[axis_from_string(key)] = dispersion_from_json(val, m.name + " (" + key + ")");
  return m;
}

inline json material_to_json(const Material& m) {
  json axes = json::object();
  for (const auto& [axis, d] : m.axes) {
    json a;
    a["sellmeier_B"] = d.sellmeier_b;
    a["sellmeier_C_um2"] = d.sellmeier_c_um2;
    a["range_nm"] = {d.min_wavelength / units::nm, d.max_wavelength / units::nm};
    json abs = json::array();
    for (const auto& [w, alpha] : d.absorption) abs.push_back({w / units::nm, alpha * units::cm});
    a["absorption"] = abs;
    a["plate_transmission"] = d.plate_transmission;
    a["transparent_above_nm"] = d.transparent_above / units::nm;
    axes[to_string(axis)] = a;
  }
  return {{"name", m.name}, {"axes", axes}};
}

using MaterialLibrary = std::map<std::string, Material>;

// ---- plate stacks: position_cm,thickness_um,material,axis --------------------

inline Axis other_axis(Axis a) { return a == Axis::ordinary ? Axis::extraordinary : Axis::ordinary; }

inline PlateStack read_plate_csv(const std::filesystem::path& p, const MaterialLibrary& lib) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open " + p.string());
  PlateStack st;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.rfind("position_cm", 0) == 0) continue;
    std::stringstream ss(line);
    std::string f[4];
    for (auto& x : f) std::getline(ss, x, ',');
    try {
      Plate pl;
      pl.position = std::stod(f[0]) * units::cm;
      pl.thickness = std::stod(f[1]) * units::um;
      auto it = lib.find(f[2]);
      if (it == lib.end()) throw ConfigError("unknown material '" + f[2] + "'");
      pl.material = it->second;
      pl.probe_axis = f[3].empty() ? Axis::ordinary : axis_from_string(f[3]);
      pl.drive_axis = other_axis(pl.probe_axis);
      st.plates.push_back(std::move(pl));
    } catch (const std::invalid_argument&) {
      throw ConfigError(p.string() + ":" + std::to_string(lineno) + ": malformed plate row");
    }
  }
  st.validate();
  return st;
}

inline std::string plate_csv(const PlateStack& st) {
  std::string s = "position_cm,thickness_um,material,axis\n";
  for (const Plate& p : st.plates)
    s += fmt(p.position / units::cm) + "," + fmt(p.thickness / units::um) + "," + p.material.name + "," +
         to_string(p.probe_axis) + "\n";
  return s;
}

// ---- schedules: position_m, one offset column per order ---------------------

inline std::string schedule_csv(const FlowSchedule& sch, const ModeLadder& ladder) {
  std::string s = "position_m";
  for (int q = ladder.q_min(); q <= ladder.q_max(); ++q) s += ",offset_q" + std::to_string(q) + "_rad";
  s += "\n";
  for (const auto& e : sch.events) {
    s += fmt(e.position);
    for (double v : e.phase_offsets) s += "," + fmt(v);
    s += "\n";
  }
  return s;
}

inline FlowSchedule read_schedule_csv(const std::filesystem::path& p, const ModeLadder& ladder) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open " + p.string());
  FlowSchedule sch;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("position_m", 0) == 0) continue;
    std::stringstream ss(line);
    std::string cell;
    PhaseResetEvent e;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      try {
        const double v = std::stod(cell);
        if (first) e.position = v;
        else e.phase_offsets.push_back(v);
      } catch (const std::exception&) {
        throw ConfigError(p.string() + ": malformed schedule row");
      }
      first = false;
    }
    if (e.phase_offsets.size() != ladder.size())
      throw ConfigError(p.string() + ": schedule row has the wrong number of offsets");
    sch.events.push_back(std::move(e));
  }
  return sch;
}

// ---- scenarios -------------------------------------------------------------

struct LoadedScenario {
  Scenario scenario;
  json config;  // the parsed document (hash input)
  json schedule;  // optional "schedule" section for the ideal mode
};

inline PulseSpec pulse_from_json(const json& j) {
  PulseSpec p;
  p.order = detail::get_or(j, "order", 0);
  p.peak_intensity = detail::require<double>(j, "intensity_gw_cm2") * units::gw_per_cm2;
  p.fwhm = detail::require<double>(j, "fwhm_ns") * units::ns;
  p.delay = detail::get_or(j, "delay_ns", 0.0) * units::ns;
  p.phase = detail::get_or(j, "phase_rad", 0.0);
  return p;
}

inline SeriesSpec series_from_json(const json& j, double shift_thz) {
  SeriesSpec s;
  s.ladder = build_ladder(detail::require<double>(j, "base_wavelength_nm"), shift_thz,
                          detail::require<int>(j, "q_min"), detail::require<int>(j, "q_max"));
  if (j.contains("pulses"))
    for (const auto& p : j.at("pulses")) s.pulses.push_back(pulse_from_json(p));
  s.target_order = detail::get_or(j, "target_order", 0);
  return s;
}

inline PolarizabilityModel dataset_from_json(const json& j) {
  PolarizabilityModel m = synthetic_parahydrogen();
  m.name = detail::get_or(j, "name", m.name);
  m.ground_au = detail::get_or(j, "ground_au", m.ground_au);
  m.excited_au = detail::get_or(j, "excited_au", m.excited_au);
  m.raman_au = detail::get_or(j, "raman_au", m.raman_au);
  m.resonance_wavelength_m = detail::get_or(j, "resonance_nm", m.resonance_wavelength_m / units::nm) * units::nm;
  return m;
}

/// Parses a scenario document; relative file references resolve against `dir`.
inline LoadedScenario scenario_from_json(const json& j, const std::filesystem::path& dir = ".") {
  LoadedScenario out;
  out.config = j;
  Scenario& sc = out.scenario;
  sc.name = detail::get_or<std::string>(j, "name", "scenario");
  const double shift = detail::require<double>(j, "raman_shift_thz");
  if (j.contains("medium")) {
    const json& m = j.at("medium");
    sc.medium.density = detail::get_or(m, "density_cm3", sc.medium.density / units::per_cm3) * units::per_cm3;
    if (m.contains("dataset")) sc.medium.model = dataset_from_json(m.at("dataset"));
    sc.medium.gamma_a = detail::get_or(m, "gamma_a_per_s", 0.0);
    sc.medium.gamma_b = detail::get_or(m, "gamma_b_per_s", 0.0);
    sc.medium.gamma_c = detail::get_or(m, "gamma_c_per_s", 0.0);
    sc.medium.detuning = two_pi * detail::get_or(m, "detuning_mhz", -500.0) * units::mhz;
    sc.medium.rabi_scale = detail::get_or(m, "rabi_scale", 0.5);
  }
  sc.length = detail::require<double>(j, "interaction_length_cm") * units::cm;
  if (j.contains("drive")) sc.drive = series_from_json(j.at("drive"), shift);
  if (j.contains("probe")) {
    sc.probe = series_from_json(j.at("probe"), shift);
    sc.probe_enabled = detail::get_or(j.at("probe"), "enabled", true);
  } else {
    sc.probe_enabled = false;
  }
  if (!j.contains("drive")) {
    if (!sc.probe_enabled) throw ConfigError("scenario needs a drive or a probe section");
    // Ideal-mode documents may omit the driving comb; the probe then runs alone.
    sc.drive = sc.probe;
    sc.probe_enabled = false;
  }
  const std::string mode = detail::get_or<std::string>(j, "coupling", "weak-probe");
  if (mode == "weak-probe") sc.coupling = CouplingMode::weak_probe;
  else if (mode == "fully-coupled") sc.coupling = CouplingMode::fully_coupled;
  else throw ConfigError("coupling must be 'weak-probe' or 'fully-coupled'");
  sc.weak_probe_ratio = detail::get_or(j, "weak_probe_ratio", sc.weak_probe_ratio);
  sc.ideal_coherence = detail::get_or(j, "ideal_coherence", sc.ideal_coherence);
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    sc.grid.tau_samples = detail::get_or<std::size_t>(g, "tau_samples", sc.grid.tau_samples);
    sc.grid.tau_half_span_fwhm = detail::get_or(g, "tau_half_span_fwhm", sc.grid.tau_half_span_fwhm);
    sc.grid.dxi = detail::get_or(g, "dxi_mm", sc.grid.dxi / units::mm) * units::mm;
    sc.grid.output_stride = detail::get_or<std::size_t>(g, "output_stride", sc.grid.output_stride);
    sc.grid.bloch_substeps = detail::get_or(g, "bloch_substeps", sc.grid.bloch_substeps);
    sc.grid.threads = detail::get_or(g, "threads", sc.grid.threads);
  }
  MaterialLibrary lib{{"MgF2", mgf2()}};
  if (j.contains("materials"))
    for (const auto& [name, file] : j.at("materials").items()) {
      Material m = material_from_json(read_json(dir / file.get<std::string>()));
      lib[name] = m;
    }
  if (j.contains("plate_file"))
    sc.plates = read_plate_csv(dir / j.at("plate_file").get<std::string>(), lib);
  if (j.contains("plates"))
    for (const auto& p : j.at("plates")) {
      Plate pl;
      pl.position = detail::require<double>(p, "position_cm") * units::cm;
      pl.thickness = detail::require<double>(p, "thickness_um") * units::um;
      const std::string mat = detail::get_or<std::string>(p, "material", "MgF2");
      if (!lib.count(mat)) throw ConfigError("unknown material '" + mat + "'");
      pl.material = lib.at(mat);
      pl.probe_axis = axis_from_string(detail::get_or<std::string>(p, "probe_axis", "ordinary"));
      pl.drive_axis = axis_from_string(detail::get_or<std::string>(p, "drive_axis", "extraordinary"));
      sc.plates.plates.push_back(std::move(pl));
    }
  if (j.contains("schedule")) out.schedule = j.at("schedule");
  sc.validate();
  return out;
}

inline LoadedScenario load_scenario(const std::filesystem::path& p) {
  return scenario_from_json(read_json(p), p.parent_path().empty() ? "." : p.parent_path());
}

// ---- search and design sections ------------------------------------------

SearchConfig search_config_from_json(const json& j) {
  SearchConfig c;
  if (j.is_null()) return c;
  c.initial_step = detail::get_or(j, "initial_step", c.initial_step);
  c.expansion = detail::get_or(j, "expansion", c.expansion);
  c.contraction = detail::get_or(j, "contraction", c.contraction);
  c.max_evaluations = detail::get_or(j, "max_evaluations", c.max_evaluations);
  c.patience = detail::get_or(j, "patience", c.patience);
  c.batch = detail::get_or(j, "batch", c.batch);
  c.threads = detail::get_or(j, "threads", c.threads);
  if (j.contains("target_value")) c.target_value = j.at("target_value").get<double>();
  return c;
}

DesignOptions design_options_from_json(const json& j) {
  DesignOptions o;
  if (j.is_null()) return o;
  o.thickness_min = detail::get_or(j, "thickness_min_um", o.thickness_min / units::um) * units::um;
  o.thickness_max = detail::get_or(j, "thickness_max_um", o.thickness_max / units::um) * units::um;
  o.optimize_positions = detail::get_or(j, "optimize_positions", o.optimize_positions);
  o.seed_tau_samples = detail::get_or(j, "seed_tau_samples", o.seed_tau_samples);
  o.min_gap = detail::get_or(j, "min_gap_mm", o.min_gap / units::mm) * units::mm;
  if (j.contains("positions_cm")) {
    o.seed_positions = false;
    for (double p : j.at("positions_cm").get<std::vector<double>>()) o.positions.push_back(p * units::cm);
  }
  if (j.contains("probe_axis")) o.probe_axis = axis_from_string(j.at("probe_axis").get<std::string>());
  if (j.contains("drive_axis")) o.drive_axis = axis_from_string(j.at("drive_axis").get<std::string>());
  return o;
}

// ---- result files ----------------------------------------------------------

/// (xi_cm, order, wavelength_nm, photon_fraction), one row per record and order.
inline std::string fraction_csv(const PropagationResult& r, const ModeLadder& ladder) {
  std::string s = "xi_cm,order,wavelength_nm,photon_fraction\n";
  for (std::size_t k = 0; k < r.xi.size(); ++k)
    for (std::size_t i = 0; i < ladder.size(); ++i) {
      const int q = ladder.order(i);
      s += fmt(r.xi[k] / units::cm) + "," + std::to_string(q) + "," + fmt(ladder.wavelength(q) / units::nm) +
           "," + fmt(r.fraction(k, i)) + "\n";
    }
  return s;
}

/// (xi_m, order, photon_fraction)
inline std::string propagation_csv(const PropagationResult& r, const ModeLadder& ladder) {
  std::string s = "xi_m,order,photon_fraction\n";
  for (std::size_t k = 0; k < r.xi.size(); ++k)
    for (std::size_t i = 0; i < ladder.size(); ++i)
      s += fmt(r.xi[k]) + "," + std::to_string(ladder.order(i)) + "," + fmt(r.fraction(k, i)) + "\n";
  return s;
}

/// (xi_cm, tau_ns, abs_rho01, arg_rho01)
inline std::string coherence_csv(const ExperimentResult& r) {
  std::string s = "xi_cm,tau_ns,abs_rho01,arg_rho01\n";
  for (std::size_t k = 0; k < r.coherence_xi.size(); ++k)
    for (std::size_t j = 0; j < r.tau.size(); ++j) {
      const cplx v = r.coherence(k, j);
      s += fmt(r.coherence_xi[k] / units::cm) + "," + fmt(r.tau[j] / units::ns) + "," + fmt(std::abs(v)) + "," +
           fmt(std::arg(v)) + "\n";
    }
  return s;
}

inline std::string trace_csv(const ObjectiveReport& rep) {
  std::string s = "evaluation,best_value\n";
  for (std::size_t k = 0; k < rep.trace.size(); ++k) s += std::to_string(k + 1) + "," + fmt(rep.trace[k]) + "\n";
  return s;
}

inline json series_summary(const PropagationResult& r) {
  json eff = json::object();
  const ModeLadder& l = r.final_field.ladder;
  const auto f = r.final_fraction();
  for (std::size_t i = 0; i < f.size(); ++i) eff[std::to_string(l.order(i))] = f[i];
  double loss = 0.0;
  json plates = json::array();
  for (const auto& rec : r.losses) {
    loss += rec.total();
    plates.push_back({{"position_cm", rec.position / units::cm},
                      {"source", rec.source},
                      {"photon_fraction", r.input_photons > 0.0 ? rec.total() / r.input_photons : 0.0}});
  }
  return {{"efficiency_by_order", eff},
          {"loss_fraction", r.input_photons > 0.0 ? loss / r.input_photons : 0.0},
          {"plate_losses", plates}};
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << text;
}

inline void write_json(const std::filesystem::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

}  // namespace ramanflow
