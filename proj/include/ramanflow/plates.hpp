// plates.hpp - thin dispersive plates acting as per-order phase / amplitude screens

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "propagation.hpp"

namespace ramanflow {

enum class Axis { ordinary, extraordinary };

inline std::string to_string(Axis a) { return a == Axis::ordinary ? "ordinary" : "extraordinary"; }

inline Axis axis_from_string(const std::string& s) {
  if (s == "ordinary" || s == "o") return Axis::ordinary;
  if (s == "extraordinary" || s == "e") return Axis::extraordinary;
  throw ConfigError("unknown plate axis '" + s + "'");
}

/// Per-plate intensity transmission giving 15% aggregate loss over 15 plates.
inline double default_plate_transmission() { return std::pow(0.85, 1.0 / 15.0); }

/// Index curve of one polarisation axis: n^2 = 1 + sum B lambda^2 / (lambda^2 - C), lambda in um.
struct MaterialDispersion {
  std::string name;
  std::vector<double> sellmeier_b;
  std::vector<double> sellmeier_c_um2;
  double min_wavelength = 0.0;  // m
  double max_wavelength = std::numeric_limits<double>::infinity();
  // Intensity attenuation table; when empty every plate transmits plate_transmission.
  std::vector<std::pair<double, double>> absorption;  // (wavelength m, alpha 1/m), ascending
  double plate_transmission = default_plate_transmission();
  // Without a table, wavelengths at or above this edge pass losslessly (0: no edge).
  double transparent_above = 0.0;  // m

  void validate() const {
    if (sellmeier_b.size() != sellmeier_c_um2.size())
      throw ConfigError(name + ": Sellmeier B and C lists differ in length");
    if (!(min_wavelength < max_wavelength)) throw ConfigError(name + ": empty wavelength range");
    if (!(plate_transmission > 0.0) || plate_transmission > 1.0)
      throw ConfigError(name + ": plate transmission must be in (0, 1]");
    if (transparent_above < 0.0) throw ConfigError(name + ": negative transparency edge");
    for (std::size_t k = 0; k < absorption.size(); ++k) {
      if (absorption[k].second < 0.0) throw ConfigError(name + ": negative absorption");
      if (k > 0 && !(absorption[k].first > absorption[k - 1].first))
        throw ConfigError(name + ": absorption table must be sorted by wavelength");
    }
  }

  bool in_range(double wavelength) const {
    return wavelength >= min_wavelength && wavelength <= max_wavelength;
  }

  double alpha(double wavelength) const {
    if (absorption.empty()) return 0.0;
    if (wavelength <= absorption.front().first) return absorption.front().second;
    if (wavelength >= absorption.back().first) return absorption.back().second;
    auto hi = std::lower_bound(absorption.begin(), absorption.end(), wavelength,
                               [](const auto& p, double w) { return p.first < w; });
    auto lo = hi - 1;
    const double t = (wavelength - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
  }

  /// Intensity transmission of a plate of the given thickness.
  double transmission(double wavelength, double thickness) const {
    if (thickness <= 0.0) return 1.0;
    if (absorption.empty())
      return transparent_above > 0.0 && wavelength >= transparent_above ? 1.0 : plate_transmission;
    return std::exp(-alpha(wavelength) * thickness);
  }
};

inline double refractive_index(const MaterialDispersion& mat, double wavelength) {
  if (!mat.in_range(wavelength))
    throw ConfigError(mat.name + ": wavelength " + std::to_string(wavelength / units::nm) +
                      " nm outside the material data range");
  const double l2 = std::pow(wavelength / units::um, 2);
  double n2 = 1.0;
  for (std::size_t i = 0; i < mat.sellmeier_b.size(); ++i)
    n2 += mat.sellmeier_b[i] * l2 / (l2 - mat.sellmeier_c_um2[i]);
  if (!(n2 > 0.0)) throw ConfigError(mat.name + ": Sellmeier index is not real here");
  return std::sqrt(n2);
}

/// Uniaxial crystal: one index curve per axis.
struct Material {
  std::string name;
  std::map<Axis, MaterialDispersion> axes;

  const MaterialDispersion& axis(Axis a) const {
    auto it = axes.find(a);
    if (it == axes.end()) throw ConfigError(name + " has no " + to_string(a) + " axis data");
    return it->second;
  }
};

/// MgF2 after Dodge (Handbook of Optics), lambda in um. The published fit
/// covers 0.2-7 um; the VUV end is an extrapolation.
inline Material mgf2() {
  auto curve = [](std::string name, std::vector<double> b, std::vector<double> res_um) {
    MaterialDispersion m;
    m.name = std::move(name);
    m.sellmeier_b = std::move(b);
    for (double r : res_um) m.sellmeier_c_um2.push_back(r * r);
    m.min_wavelength = 110.0 * units::nm;
    m.max_wavelength = 7000.0 * units::nm;
    m.transparent_above = 300.0 * units::nm;
    return m;
  };
  Material m{"MgF2", {}};
  m.axes[Axis::ordinary] = curve("MgF2 (o)", {0.48755108, 0.39875031, 2.3120353},
                                 {0.04338408, 0.09461442, 23.793604});
  m.axes[Axis::extraordinary] = curve("MgF2 (e)", {0.41344023, 0.50497499, 2.4904862},
                                      {0.03684262, 0.09076162, 23.771995});
  return m;
}

struct Plate {
  double position = 0.0;   // m
  double thickness = 0.0;  // m
  Material material;
  Axis probe_axis = Axis::ordinary;
  Axis drive_axis = Axis::extraordinary;
};

struct PlateStack {
  std::vector<Plate> plates;

  std::size_t size() const { return plates.size(); }
  bool empty() const { return plates.empty(); }

  void validate(double length = std::numeric_limits<double>::infinity()) const {
    for (std::size_t k = 0; k < plates.size(); ++k) {
      const Plate& p = plates[k];
      if (!(p.thickness >= 0.0)) throw ConfigError("plate thickness must be non-negative");
      if (!(p.position >= 0.0) || p.position > length)
        throw ConfigError("plate position outside the interaction length");
      if (k > 0 && !(p.position > plates[k - 1].position))
        throw ConfigError("plate positions must be strictly increasing");
    }
  }
};

/// Per-order screen of one plate on one ladder: amplitude factor and intensity transmission.
struct PlateScreen {
  std::vector<cplx> factor;
  std::vector<double> transmission;
};

inline double plate_phase(const MaterialDispersion& mat, double wavelength, double thickness) {
  return two_pi * refractive_index(mat, wavelength) * thickness / wavelength;
}

inline PlateScreen plate_screen(const Plate& plate, const ModeLadder& ladder, Axis axis) {
  const MaterialDispersion& mat = plate.material.axis(axis);
  PlateScreen s;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const double lambda = ladder.wavelength(ladder.order(i));
    const double t = mat.transmission(lambda, plate.thickness);
    s.transmission.push_back(t);
    s.factor.push_back(std::polar(std::sqrt(t), plate_phase(mat, lambda, plate.thickness)));
  }
  return s;
}

/// Applies a precomputed screen in place and returns the photons removed per order.
inline LossRecord apply_screen(FieldState& fs, const PlateScreen& screen, double position,
                               const std::string& source) {
  LossRecord rec{position, source, std::vector<double>(fs.orders(), 0.0)};
  for (std::size_t i = 0; i < fs.orders(); ++i) {
    const double omega = fs.ladder.angular_frequency(fs.ladder.order(i));
    auto row = fs.amplitude.row(i);
    double before = 0.0;
    for (const cplx& e : row) before += photon_density_of(e, omega);
    for (cplx& e : row) e *= screen.factor[i];
    rec.photons[i] = before * (1.0 - screen.transmission[i]);
  }
  return rec;
}

struct PlateApplication {
  FieldState field;
  LossRecord loss;
};

inline PlateApplication apply_plate(const FieldState& fs, const Plate& plate, Axis series_axis) {
  PlateApplication out{fs, {}};
  out.loss = apply_screen(out.field, plate_screen(plate, fs.ladder, series_axis), plate.position,
                          plate.material.name);
  return out;
}

/// Accumulated plate phase difference phi_{q+1} - phi_q per adjacent pair for the
/// plates at or before `upto`, wrapped into (-pi, pi].
inline std::vector<double> relative_phase_map(const PlateStack& stack, const ModeLadder& ladder,
                                              Axis axis,
                                              double upto = std::numeric_limits<double>::infinity()) {
  const std::size_t m = ladder.size();
  std::vector<double> sum(m > 0 ? m - 1 : 0, 0.0);
  for (const Plate& p : stack.plates) {
    if (p.position > upto) break;
    const MaterialDispersion& mat = p.material.axis(axis);
    // Phase per unit thickness, so equal total thickness gives identical sums.
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double l0 = ladder.wavelength(ladder.order(i));
      const double l1 = ladder.wavelength(ladder.order(i + 1));
      sum[i] += two_pi * (refractive_index(mat, l1) / l1 - refractive_index(mat, l0) / l0) *
                p.thickness;
    }
  }
  for (double& v : sum) v = wrap_phase(v);
  return sum;
}

}  // namespace ramanflow
