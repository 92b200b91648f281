// design.hpp - plate-stack design and tolerance analysis
//
// design_stack works in two passes:
//  1. greedy seeding, plate by plate. Each plate gets an intermediate target
//     order from the ideal concentration schedule. Candidate positions inside
//     a window after the previous plate and a fine thickness grid are scored
//     on a surrogate: a few tau slices of the probe, propagated with the
//     coherence of the plate-free continuation rotated by the phase the plate
//     imprints on the driving comb. The score is the peak fraction reached by
//     the target order within one exchange period (for the last plate: the
//     output fraction).
//  2. random-search polish of the thicknesses (optionally positions) with the
//     full experiment as objective.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "optimizer.hpp"
#include "scenario.hpp"
#include "schedule.hpp"

namespace ramanflow {

struct DesignOptions {
  double thickness_min = 100.0 * units::um;
  double thickness_max = 300.0 * units::um;
  double seed_thickness_step = 0.1 * units::um;
  bool seed_positions = true;           // scan positions while seeding
  std::size_t seed_position_points = 12;
  double min_gap = 2.0 * units::mm;     // between consecutive plates
  std::size_t seed_tau_samples = 9;     // 0: all tau samples
  bool optimize_positions = false;      // include positions in the polish
  double position_margin = 10.0 * units::mm;  // polish box half-width around seeded positions
  double thickness_min_step = 1.0 * units::nm;
  double position_min_step = 0.1 * units::mm;
  std::vector<double> positions;        // fixed positions (used when not seeding positions)
  Material material = mgf2();
  Axis probe_axis = Axis::ordinary;
  Axis drive_axis = Axis::extraordinary;
};

struct DesignResult {
  PlateStack stack;
  ObjectiveReport report;
  double baseline = 0.0;           // target fraction without plates
  std::vector<int> plate_targets;  // intermediate target used when seeding each plate
  std::vector<double> seed_scores;
};

/// Target-order output fraction of the probe for a given stack (0 on numerical failure).
inline double stack_efficiency(const Scenario& sc, const PlateStack& stack) {
  Scenario s = sc;
  s.plates = stack;
  try {
    ExperimentMarch m(s, false);
    m.run();
    return m.fraction(s.probe.target_order);
  } catch (const NumericalError&) {
    return 0.0;
  }
}

namespace detail {

inline PlateStack make_stack(const std::vector<double>& positions, const std::vector<double>& thickness,
                             const DesignOptions& o) {
  PlateStack st;
  for (std::size_t i = 0; i < thickness.size(); ++i)
    st.plates.push_back({positions[i], thickness[i], o.material, o.probe_axis, o.drive_axis});
  return st;
}

/// Equally spaced tau indices covering the probe envelope.
inline std::vector<std::size_t> probe_slices(const FieldState& probe, std::size_t count) {
  const std::size_t t = probe.samples();
  std::vector<double> n(t, 0.0);
  double peak = 0.0;
  for (std::size_t i = 0; i < probe.orders(); ++i)
    for (std::size_t j = 0; j < t; ++j) n[j] += std::norm(probe.amplitude(i, j));
  for (double v : n) peak = std::max(peak, v);
  std::size_t lo = 0, hi = t - 1;
  while (lo < hi && n[lo] < 1e-3 * peak) ++lo;
  while (hi > lo && n[hi] < 1e-3 * peak) --hi;
  std::vector<std::size_t> idx;
  if (count == 0 || count >= hi - lo + 1) {
    for (std::size_t j = lo; j <= hi; ++j) idx.push_back(j);
    return idx;
  }
  for (std::size_t k = 0; k < count; ++k) idx.push_back(lo + ((2 * k + 1) * (hi - lo)) / (2 * count));
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

inline FieldState take_slices(const FieldState& fs, const std::vector<std::size_t>& idx) {
  std::vector<double> tau;
  for (std::size_t j : idx) tau.push_back(fs.tau[j]);
  FieldState out = FieldState::zeros(fs.ladder, tau);
  for (std::size_t i = 0; i < fs.orders(); ++i)
    for (std::size_t k = 0; k < idx.size(); ++k) out.amplitude(i, k) = fs.amplitude(i, idx[k]);
  return out;
}

struct SeedContext {
  const LadderCoupling& probe_lc;
  const LadderCoupling& drive_lc;
  const std::vector<PlateScreen>& probe_screens;
  const std::vector<PlateScreen>& drive_screens;
  const std::vector<std::size_t>& slices;
  std::size_t peak_tau;
  std::size_t target_index;
};

/// Plate-free continuation sampled at every step: probe slices, coherence, driving comb at the peak.
struct SeedFrame {
  double xi;
  CoherenceState rho;
  FieldState probe;
  std::vector<cplx> drive;
};

inline std::vector<SeedFrame> seed_frames(ExperimentMarch& cont, const SeedContext& ctx, double horizon) {
  std::vector<SeedFrame> frames;
  const double h = cont.scenario().step_length();
  auto snap = [&] {
    CoherenceState r;
    for (std::size_t s : ctx.slices) r.push_back(cont.coherence()[s]);
    std::vector<cplx> col;
    for (std::size_t i = 0; i < cont.drive_field().orders(); ++i)
      col.push_back(cont.drive_field().amplitude(i, ctx.peak_tau));
    frames.push_back({cont.position(), std::move(r), take_slices(*cont.probe_field(), ctx.slices),
                      std::move(col)});
  };
  snap();
  while (!cont.finished() && cont.position() < horizon - 0.5 * h) {
    cont.step();
    snap();
  }
  return frames;
}

/// Frame indices with xi in [lo, hi], thinned to at most `points`.
inline std::vector<std::size_t> frames_in(const std::vector<SeedFrame>& frames, double lo, double hi,
                                          std::size_t points, double h) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < frames.size(); ++k)
    if (frames[k].xi >= lo - 0.5 * h && frames[k].xi <= hi + 0.5 * h) out.push_back(k);
  if (out.empty()) {
    std::size_t k = 0;
    while (k + 1 < frames.size() && frames[k].xi < lo - 0.5 * h) ++k;
    out.push_back(k);
  }
  if (points >= 2 && out.size() > points) {
    std::vector<std::size_t> pick;
    for (std::size_t k = 0; k < points; ++k) pick.push_back(out[k * (out.size() - 1) / (points - 1)]);
    out = pick;
  }
  return out;
}

/// Phase the coherence picks up when a plate with screen g acts on the driving comb.
inline cplx coherence_rotation(const SeedContext& ctx, const std::vector<cplx>& drive, std::size_t g) {
  cplx before{}, after{};
  const auto& f = ctx.drive_screens[g].factor;
  for (std::size_t i = 0; i + 1 < drive.size(); ++i) {
    const cplx pair = ctx.drive_lc.d[i] * drive[i] * std::conj(drive[i + 1]);
    before += pair;
    after += pair * f[i] * std::conj(f[i + 1]);
  }
  if (before == cplx{} || after == cplx{}) return 1.0;
  const cplx r = after / before;
  return r / std::abs(r);
}

/// Thickness whose phase imprint best aligns every pair with the pattern converging on m,
/// each pair weighted by its current exchange rate.
inline std::size_t align_thickness(const SeedContext& ctx, const FieldState& fs, const CoherenceState& rho,
                                   const std::vector<cplx>& drive, int m) {
  const std::size_t pairs = fs.orders() - 1;
  std::vector<cplx> want(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    cplx z{};
    for (std::size_t s = 0; s < fs.samples(); ++s)
      z += fs.amplitude(i + 1, s) * std::conj(fs.amplitude(i, s)) * rho[s].rho01 *
           std::conj(ctx.probe_lc.d[i]);
    // rotate by -target: +pi/2 below m, -pi/2 above
    want[i] = fs.ladder.order(i + 1) <= m ? cplx{0.0, -1.0} * z : cplx{0.0, 1.0} * z;
  }
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < ctx.probe_screens.size(); ++g) {
    const auto& f = ctx.probe_screens[g].factor;
    const cplx rot = coherence_rotation(ctx, drive, g);
    double v = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
      const cplx u = f[i + 1] * std::conj(f[i]);
      v += std::real(want[i] * rot * u / std::abs(u));
    }
    if (v > best_v) {
      best_v = v;
      best = g;
    }
  }
  return best;
}

struct SeedChoice {
  std::vector<std::size_t> frame;
  std::vector<std::size_t> grid;
  double score = -1.0;
};

struct SeedRun {
  const std::vector<SeedFrame>& frames;
  const SeedContext& ctx;
  FieldIntegrator integ;
  double total = 0.0;

  SeedRun(const std::vector<SeedFrame>& f, const SeedContext& c) : frames(f), ctx(c), integ(c.probe_lc, 1) {
    for (std::size_t i = 0; i < f.front().probe.orders(); ++i)
      for (const cplx& e : f.front().probe.amplitude.row(i)) total += photon_density_of(e, c.probe_lc.omega[i]);
  }

  double fraction(const FieldState& fs, std::size_t idx) const {
    double v = 0.0;
    for (const cplx& e : fs.amplitude.row(idx)) v += photon_density_of(e, ctx.probe_lc.omega[idx]);
    return total > 0.0 ? v / total : 0.0;
  }

  void screen(FieldState& fs, std::size_t g) const {
    for (std::size_t i = 0; i < fs.orders(); ++i)
      for (cplx& e : fs.amplitude.row(i)) e *= ctx.probe_screens[g].factor[i];
  }

  /// Advances fs from frame `from` to frame `to`; returns the peak fraction of `track`.
  double advance(FieldState& fs, std::size_t from, std::size_t to, cplx rot, std::size_t track) {
    double peak = fraction(fs, track);
    CoherenceState r(ctx.slices.size());
    for (std::size_t k = from; k < to; ++k) {
      for (std::size_t s = 0; s < r.size(); ++s) {
        r[s] = frames[k].rho[s];
        r[s].rho01 *= rot;
      }
      integ.advance(fs, r, frames[k + 1].xi - frames[k].xi);
      peak = std::max(peak, fraction(fs, track));
    }
    return peak;
  }

  std::size_t end_after(std::size_t k, bool final, double span, double h) const {
    if (final) return frames.size() - 1;
    return std::min(frames.size() - 1, k + static_cast<std::size_t>(std::ceil(span / h)));
  }

  /// Score of the tail starting at frame k: peak of m, or the output target fraction.
  double tail(FieldState fs, std::size_t k, cplx rot, int m, bool final, double span, double h) {
    const std::size_t idx = final ? ctx.target_index : fs.ladder.index(m);
    const double peak = advance(fs, k, end_after(k, final, span, h), rot, idx);
    return final ? fraction(fs, idx) : peak;
  }
};

inline std::pair<std::size_t, std::size_t> grid_range(std::size_t g, std::size_t n, std::size_t radius) {
  return {g > radius ? g - radius : 0, std::min(n - 1, g + radius)};
}

inline SeedChoice seed_single(const std::vector<SeedFrame>& frames, const SeedContext& ctx, std::size_t a,
                              int m, bool final, double span, double h) {
  SeedRun run(frames, ctx);
  const SeedFrame& f = frames[a];
  const std::size_t g0 = align_thickness(ctx, f.probe, f.rho, f.drive, m);
  SeedChoice best{{a}, {g0}, -1.0};
  const auto [g_lo, g_hi] = grid_range(g0, ctx.probe_screens.size(), 10);
  for (std::size_t g = g_lo; g <= g_hi; ++g) {
    FieldState fs = f.probe;
    run.screen(fs, g);
    const double v = run.tail(std::move(fs), a, coherence_rotation(ctx, f.drive, g), m, final, span, h);
    if (v > best.score) best = {{a}, {g}, v};
  }
  return best;
}

inline SeedChoice seed_pair(const std::vector<SeedFrame>& frames, const SeedContext& ctx, std::size_t a,
                            const std::vector<std::size_t>& cand_b, int m, bool final, double span, double h) {
  SeedRun run(frames, ctx);
  const SeedFrame& fa = frames[a];
  const std::size_t ga = align_thickness(ctx, fa.probe, fa.rho, fa.drive, m);
  const cplx rot_a = coherence_rotation(ctx, fa.drive, ga);
  FieldState fs = fa.probe;
  run.screen(fs, ga);
  SeedChoice best;
  std::size_t at = a;
  CoherenceState rho_b;
  for (std::size_t b : cand_b) {
    if (b <= a) continue;
    run.advance(fs, at, b, rot_a, 0);
    at = b;
    rho_b = frames[b].rho;
    for (auto& r : rho_b) r.rho01 *= rot_a;
    const std::size_t gb = align_thickness(ctx, fs, rho_b, frames[b].drive, m);
    FieldState fb = fs;
    run.screen(fb, gb);
    const cplx rot = rot_a * coherence_rotation(ctx, frames[b].drive, gb);
    const double v = run.tail(std::move(fb), b, rot, m, final, span, h);
    if (v > best.score) best = {{a, b}, {ga, gb}, v};
  }
  return best;
}

/// Local thickness refinement of a seeded pair (+-1 um around each choice).
inline SeedChoice refine_pair(const std::vector<SeedFrame>& frames, const SeedContext& ctx, SeedChoice c,
                              int m, bool final, double span, double h) {
  if (c.frame.size() != 2) return c;
  SeedRun run(frames, ctx);
  const std::size_t a = c.frame[0], b = c.frame[1];
  const std::size_t n = ctx.probe_screens.size();
  const auto [a_lo, a_hi] = grid_range(c.grid[0], n, 10);
  const auto [b_lo, b_hi] = grid_range(c.grid[1], n, 10);
  for (std::size_t ga = a_lo; ga <= a_hi; ++ga) {
    FieldState fs = frames[a].probe;
    run.screen(fs, ga);
    const cplx rot_a = coherence_rotation(ctx, frames[a].drive, ga);
    run.advance(fs, a, b, rot_a, 0);
    for (std::size_t gb = b_lo; gb <= b_hi; ++gb) {
      FieldState fb = fs;
      run.screen(fb, gb);
      const cplx rot = rot_a * coherence_rotation(ctx, frames[b].drive, gb);
      const double v = run.tail(std::move(fb), b, rot, m, final, span, h);
      if (v > c.score) c = {{a, b}, {ga, gb}, v};
    }
  }
  return c;
}

}  // namespace detail

inline DesignResult design_stack(const Scenario& sc, int target_order, std::size_t n_plates,
                                 const SearchConfig& cfg, const DesignOptions& opt = {}) {
  if (!sc.probe_enabled) throw ConfigError("plate design needs a probe series");
  Scenario base = sc;
  base.plates = {};
  base.probe.target_order = target_order;
  base.validate();
  DesignResult res;
  res.baseline = stack_efficiency(base, {});
  if (n_plates == 0) {
    res.report.best_value = res.baseline;
    res.report.evaluations = 1;
    res.report.trace = {res.baseline};
    return res;
  }
  if (!(opt.thickness_min > 0.0) || !(opt.thickness_max > opt.thickness_min))
    throw ConfigError("plate thickness bounds are invalid");
  if (!opt.seed_positions && opt.positions.size() != n_plates)
    throw ConfigError("fixed plate positions must be given for every plate");

  ExperimentMarch march(base, false);
  const double h = base.step_length();
  const int start = 0;
  const ModeLadder& ladder = base.probe.ladder;
  const MediumSpec probe_medium = base.medium.for_ladder(ladder);
  const LadderCoupling probe_lc = resolve_coupling(ladder, probe_medium);
  const LadderCoupling drive_lc = resolve_coupling(base.drive.ladder, base.medium.for_ladder(base.drive.ladder));

  // Effective coherence magnitude seen by the probe at the entrance.
  const auto slices = detail::probe_slices(*march.probe_field(), opt.seed_tau_samples);
  double rho_eff = 0.0, wsum = 0.0;
  for (std::size_t j : detail::probe_slices(*march.probe_field(), 0)) {
    double w = 0.0;
    for (std::size_t i = 0; i < ladder.size(); ++i) w += std::norm(march.probe_field()->amplitude(i, j));
    rho_eff += w * std::abs(march.coherence()[j].rho01);
    wsum += w;
  }
  rho_eff = std::clamp(rho_eff / wsum, 1e-3, 0.5);

  // Intermediate targets from the ideal schedule.
  ScheduleOptions so;
  const ConcentrationPlan plan = plan_concentration(ladder, start, target_order, probe_medium, rho_eff, so);
  const std::size_t n_events = plan.schedule.events.size();
  std::vector<double> guide(n_plates);
  for (std::size_t j = 0; j < n_plates; ++j) {
    std::size_t e = n_events == 0 ? 0
                    : n_plates <= n_events ? j
                                           : j * n_events / n_plates;
    res.plate_targets.push_back(n_events ? plan.schedule.target_orders[e] : target_order);
    guide[j] = n_events ? plan.schedule.events[e].position : base.length * (j + 1.0) / (n_plates + 1.0);
  }
  // One exchange period of the pair feeding order m.
  auto period = [&](int m) {
    const std::size_t k = m > start ? ladder.index(m) - 1 : ladder.index(m);
    const double g = probe_medium.density * phys::hbar * std::abs(probe_lc.d[k]) *
                     std::sqrt(probe_lc.omega[k] * probe_lc.omega[k + 1]) * rho_eff /
                     (phys::eps0 * phys::c);
    return pi / g;
  };

  // Thickness grid shared by all plates; its screens do not depend on position.
  std::vector<double> grid_d;
  const auto n_grid = static_cast<std::size_t>(
      std::floor((opt.thickness_max - opt.thickness_min) / opt.seed_thickness_step + 1e-9));
  for (std::size_t g = 0; g <= n_grid; ++g)
    grid_d.push_back(opt.thickness_min + static_cast<double>(g) * opt.seed_thickness_step);
  std::vector<PlateScreen> probe_screens, drive_screens;
  for (double d : grid_d) {
    Plate p{0.0, d, opt.material, opt.probe_axis, opt.drive_axis};
    probe_screens.push_back(plate_screen(p, ladder, opt.probe_axis));
    drive_screens.push_back(plate_screen(p, base.drive.ladder, opt.drive_axis));
  }

  detail::SeedContext ctx{probe_lc, drive_lc, probe_screens, drive_screens, slices,
                          base.grid.tau_samples / 2, ladder.index(target_order)};

  // Group consecutive plates sharing an intermediate target.
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [first, last]
  for (std::size_t j = 0; j < n_plates; ++j) {
    if (j > 0 && res.plate_targets[j] == res.plate_targets[j - 1] && groups.back().second + 1 == j &&
        groups.back().second - groups.back().first < 1)
      groups.back().second = j;
    else
      groups.push_back({j, j});
  }

  std::vector<double> positions, thickness;
  res.seed_scores.assign(n_plates, 0.0);
  for (const auto& [first, last_in_group] : groups) {
    const int m = res.plate_targets[first];
    const bool final_group = last_in_group + 1 == n_plates;
    const std::size_t count = last_in_group - first + 1;
    const double span = period(m);
    double lo;
    if (opt.seed_positions) {
      lo = positions.empty() ? 0.0 : positions.back() + opt.min_gap;
    } else {
      lo = opt.positions[first];
    }
    lo = std::min(lo, base.length);
    const double horizon =
        final_group ? base.length : std::min(base.length, lo + (count + 1.0) * span + opt.min_gap);

    ExperimentMarch cont = march;
    while (!cont.finished() && cont.position() + 0.5 * h < lo) cont.step();
    const auto frames = detail::seed_frames(cont, ctx, horizon);

    auto window_of = [&](double xi) { return opt.seed_positions ? std::pair{xi, xi + span} : std::pair{xi, xi}; };
    std::vector<std::size_t> cand_a;
    if (opt.seed_positions) {
      cand_a = detail::frames_in(frames, lo, lo + span, opt.seed_position_points, h);
    } else {
      cand_a = detail::frames_in(frames, opt.positions[first], opt.positions[first], 1, h);
    }

    if (count > 1) {
      while (cand_a.size() > 1 && cand_a.back() + 1 >= frames.size()) cand_a.pop_back();
      if (cand_a.back() + 1 >= frames.size()) throw ConfigError("no room left for the remaining plates");
    }
    detail::SeedChoice best;
    if (count == 1) {
      for (std::size_t a : cand_a) {
        auto c = detail::seed_single(frames, ctx, a, m, final_group, span, h);
        if (c.score > best.score) best = c;
      }
    } else {
      for (std::size_t a : cand_a) {
        std::vector<std::size_t> cand_b;
        if (opt.seed_positions) {
          const auto [b_lo, b_hi] = window_of(frames[a].xi + opt.min_gap);
          cand_b = detail::frames_in(frames, b_lo, b_hi, opt.seed_position_points, h);
        } else {
          cand_b = detail::frames_in(frames, opt.positions[first + 1], opt.positions[first + 1], 1, h);
        }
        if (cand_b.empty() || cand_b.back() <= a) cand_b = {a + 1};
        auto c = detail::seed_pair(frames, ctx, a, cand_b, m, final_group, span, h);
        if (c.score > best.score) best = c;
      }
      best = detail::refine_pair(frames, ctx, best, m, final_group, span, h);
    }
    for (std::size_t k = 0; k < best.frame.size(); ++k) {
      positions.push_back(frames[best.frame[k]].xi);
      thickness.push_back(grid_d[best.grid[k]]);
      res.seed_scores[first + k] = best.score;
    }
    march.replace_plates(detail::make_stack(positions, thickness, opt));
    while (!march.finished() && march.position() < positions.back() - 0.5 * h) march.step();
  }

  // Polish on the full experiment.
  DesignVector x0;
  for (std::size_t j = 0; j < n_plates; ++j) {
    x0.values.push_back(thickness[j]);
    x0.lower.push_back(opt.thickness_min);
    x0.upper.push_back(opt.thickness_max);
    x0.min_step.push_back(opt.thickness_min_step);
  }
  if (opt.optimize_positions) {
    for (std::size_t j = 0; j < n_plates; ++j) {
      x0.values.push_back(positions[j]);
      x0.lower.push_back(std::max(0.0, positions[j] - opt.position_margin));
      x0.upper.push_back(std::min(base.length, positions[j] + opt.position_margin));
      x0.min_step.push_back(opt.position_min_step);
    }
  }
  auto decode = [&](const DesignVector& x) {
    std::vector<double> th(x.values.begin(), x.values.begin() + static_cast<long>(n_plates));
    std::vector<double> pos = positions;
    if (opt.optimize_positions)
      pos.assign(x.values.begin() + static_cast<long>(n_plates), x.values.end());
    return detail::make_stack(pos, th, opt);
  };
  auto objective = [&](const DesignVector& x) {
    PlateStack st = decode(x);
    for (std::size_t k = 1; k < st.size(); ++k)
      if (!(st.plates[k].position > st.plates[k - 1].position)) return 0.0;
    return stack_efficiency(base, st);
  };
  res.report = random_search(objective, x0, cfg);
  res.stack = decode(res.report.best);
  return res;
}

struct ToleranceSpec {
  double thickness_span = 5.0 * units::um;
  double thickness_step = 0.1 * units::um;
  double position_span = 20.0 * units::mm;
  double position_step = 1.0 * units::mm;
  double threshold = 0.9;  // fraction of the unperturbed efficiency
};

struct ToleranceCurve {
  std::vector<double> offset;
  std::vector<double> efficiency;
  double half_width = 0.0;
};

struct PlateTolerance {
  ToleranceCurve thickness;
  ToleranceCurve position;
};

struct ToleranceReport {
  double nominal = 0.0;
  std::vector<PlateTolerance> plates;
};

namespace detail {

/// Distance from zero to the threshold crossing on each side (linear interpolation);
/// the smaller side is reported. Without a crossing the scanned extent counts.
inline double half_width(const std::vector<double>& off, const std::vector<double>& eff, double level) {
  const auto zero = static_cast<std::size_t>(
      std::min_element(off.begin(), off.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }) -
      off.begin());
  auto side = [&](int dir) {
    std::size_t k = zero;
    while (true) {
      const long next = static_cast<long>(k) + dir;
      if (next < 0 || next >= static_cast<long>(off.size())) return std::abs(off[k]);
      const auto n = static_cast<std::size_t>(next);
      if (eff[n] < level) {
        const double t = (eff[k] - level) / (eff[k] - eff[n]);
        return std::abs(off[k] + t * (off[n] - off[k]));
      }
      k = n;
    }
  };
  return std::min(side(-1), side(+1));
}

inline std::vector<double> symmetric_offsets(double span, double step) {
  const auto n = static_cast<long>(std::llround(span / step));
  std::vector<double> v;
  for (long k = -n; k <= n; ++k) v.push_back(static_cast<double>(k) * step);
  return v;
}

}  // namespace detail

/// One-at-a-time thickness and position scans around an optimized stack.
inline ToleranceReport tolerance_scan(const PlateStack& stack, const Scenario& sc, int target_order,
                                      const ToleranceSpec& spec = {}) {
  Scenario base = sc;
  base.probe.target_order = target_order;
  ToleranceReport rep;
  rep.nominal = stack_efficiency(base, stack);
  const double level = spec.threshold * rep.nominal;
  for (std::size_t p = 0; p < stack.size(); ++p) {
    PlateTolerance pt;
    for (double off : detail::symmetric_offsets(spec.thickness_span, spec.thickness_step)) {
      PlateStack s = stack;
      s.plates[p].thickness += off;
      if (s.plates[p].thickness < 0.0) continue;
      pt.thickness.offset.push_back(off);
      pt.thickness.efficiency.push_back(off == 0.0 ? rep.nominal : stack_efficiency(base, s));
    }
    for (double off : detail::symmetric_offsets(spec.position_span, spec.position_step)) {
      PlateStack s = stack;
      s.plates[p].position += off;
      const double x = s.plates[p].position;
      if (x < 0.0 || x > base.length) continue;
      if (p > 0 && !(x > s.plates[p - 1].position)) continue;
      if (p + 1 < s.size() && !(x < s.plates[p + 1].position)) continue;
      pt.position.offset.push_back(off);
      pt.position.efficiency.push_back(off == 0.0 ? rep.nominal : stack_efficiency(base, s));
    }
    pt.thickness.half_width = detail::half_width(pt.thickness.offset, pt.thickness.efficiency, level);
    pt.position.half_width = detail::half_width(pt.position.offset, pt.position.efficiency, level);
    rep.plates.push_back(std::move(pt));
  }
  return rep;
}

}  // namespace ramanflow
