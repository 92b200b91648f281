// schedule.hpp - phase-reset schedules that walk photons order by order
//
// To concentrate photons on order m the relative flow phases are set to
//
//   theta(q, q-1) = +pi/2 for q <= m      (flow q-1 -> q)
//   theta(q, q-1) = -pi/2 for q >  m      (flow q -> q-1)
//
// i.e. ... -> m-1 -> m <- m+1 <- ... . A hop from order c to its neighbour m
// uses two resets with this pattern; their positions are found by a coarse
// scan followed by golden-section refinement, maximising the peak fraction
// reached by order m after the second reset. The next hop starts where that
// peak occurs.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "propagation.hpp"

namespace ramanflow {

struct ScheduleOptions {
  double dxi = 0.0;              // integration step; 0 picks window / 400 (capped at 0.1 mm)
  double max_length = std::numeric_limits<double>::infinity();
  int events_per_hop = 2;
  int max_events_per_hop = 2;    // extra resets are added while a hop is below hop_goal
  double hop_goal = 0.0;
  int scan_points = 32;
  int refine_iterations = 20;
  double window_periods = 1.0;   // search window in units of pi / g for the hop pair
};

struct ConcentrationPlan {
  FlowSchedule schedule;
  std::vector<int> hop_orders;           // order reached by each hop
  std::vector<double> hop_efficiency;    // peak fraction reached by each hop
  std::vector<double> hop_peak_position; // xi of that peak (m)
  double dxi = 0.0;
};

/// Single-slice comb propagated with a fixed, uniform coherence.
class UniformCoherenceComb {
 public:
  UniformCoherenceComb(const ModeLadder& ladder, const MediumSpec& medium, const DensityMatrix& rho)
      : ladder_(ladder), lc_(resolve_coupling(ladder, medium)), rho_(rho), rk_(ladder.size()) {
    const std::size_t m = ladder.size();
    diag_.resize(m);
    lower_.resize(m);
    upper_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const cplx ik{0.0, lc_.prefactor[i]};
      diag_[i] = ik * (lc_.a[i] * rho.rho00 + lc_.b[i] * rho.rho11);
      lower_[i] = i > 0 ? ik * lc_.d[i - 1] * std::conj(rho.rho01) : cplx{};
      upper_[i] = i + 1 < m ? ik * std::conj(lc_.d[i]) * rho.rho01 : cplx{};
    }
  }

  const ModeLadder& ladder() const { return ladder_; }
  const LadderCoupling& coupling() const { return lc_; }
  const DensityMatrix& coherence() const { return rho_; }

  void step(std::vector<cplx>& y, double h) {
    const std::size_t m = y.size();
    rk_.step(y, h, [&](const std::vector<cplx>& v, StepPoint, std::vector<cplx>& dv) {
      for (std::size_t i = 0; i < m; ++i) {
        cplx s = diag_[i] * v[i];
        if (i > 0) s += lower_[i] * v[i - 1];
        if (i + 1 < m) s += upper_[i] * v[i + 1];
        dv[i] = s;
      }
    });
  }

  /// Advances by `length` using equal sub-steps no longer than dxi.
  void advance(std::vector<cplx>& y, double length, double dxi) {
    if (length <= 0.0) return;
    const auto n = static_cast<std::size_t>(std::ceil(length / dxi - 1e-9));
    const double h = length / static_cast<double>(std::max<std::size_t>(n, 1));
    for (std::size_t k = 0; k < std::max<std::size_t>(n, 1); ++k) step(y, h);
  }

  double fraction(const std::vector<cplx>& y, std::size_t index, double total) const {
    return photon_density_of(y[index], lc_.omega[index]) / total;
  }

  double photons(const std::vector<cplx>& y) const {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += photon_density_of(y[i], lc_.omega[i]);
    return s;
  }

  /// Phase offsets that set the concentration pattern on ladder index `target`.
  std::vector<double> concentration_offsets(const std::vector<cplx>& y, std::size_t target) const {
    const std::size_t m = y.size();
    std::vector<double> phase(m), wanted(m);
    for (std::size_t i = 0; i < m; ++i) phase[i] = std::arg(y[i]);
    const double phi_rho = std::arg(rho_.rho01);
    wanted[target] = phase[target];
    for (std::size_t i = target + 1; i < m; ++i)
      wanted[i] = wanted[i - 1] - 0.5 * pi - phi_rho + std::arg(lc_.d[i - 1]);
    for (std::size_t i = target; i-- > 0;)
      wanted[i] = wanted[i + 1] - 0.5 * pi + phi_rho - std::arg(lc_.d[i]);
    std::vector<double> off(m);
    for (std::size_t i = 0; i < m; ++i) off[i] = wrap_phase(wanted[i] - phase[i]);
    return off;
  }

  static void apply(std::vector<cplx>& y, const std::vector<double>& offsets) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= std::polar(1.0, offsets[i]);
  }

 private:
  ModeLadder ladder_;
  LadderCoupling lc_;
  DensityMatrix rho_;
  Rk4Stepper<std::vector<cplx>> rk_;
  std::vector<cplx> diag_, lower_, upper_;
};

namespace detail {

struct LineSearchResult {
  double x = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

/// Maximises f on [lo, hi]: uniform scan, then golden section around the best sample.
inline LineSearchResult scan_and_refine(const std::function<double(double)>& f, double lo, double hi,
                                        int scan_points, int refine_iterations) {
  LineSearchResult best;
  const int n = std::max(2, scan_points);
  const double h = (hi - lo) / n;
  int best_k = 0;
  for (int k = 0; k <= n; ++k) {
    const double x = lo + h * k;
    const double v = f(x);
    if (v > best.value) {
      best = {x, v};
      best_k = k;
    }
  }
  double a = lo + h * std::max(0, best_k - 1);
  double b = lo + h * std::min(n, best_k + 1);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < refine_iterations; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  if (fc > best.value) best = {c, fc};
  if (fd > best.value) best = {d, fd};
  return best;
}

}  // namespace detail

/// Builds a concentration schedule from `start` to `target` for a uniform
/// coherence rho01 = rho_mag (real, pure state) and reports per-hop efficiencies.
inline ConcentrationPlan plan_concentration(const ModeLadder& ladder, int start, int target,
                                            const MediumSpec& medium, double rho_mag,
                                            const ScheduleOptions& opt = {}) {
  if (!ladder.contains(start) || !ladder.contains(target))
    throw ConfigError("schedule start / target order outside the ladder");
  ConcentrationPlan plan;
  if (start == target) return plan;

  UniformCoherenceComb comb(ladder, medium, pure_coherence(rho_mag));
  const std::size_t m = ladder.size();
  std::vector<cplx> y(m);
  y[ladder.index(start)] = 1.0;
  const double total = comb.photons(y);

  // Window: one exchange period of the slowest hop pair.
  double slowest = std::numeric_limits<double>::infinity();
  const double g0 = medium.density * phys::hbar * rho_mag / (phys::eps0 * phys::c);
  for (int q = std::min(start, target); q < std::max(start, target); ++q) {
    const std::size_t i = ladder.index(q);
    const LadderCoupling& lc = comb.coupling();
    const double g = g0 * std::abs(lc.d[i]) * std::sqrt(lc.omega[i] * lc.omega[i + 1]);
    slowest = std::min(slowest, g);
  }
  if (!(slowest > 0.0)) throw ConfigError("schedule needs non-zero coupling and coherence");
  const double window = opt.window_periods * pi / slowest;
  const double dxi = opt.dxi > 0.0 ? opt.dxi : std::min(window / 400.0, 1e-4);
  plan.dxi = dxi;

  // Peak fraction of `idx` within the window after state y0, and where it occurs.
  auto peak_after = [&](std::vector<cplx> s, std::size_t idx, double* where,
                        std::vector<cplx>* at_peak) {
    double best = comb.fraction(s, idx, total);
    double best_x = 0.0;
    if (at_peak) *at_peak = s;
    const auto n = static_cast<std::size_t>(std::ceil(window / dxi));
    for (std::size_t k = 1; k <= n; ++k) {
      comb.step(s, dxi);
      const double f = comb.fraction(s, idx, total);
      if (f > best) {
        best = f;
        best_x = dxi * static_cast<double>(k);
        if (at_peak) *at_peak = s;
      }
    }
    if (where) *where = best_x;
    return best;
  };

  double xi = 0.0;
  int current = start;
  const int dir = target > start ? 1 : -1;
  const double min_gap = dxi;

  while (current != target) {
    const int next = current + dir;
    const std::size_t idx = ladder.index(next);
    const std::vector<cplx> base = y;

    // Second reset: best position after the first one (state `after_a`).
    auto best_second = [&](const std::vector<cplx>& after_a) {
      return detail::scan_and_refine(
          [&](double xb) {
            std::vector<cplx> s = after_a;
            comb.advance(s, xb, dxi);
            UniformCoherenceComb::apply(s, comb.concentration_offsets(s, idx));
            return peak_after(s, idx, nullptr, nullptr);
          },
          min_gap, window, opt.scan_points, opt.refine_iterations);
    };
    auto after_first = [&](double xa) {
      std::vector<cplx> s = base;
      comb.advance(s, xa, dxi);
      UniformCoherenceComb::apply(s, comb.concentration_offsets(s, idx));
      return s;
    };

    std::vector<double> offsets_positions;  // relative positions of this hop's resets
    std::vector<cplx> s;
    double xa = 0.0;
    if (opt.events_per_hop >= 2) {
      const auto a = detail::scan_and_refine(
          [&](double x) { return best_second(after_first(x)).value; }, 0.0, window,
          opt.scan_points, opt.refine_iterations);
      xa = a.x;
    }
    // Replay the chosen resets to emit events with their actual offsets.
    s = base;
    double pos = 0.0;
    auto emit = [&](double rel) {
      comb.advance(s, rel - pos, dxi);
      pos = rel;
      const auto off = comb.concentration_offsets(s, idx);
      UniformCoherenceComb::apply(s, off);
      plan.schedule.events.push_back({xi + rel, off});
      plan.schedule.target_orders.push_back(next);
    };
    if (opt.events_per_hop >= 2) {
      emit(xa);
      const auto b = best_second(s);
      emit(xa + b.x);
    } else {
      const auto a = detail::scan_and_refine(
          [&](double x) {
            std::vector<cplx> t = base;
            comb.advance(t, x, dxi);
            UniformCoherenceComb::apply(t, comb.concentration_offsets(t, idx));
            return peak_after(t, idx, nullptr, nullptr);
          },
          0.0, window, opt.scan_points, opt.refine_iterations);
      emit(a.x);
    }
    int used = std::max(1, std::min(opt.events_per_hop, 2));

    double peak_rel = 0.0;
    std::vector<cplx> at_peak;
    double eff = peak_after(s, idx, &peak_rel, &at_peak);
    // Extra resets while below the goal.
    while (eff < opt.hop_goal && used < opt.max_events_per_hop) {
      const auto c = detail::scan_and_refine(
          [&](double x) {
            std::vector<cplx> t = s;
            comb.advance(t, x, dxi);
            UniformCoherenceComb::apply(t, comb.concentration_offsets(t, idx));
            return peak_after(t, idx, nullptr, nullptr);
          },
          min_gap, window, opt.scan_points, opt.refine_iterations);
      if (c.value <= eff) break;
      emit(pos + c.x);
      ++used;
      eff = peak_after(s, idx, &peak_rel, &at_peak);
    }
    xi += pos + peak_rel;
    y = at_peak;
    plan.hop_orders.push_back(next);
    plan.hop_efficiency.push_back(eff);
    plan.hop_peak_position.push_back(xi);
    current = next;
    if (xi > opt.max_length) throw ConfigError("concentration schedule exceeds the interaction length");
  }
  return plan;
}

inline FlowSchedule concentration_schedule(const ModeLadder& ladder, int start, int target,
                                           const MediumSpec& medium, double rho_mag,
                                           const ScheduleOptions& opt = {}) {
  return plan_concentration(ladder, start, target, medium, rho_mag, opt).schedule;
}

}  // namespace ramanflow
