#include <gtest/gtest.h>

#include "ramanflow.hpp"

using namespace ramanflow;

namespace {

constexpr double shift_thz = 124.7451;

FieldState unit_mode(const ModeLadder& l, int q) {
  FieldState fs = FieldState::zeros(l, {0.0});
  fs.at(q, 0) = amplitude_from_intensity(1e12);
  return fs;
}

// Independent reset rule for a 3-mode ladder converging on the top order:
// both pairs get flow phase +pi/2 (upward), applied by rotating the upper modes.
void converge_on_top(FieldState& fs, const LadderCoupling& lc, const DensityMatrix& r) {
  const double phi_rho = std::arg(r.rho01);
  const double p0 = std::arg(fs.amplitude(0, 0));
  const double p1 = p0 + pi / 2 - phi_rho + std::arg(lc.d[0]);
  const double p2 = p1 + pi / 2 - phi_rho + std::arg(lc.d[1]);
  const double want[3] = {p0, p1, p2};
  for (std::size_t i = 1; i < 3; ++i) {
    const cplx e = fs.amplitude(i, 0);
    if (e != cplx{}) fs.amplitude(i, 0) = std::polar(std::abs(e), want[i]);
  }
}

}  // namespace

TEST(Schedule, SameStartAndTargetIsEmpty) {
  const ModeLadder l = build_ladder(210.0, shift_thz, -1, 8);
  const auto s = concentration_schedule(l, 3, 3, MediumModel{}.for_ladder(l), 0.3);
  EXPECT_TRUE(s.events.empty());
}

TEST(Schedule, TargetOutsideLadderIsRejected) {
  const ModeLadder l = build_ladder(210.0, shift_thz, -1, 2);
  EXPECT_THROW(concentration_schedule(l, 0, 5, MediumModel{}.for_ladder(l), 0.3), ConfigError);
}

TEST(Schedule, ThreeModeSingleHopBeatsExhaustiveSweep) {
  const ModeLadder l = build_ladder(210.0, shift_thz, -1, 1);
  const MediumSpec m = MediumModel{}.for_ladder(l);
  const DensityMatrix rho = pure_coherence(0.3);
  const ConcentrationPlan plan = plan_concentration(l, 0, 1, m, 0.3);
  ASSERT_EQ(plan.schedule.events.size(), 2u);
  ASSERT_EQ(plan.hop_efficiency.size(), 1u);
  EXPECT_GE(plan.hop_efficiency[0], 0.98);

  // Replaying the emitted schedule through the general integrator reproduces the claim.
  const double end = plan.hop_peak_position[0];
  const auto n = static_cast<std::size_t>(std::ceil(end / 2e-5));
  const auto replay = propagate_field(unit_mode(l, 0), CoherenceState(1, rho), m, end / n, n, plan.schedule);
  EXPECT_NEAR(replay.final_fraction()[2], plan.hop_efficiency[0], 1e-4);

  // Exhaustive grid over both reset positions using the independent reset rule.
  const LadderCoupling lc = resolve_coupling(l, m);
  const double g = m.density * 1.054571817e-34 * std::abs(lc.d[1]) * std::sqrt(lc.omega[1] * lc.omega[2]) * 0.3 /
                   (8.8541878128e-12 * 299792458.0);
  const double window = pi / g;
  const std::size_t grid = 40;
  const double h = window / 400.0;
  FieldIntegrator integ(lc);
  const CoherenceState rs(1, rho);
  double oracle = 0.0;
  for (std::size_t ia = 0; ia <= grid; ++ia) {
    FieldState a = unit_mode(l, 0);
    const double xa = window * static_cast<double>(ia) / grid;
    for (double x = 0.0; x < xa - 1e-15; x += h) integ.advance(a, rs, std::min(h, xa - x));
    converge_on_top(a, lc, rho);
    for (std::size_t ib = 1; ib <= grid; ++ib) {
      FieldState b = a;
      const double xb = window * static_cast<double>(ib) / grid;
      for (double x = 0.0; x < xb - 1e-15; x += h) integ.advance(b, rs, std::min(h, xb - x));
      converge_on_top(b, lc, rho);
      for (int k = 0; k < 400; ++k) {
        integ.advance(b, rs, h);
        oracle = std::max(oracle, photons_per_order(b)[2] / total_photons(b));
      }
    }
  }
  EXPECT_GE(plan.hop_efficiency[0], oracle - 2e-3);
}

TEST(Schedule, VuvPlanUsesSixteenEvents) {
  const ModeLadder l = build_ladder(210.0, shift_thz, -1, 8);
  ScheduleOptions so;
  so.scan_points = 16;
  so.refine_iterations = 12;
  const ConcentrationPlan plan = plan_concentration(l, 0, 8, MediumModel{}.for_ladder(l), 0.3, so);
  EXPECT_EQ(plan.schedule.events.size(), 16u);
  ASSERT_EQ(plan.hop_orders.size(), 8u);
  for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(plan.hop_orders[k], static_cast<int>(k) + 1);
  for (std::size_t k = 1; k < plan.schedule.events.size(); ++k)
    EXPECT_GT(plan.schedule.events[k].position, plan.schedule.events[k - 1].position);
  EXPECT_EQ(plan.schedule.target_orders.size(), plan.schedule.events.size());
}

TEST(Schedule, DownwardPlanWalksTowardStokes) {
  const ModeLadder l = build_ladder(760.0, shift_thz, -3, 2);
  MediumModel mm;
  mm.density = 2.6e19 * units::per_cm3;
  ScheduleOptions so;
  so.scan_points = 16;
  so.refine_iterations = 12;
  const ConcentrationPlan plan = plan_concentration(l, 0, -1, mm.for_ladder(l), 0.3, so);
  ASSERT_EQ(plan.hop_orders.size(), 1u);
  EXPECT_EQ(plan.hop_orders[0], -1);
  EXPECT_GT(plan.hop_efficiency[0], 0.9);
}

TEST(Schedule, LengthLimitIsEnforced) {
  const ModeLadder l = build_ladder(210.0, shift_thz, -1, 8);
  ScheduleOptions so;
  so.scan_points = 8;
  so.refine_iterations = 6;
  so.max_length = 0.01;
  EXPECT_THROW(plan_concentration(l, 0, 8, MediumModel{}.for_ladder(l), 0.3, so), ConfigError);
}
