#include <numeric>

#include <gtest/gtest.h>

#include "ramanflow.hpp"

using namespace ramanflow;

namespace {

double row_sum(const PropagationResult& r, std::size_t row) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.fraction.cols(); ++i) s += r.fraction(row, i);
  return s;
}

double recorded_loss(const PropagationResult& r) {
  double s = 0.0;
  for (const auto& l : r.losses) s += l.total();
  return s;
}

PlateStack spread_stack(std::size_t n, double first_cm, double pitch_cm) {
  std::vector<double> pos, th;
  for (std::size_t k = 0; k < n; ++k) {
    pos.push_back((first_cm + pitch_cm * static_cast<double>(k)) * units::cm);
    th.push_back((140.0 + 7.0 * static_cast<double>(k)) * units::um);
  }
  return detail::make_stack(pos, th, DesignOptions{});
}

}  // namespace

TEST(Experiment, DriveOnlyConservesPhotonsAtEveryRecord) {
  Scenario sc = default_scenario();
  sc.probe_enabled = false;
  const ExperimentResult r = run_experiment(sc);
  EXPECT_EQ(r.probe.fraction.rows(), 0u);
  ASSERT_GT(r.drive.fraction.rows(), 2u);
  for (std::size_t k = 0; k < r.drive.fraction.rows(); ++k) EXPECT_NEAR(row_sum(r.drive, k), 1.0, 1e-6);
  EXPECT_NEAR(total_photons(r.drive.final_field), r.drive.input_photons, 1e-6 * r.drive.input_photons);
}

TEST(Experiment, ProbeLedgerClosesWithPlates) {
  Scenario sc = default_scenario();
  sc.plates = spread_stack(15, 1.0, 2.3);
  const ExperimentResult r = run_experiment(sc);
  ASSERT_EQ(r.probe.losses.size(), 15u);
  const double out = total_photons(r.probe.final_field);
  EXPECT_NEAR(out + recorded_loss(r.probe), r.probe.input_photons, 1e-6 * r.probe.input_photons);
  // Every probe order sits below the transparency edge, so 15 plates remove 15% in aggregate.
  EXPECT_NEAR(recorded_loss(r.probe) / r.probe.input_photons, 0.15, 1e-6);
  // The near-infrared driving pair passes the plates without loss.
  EXPECT_EQ(recorded_loss(r.drive), 0.0);
}

TEST(Experiment, PlatesLeaveCoherenceMagnitudeUnchangedInWeakProbeMode) {
  Scenario sc = default_scenario();
  const ExperimentResult bare = run_experiment(sc);
  sc.plates = spread_stack(5, 3.0, 6.0);
  const ExperimentResult with = run_experiment(sc);
  ASSERT_EQ(bare.coherence.rows(), with.coherence.rows());
  const std::size_t jc = bare.tau.size() / 2;
  // Plates only rotate the driving phases; what remains is the split of steps at each plate.
  for (std::size_t k = 0; k < bare.coherence.rows(); ++k)
    EXPECT_NEAR(std::abs(with.coherence(k, jc)), std::abs(bare.coherence(k, jc)),
                1e-6 * std::abs(bare.coherence(k, jc)));
}

TEST(Experiment, NoPlateRunIsBroad) {
  const ExperimentResult r = run_experiment(default_scenario());
  const auto f = r.probe.final_fraction();
  std::size_t populated = 0;
  for (double v : f) {
    EXPECT_LE(v, 0.6);
    if (v >= 0.02) ++populated;
  }
  EXPECT_GE(populated, 5u);
}

TEST(Experiment, WeakProbeResponseIsLinear) {
  Scenario sc = default_scenario();
  sc.length = 10.0 * units::cm;
  for (auto& p : sc.probe.pulses) p.peak_intensity *= 0.5;  // stay inside the weak-probe ratio
  const ExperimentResult a = run_experiment(sc);
  for (auto& p : sc.probe.pulses) p.peak_intensity *= 2.0;
  const ExperimentResult b = run_experiment(sc);
  const auto na = photons_per_order(a.probe.final_field), nb = photons_per_order(b.probe.final_field);
  for (std::size_t i = 0; i < na.size(); ++i) EXPECT_NEAR(nb[i], 2.0 * na[i], 0.01 * 2.0 * na[i] + 1e-300);
}

TEST(Experiment, WeakProbeRatioIsEnforced) {
  Scenario sc = default_scenario();
  for (auto& p : sc.probe.pulses) p.peak_intensity = sc.drive.pulses[0].peak_intensity;
  EXPECT_THROW(run_experiment(sc), ConfigError);
  sc.coupling = CouplingMode::fully_coupled;
  sc.length = 1.0 * units::cm;
  EXPECT_NO_THROW(run_experiment(sc));
}

TEST(Experiment, FullyCoupledWithTinyProbeMatchesWeakProbe) {
  Scenario sc = default_scenario();
  sc.length = 8.0 * units::cm;
  for (auto& p : sc.probe.pulses) p.peak_intensity *= 1e-4;
  const ExperimentResult weak = run_experiment(sc);
  sc.coupling = CouplingMode::fully_coupled;
  const ExperimentResult full = run_experiment(sc);
  const auto fw = weak.probe.final_fraction(), ff = full.probe.final_fraction();
  for (std::size_t i = 0; i < fw.size(); ++i) EXPECT_NEAR(ff[i], fw[i], 1e-5);
}

TEST(Experiment, RunsAreBitReproducible) {
  Scenario sc = default_scenario();
  sc.length = 5.0 * units::cm;
  sc.plates = spread_stack(2, 1.0, 2.0);
  const ExperimentResult a = run_experiment(sc), b = run_experiment(sc);
  EXPECT_EQ(a.probe.fraction, b.probe.fraction);
  EXPECT_EQ(a.drive.fraction, b.drive.fraction);
  EXPECT_EQ(a.coherence, b.coherence);
}

TEST(Experiment, TargetEfficiencyConvergesWithGrid) {
  Scenario sc = default_scenario();
  sc.length = 12.0 * units::cm;
  const double coarse = run_experiment(sc).efficiency(sc.probe.target_order);
  sc.grid.dxi /= 2.0;
  sc.grid.tau_samples = 2 * sc.grid.tau_samples - 1;
  const double fine = run_experiment(sc).efficiency(sc.probe.target_order);
  EXPECT_NEAR(coarse, fine, 1e-3);
}

TEST(Experiment, MarchCheckpointResumesIdentically) {
  Scenario sc = default_scenario();
  sc.length = 4.0 * units::cm;
  ExperimentMarch whole(sc, false);
  whole.run();
  ExperimentMarch half(sc, false);
  half.run_until(2.0 * units::cm);
  ExperimentMarch copy = half;
  copy.run();
  EXPECT_EQ(copy.probe_field()->amplitude, whole.probe_field()->amplitude);
}

TEST(Ideal, EmptyScheduleIsBroad) {
  Scenario sc = default_scenario();
  sc.probe_enabled = true;
  sc.grid.tau_samples = 1;
  sc.grid.dxi = 0.05 * units::mm;
  const ExperimentResult r = run_ideal(sc, FlowSchedule{});
  const auto f = r.probe.final_fraction();
  EXPECT_NEAR(std::accumulate(f.begin(), f.end(), 0.0), 1.0, 1e-6);
  EXPECT_LT(*std::max_element(f.begin(), f.end()), 0.6);
  EXPECT_GE(std::count_if(f.begin(), f.end(), [](double v) { return v >= 0.02; }), 5);
}

TEST(Ideal, CoherenceOutsideRangeIsRejected) {
  Scenario sc = default_scenario();
  sc.ideal_coherence = 0.7;
  EXPECT_THROW(run_ideal(sc, FlowSchedule{}), ConfigError);
}

TEST(Sweep, ZeroOffsetEqualsPlainRun) {
  Scenario sc = default_scenario();
  sc.length = 6.0 * units::cm;
  const PlateStack st = spread_stack(2, 1.5, 2.0);
  const auto pts = tunability_sweep(sc, st, {-5e9, 0.0, 5e9});
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[1].efficiency, stack_efficiency(sc, st));
  EXPECT_NE(pts[0].efficiency, pts[2].efficiency);
}
