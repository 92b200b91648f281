#include <random>

#include <gtest/gtest.h>

#include "ramanflow.hpp"

using namespace ramanflow;

namespace {

MediumSpec bare_medium(const ModeLadder& l) {
  MediumModel mm;
  mm.detuning = 0.0;
  return mm.for_ladder(l);
}

RabiSample real_drive(double w) { return {0.0, 0.0, cplx{w, 0.0}}; }

// Peak |rho01| and final rho11 for the two-colour driving pair at the given intensity.
struct DriveOutcome {
  double peak = 0.0;
  double final_excited = 0.0;
  CoherenceState rho;
};

DriveOutcome drive_pair(double intensity_gw_cm2, std::size_t samples, bool square = false) {
  Scenario sc = default_scenario();
  sc.grid.tau_samples = samples;
  sc.grid.tau_half_span_fwhm = 3.0;
  for (auto& p : sc.drive.pulses) p.peak_intensity = intensity_gw_cm2 * units::gw_per_cm2;
  const auto tau = sc.tau_grid();
  FieldState fs = initial_field(sc.drive, tau);
  if (square) {
    const double e0 = amplitude_from_intensity(intensity_gw_cm2 * units::gw_per_cm2);
    for (std::size_t j = 0; j < tau.size(); ++j) {
      const double v = std::abs(tau[j]) < 5e-9 ? e0 : 0.0;
      fs.at(0, j) = v;
      fs.at(-1, j) = v;
    }
  }
  DriveOutcome out;
  out.rho = drive_adiabatic(fs, sc.medium.for_ladder(sc.drive.ladder), {}, 4);
  for (const auto& r : out.rho) out.peak = std::max(out.peak, std::abs(r.rho01));
  out.final_excited = out.rho.back().rho11;
  return out;
}

}  // namespace

TEST(Rabi, ZeroFieldsGiveZeroTerms) {
  const ModeLadder l = build_ladder(801.0817, 124.7451, -1, 1);
  const auto r = rabi_from_fields(FieldState::zeros(l, {0.0, 1.0}), bare_medium(l));
  for (const auto& s : r) {
    EXPECT_EQ(s.stark_ground, 0.0);
    EXPECT_EQ(s.stark_excited, 0.0);
    EXPECT_EQ(s.two_photon, cplx{});
  }
}

TEST(Rabi, SingleOccupiedModeHasOnlyStarkShift) {
  const ModeLadder l = build_ladder(801.0817, 124.7451, -1, 1);
  const MediumSpec m = bare_medium(l);
  FieldState fs = FieldState::zeros(l, {0.0});
  fs.at(0, 0) = {2e8, -1e8};
  const auto r = rabi_from_fields(fs, m);
  EXPECT_EQ(r[0].two_photon, cplx{});
  const double e2 = 5e16;
  EXPECT_NEAR(r[0].stark_ground, m.rabi_scale * m.coefficients.a[1] * e2, 1e-12 * r[0].stark_ground);
  EXPECT_NEAR(r[0].stark_excited, m.rabi_scale * m.coefficients.b[1] * e2, 1e-12 * r[0].stark_excited);
}

TEST(Rabi, TwoPhotonTermPairsLowerWithConjugateUpper) {
  const ModeLadder l = build_ladder(801.0817, 124.7451, -1, 0);
  const MediumSpec m = bare_medium(l);
  FieldState fs = FieldState::zeros(l, {0.0});
  fs.at(-1, 0) = std::polar(3e8, 0.2);
  fs.at(0, 0) = std::polar(2e8, -0.7);
  const cplx w0 = rabi_from_fields(fs, m)[0].two_photon;
  EXPECT_NEAR(std::abs(w0), m.rabi_scale * std::abs(m.coefficients.d[0]) * 6e16, 1e-12 * std::abs(w0));
  for (double theta : {0.3, 1.1, -2.5}) {
    FieldState g = fs;
    g.at(0, 0) *= std::polar(1.0, theta);
    const cplx w = rabi_from_fields(g, m)[0].two_photon;
    EXPECT_NEAR(std::abs(w), std::abs(w0), 1e-12 * std::abs(w0));
    // A phase on the upper mode enters conjugated.
    EXPECT_NEAR(wrap_phase(std::arg(w) - std::arg(w0) + theta), 0.0, 1e-12);
  }
}

TEST(Rabi, GlobalPhaseInvariance) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1e8);
  const ModeLadder l = build_ladder(801.0817, 124.7451, -2, 2);
  const MediumSpec m = bare_medium(l);
  FieldState fs = FieldState::zeros(l, {0.0, 1e-9, 2e-9});
  for (cplx& e : fs.amplitude.flat()) e = {g(rng), g(rng)};
  const auto r0 = rabi_from_fields(fs, m);
  apply_phase_offsets(fs, std::vector<double>(l.size(), 1.234));
  const auto r1 = rabi_from_fields(fs, m);
  for (std::size_t j = 0; j < r0.size(); ++j) {
    EXPECT_NEAR(std::abs(r1[j].two_photon), std::abs(r0[j].two_photon), 1e-12 * std::abs(r0[j].two_photon));
    EXPECT_NEAR(std::arg(r1[j].two_photon), std::arg(r0[j].two_photon), 1e-12);
    EXPECT_NEAR(r1[j].stark_ground, r0[j].stark_ground, 1e-12 * r0[j].stark_ground);
  }
}

TEST(Bloch, FreeEvolutionLeavesStateUnchanged) {
  MediumSpec m;
  const DensityMatrix s{0.7, 0.3, {0.2, -0.1}};
  DensityMatrix x = s;
  for (int k = 0; k < 100; ++k) x = step_bloch(x, RabiSample{}, m, 1e-10);
  EXPECT_NEAR(x.rho00, s.rho00, 1e-12);
  EXPECT_NEAR(x.rho11, s.rho11, 1e-12);
  EXPECT_NEAR(std::abs(x.rho01 - s.rho01), 0.0, 1e-12);
}

TEST(Bloch, ResonantRabiOscillationMatchesClosedForm) {
  // Ground start, real constant W: rho11 = sin^2(W tau), period pi / W.
  MediumSpec m;
  const double w = 2e9;
  const double dtau = 1e-12;
  DensityMatrix x;
  double worst = 0.0;
  for (int k = 1; k <= 4000; ++k) {
    x = step_bloch(x, real_drive(w), m, dtau);
    worst = std::max(worst, std::abs(x.rho11 - std::pow(std::sin(w * k * dtau), 2)));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(Bloch, MatchesTenfoldFinerStep) {
  MediumSpec m;
  m.detuning = 3e8;
  const RabiSample r{1e8, -5e7, {1.5e9, 0.7e9}};
  DensityMatrix coarse, fine;
  for (int k = 0; k < 500; ++k) coarse = step_bloch(coarse, r, m, 2e-12);
  for (int k = 0; k < 5000; ++k) fine = step_bloch(fine, r, m, 2e-13);
  EXPECT_LT(std::abs(coarse.rho11 - fine.rho11), 1e-8);
  EXPECT_LT(std::abs(coarse.rho01 - fine.rho01), 1e-8);
}

TEST(Bloch, RabiPeriodMatchesCoupling) {
  MediumSpec m;
  const double w = 1e9;
  const double dtau = 1e-12;
  std::vector<double> excited{0.0};
  DensityMatrix x;
  for (int k = 1; k <= 4000; ++k) {
    x = step_bloch(x, real_drive(w), m, dtau);
    excited.push_back(x.rho11);
  }
  // First return to the ground state: parabolic vertex around the grid minimum past 2 ns.
  std::size_t k = 2000;
  for (std::size_t j = 2000; j + 1 < excited.size(); ++j)
    if (excited[j] < excited[k]) k = j;
  const double y0 = excited[k - 1], y1 = excited[k], y2 = excited[k + 1];
  const double vertex = (static_cast<double>(k) + 0.5 * (y0 - y2) / (y0 - 2.0 * y1 + y2)) * dtau;
  EXPECT_LT(std::abs(vertex - pi / w) / (pi / w), 1e-6);
}

TEST(Bloch, PopulationDecayIsExponentialAndTraceConserved) {
  MediumSpec m;
  m.gamma_a = m.gamma_b = 1e6;
  DensityMatrix x{0.8, 0.2, {}};
  const double dtau = 1e-9;
  for (int k = 1; k <= 2000; ++k) {
    x = step_bloch(x, RabiSample{}, m, dtau);
    ASSERT_NEAR(x.rho11, 0.2 * std::exp(-1e6 * k * dtau), 1e-10);
    ASSERT_NEAR(x.trace(), 1.0, 1e-9);
  }
}

TEST(Bloch, TraceAndPurityBoundOverTenThousandSteps) {
  MediumSpec m;
  m.detuning = -two_pi * 500e6;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2e9, 2e9);
  DensityMatrix x;
  for (int k = 0; k < 10000; ++k) {
    const RabiSample r{u(rng) * 0.1, u(rng) * 0.1, {u(rng), u(rng)}};
    x = step_bloch(x, r, m, 5e-12);
    ASSERT_NEAR(x.trace(), 1.0, 1e-9);
    ASSERT_LE(std::norm(x.rho01), x.rho00 * x.rho11 + 1e-9);
  }
}

TEST(Bloch, OversizedStepIsRejected) {
  MediumSpec m;
  EXPECT_THROW(step_bloch(DensityMatrix{}, real_drive(1e11), m, 1e-8), NumericalError);
  EXPECT_THROW(step_bloch(DensityMatrix{}, real_drive(1e9), m, -1.0), ConfigError);
}

TEST(Adiabatic, ZeroFieldStaysInGround) {
  const ModeLadder l = build_ladder(801.0817, 124.7451, -1, 0);
  std::vector<double> tau(50);
  for (std::size_t j = 0; j < tau.size(); ++j) tau[j] = 1e-10 * static_cast<double>(j);
  const auto rho = drive_adiabatic(FieldState::zeros(l, tau), bare_medium(l));
  for (const auto& r : rho) EXPECT_EQ(r, DensityMatrix{});
}

TEST(Adiabatic, DetunedGaussianPairReturnsToGround) {
  // Tune the pair intensity so the peak coherence is 0.3.
  double lo = 0.1, hi = 10.0;
  for (int it = 0; it < 30; ++it) {
    const double mid = std::sqrt(lo * hi);
    (drive_pair(mid, 201).peak < 0.3 ? lo : hi) = mid;
  }
  const double intensity = std::sqrt(lo * hi);
  const DriveOutcome coarse = drive_pair(intensity, 201);
  EXPECT_NEAR(coarse.peak, 0.3, 1e-3);
  EXPECT_LT(coarse.final_excited, 1e-3);
  // The 10x finer tau grid agrees.
  const DriveOutcome fine = drive_pair(intensity, 2001);
  EXPECT_NEAR(fine.peak, coarse.peak, 1e-4);
  EXPECT_LT(fine.final_excited, 1e-3);
}

TEST(Adiabatic, SuddenSquarePulseLeavesExcitation) {
  const DriveOutcome sq = drive_pair(10.0, 2001, true);
  EXPECT_GT(sq.final_excited, 1e-2);
}
