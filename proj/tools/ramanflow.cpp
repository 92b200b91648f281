// ramanflow command-line front end.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <cstdio>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "ramanflow.hpp"

namespace rf = ramanflow;
namespace fs = std::filesystem;
using rf::json;

namespace {

rf::json hashed(const rf::LoadedScenario& ls, const json& command) {
  return json{{"config", ls.config}, {"command", command}};
}

json provenance(const json& hashed_doc, std::uint64_t seed) {
  return {{"config_hash", rf::config_hash(hashed_doc)}, {"seed", seed}, {"version", rf::version}};
}

int cmd_simulate(const std::string& path, const std::string& plates, const fs::path& out) {
  auto ls = rf::load_scenario(path);
  if (!plates.empty()) {
    ls.scenario.plates = rf::read_plate_csv(plates, {{"MgF2", rf::mgf2()}});
    ls.scenario.validate();
  }
  const json h = hashed(ls, {{"command", "simulate"}, {"plates", rf::plate_csv(ls.scenario.plates)}});
  const rf::ExperimentResult r = rf::run_experiment(ls.scenario);
  const rf::Scenario& sc = ls.scenario;
  rf::write_text(out / "drive_fractions.csv", rf::fraction_csv(r.drive, sc.drive.ladder));
  if (sc.probe_enabled) rf::write_text(out / "probe_fractions.csv", rf::fraction_csv(r.probe, sc.probe.ladder));
  rf::write_text(out / "coherence.csv", rf::coherence_csv(r));
  json summary{{"scenario", sc.name}, {"provenance", provenance(h, 0)}, {"drive", rf::series_summary(r.drive)}};
  if (sc.probe_enabled) {
    summary["probe"] = rf::series_summary(r.probe);
    summary["target_order"] = sc.probe.target_order;
    summary["efficiency"] = r.efficiency(sc.probe.target_order);
  }
  rf::write_json(out / "summary.json", summary);
  if (sc.probe_enabled)
    std::printf("order %+d efficiency %.6f\n", sc.probe.target_order, r.efficiency(sc.probe.target_order));
  return 0;
}

int cmd_ideal(const std::string& path, const std::string& schedule_file, const fs::path& out) {
  auto ls = rf::load_scenario(path);
  rf::Scenario sc = ls.scenario;
  const rf::SeriesSpec& series = sc.probe_enabled ? sc.probe : sc.drive;
  rf::FlowSchedule schedule;
  json plan_json = json::object();
  if (!schedule_file.empty()) {
    schedule = rf::read_schedule_csv(schedule_file, series.ladder);
  } else if (!ls.schedule.is_null()) {
    const json& j = ls.schedule;
    rf::ScheduleOptions so;
    so.events_per_hop = rf::detail::get_or(j, "events_per_hop", so.events_per_hop);
    so.max_events_per_hop = rf::detail::get_or(j, "max_events_per_hop", std::max(so.max_events_per_hop, so.events_per_hop));
    so.hop_goal = rf::detail::get_or(j, "hop_goal", so.hop_goal);
    const bool fit = rf::detail::get_or(j, "fit_length", false);
    if (!fit) so.max_length = sc.length;
    const int start = rf::detail::get_or(j, "start_order", 0);
    const int target = rf::detail::get_or(j, "target_order", series.target_order);
    const auto plan = rf::plan_concentration(series.ladder, start, target, sc.medium.for_ladder(series.ladder),
                                             sc.ideal_coherence, so);
    schedule = plan.schedule;
    if (fit && !plan.hop_peak_position.empty()) sc.length = plan.hop_peak_position.back();
    plan_json = {{"hop_orders", plan.hop_orders}, {"hop_efficiency", plan.hop_efficiency}};
    json pos = json::array();
    for (double x : plan.hop_peak_position) pos.push_back(x / rf::units::cm);
    plan_json["hop_peak_position_cm"] = pos;
    plan_json["events"] = schedule.events.size();
  }
  const json h = hashed(ls, {{"command", "ideal"}, {"schedule", rf::schedule_csv(schedule, series.ladder)}});
  const rf::ExperimentResult r = rf::run_ideal(sc, schedule);
  rf::write_text(out / "schedule.csv", rf::schedule_csv(schedule, series.ladder));
  rf::write_text(out / "fractions.csv", rf::fraction_csv(r.probe, series.ladder));
  rf::write_text(out / "propagation.csv", rf::propagation_csv(r.probe, series.ladder));
  json summary{{"scenario", sc.name},
               {"provenance", provenance(h, 0)},
               {"length_cm", sc.length / rf::units::cm},
               {"series", rf::series_summary(r.probe)},
               {"target_order", series.target_order},
               {"efficiency", r.efficiency(series.target_order)}};
  if (!plan_json.empty()) summary["plan"] = plan_json;
  rf::write_json(out / "summary.json", summary);
  std::printf("order %+d efficiency %.6f after %.3f cm (%zu events)\n", series.target_order,
              r.efficiency(series.target_order), sc.length / rf::units::cm, schedule.events.size());
  return 0;
}

int cmd_design(const std::string& path, int target, std::size_t plates, std::uint64_t seed, long evals,
               bool tolerance, const fs::path& out) {
  auto ls = rf::load_scenario(path);
  rf::SearchConfig cfg = rf::search_config_from_json(ls.config.value("search", json()));
  cfg.seed = seed;
  if (evals > 0) cfg.max_evaluations = static_cast<std::size_t>(evals);
  const rf::DesignOptions opt = rf::design_options_from_json(ls.config.value("design", json()));
  const json h = hashed(ls, {{"command", "design"},
                             {"target_order", target},
                             {"plates", plates},
                             {"seed", seed},
                             {"evaluations", cfg.max_evaluations},
                             {"tolerance", tolerance}});
  const rf::DesignResult res = rf::design_stack(ls.scenario, target, plates, cfg, opt);
  rf::write_text(out / "stack.csv", rf::plate_csv(res.stack));
  rf::write_text(out / "trace.csv", rf::trace_csv(res.report));
  json summary{{"scenario", ls.scenario.name},
               {"provenance", provenance(h, seed)},
               {"target_order", target},
               {"plates", plates},
               {"baseline", res.baseline},
               {"efficiency", res.report.best_value},
               {"evaluations", res.report.evaluations},
               {"plate_targets", res.plate_targets}};
  if (tolerance && !res.stack.empty()) {
    const rf::ToleranceReport tr = rf::tolerance_scan(res.stack, ls.scenario, target);
    std::string csv = "plate,kind,offset,efficiency\n";
    json widths = json::array();
    for (std::size_t p = 0; p < tr.plates.size(); ++p) {
      const auto& pt = tr.plates[p];
      for (std::size_t k = 0; k < pt.thickness.offset.size(); ++k)
        csv += std::to_string(p) + ",thickness_um," + rf::fmt(pt.thickness.offset[k] / rf::units::um) + "," +
               rf::fmt(pt.thickness.efficiency[k]) + "\n";
      for (std::size_t k = 0; k < pt.position.offset.size(); ++k)
        csv += std::to_string(p) + ",position_mm," + rf::fmt(pt.position.offset[k] / rf::units::mm) + "," +
               rf::fmt(pt.position.efficiency[k]) + "\n";
      widths.push_back({{"thickness_um", pt.thickness.half_width / rf::units::um},
                        {"position_mm", pt.position.half_width / rf::units::mm}});
    }
    rf::write_text(out / "tolerance.csv", csv);
    summary["tolerance_half_widths"] = widths;
  }
  rf::write_json(out / "design.json", summary);
  std::printf("order %+d efficiency %.6f (baseline %.6f, %zu evaluations)\n", target, res.report.best_value,
              res.baseline, res.report.evaluations);
  return 0;
}

int cmd_ladder(double base_nm, double shift_thz, const std::string& range) {
  int lo = 0, hi = 0;
  if (std::sscanf(range.c_str(), "%d:%d", &lo, &hi) != 2) throw rf::ConfigError("--range expects qmin:qmax");
  const rf::ModeLadder l = rf::build_ladder(base_nm, shift_thz, lo, hi);
  std::printf("order,frequency_thz,wavelength_nm\n");
  for (int q = lo; q <= hi; ++q)
    std::printf("%d,%.6f,%.6f\n", q, l.frequency(q) / rf::units::thz, l.wavelength(q) / rf::units::nm);
  return 0;
}

int cmd_sweep(const std::string& path, const std::string& plates, double span_ghz, int points,
              const fs::path& out) {
  auto ls = rf::load_scenario(path);
  rf::PlateStack stack = ls.scenario.plates;
  if (!plates.empty()) stack = rf::read_plate_csv(plates, {{"MgF2", rf::mgf2()}});
  if (points < 1) throw rf::ConfigError("--points must be >= 1");
  std::vector<double> offsets;
  for (int k = 0; k < points; ++k)
    offsets.push_back(points == 1 ? 0.0 : (-span_ghz + 2.0 * span_ghz * k / (points - 1)) * rf::units::ghz);
  const auto sweep = rf::tunability_sweep(ls.scenario, stack, offsets);
  std::string csv = "offset_ghz,efficiency\n";
  for (const auto& p : sweep) csv += rf::fmt(p.offset_hz / rf::units::ghz) + "," + rf::fmt(p.efficiency) + "\n";
  rf::write_text(out / "sweep.csv", csv);
  const json h = hashed(ls, {{"command", "sweep"}, {"plates", rf::plate_csv(stack)}, {"span_ghz", span_ghz},
                             {"points", points}});
  rf::write_json(out / "sweep.json", {{"provenance", provenance(h, 0)}, {"points", sweep.size()}});
  std::fputs(csv.c_str(), stdout);
  return 0;
}

// ---- verify ------------------------------------------------------------------

struct Check {
  std::string name;
  double value;
  double limit;
};

rf::FieldState random_populated(const rf::ModeLadder& l, std::size_t samples, std::mt19937_64& rng) {
  std::vector<double> tau(samples);
  for (std::size_t j = 0; j < samples; ++j) tau[j] = static_cast<double>(j) * 1e-10;
  rf::FieldState fs = rf::FieldState::zeros(l, tau);
  std::uniform_real_distribution<double> mag(0.2, 1.0), ph(-rf::pi, rf::pi);
  const double e0 = rf::amplitude_from_intensity(1e13);
  for (std::size_t i = 0; i < l.size(); ++i)
    for (std::size_t j = 0; j < samples; ++j) fs.amplitude(i, j) = std::polar(e0 * mag(rng), ph(rng));
  return fs;
}

int cmd_verify(const std::string& path) {
  rf::Scenario sc = path.empty() ? rf::default_scenario() : rf::load_scenario(path).scenario;
  const rf::SeriesSpec& series = sc.probe_enabled ? sc.probe : sc.drive;
  std::vector<Check> checks;

  // Conservation: lossless fixed-coherence run over the full length.
  {
    const rf::MediumSpec medium = sc.medium.for_ladder(series.ladder);
    std::vector<double> tau{0.0};
    rf::FieldState f0 = rf::initial_field(series, tau);
    rf::CoherenceState rho(1, rf::pure_coherence(sc.ideal_coherence));
    const auto r = rf::propagate_field(f0, rho, medium, sc.step_length(), sc.steps(), {});
    double worst = 0.0;
    for (std::size_t k = 0; k < r.fraction.rows(); ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < r.fraction.cols(); ++i) s += r.fraction(k, i);
      worst = std::max(worst, std::abs(s - 1.0));
    }
    checks.push_back({"photon conservation (relative drift)", worst, 1e-6});
  }
  // Equivalence: field vs flow formulation on randomized populated instances.
  {
    std::mt19937_64 rng(7);
    const rf::ModeLadder l = rf::build_ladder(210.0, 124.7451, -2, 2);
    const rf::MediumSpec medium = sc.medium.for_ladder(l);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      const rf::FieldState f0 = random_populated(l, 3, rng);
      rf::CoherenceState rho(3, rf::pure_coherence(0.3, 0.4 * trial));
      const auto a = rf::propagate_field(f0, rho, medium, 1e-4, 500, {});
      const auto b = rf::propagate_flow(rf::to_flow(f0), rho, medium, 1e-4, 500, {});
      for (std::size_t k = 0; k < a.fraction.rows(); ++k)
        for (std::size_t i = 0; i < a.fraction.cols(); ++i)
          worst = std::max(worst, std::abs(a.fraction(k, i) - b.fraction(k, i)));
    }
    checks.push_back({"field/flow equivalence (max fraction difference)", worst, 1e-6});
  }
  // Convergence: halving the xi step of the ideal-mode run.
  {
    rf::Scenario a = sc;
    a.grid.tau_samples = 1;
    rf::Scenario b = a;
    b.grid.dxi = a.grid.dxi / 2.0;
    const double fa = rf::run_ideal(a, {}).efficiency(series.target_order);
    const double fb = rf::run_ideal(b, {}).efficiency(series.target_order);
    checks.push_back({"xi-step halving (ideal mode, target fraction change)", std::abs(fa - fb), 1e-7});
  }

  bool ok = true;
  for (const Check& c : checks) {
    const bool pass = c.value < c.limit;
    ok = ok && pass;
    std::printf("%s  %-55s %.3e (limit %.1e)\n", pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.limit);
  }
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Raman sideband photon-flow simulator and plate designer"};
  app.require_subcommand(1);
  std::string scenario, plates, schedule;
  std::string out = "out";
  int target = 8;
  std::size_t n_plates = 15;
  std::uint64_t seed = 1;
  long evals = 0;
  bool tolerance = false;
  double base_nm = 210.0, shift_thz = 124.7451, span_ghz = 20.0;
  std::string range = "-1:8";
  int points = 9;

  auto* sim = app.add_subcommand("simulate", "full experiment (driving + probe series, plates)");
  sim->add_option("scenario", scenario, "scenario JSON")->required();
  sim->add_option("--plates", plates, "plate stack CSV overriding the scenario");
  sim->add_option("--out", out, "output directory");

  auto* ideal = app.add_subcommand("ideal", "fixed-coherence propagation with phase resets");
  ideal->add_option("scenario", scenario, "scenario JSON")->required();
  ideal->add_option("--schedule", schedule, "schedule CSV (default: generated from the scenario)");
  ideal->add_option("--out", out, "output directory");

  auto* design = app.add_subcommand("design", "optimize plate thicknesses for a target order");
  design->add_option("scenario", scenario, "scenario JSON")->required();
  design->add_option("--target-order", target, "order to concentrate into")->required();
  design->add_option("--plates", n_plates, "number of plates")->required();
  design->add_option("--seed", seed, "random-search seed")->required();
  design->add_option("--evals", evals, "evaluation budget (overrides the scenario search section)");
  design->add_flag("--tolerance", tolerance, "also scan thickness / position tolerances");
  design->add_option("--out", out, "output directory");

  auto* ladder = app.add_subcommand("ladder", "print the frequency ladder");
  ladder->add_option("--base-nm", base_nm, "wavelength of order 0 (nm)")->required();
  ladder->add_option("--shift-thz", shift_thz, "Raman shift (THz)")->required();
  ladder->add_option("--range", range, "qmin:qmax")->required();

  auto* sweep = app.add_subcommand("sweep", "target efficiency vs probe frequency offset");
  sweep->add_option("scenario", scenario, "scenario JSON")->required();
  sweep->add_option("--plates", plates, "plate stack CSV (default: the scenario's)");
  sweep->add_option("--span-ghz", span_ghz, "half span of the offset range (GHz)");
  sweep->add_option("--points", points, "number of offsets");
  sweep->add_option("--out", out, "output directory");

  auto* verify = app.add_subcommand("verify", "conservation / equivalence / convergence checks");
  verify->add_option("scenario", scenario, "scenario JSON (default: built-in)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) return cmd_simulate(scenario, plates, out);
    if (*ideal) return cmd_ideal(scenario, schedule, out);
    if (*design) return cmd_design(scenario, target, n_plates, seed, evals, tolerance, out);
    if (*ladder) return cmd_ladder(base_nm, shift_thz, range);
    if (*sweep) return cmd_sweep(scenario, plates, span_ghz, points, out);
    if (*verify) return cmd_verify(scenario);
  } catch (const rf::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const rf::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  }
  return 0;
}
