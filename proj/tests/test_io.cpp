#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "ramanflow.hpp"

using namespace ramanflow;
namespace fs = std::filesystem;

namespace {

const fs::path data_dir = RAMANFLOW_DATA_DIR;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ramanflow_io_test";
  fs::create_directories(dir);
  return dir / name;
}

json minimal_doc() {
  return json::parse(R"({
    "raman_shift_thz": 124.7451,
    "interaction_length_cm": 2.0,
    "drive": {"base_wavelength_nm": 801.0817, "q_min": -1, "q_max": 0,
              "pulses": [{"order": 0, "intensity_gw_cm2": 10, "fwhm_ns": 10},
                         {"order": -1, "intensity_gw_cm2": 10, "fwhm_ns": 10}]},
    "probe": {"base_wavelength_nm": 210, "q_min": -1, "q_max": 3, "target_order": 3,
              "pulses": [{"order": 0, "intensity_gw_cm2": 0.1, "fwhm_ns": 5, "delay_ns": 1.5}]}
  })");
}

}  // namespace

TEST(Hash, FnvKnownVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(Hash, KeyOrderDoesNotMatter) {
  const json a = json::parse(R"({"x": 1, "y": [2, 3]})");
  const json b = json::parse(R"({"y": [2, 3], "x": 1})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(json::parse(R"({"x": 2, "y": [2, 3]})")));
}

TEST(Materials, ShippedMgf2MatchesBuiltIn) {
  const Material file = material_from_json(read_json(data_dir / "mgf2.json"));
  const Material built = mgf2();
  ASSERT_EQ(file.axes.size(), built.axes.size());
  for (Axis a : {Axis::ordinary, Axis::extraordinary}) {
    const auto& f = file.axis(a);
    const auto& b = built.axis(a);
    EXPECT_EQ(f.plate_transmission, b.plate_transmission);
    EXPECT_NEAR(f.transparent_above, b.transparent_above, 1e-18);
    for (double nm = 115.0; nm < 2000.0; nm += 17.0)
      EXPECT_NEAR(refractive_index(f, nm * 1e-9), refractive_index(b, nm * 1e-9), 1e-14);
  }
}

TEST(Materials, JsonRoundTrip) {
  Material m = mgf2();
  m.axes[Axis::ordinary].absorption = {{120e-9, 40.0}, {200e-9, 2.0}};
  const Material back = material_from_json(material_to_json(m));
  EXPECT_NEAR(back.axis(Axis::ordinary).alpha(160e-9), m.axis(Axis::ordinary).alpha(160e-9), 1e-12);
  EXPECT_EQ(back.axis(Axis::extraordinary).sellmeier_b, m.axis(Axis::extraordinary).sellmeier_b);
}

TEST(Materials, InvalidTransmissionIsRejected) {
  json j = material_to_json(mgf2());
  j["axes"]["ordinary"]["plate_transmission"] = 1.5;
  EXPECT_THROW(material_from_json(j), ConfigError);
}

TEST(PlateCsv, RoundTrip) {
  DesignOptions opt;
  const PlateStack st = detail::make_stack({1.25 * units::cm, 7.5 * units::cm}, {123.456 * units::um, 200.0 * units::um}, opt);
  const fs::path p = scratch("plates.csv");
  write_text(p, plate_csv(st));
  const PlateStack back = read_plate_csv(p, {{"MgF2", mgf2()}});
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(back.plates[k].position, st.plates[k].position, 1e-15);
    EXPECT_NEAR(back.plates[k].thickness, st.plates[k].thickness, 1e-18);
    EXPECT_EQ(back.plates[k].probe_axis, Axis::ordinary);
    EXPECT_EQ(back.plates[k].drive_axis, Axis::extraordinary);
  }
}

TEST(PlateCsv, ErrorsAreConfigErrors) {
  const fs::path p = scratch("bad_plates.csv");
  write_text(p, "position_cm,thickness_um,material,axis\n1.0,100,Unobtainium,ordinary\n");
  EXPECT_THROW(read_plate_csv(p, {{"MgF2", mgf2()}}), ConfigError);
  write_text(p, "position_cm,thickness_um,material,axis\nabc,100,MgF2,ordinary\n");
  EXPECT_THROW(read_plate_csv(p, {{"MgF2", mgf2()}}), ConfigError);
  EXPECT_THROW(read_plate_csv(scratch("missing.csv"), {}), ConfigError);
}

TEST(ScheduleCsv, RoundTrip) {
  const ModeLadder l = build_ladder(210.0, 124.7451, -1, 2);
  FlowSchedule s;
  s.events.push_back({0.0123, {0.0, 0.5, -1.25, 3.0}});
  s.events.push_back({0.0456, {0.1, 0.0, 0.0, -0.75}});
  const std::string text = schedule_csv(s, l);
  EXPECT_EQ(text.substr(0, text.find('\n')), "position_m,offset_q-1_rad,offset_q0_rad,offset_q1_rad,offset_q2_rad");
  const fs::path p = scratch("schedule.csv");
  write_text(p, text);
  const FlowSchedule back = read_schedule_csv(p, l);
  ASSERT_EQ(back.events.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(back.events[k].position, s.events[k].position, 1e-15);
    for (std::size_t i = 0; i < 4; ++i)
      EXPECT_NEAR(back.events[k].phase_offsets[i], s.events[k].phase_offsets[i], 1e-12);
  }
  write_text(p, "position_m,a,b\n0.1,0.0,0.0\n");
  EXPECT_THROW(read_schedule_csv(p, l), ConfigError);
}

TEST(ScenarioJson, UnitsAreConverted) {
  const LoadedScenario ls = scenario_from_json(minimal_doc());
  const Scenario& sc = ls.scenario;
  EXPECT_NEAR(sc.length, 0.02, 1e-15);
  EXPECT_NEAR(sc.probe.pulses[0].peak_intensity, 0.1e13, 1e-3);
  EXPECT_NEAR(sc.probe.pulses[0].fwhm, 5e-9, 1e-21);
  EXPECT_NEAR(sc.probe.pulses[0].delay, 1.5e-9, 1e-21);
  EXPECT_NEAR(sc.medium.detuning, -two_pi * 500e6, 1e-3);
  EXPECT_EQ(sc.probe.target_order, 3);
  EXPECT_TRUE(sc.probe_enabled);
  EXPECT_EQ(sc.coupling, CouplingMode::weak_probe);
  EXPECT_NEAR(sc.probe.ladder.wavelength(0), 210e-9, 1e-20);
}

TEST(ScenarioJson, ProbeOnlyDocumentRunsAlone) {
  json j = minimal_doc();
  j.erase("drive");
  const Scenario sc = scenario_from_json(j).scenario;
  EXPECT_FALSE(sc.probe_enabled);
  EXPECT_EQ(sc.drive.ladder, sc.probe.ladder);
}

TEST(ScenarioJson, InlinePlatesAndMaterials) {
  json j = minimal_doc();
  j["materials"] = {{"MgF2-file", "mgf2.json"}};
  j["plates"] = json::array({{{"position_cm", 0.5}, {"thickness_um", 150}, {"material", "MgF2-file"}}});
  const Scenario sc = scenario_from_json(j, data_dir).scenario;
  ASSERT_EQ(sc.plates.size(), 1u);
  EXPECT_NEAR(sc.plates.plates[0].thickness, 150e-6, 1e-18);
  EXPECT_EQ(sc.plates.plates[0].material.name, "MgF2");
}

TEST(ScenarioJson, ConfigErrors) {
  json j = minimal_doc();
  j.erase("raman_shift_thz");
  EXPECT_THROW(scenario_from_json(j), ConfigError);
  j = minimal_doc();
  j["coupling"] = "sideways";
  EXPECT_THROW(scenario_from_json(j), ConfigError);
  j = minimal_doc();
  j["probe"]["target_order"] = 9;
  EXPECT_THROW(scenario_from_json(j), ConfigError);
  j = minimal_doc();
  j["probe"]["pulses"][0]["intensity_gw_cm2"] = "loud";
  EXPECT_THROW(scenario_from_json(j), ConfigError);
  j = minimal_doc();
  j["plates"] = json::array({{{"position_cm", 0.5}, {"thickness_um", 150}, {"material", "Glass"}}});
  EXPECT_THROW(scenario_from_json(j), ConfigError);
  const fs::path p = scratch("broken.json");
  write_text(p, "{ \"raman_shift_thz\": ");
  EXPECT_THROW(load_scenario(p), ConfigError);
}

TEST(ScenarioJson, ShippedScenariosLoad) {
  for (const char* name : {"experiment_210nm.json", "ideal_210nm.json", "ideal_760nm.json", "free_210nm.json",
                           "toy_3mode.json"})
    EXPECT_NO_THROW(load_scenario(data_dir / name)) << name;
}

TEST(Writers, CsvHeadersAndRowCounts) {
  Scenario sc = default_scenario();
  sc.length = 1.0 * units::cm;
  sc.grid.tau_samples = 51;
  const ExperimentResult r = run_experiment(sc);
  const std::string f = fraction_csv(r.probe, sc.probe.ladder);
  EXPECT_EQ(f.substr(0, f.find('\n')), "xi_cm,order,wavelength_nm,photon_fraction");
  EXPECT_EQ(static_cast<std::size_t>(std::count(f.begin(), f.end(), '\n')),
            1 + r.probe.xi.size() * sc.probe.ladder.size());
  const std::string c = coherence_csv(r);
  EXPECT_EQ(c.substr(0, c.find('\n')), "xi_cm,tau_ns,abs_rho01,arg_rho01");
  EXPECT_EQ(static_cast<std::size_t>(std::count(c.begin(), c.end(), '\n')), 1 + r.coherence_xi.size() * 51);
  const json s = series_summary(r.probe);
  EXPECT_EQ(s["efficiency_by_order"].size(), sc.probe.ladder.size());
  EXPECT_EQ(s["loss_fraction"].get<double>(), 0.0);
}

TEST(Format, TwelveSignificantDigits) {
  EXPECT_EQ(fmt(0.1), "0.1");
  EXPECT_EQ(fmt(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(fmt(-2.5e-7), "-2.5e-07");
}
