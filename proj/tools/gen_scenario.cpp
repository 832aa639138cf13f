// Regenerates the bundled scenario directories under scenarios/. The output
// is deterministic, so the committed files can be reproduced exactly.

#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "confrepair/config_model.hpp"
#include "confrepair/decision_maker.hpp"
#include "confrepair/elevator_sim.hpp"
#include "confrepair/io.hpp"
#include "confrepair/oracles.hpp"
#include "confrepair/traffic.hpp"

namespace {

using namespace confrepair;
namespace fs = std::filesystem;

Configuration override_config(
    const Configuration& base,
    const std::vector<std::pair<std::string, ParamValue>>& overrides) {
  std::vector<ParamValue> values = base.values();
  for (const auto& [name, value] : overrides) {
    auto idx = base.space().index_of(name);
    if (!idx) throw std::runtime_error("unknown parameter: " + name);
    values[*idx] = value;
  }
  return Configuration(base.space_ptr(), std::move(values));
}

/// A deliberately degraded configuration: assignment barely looks at arrival
/// times, zoning and top-floor parking fight the traffic, and every stop
/// dwells almost two extra seconds.
Configuration make_misconfig() {
  return override_config(
      default_dispatcher_config(),
      {
          {"eta_weight", 0.02},
          {"load_weight", 9.5},
          {"stops_weight", 0.1},
          {"distance_weight", 0.05},
          {"same_direction_bonus", 0.5},
          {"opposite_direction_penalty", 1.0},
          {"idle_bonus", 0.2},
          {"zoning_enabled", true},
          {"zone_penalty", 95.0},
          {"parking_enabled", true},
          {"parking_floor", 11ll},
          {"park_delay_s", 5.0},
          {"reassign_margin_s", 55.0},
          {"capacity_guard_pct", 55.0},
          {"door_dwell_extra_s", 1.9},
          {"up_peak_bias", 0.1},
          {"eta_stop_penalty_s", 29.0},
          {"tie_break_lowest_load", true},
          {"assign_log_level", std::string("full")},
      });
}

/// Partial fixes of the kind engineers try by hand: each addresses one or two
/// suspected causes while leaving the rest of the misconfiguration in place.
std::vector<std::pair<std::string, Configuration>> make_manual_patches(
    const Configuration& misconfig) {
  std::vector<std::pair<std::string, Configuration>> out;
  out.emplace_back("manual_1_dwell",
                   override_config(misconfig, {{"door_dwell_extra_s", 0.2}}));
  out.emplace_back("manual_2_eta",
                   override_config(misconfig, {{"eta_weight", 1.2},
                                               {"distance_weight", 0.6}}));
  out.emplace_back("manual_3_zoning",
                   override_config(misconfig, {{"zoning_enabled", false}}));
  out.emplace_back("manual_4_parking",
                   override_config(misconfig, {{"parking_enabled", false},
                                               {"parking_floor", 0ll}}));
  out.emplace_back("manual_5_combo",
                   override_config(misconfig, {{"door_dwell_extra_s", 0.1},
                                               {"eta_weight", 0.9},
                                               {"zoning_enabled", false}}));
  out.emplace_back("manual_6_defaults",
                   override_config(default_dispatcher_config(),
                                   {{"load_weight", 1.5},
                                    {"eta_stop_penalty_s", 7.0}}));
  return out;
}

void write_scenario(const fs::path& dir) {
  const Building building;  // three elevators, 12 floors
  write_file(dir / "space.txt", serialize_parameter_space(*default_dispatcher_space()));
  write_file(dir / "building.txt", serialize_building(building));
  write_file(dir / "misconfig.cfg", serialize_configuration(make_misconfig()));

  OracleSpec oracles;  // thresholds 0: optimize every metric as far as possible
  write_file(dir / "oracles.txt", serialize_oracle_spec(oracles));
  write_file(dir / "dm.txt", serialize_dm_thresholds(DmThresholds{}));

  {
    Rng rng(101);
    write_file(dir / "suite" / "tc1_up_peak.csv",
               serialize_passenger_file(
                   traffic::up_peak("tc1_up_peak", 200, 0.0, 900.0, building.floors, rng)));
  }
  {
    Rng rng(102);
    write_file(dir / "suite" / "tc2_down_peak.csv",
               serialize_passenger_file(traffic::down_peak(
                   "tc2_down_peak", 240, 0.0, 900.0, building.floors, rng)));
  }
  {
    Rng rng(103);
    write_file(dir / "suite" / "tc3_lunch_mix.csv",
               serialize_passenger_file(traffic::mixed(
                   "tc3_lunch_mix", 300, 0.0, 1200.0, building.floors, 0.4, 0.3, rng)));
  }
  {
    Rng rng(201);
    write_file(dir / "validation" / "val1_mix.csv",
               serialize_passenger_file(traffic::mixed(
                   "val1_mix", 260, 0.0, 1000.0, building.floors, 0.35, 0.35, rng)));
  }
  {
    Rng rng(202);
    write_file(dir / "validation" / "val2_up_peak.csv",
               serialize_passenger_file(traffic::up_peak(
                   "val2_up_peak", 200, 0.0, 900.0, building.floors, rng)));
  }

  for (const auto& [name, patch] : make_manual_patches(make_misconfig()))
    write_file(dir / "manual-patches" / (name + ".cfg"),
               serialize_configuration(patch));
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("scenarios");
    write_scenario(root / "seeded-misconfig-A");
    std::cout << "wrote " << (root / "seeded-misconfig-A").string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
