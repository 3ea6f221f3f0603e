#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "t2sim/backhaul.hpp"
#include "t2sim/geo.hpp"
#include "t2sim/mobility.hpp"
#include "t2sim/phy.hpp"
#include "t2sim/radio.hpp"

namespace t2sim {

struct TrafficConfig {
  double period_s = 10.0;
  int payload_bytes = 20;

  bool operator==(const TrafficConfig&) const = default;
};

struct UeDrone {
  uint16_t id = 1;
  MissionPlan mission;
  LoRaRadioParams lora;
  TrafficConfig traffic;
  double max_speed_mps = 15.0;

  bool operator==(const UeDrone&) const = default;
};

struct Tier2Bs {
  uint16_t id = 0;
  Position position;
  double payload_mass_kg = 0.0;
  LoRaRadioParams lora;
  NbIotRadioParams nbiot;

  bool operator==(const Tier2Bs&) const = default;
};

struct MacModelConfig {
  int max_retries = 4;
  double ack_turnaround_s = 0.05;
  double processing_guard_s = 0.05;
  int max_backoff_slots = 32;
  int queue_capacity = 64;
  bool backoff_disabled = false;

  bool operator==(const MacModelConfig&) const = default;
};

struct ModelsConfig {
  PathLossModel path_loss;  // carries shadowing_sigma_db
  double capture_threshold_db = 6.0;
  double lora_noise_figure_db = 6.0;
  double nbiot_noise_figure_db = 5.0;
  DemodThresholds demod;
  MacModelConfig mac;
  BackhaulConfig backhaul;
  bool sync_traffic_phase = false;  // all UE ticks in phase (collision tests)

  bool operator==(const ModelsConfig&) const = default;
};

struct SimConfig {
  double duration_s = 600.0;
  uint64_t seed = 1;

  bool operator==(const SimConfig&) const = default;
};

/// Axis-aligned ground region, the domain of the placement objective.
struct Region {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool operator==(const Region&) const = default;
};

struct PlacementConfig {
  double max_altitude_m = 120.0;

  bool operator==(const PlacementConfig&) const = default;
};

/// Full declarative world description; immutable after load.
struct Scenario {
  std::string description;
  Terrain terrain;  // defaults to the unbounded flat plane
  NbIotRadioParams tier1_enb;
  Tier2Bs tier2_bs;
  std::vector<UeDrone> ue_drones;
  ModelsConfig models;
  SimConfig sim;
  std::optional<Region> ue_region;  // default: bounding box of UE waypoints
  PlacementConfig placement;

  bool operator==(const Scenario&) const = default;
};

struct Violation {
  std::string path;
  std::string message;
};

/// Scenario parse or validation failure; carries the individual violations
/// when the failure came from validation.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& message,
                         std::vector<Violation> violations = {})
      : std::runtime_error(message), violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Strict parse: unknown keys are rejected, type errors carry the field
/// path, defaults fill omitted optional fields. Does not validate semantics.
Scenario parse_scenario(const std::string& json_text,
                        const std::string& origin = "<string>");

/// parse + validate; throws ScenarioError (violations attached) or IoError.
Scenario load_scenario(const std::filesystem::path& path);

std::string scenario_to_json(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

/// Every type invariant checked; empty result means valid.
std::vector<Violation> validate_scenario(const Scenario& s);

/// The declared UE operating region, or the bounding box of all UE mission
/// waypoints when none is declared. Throws when neither exists.
Region ue_region_of(const Scenario& s);

/// Deterministic ground-level lattice over the UE region, edges included.
std::vector<Position> demand_points(const Scenario& s, double resolution_m);

}  // namespace t2sim
