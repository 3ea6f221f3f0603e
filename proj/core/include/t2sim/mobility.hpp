#pragma once

#include <optional>
#include <vector>

#include "t2sim/geo.hpp"

namespace t2sim {

struct Waypoint {
  Position position;
  double t_s = 0.0;

  bool operator==(const Waypoint&) const = default;
};

/// Timed waypoint mission; loiter segments repeat a position at a later
/// time. Arrival times must be strictly increasing.
struct MissionPlan {
  std::vector<Waypoint> waypoints;

  double start_s() const { return waypoints.front().t_s; }
  double end_s() const { return waypoints.back().t_s; }
  double duration_s() const { return end_s() - start_s(); }

  bool operator==(const MissionPlan&) const = default;
};

/// Linear interpolation between bounding waypoints; throws outside
/// [start_s, end_s].
Position position_at(const MissionPlan& m, double t);

/// Engine helper: clamps t to the mission time span (hold first/last
/// waypoint outside it).
Position position_at_clamped(const MissionPlan& m, double t);

/// Largest speed implied by consecutive waypoints, on the (x, y, z_agl)
/// path. Used by scenario validation.
double implied_max_speed_mps(const MissionPlan& m);

/// Hover endurance anchors of the Tier 2 BS platform: 32 min unloaded,
/// 16 min at the 6 kg payload limit, linear in between.
struct EnergyModel {
  double endurance_empty_min = 32.0;
  double endurance_full_min = 16.0;
  double max_payload_kg = 6.0;

  bool operator==(const EnergyModel&) const = default;
};

double endurance_min(double payload_kg, const EnergyModel& model = {});

struct MissionFeasibility {
  bool feasible = true;
  std::optional<double> abort_time_s;  // mission start + endurance
};

MissionFeasibility mission_feasible(const MissionPlan& m, double payload_kg,
                                    const EnergyModel& model = {});

/// Feasibility of hovering for duration_s with the given payload.
MissionFeasibility hover_feasible(double start_s, double duration_s,
                                  double payload_kg,
                                  const EnergyModel& model = {});

}  // namespace t2sim
