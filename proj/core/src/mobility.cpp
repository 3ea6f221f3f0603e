#include "t2sim/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace t2sim {

namespace {

Position lerp(const Position& a, const Position& b, double f) {
  return Position{a.x + f * (b.x - a.x), a.y + f * (b.y - a.y),
                  a.z_agl + f * (b.z_agl - a.z_agl)};
}

double leg_distance(const Position& a, const Position& b) {
  return std::hypot(b.x - a.x, b.y - a.y, b.z_agl - a.z_agl);
}

}  // namespace

Position position_at(const MissionPlan& m, double t) {
  if (m.waypoints.empty()) {
    throw std::invalid_argument("mission has no waypoints");
  }
  if (t < m.start_s() || t > m.end_s()) {
    throw std::invalid_argument("time outside mission span");
  }
  for (size_t i = 1; i < m.waypoints.size(); ++i) {
    const Waypoint& a = m.waypoints[i - 1];
    const Waypoint& b = m.waypoints[i];
    if (t <= b.t_s) {
      const double f = (t - a.t_s) / (b.t_s - a.t_s);
      return lerp(a.position, b.position, f);
    }
  }
  return m.waypoints.back().position;
}

Position position_at_clamped(const MissionPlan& m, double t) {
  if (m.waypoints.empty()) {
    throw std::invalid_argument("mission has no waypoints");
  }
  const double clamped = std::clamp(t, m.start_s(), m.end_s());
  return position_at(m, clamped);
}

double implied_max_speed_mps(const MissionPlan& m) {
  double max_speed = 0.0;
  for (size_t i = 1; i < m.waypoints.size(); ++i) {
    const Waypoint& a = m.waypoints[i - 1];
    const Waypoint& b = m.waypoints[i];
    const double dt = b.t_s - a.t_s;
    if (dt <= 0.0) {
      continue;  // validation reports non-increasing times separately
    }
    max_speed = std::max(max_speed,
                         leg_distance(a.position, b.position) / dt);
  }
  return max_speed;
}

double endurance_min(double payload_kg, const EnergyModel& model) {
  if (payload_kg < 0.0 || payload_kg > model.max_payload_kg) {
    throw std::invalid_argument("payload outside 0..6 kg");
  }
  const double slope =
      (model.endurance_empty_min - model.endurance_full_min) /
      model.max_payload_kg;
  return model.endurance_empty_min - slope * payload_kg;
}

MissionFeasibility mission_feasible(const MissionPlan& m, double payload_kg,
                                    const EnergyModel& model) {
  if (m.waypoints.empty()) {
    throw std::invalid_argument("mission has no waypoints");
  }
  return hover_feasible(m.start_s(), m.duration_s(), payload_kg, model);
}

MissionFeasibility hover_feasible(double start_s, double duration_s,
                                  double payload_kg,
                                  const EnergyModel& model) {
  const double endurance_s = endurance_min(payload_kg, model) * 60.0;
  if (duration_s <= endurance_s) {
    return {true, std::nullopt};
  }
  return {false, start_s + endurance_s};
}

}  // namespace t2sim
