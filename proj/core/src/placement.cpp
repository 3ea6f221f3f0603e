#include "t2sim/placement.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "t2sim/mobility.hpp"
#include "t2sim/phy.hpp"

namespace t2sim {

namespace {

/// Reference uplink radio: the first UE's LoRa params, or defaults when the
/// scenario declares no UEs (pure coverage studies).
const LoRaRadioParams& reference_ue_lora(const Scenario& s) {
  static const LoRaRadioParams defaults{};
  return s.ue_drones.empty() ? defaults : s.ue_drones.front().lora;
}

PathLossModel mean_model(const Scenario& s) {
  PathLossModel m = s.models.path_loss;
  m.shadowing_sigma_db = 0.0;
  return m;
}

}  // namespace

double coverage_fraction(const Position& bs,
                         const std::vector<Position>& demand,
                         const Scenario& s) {
  if (demand.empty()) {
    throw std::invalid_argument("demand set must not be empty");
  }
  const LoRaRadioParams& ue = reference_ue_lora(s);
  const PathLossModel model = mean_model(s);
  const double gains =
      ue.antenna_gain_dbi + s.tier2_bs.lora.antenna_gain_dbi;
  size_t covered = 0;
  for (const Position& p : demand) {
    const LinkSample sample = evaluate_link(
        model, p, bs, s.terrain, ue.frequency_hz, ue.tx_power_dbm, gains,
        ue.bandwidth_hz, s.models.lora_noise_figure_db);
    if (lora_demod_ok(sample, ue.spreading_factor, s.models.demod)) {
      ++covered;
    }
  }
  return static_cast<double>(covered) / static_cast<double>(demand.size());
}

FeasibilityReport placement_feasible(const Position& bs, const Scenario& s) {
  FeasibilityReport report;
  const double cl = coupling_loss_db(bs, s.tier2_bs.nbiot, s.terrain,
                                     mean_model(s));
  if (cl > s.tier2_bs.nbiot.mcl_db) {
    report.violations.push_back(
        {"backhaul", "coupling loss " + fmt_fixed(cl, 2) +
                         " dB exceeds MCL " +
                         fmt_fixed(s.tier2_bs.nbiot.mcl_db, 2) + " dB"});
  }
  if (bs.z_agl > s.placement.max_altitude_m) {
    report.violations.push_back(
        {"altitude", "z_agl " + fmt_fixed(bs.z_agl, 2) +
                         " m exceeds the " +
                         fmt_fixed(s.placement.max_altitude_m, 2) +
                         " m ceiling"});
  }
  const MissionFeasibility hover = hover_feasible(
      0.0, s.sim.duration_s, s.tier2_bs.payload_mass_kg);
  if (!hover.feasible) {
    report.violations.push_back(
        {"endurance", "hover of " + fmt_fixed(s.sim.duration_s / 60.0, 2) +
                          " min exceeds endurance at declared payload"});
  }
  report.ok = report.violations.empty();
  return report;
}

namespace {

struct Candidate {
  Position pos;
  double coverage = -1.0;
  double cl_db = 0.0;
  bool feasible = false;
};

/// Strictly better coverage wins; ties break to lower height, then lower x,
/// then lower y.
bool better_than(const Candidate& a, const Candidate& b) {
  if (a.coverage != b.coverage) {
    return a.coverage > b.coverage;
  }
  if (a.pos.z_agl != b.pos.z_agl) {
    return a.pos.z_agl < b.pos.z_agl;
  }
  if (a.pos.x != b.pos.x) {
    return a.pos.x < b.pos.x;
  }
  return a.pos.y < b.pos.y;
}

}  // namespace

Result<PlacementResult, PlacementError> optimize_placement(
    const Scenario& s, double grid_step_m, std::vector<double> heights,
    double demand_resolution_m, std::vector<CandidateEval>* eval_log) {
  if (grid_step_m <= 0.0) {
    throw std::invalid_argument("grid step must be positive");
  }
  if (heights.empty()) {
    throw std::invalid_argument("height list must not be empty");
  }
  std::sort(heights.begin(), heights.end());
  const std::vector<Position> demand = demand_points(s, demand_resolution_m);
  const Region region = ue_region_of(s);

  uint64_t evaluated = 0;
  auto evaluate = [&](Position pos) -> Candidate {
    ++evaluated;
    Candidate c;
    c.pos = pos;
    const FeasibilityReport feas = placement_feasible(pos, s);
    c.feasible = feas.ok;
    c.cl_db = coupling_loss_db(pos, s.tier2_bs.nbiot, s.terrain,
                               mean_model(s));
    c.coverage = coverage_fraction(pos, demand, s);
    if (eval_log) {
      eval_log->push_back(CandidateEval{pos.x, pos.y, pos.z_agl, c.coverage,
                                        c.cl_db, c.feasible});
    }
    return c;
  };

  const double eps = 1e-9;
  const int nx = static_cast<int>(
      std::floor((region.x_max - region.x_min) / grid_step_m + eps));
  const int ny = static_cast<int>(
      std::floor((region.y_max - region.y_min) / grid_step_m + eps));

  Candidate best;
  bool have_best = false;
  for (double h : heights) {
    for (int ix = 0; ix <= nx; ++ix) {
      for (int iy = 0; iy <= ny; ++iy) {
        const Position pos{region.x_min + ix * grid_step_m,
                           region.y_min + iy * grid_step_m, h};
        const Candidate c = evaluate(pos);
        if (!c.feasible) {
          continue;
        }
        if (!have_best || better_than(c, best)) {
          best = c;
          have_best = true;
        }
      }
    }
  }
  if (!have_best) {
    return PlacementError::no_feasible_placement;
  }

  // Pattern-search refinement at the winning height: poll the four axis
  // neighbours, move on strict improvement, otherwise halve down to 1 m.
  double step = grid_step_m;
  while (step >= 1.0) {
    Candidate best_neighbor = best;
    bool moved = false;
    const double dx[] = {step, -step, 0.0, 0.0};
    const double dy[] = {0.0, 0.0, step, -step};
    for (int k = 0; k < 4; ++k) {
      const double x = best.pos.x + dx[k];
      const double y = best.pos.y + dy[k];
      if (x < region.x_min - eps || x > region.x_max + eps ||
          y < region.y_min - eps || y > region.y_max + eps) {
        continue;
      }
      const Candidate c = evaluate(Position{x, y, best.pos.z_agl});
      if (c.feasible && c.coverage > best_neighbor.coverage) {
        best_neighbor = c;
        moved = true;
      }
    }
    if (moved) {
      best = best_neighbor;
    } else {
      step /= 2.0;
    }
  }

  PlacementResult result;
  result.position = best.pos;
  result.coverage_fraction = best.coverage;
  result.backhaul_cl_db = best.cl_db;
  result.coverage_class =
      coverage_class_for(best.cl_db).value();  // feasible => within MCL
  result.endurance_margin_min =
      endurance_min(s.tier2_bs.payload_mass_kg) - s.sim.duration_s / 60.0;
  result.evaluated_candidates = evaluated;
  return result;
}

PathLossModel calibrate_path_loss(double target_horizontal_m,
                                  double bs_height_m, const Scenario& s) {
  if (target_horizontal_m <= 0.0) {
    throw std::invalid_argument("calibration target must be positive");
  }
  if (s.models.path_loss.variant != PathLossVariant::log_distance) {
    throw std::invalid_argument(
        "calibration requires the log_distance path-loss variant");
  }
  const LoRaRadioParams& ue = reference_ue_lora(s);
  const double slant =
      std::hypot(target_horizontal_m, bs_height_m);
  const double gains =
      ue.antenna_gain_dbi + s.tier2_bs.lora.antenna_gain_dbi;
  const double sensitivity =
      s.models.demod.sensitivity(ue.spreading_factor);
  const PathLossModel base = s.models.path_loss;

  auto rssi_error = [&](double n) {
    const double loss =
        free_space_path_loss_db(base.d0_m, ue.frequency_hz) +
        10.0 * n * std::log10(slant / base.d0_m);
    return (ue.tx_power_dbm + gains - loss) - sensitivity;
  };

  double lo = 1.5;
  double hi = 6.0;
  if (rssi_error(lo) < 0.0 || rssi_error(hi) > 0.0) {
    throw std::invalid_argument(
        "no exponent in [1.5, 6] reaches the sensitivity at the target");
  }
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 200; ++i) {
    mid = 0.5 * (lo + hi);
    const double err = rssi_error(mid);
    if (std::abs(err) <= 0.01) {
      break;
    }
    if (err > 0.0) {
      lo = mid;  // rssi above sensitivity: exponent can grow
    } else {
      hi = mid;
    }
  }
  PathLossModel calibrated = s.models.path_loss;
  calibrated.exponent = mid;
  return calibrated;
}

}  // namespace t2sim
