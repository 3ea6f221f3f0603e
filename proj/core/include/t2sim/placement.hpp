#pragma once

#include <cstdint>
#include <vector>

#include "t2sim/backhaul.hpp"
#include "t2sim/scenario.hpp"
#include "t2sim/util.hpp"

namespace t2sim {

struct PlacementResult {
  Position position;
  double coverage_fraction = 0.0;
  double backhaul_cl_db = 0.0;
  CoverageClass coverage_class;
  double endurance_margin_min = 0.0;
  uint64_t evaluated_candidates = 0;
};

enum class PlacementError { no_feasible_placement };

struct CandidateEval {
  double x = 0.0;
  double y = 0.0;
  double h = 0.0;
  double coverage = 0.0;
  double cl_db = 0.0;
  bool feasible = false;
};

/// Fraction of demand points whose uplink to the BS demodulates, with the
/// shadowing term at its mean. Deterministic, hence optimizable.
double coverage_fraction(const Position& bs,
                         const std::vector<Position>& demand,
                         const Scenario& s);

struct FeasibilityReport {
  bool ok = true;
  std::vector<Violation> violations;
};

/// Checks backhaul coupling loss against the MCL, the altitude ceiling, and
/// hover endurance for the scenario's declared payload over sim duration.
FeasibilityReport placement_feasible(const Position& bs, const Scenario& s);

/// Exhaustive (x, y, h) grid search over the UE region, feasibility
/// filtered, followed by pattern-search refinement with step halving from
/// grid_step_m down to 1 m at the best height. Ties break toward the lowest
/// height, then lowest x, then lowest y.
Result<PlacementResult, PlacementError> optimize_placement(
    const Scenario& s, double grid_step_m, std::vector<double> heights,
    double demand_resolution_m = 50.0,
    std::vector<CandidateEval>* eval_log = nullptr);

/// Solves the log-distance exponent so that uplink RSSI at the slant
/// distance sqrt(target^2 + h^2) equals the SF sensitivity exactly
/// (shadowing off); bisection over [1.5, 6] to 0.01 dB. Requires the
/// scenario to select the log_distance variant.
PathLossModel calibrate_path_loss(double target_horizontal_m,
                                  double bs_height_m, const Scenario& s);

}  // namespace t2sim
