#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ehlc/alloc.hpp"
#include "ehlc/model.hpp"

namespace ehlc {

// Search ranges come from the instance itself; this only sets how finely
// each variable is sampled and the evaluation budget.
struct GridSpec {
  std::size_t points = 64;           // samples per searched variable
  std::size_t budget = 100000000;    // max objective evaluations
  double feas_tol = 1e-9;            // slack allowed on energy constraints
  bool polish = true;                // pattern search from the grid optimum
  void validate() const;
};

struct OracleResult {
  LtmAllocation ltm;                 // filled for Strategy::Ltm
  LscAllocation lsc;                 // filled for Strategy::Lsc
  double objective = 0;              // best value found (after polish)
  double grid_objective = 0;         // best value on the raw grid
  double grid_bound = 0;             // true optimum <= grid_objective + grid_bound
  std::size_t evaluations = 0;
};

// Exhaustive search for one frame that must end with at least rho stored.
OracleResult grid_search_single_frame(Strategy st, double b0, double u, const FrameConfig& frame,
                                      const BatteryParams& bat, const ChannelDist& dist,
                                      const GridSpec& grid, double rho = 0.0);

// K = 2: enumerate the carried energy, single-frame oracles on each side.
OracleResult grid_search_two_frame(Strategy st, const HarvestProfile& profile,
                                   const FrameConfig& frame, const BatteryParams& bat,
                                   const ChannelDist& dist, const GridSpec& grid);

// Stationarity residuals of the LSC Lagrangian per frame: N rate rows, then
// the e, phi and beta rows. Multipliers are fitted by least squares.
struct KktReport {
  std::vector<double> residuals;
  std::vector<double> multipliers;  // lambda_k, Psi_k per transmitting frame
  double max_abs = 0;
};
KktReport kkt_residuals_lsc(const LscAllocation& alloc, const HarvestProfile& profile,
                            const ChannelDist& dist, const FrameConfig& frame,
                            const BatteryParams& bat);

struct Slack {
  std::string name;
  std::size_t frame = 0;
  double value = 0;  // >= 0 when satisfied
};

struct FeasibilityReport {
  std::vector<Slack> slacks;
  double min_slack = kInf;
  double max_complementarity = 0;  // largest (l - beta) * e product
  double discarded = 0;            // energy clipped at b_max
  bool ok(double tol = 1e-9) const { return min_slack >= -tol && max_complementarity < tol; }
  std::string first_violation(double tol = 1e-9) const;
};

FeasibilityReport feasibility_check(const LtmAllocation& alloc, const HarvestProfile& profile,
                                    const FrameConfig& frame, const BatteryParams& bat,
                                    const ChannelDist& dist);
FeasibilityReport feasibility_check(const LscAllocation& alloc, const HarvestProfile& profile,
                                    const FrameConfig& frame, const BatteryParams& bat,
                                    const ChannelDist& dist);

}  // namespace ehlc
