#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ehlc/alloc.hpp"
#include "ehlc/model.hpp"

namespace ehlc {

struct HarvestSupport {
  std::vector<double> values, probs;
  double mean() const;
  void validate() const;
};

struct OnlineState {
  double u = 0;
  double b = 0;
  std::size_t k = 0;
};

// One frame of a policy: the allocation used and the battery level it leaves.
struct FrameAction {
  double b_next = 0;
  double reward = 0;  // nat per frame
  LtmAllocation ltm;
  LscAllocation lsc;
};

// Battery grid plus the stage reward R(u, b, b'): the best single-frame rate
// when starting at b with harvest u and ending with at least b' stored.
// Infeasible transitions hold -inf.
struct RewardTable {
  Strategy strategy = Strategy::Lsc;
  std::vector<double> grid;
  std::vector<double> u;             // harvest values, one slab each
  std::vector<double> r;             // [u][b][b'] flattened
  std::vector<double> mv_second;     // value of frame 2 in the MV problem, per b
  double mv_u = 0;
  std::size_t n() const { return grid.size(); }
  double at(std::size_t iu, std::size_t b, std::size_t bn) const {
    return r[(iu * n() + b) * n() + bn];
  }
  // largest increase of R between neighbouring start levels
  double max_increment() const;
};

struct GridOptions {
  std::size_t points = 201;
  double cap_if_unbounded = 0.5;  // joules covered when b_max is infinite
};

std::vector<double> battery_grid(const BatteryParams& bat, const GridOptions& opt);

RewardTable build_reward_table(Strategy st, const FrameConfig& frame, const BatteryParams& bat,
                               const ChannelDist& dist, const HarvestSupport& support,
                               const GridOptions& opt);

struct PolicyTable {
  Strategy strategy = Strategy::Lsc;
  std::vector<double> battery_grid;
  HarvestSupport harvest_support;
  std::size_t horizon = 0;
  std::vector<std::vector<std::vector<double>>> value;        // [k][u][b]
  std::vector<std::vector<std::vector<std::size_t>>> action;  // [k][u][b] -> index of b'
  std::shared_ptr<const RewardTable> rewards;
  double grid_bound = 0;  // documented gap to the continuous optimum
  // expected value of frames k.. given level b (linear interpolation)
  double expected_value(std::size_t k, double b) const;
};

PolicyTable dp_solve(const FrameConfig& frame, const BatteryParams& bat, const ChannelDist& dist,
                     const HarvestSupport& support, std::size_t K, const GridOptions& opt,
                     Strategy st = Strategy::Lsc);
PolicyTable dp_solve(std::shared_ptr<const RewardTable> rewards, const HarvestSupport& support,
                     std::size_t K);

// Allocation behind a stored DP decision.
FrameAction policy_action(const PolicyTable& table, std::size_t k, std::size_t iu, std::size_t ib,
                          const FrameConfig& frame, const BatteryParams& bat,
                          const ChannelDist& dist);

FrameAction mv_step(const OnlineState& state, double u_bar, Strategy st, const FrameConfig& frame,
                    const BatteryParams& bat, const ChannelDist& dist);
FrameAction greedy_step(const OnlineState& state, Strategy st, const FrameConfig& frame,
                        const BatteryParams& bat, const ChannelDist& dist);

enum class Policy { Offline, Dp, Mv, Greedy };
const char* policy_name(Policy p);

struct Trajectory {
  std::vector<double> rate;     // nat per frame
  std::vector<double> battery;  // level at the end of each frame
  std::vector<FrameAction> actions;
  double average = 0;
};

// Continuous-state simulation with the offline solvers (MV, greedy), the
// convex multi-frame program (offline) or the DP table (states snapped down
// to the grid).
Trajectory simulate(Policy policy, const std::vector<double>& harvest, Strategy st,
                    const FrameConfig& frame, const BatteryParams& bat, const ChannelDist& dist,
                    double u_bar = 0.0, const PolicyTable* table = nullptr);

// Grid simulation used by the Monte Carlo runs: every policy acts on the same
// reward table. Offline is the per-sequence dynamic program on that grid.
double simulate_on_grid(Policy policy, const std::vector<std::size_t>& harvest_idx,
                        const PolicyTable& table, std::size_t b0_index,
                        std::vector<double>* rates = nullptr,
                        std::vector<double>* levels = nullptr);

// Harvest index sequence for one trial; the same (seed, trial) gives the
// same sequence in every mode.
std::vector<std::size_t> draw_harvest(const HarvestSupport& support, std::size_t K,
                                      std::uint64_t seed, std::uint64_t trial);

struct MonteCarloResult {
  double mean = 0, stderr_ = 0;
  std::size_t trials = 0;
};
// samples, when given, receives [policy][trial] per-trial averages
std::vector<MonteCarloResult> monte_carlo(const std::vector<Policy>& policies,
                                          const PolicyTable& table, std::size_t trials,
                                          std::uint64_t seed, std::size_t b0_index = 0,
                                          std::vector<std::vector<double>>* samples = nullptr);

}  // namespace ehlc
