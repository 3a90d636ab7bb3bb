#pragma once

#include "ehlc/alloc.hpp"
#include "ehlc/convex.hpp"
#include "ehlc/model.hpp"

namespace ehlc {

double ltm_average_rate(const LtmAllocation& alloc, const ChannelDist& dist, std::size_t frame);

LtmAllocation solve_ltm_single_ideal(double b0, double u, double tau, const ChannelDist& dist);
LtmAllocation solve_ltm_single(double b0, double u, const FrameConfig& frame,
                               const BatteryParams& bat, const ChannelDist& dist);
LtmAllocation solve_ltm_two_frame(const HarvestProfile& profile, const FrameConfig& frame,
                                  const BatteryParams& bat, const ChannelDist& dist);
LtmAllocation solve_ltm_multiframe_convex(const HarvestProfile& profile, const FrameConfig& frame,
                                          const BatteryParams& bat, const ChannelDist& dist);

// Exact two-frame optimum by concave search over the carried energy.
LtmAllocation ltm_two_frame_by_carry(const HarvestProfile& profile, const FrameConfig& frame,
                                     const BatteryParams& bat, const ChannelDist& dist);

// Single frame that must leave at least rho in the battery.
double ltm_frame_value(double b0, double rho, double u, const FrameConfig& frame,
                       const BatteryParams& bat, const ChannelDist& dist,
                       LtmAllocation* out = nullptr);

// Largest root first: roots of log(lambda) - a*lambda - b = 0.
std::vector<double> ltm_pair_lambda_roots(double a, double b);

// K-frame LSC program with r > 0 and circuit power, solved like the LTM one.
LscAllocation solve_lsc_multiframe_convex(const HarvestProfile& profile, const FrameConfig& frame,
                                          const BatteryParams& bat, const ChannelDist& dist);

}  // namespace ehlc
