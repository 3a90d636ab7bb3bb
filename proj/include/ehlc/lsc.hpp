#pragma once

#include <vector>

#include "ehlc/alloc.hpp"
#include "ehlc/model.hpp"

namespace ehlc {

struct ActiveLayerSet {
  std::vector<std::size_t> indices;  // surviving layers, ascending gain (0-based)
  std::vector<double> merged_p;      // p~ per survivor
  std::vector<double> tail_q;        // sum of merged_p from this survivor upwards
  std::vector<double> s;             // inverse gains, size A+1, s[A] = 0
  std::vector<double> pmax;          // per-survivor caps, pmax[0] = inf
  std::size_t layers = 0;            // N of the source distribution
  std::size_t size() const { return indices.size(); }
};

std::vector<double> lsc_rates_from_powers(const std::vector<double>& powers, double phi,
                                          const ChannelDist& dist);
double total_power_from_rates(const std::vector<double>& rates, double phi, const ChannelDist& dist);

ActiveLayerSet find_active_layers(const ChannelDist& dist);
std::vector<double> pmax_thresholds(const ActiveLayerSet& active);
// returns powers indexed by the source layers (zeros on merged layers)
std::vector<double> layered_water_filling(double p_total, const ActiveLayerSet& active);

// optimal per-unit-time LSC rate at total power P and its first two derivatives
struct RateCurve {
  double w = 0, w1 = 0, w2 = 0;
};
RateCurve lsc_rate_curve(double p_total, const ActiveLayerSet& active);

// Stationarity of the transmit duration: W/W' - F_d'(x)(x + c) with
// F_d(x) = P + P_C - U, in nats.
double duration_stationarity_residual(const std::vector<double>& powers, double u,
                                      const FrameConfig& frame, const BatteryParams& bat,
                                      const ChannelDist& dist);

std::vector<double> reference_power_profile(const FrameConfig& frame, const BatteryParams& bat,
                                            const ChannelDist& dist);

LscAllocation solve_lsc_single(double b0, double u, const FrameConfig& frame,
                               const BatteryParams& bat, const ChannelDist& dist);

// Single frame with an end-of-frame reserve: battery must hold at least rho
// when the frame ends. Exact one-dimensional concave search over phi.
double lsc_frame_value(double b0, double rho, double u, const FrameConfig& frame,
                       const BatteryParams& bat, const ActiveLayerSet& active,
                       LscAllocation* out = nullptr);

LscAllocation solve_lsc_multiframe_ideal(const HarvestProfile& profile, double b0, double b_max,
                                         const FrameConfig& frame, const ChannelDist& dist);

LscAllocation solve_lsc_two_frame(const HarvestProfile& profile, const FrameConfig& frame,
                                  const BatteryParams& bat, const ChannelDist& dist);

// Exact two-frame optimum by concave search over the carried energy.
LscAllocation lsc_two_frame_by_carry(const HarvestProfile& profile, const FrameConfig& frame,
                                     const BatteryParams& bat, const ChannelDist& dist);

double lsc_objective(const LscAllocation& a, const ChannelDist& dist);

}  // namespace ehlc
