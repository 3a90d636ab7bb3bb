#pragma once

#include <cstddef>
#include <vector>

#include "ehlc/model.hpp"

namespace ehlc {

enum class Strategy { Ltm, Lsc };

// Indexed [layer][frame], matching the (i, k) subscripts of the problem.
struct LtmAllocation {
  std::size_t frames = 0, layers = 0;
  std::vector<std::vector<double>> l, beta, e, p;
  std::vector<double> phi;
  double objective = 0;  // sum over frames of the per-frame average rate (nat)
  Errc status = Errc::Ok;

  static LtmAllocation zeros(std::size_t frames, std::size_t layers);
};

// Indexed [frame][layer].
struct LscAllocation {
  std::size_t frames = 0, layers = 0;
  std::vector<std::vector<double>> powers, rates;
  std::vector<double> beta, e, phi;
  double objective = 0;
  Errc status = Errc::Ok;

  static LscAllocation zeros(std::size_t frames, std::size_t layers);
};

// Energy carried between frames implied by an allocation (disposal model,
// idle phase first, partitions in layer order).
std::vector<double> ltm_battery_trajectory(const LtmAllocation& a, const HarvestProfile& prof,
                                           const FrameConfig& frame, const BatteryParams& bat);
std::vector<double> lsc_battery_trajectory(const LscAllocation& a, const HarvestProfile& prof,
                                           const FrameConfig& frame, const BatteryParams& bat);

}  // namespace ehlc
