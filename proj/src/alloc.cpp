#include "ehlc/alloc.hpp"

#include <algorithm>

namespace ehlc {

LtmAllocation LtmAllocation::zeros(std::size_t frames, std::size_t layers) {
  LtmAllocation a;
  a.frames = frames;
  a.layers = layers;
  std::vector<std::vector<double>> z(layers, std::vector<double>(frames, 0.0));
  a.l = a.beta = a.e = a.p = z;
  a.phi.assign(frames, 0.0);
  return a;
}

LscAllocation LscAllocation::zeros(std::size_t frames, std::size_t layers) {
  LscAllocation a;
  a.frames = frames;
  a.layers = layers;
  std::vector<std::vector<double>> z(frames, std::vector<double>(layers, 0.0));
  a.powers = a.rates = z;
  a.beta.assign(frames, 0.0);
  a.e.assign(frames, 0.0);
  a.phi.assign(frames, 0.0);
  return a;
}

namespace {
double stored_during(double len, double beta, double u, const BatteryParams& bat) {
  if (len <= 0) return 0.0;
  const double v = std::max(0.0, (1.0 - beta / len) * u);
  return len * (v - bat.r * v * v / (bat.v_b * bat.v_b));
}
}  // namespace

std::vector<double> ltm_battery_trajectory(const LtmAllocation& a, const HarvestProfile& prof,
                                           const FrameConfig& frame, const BatteryParams& bat) {
  std::vector<double> out{bat.b_0};
  double level = bat.b_0;
  for (std::size_t k = 0; k < a.frames; ++k) {
    const double u = prof.u[k];
    const double v = idle_charge_rate(u, bat);
    level = std::min(level + (frame.tau - a.phi[k]) * charge_rate(v, bat), bat.b_max);
    for (std::size_t i = 0; i < a.layers; ++i) {
      level = std::min(level + stored_during(a.l[i][k], a.beta[i][k], u, bat) - a.e[i][k], bat.b_max);
    }
    out.push_back(level);
  }
  return out;
}

std::vector<double> lsc_battery_trajectory(const LscAllocation& a, const HarvestProfile& prof,
                                           const FrameConfig& frame, const BatteryParams& bat) {
  std::vector<double> out{bat.b_0};
  double level = bat.b_0;
  for (std::size_t k = 0; k < a.frames; ++k) {
    const double u = prof.u[k];
    const double v = idle_charge_rate(u, bat);
    level = std::min(level + (frame.tau - a.phi[k]) * charge_rate(v, bat), bat.b_max);
    level = std::min(level + stored_during(a.phi[k], a.beta[k], u, bat) - a.e[k], bat.b_max);
    out.push_back(level);
  }
  return out;
}

}  // namespace ehlc
