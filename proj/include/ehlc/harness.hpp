#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ehlc/alloc.hpp"
#include "ehlc/model.hpp"
#include "ehlc/online.hpp"

namespace ehlc {

struct ChannelSpec {
  // either a Gamma quantisation or explicit levels (raw gains, before n0*W)
  double x = 1, y = 1, T = 5;
  int N = 5;
  std::vector<double> h, p;
};

struct ExperimentConfig {
  ChannelSpec channel;
  BatteryParams battery;
  FrameConfig frame;
  HarvestSupport harvest;
  std::vector<double> profile;  // explicit per-frame harvest for offline solves
  std::size_t K = 1;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::vector<Strategy> strategies{Strategy::Lsc};
  std::vector<std::string> modes{"offline"};
  std::string sweep_var;             // empty: no sweep
  std::vector<double> sweep_values;
  bool has_sweep = false;
  GridOptions grid;

  void validate() const;  // throws Error(ConfigInvalid) naming the field path
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// channel with gains normalised by n0 * bandwidth
ChannelDist build_channel(const ExperimentConfig& cfg);
// copy of cfg with the sweep variable set to v
ExperimentConfig apply_sweep(const ExperimentConfig& cfg, double v);

struct CsvRow {
  std::string sweep_var, sweep_value, strategy, mode;
  double avg_rate_nats = 0, avg_rate_bits = 0, stderr_ = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::string error;  // empty when the row computed cleanly
};

inline constexpr const char* kCsitMode = "csit_baseline=same_schedule";

std::vector<CsvRow> run_experiment(const ExperimentConfig& cfg);
void write_csv(const std::vector<CsvRow>& rows, std::ostream& os);
std::string format_double(double v);

struct PowerSegment {
  double duration = 0, power = 0;
};
using PowerSchedule = std::vector<std::vector<PowerSegment>>;  // [frame][segment]

PowerSchedule schedule_of(const LtmAllocation& a);
PowerSchedule schedule_of(const LscAllocation& a);

// Rate of a transmitter that knows the realised gain and signals at its
// capacity with the given power schedule, averaged over frames (nat per frame).
double with_csit_baseline(const PowerSchedule& schedule, const ChannelDist& dist);

}  // namespace ehlc
