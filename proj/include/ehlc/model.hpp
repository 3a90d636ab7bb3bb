#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ehlc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Errc : int {
  Ok = 0,
  NoFeasibleTransmission = 1,
  DrainBeyondPeak = 2,
  InfeasibleDelivery = 3,
  SolverDidNotConverge = 4,
  NoRootInBracket = 5,
  BudgetExceeded = 6,
  ConfigInvalid = 7,
  InvalidArgument = 8,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc c, const std::string& what) : std::runtime_error(what), code_(c) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

struct BatteryParams {
  double r = 0.0;
  double v_b = 1.5;
  double b_max = kInf;
  double b_0 = 0.0;
  void validate() const;
};

// Gains are SNR per watt as consumed by the solvers; s has N+1 entries with s[N] = 0.
struct ChannelDist {
  std::vector<double> h, p, q, s;
  std::size_t n() const { return h.size(); }
  void validate() const;
};

ChannelDist make_channel(std::vector<double> h, std::vector<double> p);

struct FrameConfig {
  double tau = 1.0;
  double p_c = 0.0;
  double bandwidth = 1e6;
  double n0 = 1e-9;
  void validate() const;
};

struct HarvestProfile {
  std::vector<double> u;
  std::size_t k() const { return u.size(); }
};

// battery loss model
double charge_rate(double v, const BatteryParams& bat);
double discharge_delivered(double d, const BatteryParams& bat);
double invert_discharge(double p_del, const BatteryParams& bat);
double idle_charge_rate(double u, const BatteryParams& bat);
double peak_power(const BatteryParams& bat);  // v_b^2/(2r), inf when r = 0

double rate(double snr);
double inv_rate(double rr);

ChannelDist quantize_gamma_channel(double shape, double rate_param, double truncation, int levels);
// scales gains by 1/(n0*bandwidth) so powers in watts map to SNR
ChannelDist normalize_gains(const ChannelDist& raw, const FrameConfig& frame);

// Per-frame physics for a transmission segment described by its net battery
// drain rate x (negative while charging from the direct path).
struct FramePhysics {
  double u = 0, pc = 0, tau = 1, bmax = kInf;
  double a = 0;          // r / v_b^2
  double vpk = kInf;     // argmax F_c, also the drain peak
  double c = 0;          // idle accumulation rate F_c(V_a*)
  double x_lo = 0, x_hi = kInf;
  bool can_tx = false;

  FramePhysics(double u, const FrameConfig& frame, const BatteryParams& bat);

  double fc(double v) const { return v - a * v * v; }
  double fd(double d) const { return d - a * d * d; }
  double fc_inv(double y) const;  // smaller root
  double fd_inv(double y) const { return fc_inv(y); }

  double power(double x) const;    // transmit power P(x)
  double dpower(double x) const;   // dP/dx
  double d2power(double x) const;  // d2P/dx2
  double drain_for_power(double p) const;  // inverse of power()
  // battery draw rate d and direct-path fraction alpha realising x
  void split(double x, double& alpha, double& d) const;
};

}  // namespace ehlc
