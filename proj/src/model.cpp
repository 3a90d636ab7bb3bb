#include "ehlc/model.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <sstream>

namespace ehlc {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::Ok: return "Ok";
    case Errc::NoFeasibleTransmission: return "NoFeasibleTransmission";
    case Errc::DrainBeyondPeak: return "DrainBeyondPeak";
    case Errc::InfeasibleDelivery: return "InfeasibleDelivery";
    case Errc::SolverDidNotConverge: return "SolverDidNotConverge";
    case Errc::NoRootInBracket: return "NoRootInBracket";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {
void require(bool ok, const char* what) {
  if (!ok) throw Error(Errc::InvalidArgument, what);
}
}  // namespace

void BatteryParams::validate() const {
  require(r >= 0 && std::isfinite(r), "battery.r must be finite and >= 0");
  require(v_b > 0 && std::isfinite(v_b), "battery.v_b must be > 0");
  require(b_max >= 0, "battery.b_max must be >= 0");
  require(b_0 >= 0 && b_0 <= b_max, "battery.b_0 must lie in [0, b_max]");
}

void FrameConfig::validate() const {
  require(tau > 0 && std::isfinite(tau), "frame.tau must be > 0");
  require(p_c >= 0 && std::isfinite(p_c), "frame.p_c must be >= 0");
  require(bandwidth > 0, "frame.bandwidth must be > 0");
  require(n0 > 0, "frame.n0 must be > 0");
}

void ChannelDist::validate() const {
  require(!h.empty(), "channel needs at least one level");
  require(p.size() == h.size() && q.size() == h.size() && s.size() == h.size() + 1,
          "channel vectors have inconsistent sizes");
  double sum = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    require(h[i] > 0, "channel gains must be positive");
    require(i == 0 || h[i] > h[i - 1], "channel gains must be strictly increasing");
    require(p[i] >= 0, "channel probabilities must be >= 0");
    sum += p[i];
  }
  require(std::fabs(sum - 1.0) <= 1e-12, "channel probabilities must sum to 1");
}

ChannelDist make_channel(std::vector<double> h, std::vector<double> p) {
  ChannelDist d;
  d.h = std::move(h);
  d.p = std::move(p);
  const std::size_t n = d.h.size();
  d.q.assign(n, 0.0);
  d.s.assign(n + 1, 0.0);
  double tail = 0;
  for (std::size_t i = n; i-- > 0;) {
    tail += d.p[i];
    d.q[i] = tail;
  }
  // q_1 is 1 by definition; avoid rounding drift
  if (n > 0) d.q[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) d.s[i] = 1.0 / d.h[i];
  d.validate();
  return d;
}

double charge_rate(double v, const BatteryParams& bat) {
  require(v >= 0, "charge_rate needs v >= 0");
  return v - bat.r * v * v / (bat.v_b * bat.v_b);
}

double peak_power(const BatteryParams& bat) {
  return bat.r > 0 ? bat.v_b * bat.v_b / (2.0 * bat.r) : kInf;
}

double discharge_delivered(double d, const BatteryParams& bat) {
  require(d >= 0, "discharge_delivered needs d >= 0");
  if (d > peak_power(bat) * (1 + 1e-12)) {
    std::ostringstream os;
    os << "drain " << d << " W exceeds the peak " << peak_power(bat) << " W";
    throw Error(Errc::DrainBeyondPeak, os.str());
  }
  return d - bat.r * d * d / (bat.v_b * bat.v_b);
}

double invert_discharge(double p_del, const BatteryParams& bat) {
  require(p_del >= 0, "invert_discharge needs p >= 0");
  if (bat.r == 0) return p_del;
  const double a = bat.r / (bat.v_b * bat.v_b);
  const double disc = 1.0 - 4.0 * a * p_del;
  if (disc < -1e-12) {
    std::ostringstream os;
    os << "delivered power " << p_del << " W exceeds the maximum " << 0.25 / a << " W";
    throw Error(Errc::InfeasibleDelivery, os.str());
  }
  return 2.0 * p_del / (1.0 + std::sqrt(std::max(0.0, disc)));
}

double idle_charge_rate(double u, const BatteryParams& bat) {
  require(u >= 0, "idle_charge_rate needs u >= 0");
  return std::min(u, peak_power(bat));
}

double rate(double snr) { return std::log1p(snr); }
double inv_rate(double rr) { return std::expm1(rr); }

ChannelDist quantize_gamma_channel(double shape, double rate_param, double truncation, int levels) {
  require(shape > 0 && rate_param > 0 && truncation > 0 && levels >= 1,
          "gamma quantization needs positive shape, rate, truncation and levels >= 1");
  const int n = levels;
  std::vector<double> h(n), p(n);
  const double step = truncation / n;
  double prev = 0.0;  // CDF at the left edge of the current bin
  for (int i = 0; i < n; ++i) {
    h[i] = (i + 1) * step;
    if (i + 1 < n) {
      const double cdf = boost::math::gamma_p(shape, rate_param * h[i]);
      p[i] = cdf - prev;
      prev = cdf;
    } else {
      p[i] = (n == 1) ? 1.0 : boost::math::gamma_q(shape, rate_param * (n - 1) * step);
    }
  }
  double sum = 0;
  for (double v : p) sum += v;
  for (double& v : p) v /= sum;
  return make_channel(std::move(h), std::move(p));
}

ChannelDist normalize_gains(const ChannelDist& raw, const FrameConfig& frame) {
  std::vector<double> h(raw.h);
  const double k = 1.0 / (frame.n0 * frame.bandwidth);
  for (double& v : h) v *= k;
  return make_channel(std::move(h), raw.p);
}

FramePhysics::FramePhysics(double u_, const FrameConfig& frame, const BatteryParams& bat)
    : u(u_), pc(frame.p_c), tau(frame.tau), bmax(bat.b_max) {
  a = bat.r / (bat.v_b * bat.v_b);
  vpk = a > 0 ? 0.5 / a : kInf;
  c = fc(std::min(u, vpk));
  x_hi = vpk;
  const double surplus = u - pc;
  if (surplus >= 0) {
    const double vmax = std::min(vpk, surplus);
    x_lo = -fc(vmax);
    can_tx = true;
  } else {
    const double need = -surplus;
    const double fdmax = a > 0 ? 0.25 / a : kInf;
    can_tx = need <= fdmax;
    x_lo = can_tx ? fc_inv(need) : kInf;
  }
}

double FramePhysics::fc_inv(double y) const {
  if (a == 0) return y;
  const double disc = std::max(0.0, 1.0 - 4.0 * a * y);
  return 2.0 * y / (1.0 + std::sqrt(disc));
}

double FramePhysics::power(double x) const {
  if (x >= 0) return u - pc + fd(std::min(x, vpk));
  const double v = fc_inv(-x);
  return u - pc - v;
}

double FramePhysics::dpower(double x) const {
  if (x >= 0) return 1.0 - 2.0 * a * std::min(x, vpk);
  const double v = fc_inv(-x);
  const double fcp = 1.0 - 2.0 * a * v;
  return fcp > 0 ? 1.0 / fcp : kInf;
}

double FramePhysics::d2power(double x) const {
  if (x >= 0) return -2.0 * a;
  const double v = fc_inv(-x);
  const double fcp = 1.0 - 2.0 * a * v;
  return fcp > 0 ? -2.0 * a / (fcp * fcp * fcp) : -kInf;
}

double FramePhysics::drain_for_power(double p) const {
  const double surplus = u - pc;
  if (p >= surplus) return fd_inv(p - surplus);
  return -fc(std::min(surplus - p, vpk));
}

void FramePhysics::split(double x, double& alpha, double& d) const {
  if (x >= 0) {
    alpha = 1.0;
    d = x;
    return;
  }
  d = 0.0;
  const double v = fc_inv(-x);
  alpha = u > 0 ? std::clamp(1.0 - v / u, 0.0, 1.0) : 1.0;
}

}  // namespace ehlc
