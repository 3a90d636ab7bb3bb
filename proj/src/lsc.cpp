#include "ehlc/lsc.hpp"

#include <algorithm>
#include <cassert>

#include "ehlc/numeric.hpp"

namespace ehlc {

std::vector<double> lsc_rates_from_powers(const std::vector<double>& powers, double phi,
                                          const ChannelDist& dist) {
  const std::size_t n = dist.n();
  std::vector<double> r(n, 0.0);
  double above = 0;
  for (std::size_t i = n; i-- > 0;) {
    r[i] = phi * rate(dist.h[i] * powers[i] / (1.0 + dist.h[i] * above));
    above += powers[i];
  }
  return r;
}

double total_power_from_rates(const std::vector<double>& rates, double phi, const ChannelDist& dist) {
  if (phi <= 0) return 0.0;
  double total = 0, prod = 1;
  for (std::size_t i = 0; i < dist.n(); ++i) {
    total += dist.s[i] * inv_rate(rates[i] / phi) * prod;
    prod *= inv_rate(rates[i] / phi) + 1.0;
  }
  return total;
}

ActiveLayerSet find_active_layers(const ChannelDist& dist) {
  struct Block {
    std::size_t first;
    double p, w;
  };
  std::vector<Block> st;
  for (std::size_t j = 0; j < dist.n(); ++j) {
    st.push_back({j, dist.p[j], dist.s[j] - dist.s[j + 1]});
    while (st.size() >= 2) {
      const Block& top = st.back();
      const Block& prev = st[st.size() - 2];
      if (top.p * prev.w <= prev.p * top.w) {
        Block merged{prev.first, prev.p + top.p, prev.w + top.w};
        st.pop_back();
        st.back() = merged;
      } else {
        break;
      }
    }
  }
  ActiveLayerSet a;
  a.layers = dist.n();
  for (const Block& b : st) {
    a.indices.push_back(b.first);
    a.merged_p.push_back(b.p);
    a.s.push_back(dist.s[b.first]);
  }
  a.s.push_back(0.0);
  const std::size_t m = a.indices.size();
  a.tail_q.assign(m, 0.0);
  double tail = 0;
  for (std::size_t l = m; l-- > 0;) {
    tail += a.merged_p[l];
    a.tail_q[l] = tail;
  }
  a.pmax = pmax_thresholds(a);
  return a;
}

std::vector<double> pmax_thresholds(const ActiveLayerSet& a) {
  const std::size_t m = a.indices.size();
  std::vector<double> caps(m, kInf);
  if (m <= 1) return caps;
  std::vector<double> ratio(m), w(m);
  for (std::size_t l = 0; l < m; ++l) {
    w[l] = a.s[l] - a.s[l + 1];
    ratio[l] = a.merged_p[l] / w[l];
  }
  // x[l] = w[l] + rho[l+1] * x[l+1], starting from the top survivor
  std::vector<double> x(m);
  x[m - 1] = w[m - 1];
  for (std::size_t l = m - 1; l-- > 0;) x[l] = w[l] + (ratio[l + 1] / ratio[l]) * x[l + 1];
  for (std::size_t l = 1; l < m; ++l) caps[l] = (ratio[l] / ratio[l - 1] - 1.0) * x[l];
  return caps;
}

namespace {
// powers on the survivors
std::vector<double> fill_survivors(double p_total, const ActiveLayerSet& a) {
  const std::size_t m = a.size();
  std::vector<double> pw(m, 0.0);
  double left = std::max(0.0, p_total);
  for (std::size_t l = m; l-- > 0;) {
    const double give = std::min(a.pmax[l], left);
    pw[l] = give;
    left -= give;
  }
  return pw;
}
}  // namespace

std::vector<double> layered_water_filling(double p_total, const ActiveLayerSet& a) {
  std::vector<double> out(a.layers, 0.0);
  const auto pw = fill_survivors(p_total, a);
  for (std::size_t l = 0; l < a.size(); ++l) out[a.indices[l]] = pw[l];
  return out;
}

RateCurve lsc_rate_curve(double p_total, const ActiveLayerSet& a) {
  RateCurve rc;
  const std::size_t m = a.size();
  const auto pw = fill_survivors(p_total, a);
  double above = 0;
  std::size_t low = m - 1;
  for (std::size_t l = m; l-- > 0;) {
    if (pw[l] > 0) low = l;
    const double with = above + pw[l];
    rc.w += a.tail_q[l] * std::log((a.s[l] + with) / (a.s[l] + above));
    above = with;
  }
  const double den = a.s[low] + std::max(0.0, p_total);
  rc.w1 = a.tail_q[low] / den;
  rc.w2 = -a.tail_q[low] / (den * den);
  return rc;
}

double duration_stationarity_residual(const std::vector<double>& powers, double u,
                                      const FrameConfig& frame, const BatteryParams& bat,
                                      const ChannelDist& dist) {
  FramePhysics ph(u, frame, bat);
  double total = 0;
  for (double v : powers) total += v;
  const auto rr = lsc_rates_from_powers(powers, 1.0, dist);
  double lhs = 0, cum = 0;
  for (std::size_t i = 0; i < dist.n(); ++i) {
    cum += rr[i];
    lhs += (dist.s[i] - dist.s[i + 1]) * std::exp(cum) * cum;
  }
  const double fdx = total + frame.p_c - u;
  const double x = ph.fd_inv(std::max(0.0, fdx));
  const double rhs = total + frame.p_c - u - ph.fd(x) + (1.0 - 2.0 * ph.a * x) * (x + ph.c);
  return lhs - rhs;
}

namespace {

// Roots in total power P of W/W' = F_d'(x)(x + cc), with x the drain that
// delivers P given harvest u. cc = idle rate (uncapped) or 0 (capped).
std::vector<double> stationary_powers(const FramePhysics& ph, double cc, const ActiveLayerSet& a) {
  const double lo = std::max(0.0, ph.u - ph.pc);
  double hi;
  if (ph.a > 0) {
    hi = ph.u - ph.pc + 0.25 / ph.a;
  } else {
    hi = std::max(lo, 1e-9) * 2 + 1e-6;
  }
  if (hi < lo) return {};
  auto h = [&](double p) {
    const RateCurve rc = lsc_rate_curve(p, a);
    const double x = ph.fd_inv(std::max(0.0, p - (ph.u - ph.pc)));
    return rc.w / rc.w1 - (1.0 - 2.0 * ph.a * x) * (x + cc);
  };
  if (ph.a == 0) {
    for (int it = 0; it < 200 && h(hi) <= 0; ++it) hi *= 2;
  }
  auto roots = scan_roots(h, lo, hi, 512, false);
  return roots;
}

struct PhiEval {
  const FramePhysics& ph;
  const ActiveLayerSet& a;
  double b0, rho;
  double energy(double phi) const {
    const double start = std::min(b0 + (ph.tau - phi) * ph.c, ph.bmax);
    double e = start - rho;
    if (std::isfinite(ph.x_hi)) e = std::min(e, phi * ph.x_hi);
    return e;
  }
  bool feasible(double phi) const {
    return energy(phi) >= phi * ph.x_lo - 1e-15 * std::max(1.0, std::fabs(phi * ph.x_lo));
  }
  double value(double phi) const {
    if (phi <= 0) return 0.0;
    if (!feasible(phi)) return -kInf;
    const double x = std::max(ph.x_lo, energy(phi) / phi);
    return phi * lsc_rate_curve(std::max(0.0, ph.power(x)), a).w;
  }
};

void fill_lsc_frame(const PhiEval& ev, double phi, const ChannelDist* dist, LscAllocation& out,
                    std::size_t k) {
  const std::size_t n = ev.a.layers;
  out.powers[k].assign(n, 0.0);
  out.rates[k].assign(n, 0.0);
  out.beta[k] = out.e[k] = out.phi[k] = 0.0;
  if (phi <= 0) return;
  const double x = std::max(ev.ph.x_lo, ev.energy(phi) / phi);
  const double p = std::max(0.0, ev.ph.power(x));
  out.powers[k] = layered_water_filling(p, ev.a);
  double alpha, d;
  ev.ph.split(x, alpha, d);
  out.phi[k] = phi;
  out.beta[k] = alpha * phi;
  out.e[k] = d * phi;
  if (dist) out.rates[k] = lsc_rates_from_powers(out.powers[k], phi, *dist);
}

double max_feasible_phi(const PhiEval& ev) {
  const double tau = ev.ph.tau;
  if (ev.feasible(tau)) return tau;
  auto slack = [&](double phi) {
    const double start = std::min(ev.b0 + (tau - phi) * ev.ph.c, ev.ph.bmax);
    return start - ev.rho - phi * ev.ph.x_lo;
  };
  if (slack(0) < 0) return -1.0;
  double lo = 0, hi = tau;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * tau; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slack(mid) >= 0 ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

double lsc_frame_value(double b0, double rho, double u, const FrameConfig& frame,
                       const BatteryParams& bat, const ActiveLayerSet& active, LscAllocation* out) {
  FramePhysics ph(u, frame, bat);
  PhiEval ev{ph, active, b0, rho};
  const bool reserve_ok = std::min(b0 + frame.tau * ph.c, bat.b_max) >= rho - 1e-15;
  if (!reserve_ok) {
    if (out) *out = LscAllocation::zeros(1, active.layers), out->status = Errc::NoFeasibleTransmission;
    return -kInf;
  }
  double best_phi = 0, best = 0;
  if (ph.can_tx) {
    const double phi_hi = max_feasible_phi(ev);
    if (phi_hi > 0) {
      Argmax am = unimodal_max([&](double p) { return ev.value(p); }, 0.0, phi_hi, 1e-14);
      if (am.f > best) {
        best = am.f;
        best_phi = am.x;
      }
    }
  }
  if (out) {
    *out = LscAllocation::zeros(1, active.layers);
    fill_lsc_frame(ev, best_phi, nullptr, *out, 0);
    out->objective = best;
    if (best_phi <= 0) out->status = Errc::NoFeasibleTransmission;
  }
  return best;
}

std::vector<double> reference_power_profile(const FrameConfig& frame, const BatteryParams& bat,
                                            const ChannelDist& dist) {
  if (!(frame.p_c > 0 || bat.r > 0))
    throw Error(Errc::InvalidArgument, "reference profile needs p_c > 0 or r > 0");
  const ActiveLayerSet a = find_active_layers(dist);
  FramePhysics ph(0.0, frame, bat);
  if (!ph.can_tx) throw Error(Errc::SolverDidNotConverge, "circuit power exceeds deliverable power");
  const auto roots = stationary_powers(ph, 0.0, a);
  if (roots.empty()) return std::vector<double>(dist.n(), 0.0);
  // the stationary point of a concave program is unique; keep the largest
  return layered_water_filling(roots.back(), a);
}

namespace {
LscAllocation lsc_from_phi(const PhiEval& ev, double phi, const ChannelDist& dist) {
  LscAllocation out = LscAllocation::zeros(1, dist.n());
  fill_lsc_frame(ev, phi, &dist, out, 0);
  out.objective = lsc_objective(out, dist);
  if (phi <= 0) out.status = Errc::NoFeasibleTransmission;
  return out;
}
}  // namespace

LscAllocation solve_lsc_single(double b0, double u, const FrameConfig& frame,
                               const BatteryParams& bat, const ChannelDist& dist) {
  const ActiveLayerSet a = find_active_layers(dist);
  FramePhysics ph(u, frame, bat);
  PhiEval ev{ph, a, b0, 0.0};
  const double tau = frame.tau;
  if (!ph.can_tx || (b0 <= 0 && u <= 0)) return lsc_from_phi(ev, 0.0, dist);
  std::vector<double> cand{tau};
  // uncapped interior stationary point(s)
  for (double p : stationary_powers(ph, ph.c, a)) {
    const double x = ph.drain_for_power(p);
    if (x + ph.c > 0) cand.push_back((b0 + tau * ph.c) / (x + ph.c));
  }
  if (std::isfinite(bat.b_max)) {
    for (double p : stationary_powers(ph, 0.0, a)) {
      const double x = ph.drain_for_power(p);
      if (x > 0) cand.push_back(bat.b_max / x);
    }
    if (ph.c > 0 && b0 < bat.b_max) cand.push_back(tau - (bat.b_max - b0) / ph.c);
  }
  if (std::isfinite(ph.x_hi)) {
    cand.push_back((b0 + tau * ph.c) / (ph.x_hi + ph.c));
    cand.push_back(bat.b_max / ph.x_hi);
  }
  double best_phi = 0, best = 0;
  for (double phi : cand) {
    if (!(phi > 0) || !std::isfinite(phi)) continue;
    phi = std::min(phi, tau);
    const double v = ev.value(phi);
    if (v > best) {
      best = v;
      best_phi = phi;
    }
  }
  return lsc_from_phi(ev, best_phi, dist);
}

double lsc_objective(const LscAllocation& al, const ChannelDist& dist) {
  double total = 0;
  for (std::size_t k = 0; k < al.frames; ++k)
    for (std::size_t i = 0; i < al.layers; ++i) total += dist.q[i] * al.rates[k][i];
  return total;
}

LscAllocation solve_lsc_multiframe_ideal(const HarvestProfile& profile, double b0, double b_max,
                                         const FrameConfig& frame, const ChannelDist& dist) {
  const std::size_t K = profile.k();
  const double tau = frame.tau;
  // cumulative energy available (upper) and must-have-consumed (lower) curves
  std::vector<double> up(K + 1), lo(K + 1);
  up[0] = lo[0] = 0.0;
  double harvested = 0;
  for (std::size_t k = 1; k <= K; ++k) {
    harvested += profile.u[k - 1] * tau;
    up[k] = b0 + harvested;
    lo[k] = std::isfinite(b_max) ? std::max(0.0, up[k] - b_max) : 0.0;
  }
  lo[K] = up[K];
  std::vector<double> cum(K + 1, 0.0);
  std::size_t anchor = 0;
  while (anchor < K) {
    const double c0 = cum[anchor];
    double min_up = kInf, max_lo = -kInf;
    std::size_t i_up = anchor, i_lo = anchor;
    std::size_t next = K;
    double slope = 0;
    bool fixed = false;
    for (std::size_t k = anchor + 1; k <= K; ++k) {
      const double span = double(k - anchor);
      const double su = (up[k] - c0) / span, sl = (lo[k] - c0) / span;
      if (sl > min_up) {
        next = i_up;
        slope = min_up;
        fixed = true;
        break;
      }
      if (su < max_lo) {
        next = i_lo;
        slope = max_lo;
        fixed = true;
        break;
      }
      if (su < min_up) {
        min_up = su;
        i_up = k;
      }
      if (sl > max_lo) {
        max_lo = sl;
        i_lo = k;
      }
    }
    if (!fixed) {
      next = K;
      slope = (up[K] - c0) / double(K - anchor);
    }
    for (std::size_t k = anchor + 1; k <= next; ++k) cum[k] = c0 + slope * double(k - anchor);
    // snap to the touched curve to avoid drift
    if (next < K) cum[next] = (next == i_up && slope == min_up) ? up[next] : lo[next];
    anchor = next;
  }
  LscAllocation out = LscAllocation::zeros(K, dist.n());
  const ActiveLayerSet a = find_active_layers(dist);
  for (std::size_t k = 0; k < K; ++k) {
    const double p = std::max(0.0, (cum[k + 1] - cum[k]) / tau);
    out.powers[k] = layered_water_filling(p, a);
    out.rates[k] = lsc_rates_from_powers(out.powers[k], tau, dist);
    out.phi[k] = tau;
    const double u = profile.u[k];
    if (p >= u) {
      out.beta[k] = tau;
      out.e[k] = (p - u) * tau;
    } else {
      out.beta[k] = u > 0 ? tau * p / u : tau;
      out.e[k] = 0;
    }
  }
  out.objective = lsc_objective(out, dist);
  return out;
}

namespace {

LscAllocation join_frames(const LscAllocation& f1, const LscAllocation& f2, const ChannelDist& dist) {
  LscAllocation out = LscAllocation::zeros(2, dist.n());
  out.powers = {f1.powers[0], f2.powers[0]};
  out.rates = {f1.rates[0], f2.rates[0]};
  out.beta = {f1.beta[0], f2.beta[0]};
  out.e = {f1.e[0], f2.e[0]};
  out.phi = {f1.phi[0], f2.phi[0]};
  out.objective = lsc_objective(out, dist);
  return out;
}

LscAllocation frame_with_reserve(double b0, double rho, double u, const FrameConfig& frame,
                                 const BatteryParams& bat, const ActiveLayerSet& a,
                                 const ChannelDist& dist) {
  LscAllocation f;
  lsc_frame_value(b0, rho, u, frame, bat, a, &f);
  f.rates[0] = lsc_rates_from_powers(f.powers[0], f.phi[0], dist);
  f.objective = lsc_objective(f, dist);
  return f;
}

}  // namespace

LscAllocation lsc_two_frame_by_carry(const HarvestProfile& profile, const FrameConfig& frame,
                                     const BatteryParams& bat, const ChannelDist& dist) {
  if (profile.k() != 2) throw Error(Errc::InvalidArgument, "two-frame solver needs K = 2");
  const ActiveLayerSet a = find_active_layers(dist);
  const double b0 = bat.b_0;
  const double u1 = profile.u[0], u2 = profile.u[1];
  FramePhysics ph1(u1, frame, bat);
  const double carry_hi = std::min(bat.b_max, b0 + frame.tau * ph1.c);
  auto total = [&](double b1) {
    const double v1 = lsc_frame_value(b0, b1, u1, frame, bat, a);
    const double v2 = lsc_frame_value(b1, 0.0, u2, frame, bat, a);
    return v1 + v2;
  };
  const Argmax am = unimodal_max(total, 0.0, std::max(0.0, carry_hi), 1e-13);
  return join_frames(frame_with_reserve(b0, am.x, u1, frame, bat, a, dist),
                     frame_with_reserve(am.x, 0.0, u2, frame, bat, a, dist), dist);
}

LscAllocation solve_lsc_two_frame(const HarvestProfile& profile, const FrameConfig& frame,
                                  const BatteryParams& bat, const ChannelDist& dist) {
  if (profile.k() != 2) throw Error(Errc::InvalidArgument, "two-frame solver needs K = 2");
  const ActiveLayerSet a = find_active_layers(dist);
  const double tau = frame.tau, b0 = bat.b_0;
  const double u1 = profile.u[0], u2 = profile.u[1];
  const LscAllocation s1 = solve_lsc_single(b0, u1, frame, bat, dist);
  const LscAllocation s2 = solve_lsc_single(0.0, u2, frame, bat, dist);
  const LscAllocation independent = join_frames(s1, s2, dist);
  const bool phi1_full = s1.phi[0] >= tau * (1 - 1e-12);
  if (!phi1_full || bat.b_max <= 0) return independent;

  FramePhysics ph1(u1, frame, bat), ph2(u2, frame, bat);
  // frame 1 transmits for the whole frame at drain rate x1; carried energy follows
  const double x1_hi = std::isfinite(ph1.x_hi) ? std::min(ph1.x_hi, b0 / tau) : b0 / tau;
  const double x1_lo = std::max(ph1.x_lo, (b0 - bat.b_max) / tau);
  if (!(x1_hi > x1_lo)) return independent;
  auto marginal1 = [&](double x1) {
    const RateCurve rc = lsc_rate_curve(std::max(0.0, ph1.power(x1)), a);
    return rc.w1 * ph1.dpower(x1);
  };
  std::vector<double> x1_cands;
  // frame 2 below full duration: its energy value is W(P~)/(x~ + c)
  if (ph2.can_tx) {
    const auto roots = stationary_powers(ph2, ph2.c, a);
    for (double p2 : roots) {
      const double x2 = ph2.drain_for_power(p2);
      if (x2 + ph2.c <= 0) continue;
      const double target = lsc_rate_curve(p2, a).w / (x2 + ph2.c);
      auto f = [&](double x1) { return marginal1(x1) - target; };
      for (double r : scan_roots(f, x1_lo, x1_hi, 64, false)) x1_cands.push_back(r);
    }
    // frame 2 at full duration: marginal of the battery draw d2
    auto f_full = [&](double x1) {
      const double d2 = (b0 - tau * x1) / tau;
      const double xd = std::isfinite(ph2.x_hi) ? std::min(d2, ph2.x_hi) : d2;
      const RateCurve rc = lsc_rate_curve(std::max(0.0, ph2.power(xd)), a);
      return marginal1(x1) - rc.w1 * ph2.dpower(xd);
    };
    for (double r : scan_roots(f_full, x1_lo, x1_hi, 64, false)) x1_cands.push_back(r);
  }
  x1_cands.push_back(x1_lo);
  x1_cands.push_back(x1_hi);
  LscAllocation best = independent;
  for (double x1 : x1_cands) {
    const double b1 = std::clamp(b0 - tau * x1, 0.0, bat.b_max);
    LscAllocation f1 = frame_with_reserve(b0, b1, u1, frame, bat, a, dist);
    LscAllocation f2 = frame_with_reserve(b1, 0.0, u2, frame, bat, a, dist);
    LscAllocation both = join_frames(f1, f2, dist);
    if (both.objective > best.objective) best = both;
  }
  return best;
}

}  // namespace ehlc
