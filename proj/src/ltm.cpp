#include "ehlc/ltm.hpp"

#include <algorithm>

#include "ehlc/numeric.hpp"

namespace ehlc {

double ltm_average_rate(const LtmAllocation& a, const ChannelDist& dist, std::size_t k) {
  double tot = 0;
  for (std::size_t i = 0; i < a.layers; ++i)
    if (a.l[i][k] > 0) tot += dist.q[i] * a.l[i][k] * rate(dist.h[i] * std::max(0.0, a.p[i][k]));
  return tot;
}

namespace {

struct Layer {
  const FramePhysics* ph;
  double q, h;
  double g(double x) const { return q * std::log1p(h * std::max(0.0, ph->power(x))); }
  double g1(double x) const {
    const double p = std::max(0.0, ph->power(x));
    return q * h * ph->dpower(x) / (1.0 + h * p);
  }
  // x maximising g(x) - pi*x over the drain domain
  double x_of_price(double pi) const {
    double lo = ph->x_lo, hi = ph->x_hi;
    if (g1(lo) <= pi) return lo;
    if (!std::isfinite(hi)) {
      hi = std::max(1e-6, lo + 1e-6);
      for (int it = 0; it < 400 && g1(hi) > pi; ++it) hi = 2 * hi + 1e-6;
    } else if (g1(hi) >= pi) {
      return hi;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (g1(mid) > pi ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  double psi(double pi) const {
    const double x = x_of_price(pi);
    return g(x) - pi * x;
  }
};

struct Piece {
  std::size_t layer;
  double l, x;
};

struct Candidate {
  std::vector<Piece> pieces;
  double value = -kInf;
};

double candidate_value(const std::vector<Layer>& L, const std::vector<Piece>& pcs) {
  double v = 0;
  for (const Piece& p : pcs)
    if (p.l > 0) v += p.l * L[p.layer].g(p.x);
  return v;
}

// idle first, then pieces in layer order, surplus above b_max discarded
bool pieces_feasible(const FramePhysics& ph, double b0, double rho, const std::vector<Piece>& pcs) {
  double phi = 0;
  for (const Piece& p : pcs) {
    if (p.l < -1e-15 || p.x < ph.x_lo - 1e-12 || p.x > ph.x_hi + 1e-12) return false;
    phi += p.l;
  }
  if (phi > ph.tau * (1 + 1e-12)) return false;
  const double tol = 1e-12 * std::max(1.0, b0 + ph.tau * ph.c);
  double level = std::min(b0 + (ph.tau - phi) * ph.c, ph.bmax);
  std::vector<Piece> ord(pcs);
  std::sort(ord.begin(), ord.end(), [](const Piece& a, const Piece& b) { return a.layer < b.layer; });
  for (const Piece& p : ord) {
    level = std::min(level - p.l * p.x, ph.bmax);
    if (level < -tol) return false;
  }
  return level >= rho - tol;
}

LtmAllocation alloc_from_pieces(const FramePhysics& ph, const ChannelDist& dist,
                                const std::vector<Piece>& pcs) {
  LtmAllocation a = LtmAllocation::zeros(1, dist.n());
  double phi = 0;
  for (const Piece& p : pcs) {
    if (p.l <= 0) continue;
    double alpha, d;
    ph.split(p.x, alpha, d);
    a.l[p.layer][0] += p.l;
    a.beta[p.layer][0] += alpha * p.l;
    a.e[p.layer][0] += d * p.l;
    a.p[p.layer][0] = std::max(0.0, ph.power(p.x));
    phi += p.l;
  }
  a.phi[0] = std::min(phi, ph.tau);
  a.objective = ltm_average_rate(a, dist, 0);
  if (phi <= 0) a.status = Errc::NoFeasibleTransmission;
  return a;
}

// upper end for drain scans when the battery is ideal
double drain_scan_hi(const FramePhysics& ph, double energy) {
  if (std::isfinite(ph.x_hi)) return ph.x_hi;
  return std::max(1e-3, 1e6 * std::max(energy, 1e-9) / ph.tau);
}

// Stationarity of a single layer with idle charging at rate cc:
// h (x + cc) P'(x) - (1 + hP) ln(1 + hP) = 0
double single_layer_residual(const Layer& L, double x, double cc) {
  const double p = std::max(0.0, L.ph->power(x));
  return L.h * (x + cc) * L.ph->dpower(x) - (1.0 + L.h * p) * std::log1p(L.h * p);
}

void best_single_layer(const Layer& L, std::size_t m, double b0, Candidate& best) {
  const FramePhysics& ph = *L.ph;
  const double tau = ph.tau;
  auto energy = [&](double phi) {
    double e = std::min(b0 + (tau - phi) * ph.c, ph.bmax);
    if (std::isfinite(ph.x_hi)) e = std::min(e, phi * ph.x_hi);
    return e;
  };
  auto value = [&](double phi, double& x) {
    x = energy(phi) / phi;
    if (x < ph.x_lo) return -kInf;
    return phi * L.g(x);
  };
  std::vector<double> phis{tau};
  const double total = b0 + tau * ph.c;
  const double lo = std::max(0.0, ph.x_lo);
  const double hi = drain_scan_hi(ph, total);
  if (hi > lo) {
    const double slo = lo > 0 ? lo : std::min(1e-12, hi * 1e-12);
    auto uncapped = [&](double x) { return single_layer_residual(L, x, ph.c); };
    auto roots = scan_roots(uncapped, slo, hi, 512, true);
    // smallest root first, the remaining ones only compete on objective
    for (double x : roots)
      if (x + ph.c > 0) phis.push_back(total / (x + ph.c));
    if (std::isfinite(ph.bmax)) {
      auto capped = [&](double x) { return single_layer_residual(L, x, 0.0); };
      for (double x : scan_roots(capped, slo, hi, 512, true))
        if (x > 0) phis.push_back(ph.bmax / x);
      if (ph.c > 0 && b0 < ph.bmax) phis.push_back(tau - (ph.bmax - b0) / ph.c);
    }
    if (std::isfinite(ph.x_hi)) {
      phis.push_back(total / (ph.x_hi + ph.c));
      if (std::isfinite(ph.bmax)) phis.push_back(ph.bmax / ph.x_hi);
    }
  }
  for (double phi : phis) {
    if (!(phi > 0) || !std::isfinite(phi)) continue;
    phi = std::min(phi, tau);
    double x;
    const double v = value(phi, x);
    if (v > best.value) {
      best.value = v;
      best.pieces = {{m, phi, x}};
    }
  }
}

void consider(const std::vector<Layer>& L, const FramePhysics& ph, double b0,
              std::vector<Piece> pcs, Candidate& best) {
  if (!pieces_feasible(ph, b0, 0.0, pcs)) return;
  const double v = candidate_value(L, pcs);
  if (v > best.value) {
    best.value = v;
    best.pieces = std::move(pcs);
  }
}

// Two layers sharing one energy price over a busy period of length T that
// must consume energy A (idle-free).
void uniform_price_pair(const std::vector<Layer>& L, const FramePhysics& ph, double b0,
                        std::size_t i, std::size_t j, double T, double A, Candidate& best) {
  const Layer& Li = L[i];
  const Layer& Lj = L[j];
  double p_hi = std::max(Li.g1(ph.x_lo), Lj.g1(ph.x_lo));
  if (!std::isfinite(p_hi)) p_hi = std::max(Li.g1(ph.x_lo + 1e-9 * (1 + std::fabs(ph.x_lo))),
                                            Lj.g1(ph.x_lo + 1e-9 * (1 + std::fabs(ph.x_lo))));
  double p_lo = std::isfinite(ph.x_hi) ? std::min(Li.g1(ph.x_hi), Lj.g1(ph.x_hi)) : 0.0;
  p_lo = std::max(p_lo, 1e-14);
  if (!(p_hi > p_lo)) return;
  auto diff = [&](double pi) { return Li.psi(pi) - Lj.psi(pi); };
  for (double pi : scan_roots(diff, p_lo, p_hi, 512, true)) {
    const double xi = Li.x_of_price(pi), xj = Lj.x_of_price(pi);
    if (std::fabs(xi - xj) < 1e-15) continue;
    const double li = (A - T * xj) / (xi - xj);
    if (li < 0 || li > T) continue;
    consider(L, ph, b0, {{i, li, xi}, {j, T - li, xj}}, best);
  }
}

}  // namespace

LtmAllocation solve_ltm_single(double b0, double u, const FrameConfig& frame,
                               const BatteryParams& bat, const ChannelDist& dist) {
  FramePhysics ph(u, frame, bat);
  const std::size_t n = dist.n();
  if (!ph.can_tx || (b0 <= 0 && u <= 0)) return alloc_from_pieces(ph, dist, {});
  std::vector<Layer> L;
  for (std::size_t i = 0; i < n; ++i) L.push_back({&ph, dist.q[i], dist.h[i]});
  const double tau = frame.tau;
  Candidate best;
  best.value = 0;
  // one layer, possibly preceded by idle charging
  for (std::size_t m = 0; m < n; ++m) best_single_layer(L[m], m, b0, best);
  // two layers over the whole frame
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      uniform_price_pair(L, ph, b0, i, j, tau, b0, best);
      // idle ends exactly when the battery fills
      if (std::isfinite(ph.bmax) && ph.c > 0 && b0 < ph.bmax) {
        const double phik = tau - (ph.bmax - b0) / ph.c;
        if (phik > 0) uniform_price_pair(L, ph, b0, i, j, phik, ph.bmax, best);
      }
      // battery exhausted by layer i, layer j runs on the direct path only
      if (b0 > 0 && ph.x_lo <= 0) {
        const double gj0 = L[j].g(0.0);
        auto f = [&](double x) { return L[i].g(x) - x * L[i].g1(x) - gj0; };
        const double xlo = b0 / tau;
        const double xhi = drain_scan_hi(ph, b0);
        std::vector<double> xs = scan_roots(f, xlo, xhi, 512, true);
        if (std::isfinite(ph.x_hi)) xs.push_back(ph.x_hi);
        for (double x : xs) {
          if (x <= 0) continue;
          const double li = b0 / x;
          if (li > tau) continue;
          consider(L, ph, b0, {{i, li, x}, {j, tau - li, 0.0}}, best);
        }
      }
      // layer i charges the battery to full, layer j spends the full battery
      if (std::isfinite(ph.bmax) && b0 < ph.bmax && ph.x_lo < 0 && ph.bmax > 0) {
        const double need = ph.bmax - b0;
        const double li_lo = need / (-ph.x_lo);
        const double li_hi = std::isfinite(ph.x_hi) ? tau - ph.bmax / ph.x_hi : tau;
        if (li_hi > li_lo) {
          auto val = [&](double li) {
            return li * L[i].g(-need / li) + (tau - li) * L[j].g(ph.bmax / (tau - li));
          };
          Argmax am = unimodal_max(val, li_lo, std::min(li_hi, tau * (1 - 1e-12)), 1e-13);
          consider(L, ph, b0, {{i, am.x, -need / am.x}, {j, tau - am.x, ph.bmax / (tau - am.x)}}, best);
        }
      }
    }
  }
  return alloc_from_pieces(ph, dist, best.pieces);
}

std::vector<double> ltm_pair_lambda_roots(double a, double b) {
  auto f = [&](double lam) { return std::log(lam) - a * lam - b; };
  auto roots = scan_roots(f, 1e-12, 1e12, 512, true);
  std::sort(roots.rbegin(), roots.rend());
  return roots;
}

LtmAllocation solve_ltm_single_ideal(double b0, double u, double tau, const ChannelDist& dist) {
  const std::size_t n = dist.n();
  LtmAllocation out = LtmAllocation::zeros(1, n);
  if (b0 <= 0 && u <= 0) {
    out.status = Errc::NoFeasibleTransmission;
    return out;
  }
  struct Sol {
    std::vector<std::pair<std::size_t, double>> lp;  // (layer, length) with powers below
    std::vector<double> pw;
    double value = -kInf;
  };
  const double budget = u * tau + b0;
  auto value_of = [&](const std::vector<std::size_t>& idx, const std::vector<double>& l,
                      const std::vector<double>& p) {
    double v = 0;
    for (std::size_t t = 0; t < idx.size(); ++t) v += dist.q[idx[t]] * l[t] * rate(dist.h[idx[t]] * p[t]);
    return v;
  };
  LtmAllocation best = out;
  double best_v = -kInf;
  auto keep = [&](const std::vector<std::size_t>& idx, const std::vector<double>& l,
                  const std::vector<double>& p) {
    // energy causality with layers in index order, no idle in the ideal case
    double level = b0;
    double used = 0;
    for (std::size_t t = 0; t < idx.size(); ++t) {
      level -= l[t] * (p[t] - u);
      used += l[t];
      if (level < -1e-12 * std::max(1.0, budget) || p[t] < 0) return;
    }
    if (used > tau * (1 + 1e-12)) return;
    const double v = value_of(idx, l, p);
    if (v <= best_v) return;
    best_v = v;
    best = LtmAllocation::zeros(1, n);
    for (std::size_t t = 0; t < idx.size(); ++t) {
      const std::size_t m = idx[t];
      best.l[m][0] = l[t];
      best.p[m][0] = p[t];
      if (p[t] >= u) {
        best.beta[m][0] = l[t];
        best.e[m][0] = l[t] * (p[t] - u);
      } else {
        best.beta[m][0] = u > 0 ? l[t] * p[t] / u : l[t];
        best.e[m][0] = 0;
      }
    }
    best.phi[0] = tau;
    best.objective = v;
  };
  const double pflat = u + b0 / tau;
  for (std::size_t m = 0; m < n; ++m) keep({m}, {tau}, {pflat});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dq = dist.q[i] - dist.q[j];
      if (dq <= 0) continue;
      const double a = (dist.s[i] - dist.s[j]) / dq;
      const double b = -1.0 - (dist.q[i] * std::log(dist.s[i] / dist.q[i]) -
                               dist.q[j] * std::log(dist.s[j] / dist.q[j])) / dq;
      for (double lam : ltm_pair_lambda_roots(a, b)) {
        const double pi = std::max(dist.q[i] / lam - dist.s[i], 0.0);
        const double pj = std::max(dist.q[j] / lam - dist.s[j], 0.0);
        if (std::fabs(pi - pj) < 1e-15) continue;
        const double li = std::clamp((b0 + u * tau - tau * pj) / (pi - pj), 0.0, tau);
        const double lj = tau - li;
        if (li > 0 && li * (pi - u) > b0 * (1 + 1e-12) + 1e-15) {
          // battery would run dry inside partition i: second case
          const double gj = dist.q[j] * rate(dist.h[j] * u);
          auto f = [&](double p) {
            return dist.q[i] * dist.h[i] * (p - u) / (1.0 + dist.h[i] * p) -
                   dist.q[i] * std::log1p(dist.h[i] * p) + gj;
          };
          if (b0 > 0) {
            const double plo = u + b0 / tau;
            for (double p : scan_roots(f, plo, plo + 1e6 * std::max(b0, 1e-9) / tau + 1.0, 512, true)) {
              const double l1 = b0 / (p - u);
              if (l1 <= tau) keep({i, j}, {l1, tau - l1}, {p, u});
            }
          }
          continue;
        }
        keep({i, j}, {li, lj}, {pi, pj});
        if (li <= 0 || lj <= 0) continue;
      }
    }
  }
  if (best_v <= 0) best.status = Errc::NoFeasibleTransmission;
  return best;
}

namespace {

SegmentProgram ltm_program(const HarvestProfile& prof, double b0, double reserve,
                           const FrameConfig& frame, const BatteryParams& bat,
                           const ChannelDist& dist) {
  SegmentProgram prog;
  prog.b0 = b0;
  prog.reserve = reserve;
  for (std::size_t k = 0; k < prof.k(); ++k) {
    prog.frames.emplace_back(prof.u[k], frame, bat);
    for (std::size_t i = 0; i < dist.n(); ++i) {
      Segment s;
      s.kind = Segment::LtmLayer;
      s.frame = k;
      s.layer = i;
      s.q = dist.q[i];
      s.h = dist.h[i];
      prog.segments.push_back(s);
    }
  }
  return prog;
}

LtmAllocation ltm_from_solution(const SegmentProgram& prog, const SegmentSolution& sol,
                                const ChannelDist& dist) {
  const std::size_t K = prog.frames.size();
  LtmAllocation a = LtmAllocation::zeros(K, dist.n());
  for (std::size_t s = 0; s < prog.segments.size(); ++s) {
    const Segment& seg = prog.segments[s];
    const FramePhysics& ph = prog.frames[seg.frame];
    const double l = sol.l[s];
    if (l <= 0) continue;
    const double x = std::clamp(sol.energy[s] / l, ph.x_lo, ph.x_hi);
    double alpha, d;
    ph.split(x, alpha, d);
    a.l[seg.layer][seg.frame] = l;
    a.beta[seg.layer][seg.frame] = alpha * l;
    a.e[seg.layer][seg.frame] = d * l;
    a.p[seg.layer][seg.frame] = std::max(0.0, ph.power(x));
    a.phi[seg.frame] += l;
  }
  for (std::size_t k = 0; k < K; ++k) {
    a.phi[k] = std::min(a.phi[k], prog.frames[k].tau);
    a.objective += ltm_average_rate(a, dist, k);
  }
  if (!sol.feasible) a.status = Errc::NoFeasibleTransmission;
  return a;
}

LtmAllocation concat(const LtmAllocation& f1, const LtmAllocation& f2, const ChannelDist& dist) {
  LtmAllocation a = LtmAllocation::zeros(2, dist.n());
  for (std::size_t i = 0; i < dist.n(); ++i) {
    a.l[i] = {f1.l[i][0], f2.l[i][0]};
    a.beta[i] = {f1.beta[i][0], f2.beta[i][0]};
    a.e[i] = {f1.e[i][0], f2.e[i][0]};
    a.p[i] = {f1.p[i][0], f2.p[i][0]};
  }
  a.phi = {f1.phi[0], f2.phi[0]};
  a.objective = ltm_average_rate(a, dist, 0) + ltm_average_rate(a, dist, 1);
  return a;
}

}  // namespace

double ltm_frame_value(double b0, double rho, double u, const FrameConfig& frame,
                       const BatteryParams& bat, const ChannelDist& dist, LtmAllocation* out) {
  HarvestProfile prof{{u}};
  const SegmentProgram prog = ltm_program(prof, b0, rho, frame, bat, dist);
  const SegmentSolution sol = solve_segment_program(prog, 1e-11);
  if (out) *out = ltm_from_solution(prog, sol, dist);
  return sol.feasible ? sol.objective : -kInf;
}

LtmAllocation solve_ltm_multiframe_convex(const HarvestProfile& profile, const FrameConfig& frame,
                                          const BatteryParams& bat, const ChannelDist& dist) {
  const SegmentProgram prog = ltm_program(profile, bat.b_0, 0.0, frame, bat, dist);
  const SegmentSolution sol = solve_segment_program(prog, 1e-11);
  if (!sol.feasible) throw Error(Errc::SolverDidNotConverge, "multi-frame program has no feasible start");
  return ltm_from_solution(prog, sol, dist);
}

LtmAllocation ltm_two_frame_by_carry(const HarvestProfile& profile, const FrameConfig& frame,
                                     const BatteryParams& bat, const ChannelDist& dist) {
  if (profile.k() != 2) throw Error(Errc::InvalidArgument, "two-frame solver needs K = 2");
  const double b0 = bat.b_0;
  FramePhysics ph1(profile.u[0], frame, bat);
  const double hi = std::min(bat.b_max, b0 + frame.tau * ph1.c);
  auto total = [&](double b1) {
    return ltm_frame_value(b0, b1, profile.u[0], frame, bat, dist) +
           ltm_frame_value(b1, 0.0, profile.u[1], frame, bat, dist);
  };
  const Argmax am = unimodal_max(total, 0.0, std::max(0.0, hi), 1e-10);
  LtmAllocation f1, f2;
  ltm_frame_value(b0, am.x, profile.u[0], frame, bat, dist, &f1);
  ltm_frame_value(am.x, 0.0, profile.u[1], frame, bat, dist, &f2);
  return concat(f1, f2, dist);
}

LtmAllocation solve_ltm_two_frame(const HarvestProfile& profile, const FrameConfig& frame,
                                  const BatteryParams& bat, const ChannelDist& dist) {
  if (profile.k() != 2) throw Error(Errc::InvalidArgument, "two-frame solver needs K = 2");
  BatteryParams relaxed = bat;
  relaxed.b_max = kInf;
  const LtmAllocation rel = solve_ltm_multiframe_convex(profile, frame, relaxed, dist);
  const auto free_levels = ltm_battery_trajectory(rel, profile, frame, relaxed);
  const double b1 = free_levels[1];
  if (b1 <= bat.b_max) {
    // the relaxed schedule must also respect the capacity inside each frame
    const auto capped = ltm_battery_trajectory(rel, profile, frame, bat);
    bool same = true;
    for (std::size_t k = 0; k < capped.size(); ++k)
      same = same && std::fabs(capped[k] - free_levels[k]) <= 1e-9;
    if (same) return rel;
    return ltm_two_frame_by_carry(profile, frame, bat, dist);
  }
  LtmAllocation f1, f2;
  ltm_frame_value(bat.b_0, bat.b_max, profile.u[0], frame, bat, dist, &f1);
  ltm_frame_value(bat.b_max, 0.0, profile.u[1], frame, bat, dist, &f2);
  return concat(f1, f2, dist);
}

LscAllocation solve_lsc_multiframe_convex(const HarvestProfile& profile, const FrameConfig& frame,
                                          const BatteryParams& bat, const ChannelDist& dist) {
  const ActiveLayerSet act = find_active_layers(dist);
  SegmentProgram prog;
  prog.b0 = bat.b_0;
  for (std::size_t k = 0; k < profile.k(); ++k) {
    prog.frames.emplace_back(profile.u[k], frame, bat);
    Segment s;
    s.kind = Segment::LscBlock;
    s.frame = k;
    s.active = &act;
    prog.segments.push_back(s);
  }
  const SegmentSolution sol = solve_segment_program(prog, 1e-11);
  if (!sol.feasible) throw Error(Errc::SolverDidNotConverge, "multi-frame program has no feasible start");
  LscAllocation a = LscAllocation::zeros(profile.k(), dist.n());
  for (std::size_t k = 0; k < profile.k(); ++k) {
    const double l = sol.l[k];
    if (l <= 0) continue;
    const FramePhysics& ph = prog.frames[k];
    const double x = std::clamp(sol.energy[k] / l, ph.x_lo, ph.x_hi);
    double alpha, d;
    ph.split(x, alpha, d);
    a.phi[k] = std::min(l, frame.tau);
    a.beta[k] = alpha * l;
    a.e[k] = d * l;
    a.powers[k] = layered_water_filling(std::max(0.0, ph.power(x)), act);
    a.rates[k] = lsc_rates_from_powers(a.powers[k], l, dist);
  }
  a.objective = lsc_objective(a, dist);
  return a;
}

}  // namespace ehlc
