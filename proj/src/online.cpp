#include "ehlc/online.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ehlc/lsc.hpp"
#include "ehlc/ltm.hpp"
#include "parallel.hpp"

namespace ehlc {

double HarvestSupport::mean() const {
  double m = 0;
  for (std::size_t i = 0; i < values.size(); ++i) m += values[i] * probs[i];
  return m;
}

void HarvestSupport::validate() const {
  if (values.empty() || values.size() != probs.size())
    throw Error(Errc::InvalidArgument, "harvest support needs matching, non-empty values and probabilities");
  double s = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0) || !std::isfinite(values[i]))
      throw Error(Errc::InvalidArgument, "harvest values must be finite and >= 0");
    if (!(probs[i] >= 0)) throw Error(Errc::InvalidArgument, "harvest probabilities must be >= 0");
    s += probs[i];
  }
  if (std::fabs(s - 1.0) > 1e-9) throw Error(Errc::InvalidArgument, "harvest probabilities must sum to 1");
}

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::Offline: return "offline";
    case Policy::Dp: return "dp";
    case Policy::Mv: return "mv";
    case Policy::Greedy: return "greedy";
  }
  return "?";
}

double RewardTable::max_increment() const {
  double m = 0;
  const std::size_t N = n();
  for (std::size_t iu = 0; iu < u.size(); ++iu)
    for (std::size_t b = 0; b + 1 < N; ++b)
      for (std::size_t bn = 0; bn < N; ++bn) {
        const double lo = at(iu, b, bn), hi = at(iu, b + 1, bn);
        if (std::isfinite(lo) && std::isfinite(hi)) m = std::max(m, hi - lo);
      }
  return m;
}

std::vector<double> battery_grid(const BatteryParams& bat, const GridOptions& opt) {
  if (opt.points < 2) throw Error(Errc::InvalidArgument, "battery grid needs at least 2 points");
  const double top = std::isfinite(bat.b_max) ? bat.b_max : opt.cap_if_unbounded;
  if (top <= 0) return {0.0};
  std::vector<double> g(opt.points);
  for (std::size_t i = 0; i < opt.points; ++i) g[i] = top * double(i) / double(opt.points - 1);
  g.back() = top;
  return g;
}

namespace {

double frame_value(Strategy st, double b0, double rho, double u, const FrameConfig& frame,
                   const BatteryParams& bat, const ChannelDist& dist, const ActiveLayerSet& act) {
  if (st == Strategy::Ltm) return ltm_frame_value(b0, rho, u, frame, bat, dist);
  return lsc_frame_value(b0, rho, u, frame, bat, act);
}

std::size_t snap_down(const std::vector<double>& grid, double b) {
  auto it = std::upper_bound(grid.begin(), grid.end(), b + 1e-12);
  return it == grid.begin() ? 0 : std::size_t(it - grid.begin()) - 1;
}

// greedy keeps whatever the single-frame optimum cannot use
std::size_t greedy_choice(const RewardTable& t, std::size_t iu, std::size_t b) {
  const double best = t.at(iu, b, 0);
  std::size_t pick = 0;
  for (std::size_t bn = 1; bn < t.n(); ++bn) {
    const double v = t.at(iu, b, bn);
    if (std::isfinite(v) && v >= best - 1e-12 * std::max(1.0, std::fabs(best))) pick = bn;
  }
  return pick;
}

std::size_t mv_choice(const RewardTable& t, std::size_t iu, std::size_t b) {
  double best = -kInf;
  std::size_t pick = 0;
  for (std::size_t bn = 0; bn < t.n(); ++bn) {
    const double v = t.at(iu, b, bn) + t.mv_second[bn];
    if (v > best) best = v, pick = bn;
  }
  return pick;
}

}  // namespace

RewardTable build_reward_table(Strategy st, const FrameConfig& frame, const BatteryParams& bat,
                               const ChannelDist& dist, const HarvestSupport& support,
                               const GridOptions& opt) {
  support.validate();
  RewardTable t;
  t.strategy = st;
  t.grid = battery_grid(bat, opt);
  t.u = support.values;
  t.mv_u = 0.5 * support.mean();
  const std::size_t n = t.n(), nu = t.u.size();
  t.r.assign(nu * n * n, -kInf);
  const ActiveLayerSet act = find_active_layers(dist);
  // the table models the battery as the grid sees it
  BatteryParams gb = bat;
  if (!std::isfinite(gb.b_max)) gb.b_max = kInf;
  parallel_for(nu * n, [&](std::size_t job) {
    const std::size_t iu = job / n, b = job % n;
    const double u = t.u[iu];
    const double reach = std::min(gb.b_max, t.grid[b] + frame.tau * charge_rate(idle_charge_rate(u, gb), gb));
    for (std::size_t bn = 0; bn < n; ++bn) {
      if (t.grid[bn] > reach + 1e-12) break;
      const double rho = std::min(t.grid[bn], reach);
      t.r[(iu * n + b) * n + bn] = frame_value(st, t.grid[b], rho, u, frame, gb, dist, act);
    }
  });
  t.mv_second.assign(n, 0.0);
  parallel_for(n, [&](std::size_t b) {
    t.mv_second[b] = frame_value(st, t.grid[b], 0.0, t.mv_u, frame, gb, dist, act);
  });
  return t;
}

PolicyTable dp_solve(std::shared_ptr<const RewardTable> rw, const HarvestSupport& support,
                     std::size_t K) {
  support.validate();
  const RewardTable& t = *rw;
  if (t.u.size() != support.values.size())
    throw Error(Errc::InvalidArgument, "reward table and harvest support differ");
  PolicyTable P;
  P.strategy = t.strategy;
  P.battery_grid = t.grid;
  P.harvest_support = support;
  P.horizon = K;
  P.rewards = rw;
  const std::size_t n = t.n(), nu = t.u.size();
  P.value.assign(K, std::vector<std::vector<double>>(nu, std::vector<double>(n, 0.0)));
  P.action.assign(K, std::vector<std::vector<std::size_t>>(nu, std::vector<std::size_t>(n, 0)));
  std::vector<double> next(n, 0.0);  // expected value of the remaining frames
  for (std::size_t k = K; k-- > 0;) {
    for (std::size_t iu = 0; iu < nu; ++iu)
      for (std::size_t b = 0; b < n; ++b) {
        double best = -kInf;
        std::size_t pick = 0;
        for (std::size_t bn = 0; bn < n; ++bn) {
          const double v = t.at(iu, b, bn) + next[bn];
          if (v > best) best = v, pick = bn;
        }
        P.value[k][iu][b] = best;
        P.action[k][iu][b] = pick;
      }
    for (std::size_t b = 0; b < n; ++b) {
      double e = 0;
      for (std::size_t iu = 0; iu < nu; ++iu) e += support.probs[iu] * P.value[k][iu][b];
      next[b] = e;
    }
  }
  P.grid_bound = K > 1 ? 2.0 * double(K - 1) * t.max_increment() : 0.0;
  return P;
}

PolicyTable dp_solve(const FrameConfig& frame, const BatteryParams& bat, const ChannelDist& dist,
                     const HarvestSupport& support, std::size_t K, const GridOptions& opt,
                     Strategy st) {
  auto rw = std::make_shared<const RewardTable>(build_reward_table(st, frame, bat, dist, support, opt));
  return dp_solve(rw, support, K);
}

double PolicyTable::expected_value(std::size_t k, double b) const {
  if (k >= horizon) return 0.0;
  const std::size_t n = battery_grid.size();
  auto ev = [&](std::size_t i) {
    double e = 0;
    for (std::size_t iu = 0; iu < harvest_support.values.size(); ++iu)
      e += harvest_support.probs[iu] * value[k][iu][i];
    return e;
  };
  if (n == 1 || b <= battery_grid.front()) return ev(0);
  if (b >= battery_grid.back()) return ev(n - 1);
  const std::size_t i = snap_down(battery_grid, b);
  const double w = (b - battery_grid[i]) / (battery_grid[i + 1] - battery_grid[i]);
  return (1 - w) * ev(i) + w * ev(i + 1);
}

namespace {

FrameAction frame_action(Strategy st, double b, double rho, double u, const FrameConfig& frame,
                         const BatteryParams& bat, const ChannelDist& dist) {
  FrameAction a;
  BatteryParams b1 = bat;
  b1.b_0 = b;
  const HarvestProfile prof{{u}};
  if (st == Strategy::Ltm) {
    a.reward = ltm_frame_value(b, rho, u, frame, bat, dist, &a.ltm);
    a.b_next = ltm_battery_trajectory(a.ltm, prof, frame, b1).back();
  } else {
    a.reward = lsc_frame_value(b, rho, u, frame, bat, find_active_layers(dist), &a.lsc);
    a.lsc.rates[0] = lsc_rates_from_powers(a.lsc.powers[0], a.lsc.phi[0], dist);
    a.lsc.objective = lsc_objective(a.lsc, dist);
    a.b_next = lsc_battery_trajectory(a.lsc, prof, frame, b1).back();
  }
  return a;
}

}  // namespace

FrameAction policy_action(const PolicyTable& table, std::size_t k, std::size_t iu, std::size_t ib,
                          const FrameConfig& frame, const BatteryParams& bat,
                          const ChannelDist& dist) {
  const std::size_t bn = table.action.at(k).at(iu).at(ib);
  FrameAction a = frame_action(table.strategy, table.battery_grid[ib], table.battery_grid[bn],
                               table.harvest_support.values[iu], frame, bat, dist);
  a.reward = table.rewards->at(iu, ib, bn);
  return a;
}

FrameAction greedy_step(const OnlineState& s, Strategy st, const FrameConfig& frame,
                        const BatteryParams& bat, const ChannelDist& dist) {
  FrameAction a;
  BatteryParams b1 = bat;
  b1.b_0 = s.b;
  const HarvestProfile prof{{s.u}};
  if (st == Strategy::Ltm) {
    a.ltm = solve_ltm_single(s.b, s.u, frame, bat, dist);
    a.reward = a.ltm.objective;
    a.b_next = ltm_battery_trajectory(a.ltm, prof, frame, b1).back();
  } else {
    a.lsc = solve_lsc_single(s.b, s.u, frame, bat, dist);
    a.reward = a.lsc.objective;
    a.b_next = lsc_battery_trajectory(a.lsc, prof, frame, b1).back();
  }
  return a;
}

FrameAction mv_step(const OnlineState& s, double u_bar, Strategy st, const FrameConfig& frame,
                    const BatteryParams& bat, const ChannelDist& dist) {
  FrameAction a;
  BatteryParams b1 = bat;
  b1.b_0 = s.b;
  const HarvestProfile two{{s.u, 0.5 * u_bar}};
  const HarvestProfile one{{s.u}};
  if (st == Strategy::Ltm) {
    const LtmAllocation both = solve_ltm_two_frame(two, frame, b1, dist);
    a.ltm = LtmAllocation::zeros(1, dist.n());
    for (std::size_t i = 0; i < dist.n(); ++i) {
      a.ltm.l[i][0] = both.l[i][0];
      a.ltm.beta[i][0] = both.beta[i][0];
      a.ltm.e[i][0] = both.e[i][0];
      a.ltm.p[i][0] = both.p[i][0];
    }
    a.ltm.phi[0] = both.phi[0];
    a.ltm.objective = ltm_average_rate(a.ltm, dist, 0);
    a.ltm.status = both.status;
    a.reward = a.ltm.objective;
    a.b_next = ltm_battery_trajectory(a.ltm, one, frame, b1).back();
  } else {
    const LscAllocation both = solve_lsc_two_frame(two, frame, b1, dist);
    a.lsc = LscAllocation::zeros(1, dist.n());
    a.lsc.powers[0] = both.powers[0];
    a.lsc.rates[0] = both.rates[0];
    a.lsc.beta[0] = both.beta[0];
    a.lsc.e[0] = both.e[0];
    a.lsc.phi[0] = both.phi[0];
    a.lsc.status = both.status;
    a.lsc.objective = lsc_objective(a.lsc, dist);
    a.reward = a.lsc.objective;
    a.b_next = lsc_battery_trajectory(a.lsc, one, frame, b1).back();
  }
  return a;
}

Trajectory simulate(Policy policy, const std::vector<double>& harvest, Strategy st,
                    const FrameConfig& frame, const BatteryParams& bat, const ChannelDist& dist,
                    double u_bar, const PolicyTable* table) {
  Trajectory tr;
  const std::size_t K = harvest.size();
  if (policy == Policy::Offline) {
    const HarvestProfile prof{harvest};
    if (st == Strategy::Ltm) {
      const LtmAllocation a = solve_ltm_multiframe_convex(prof, frame, bat, dist);
      const auto lv = ltm_battery_trajectory(a, prof, frame, bat);
      for (std::size_t k = 0; k < K; ++k) {
        tr.rate.push_back(ltm_average_rate(a, dist, k));
        tr.battery.push_back(lv[k + 1]);
      }
    } else {
      const LscAllocation a = solve_lsc_multiframe_convex(prof, frame, bat, dist);
      const auto lv = lsc_battery_trajectory(a, prof, frame, bat);
      for (std::size_t k = 0; k < K; ++k) {
        double v = 0;
        for (std::size_t i = 0; i < dist.n(); ++i) v += dist.q[i] * a.rates[k][i];
        tr.rate.push_back(v);
        tr.battery.push_back(lv[k + 1]);
      }
    }
  } else {
    double b = bat.b_0;
    for (std::size_t k = 0; k < K; ++k) {
      const OnlineState s{harvest[k], b, k};
      FrameAction a;
      if (policy == Policy::Greedy) {
        a = greedy_step(s, st, frame, bat, dist);
      } else if (policy == Policy::Mv) {
        a = mv_step(s, u_bar, st, frame, bat, dist);
      } else {
        if (!table) throw Error(Errc::InvalidArgument, "dp simulation needs a policy table");
        const auto& vals = table->harvest_support.values;
        const auto it = std::find(vals.begin(), vals.end(), harvest[k]);
        if (it == vals.end()) throw Error(Errc::InvalidArgument, "harvest value outside the dp support");
        const std::size_t ib = snap_down(table->battery_grid, b);
        a = policy_action(*table, std::min(k, table->horizon - 1), std::size_t(it - vals.begin()), ib,
                          frame, bat, dist);
        a.b_next = table->battery_grid[table->action[std::min(k, table->horizon - 1)]
                                                    [std::size_t(it - vals.begin())][ib]];
      }
      if (a.b_next < -1e-9 || a.b_next > bat.b_max + 1e-9)
        throw Error(Errc::SolverDidNotConverge, "battery left its range during simulation");
      b = std::clamp(a.b_next, 0.0, bat.b_max);
      tr.rate.push_back(a.reward);
      tr.battery.push_back(b);
      tr.actions.push_back(std::move(a));
    }
  }
  double s = 0;
  for (double r : tr.rate) s += r;
  tr.average = K ? s / double(K) : 0.0;
  return tr;
}

double simulate_on_grid(Policy policy, const std::vector<std::size_t>& hidx, const PolicyTable& P,
                        std::size_t b0, std::vector<double>* rates, std::vector<double>* levels) {
  const RewardTable& t = *P.rewards;
  const std::size_t K = hidx.size(), n = t.n();
  std::vector<std::size_t> path(K);
  if (policy == Policy::Offline) {
    // backward induction along the known sequence
    std::vector<double> next(n, 0.0), cur(n);
    std::vector<std::vector<std::size_t>> arg(K, std::vector<std::size_t>(n, 0));
    for (std::size_t k = K; k-- > 0;) {
      const std::size_t iu = hidx[k];
      for (std::size_t b = 0; b < n; ++b) {
        double best = -kInf;
        std::size_t pick = 0;
        const double* row = &t.r[(iu * n + b) * n];
        for (std::size_t bn = 0; bn < n; ++bn) {
          if (!std::isfinite(row[bn])) break;
          const double v = row[bn] + next[bn];
          if (v > best) best = v, pick = bn;
        }
        cur[b] = best;
        arg[k][b] = pick;
      }
      std::swap(cur, next);
    }
    std::size_t b = b0;
    for (std::size_t k = 0; k < K; ++k) path[k] = b = arg[k][b];
  } else {
    std::size_t b = b0;
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t iu = hidx[k];
      if (policy == Policy::Dp) {
        b = P.action[std::min(k, P.horizon - 1)][iu][b];
      } else if (policy == Policy::Mv) {
        b = mv_choice(t, iu, b);
      } else {
        b = greedy_choice(t, iu, b);
      }
      path[k] = b;
    }
  }
  double total = 0;
  std::size_t b = b0;
  if (rates) rates->clear();
  if (levels) levels->clear();
  for (std::size_t k = 0; k < K; ++k) {
    const double r = t.at(hidx[k], b, path[k]);
    total += r;
    if (rates) rates->push_back(r);
    b = path[k];
    if (levels) levels->push_back(t.grid[b]);
  }
  return K ? total / double(K) : 0.0;
}

std::vector<std::size_t> draw_harvest(const HarvestSupport& support, std::size_t K,
                                      std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(trial),
                    std::uint32_t(trial >> 32)};
  std::mt19937_64 rng(seq);
  std::vector<double> cdf(support.probs.size());
  double acc = 0;
  for (std::size_t i = 0; i < cdf.size(); ++i) cdf[i] = (acc += support.probs[i]);
  std::vector<std::size_t> out(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double x = double(rng() >> 11) * 0x1.0p-53 * acc;
    std::size_t i = 0;
    while (i + 1 < cdf.size() && x >= cdf[i]) ++i;
    out[k] = i;
  }
  return out;
}

std::vector<MonteCarloResult> monte_carlo(const std::vector<Policy>& policies, const PolicyTable& P,
                                          std::size_t trials, std::uint64_t seed, std::size_t b0,
                                          std::vector<std::vector<double>>* samples) {
  const std::size_t np = policies.size();
  std::vector<std::vector<double>> avg(np, std::vector<double>(trials, 0.0));
  parallel_for(trials, [&](std::size_t t) {
    const auto seq = draw_harvest(P.harvest_support, P.horizon, seed, t);
    for (std::size_t p = 0; p < np; ++p) avg[p][t] = simulate_on_grid(policies[p], seq, P, b0);
  });
  std::vector<MonteCarloResult> out(np);
  for (std::size_t p = 0; p < np; ++p) {
    double s = 0, s2 = 0;
    for (double v : avg[p]) s += v;
    const double m = trials ? s / double(trials) : 0.0;
    for (double v : avg[p]) s2 += (v - m) * (v - m);
    out[p].mean = m;
    out[p].trials = trials;
    out[p].stderr_ = trials > 1 ? std::sqrt(s2 / double(trials - 1) / double(trials)) : 0.0;
  }
  if (samples) *samples = std::move(avg);
  return out;
}

}  // namespace ehlc
