// Acceptance run: one PASS/FAIL line per criterion, details underneath.
// Exit status is the number of failed criteria unless --report-only is given;
// --only 1,2 restricts the run.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "ehlc/harness.hpp"
#include "ehlc/lsc.hpp"
#include "ehlc/ltm.hpp"
#include "ehlc/online.hpp"
#include "ehlc/oracle.hpp"

using namespace ehlc;

namespace {

struct Verdict {
  int id;
  std::string name;
  bool pass;
  std::vector<std::string> notes;
  double seconds = 0;
};

std::vector<Verdict> g_verdicts;
std::set<int> g_only;

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void report(const Verdict& v) {
  std::printf("criterion %d: %s  %s  (%.1fs)\n", v.id, v.pass ? "PASS" : "FAIL", v.name.c_str(), v.seconds);
  for (const auto& n : v.notes) std::printf("    %s\n", n.c_str());
  std::fflush(stdout);
}

void run(int id, const std::string& name, const std::function<bool(std::vector<std::string>&)>& body) {
  if (!g_only.empty() && !g_only.count(id)) return;
  Verdict v{id, name, false, {}};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    v.pass = body(v.notes);
  } catch (const std::exception& e) {
    v.pass = false;
    v.notes.push_back(std::string("aborted: ") + e.what());
  }
  v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(v);
  g_verdicts.push_back(v);
}

BatteryParams battery(double r, double b_max = kInf, double b0 = 0) {
  BatteryParams b;
  b.r = r;
  b.v_b = 1.5;
  b.b_max = b_max;
  b.b_0 = b0;
  return b;
}

FrameConfig frame(double pc) {
  FrameConfig f;
  f.p_c = pc;
  return f;
}

ChannelDist random_channel(std::mt19937_64& rng, int n, double scale = 1000) {
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<double> h, p;
  double acc = 0, sp = 0;
  for (int i = 0; i < n; ++i) {
    acc += 0.2 + 2 * U(rng);
    h.push_back(acc * scale);
    p.push_back(0.05 + U(rng));
    sp += p.back();
  }
  for (auto& x : p) x /= sp;
  p.back() = 1.0;
  for (int i = 0; i + 1 < n; ++i) p.back() -= p[i];
  return make_channel(h, p);
}

// Feasibility and charge/discharge complementarity over every solver output.
struct Ledger {
  std::size_t checked = 0, failed = 0;
  double worst_slack = kInf, worst_comp = 0;
  std::string first;
  void add(const FeasibilityReport& r, const std::string& where) {
    ++checked;
    worst_slack = std::min(worst_slack, r.min_slack);
    worst_comp = std::max(worst_comp, r.max_complementarity);
    if (!(r.min_slack >= -1e-9) || !(r.max_complementarity < 1e-9)) {
      if (!failed) first = where + ": " + r.first_violation();
      ++failed;
    }
  }
  template <class A>
  void add(const A& a, const HarvestProfile& p, const FrameConfig& f, const BatteryParams& b,
           const ChannelDist& d, const std::string& where) {
    add(feasibility_check(a, p, f, b, d), where);
  }
};

Ledger g_feas;

// LTM and LSC objectives per suite-1/2 instance, for criterion 6
struct Pair {
  double ltm, lsc;
  std::string where;
};
std::vector<Pair> g_dominance;

double worst_kkt = 0;
std::size_t kkt_count = 0;

void kkt(const LscAllocation& a, const HarvestProfile& p, const ChannelDist& d, const FrameConfig& f,
         const BatteryParams& b) {
  const auto rep = kkt_residuals_lsc(a, p, d, f, b);
  worst_kkt = std::max(worst_kkt, rep.max_abs);
  ++kkt_count;
}

// ---------------------------------------------------------------- 1
bool criterion1(std::vector<std::string>& notes) {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> U(0, 1);
  GridSpec g;
  std::size_t bad_lo = 0, bad_hi = 0, n = 0;
  double worst_hi = -kInf, worst_lo = kInf, worst_rel_bound = 0;
  for (int N : {2, 3})
    for (int t = 0; t < 50; ++t) {
      auto d = random_channel(rng, N);
      const double r = (t % 2) ? 5.0 : 0.0;
      const double pc = (t / 2 % 2) ? 0.01 : 0.0;
      const auto f = frame(pc);
      const double u = 0.1 * U(rng), b0 = 0.03 * U(rng);
      const auto bat = battery(r, t % 5 == 0 ? 0.03 : kInf, b0);
      const HarvestProfile prof{{u}};
      auto a = solve_ltm_single(b0, u, f, bat, d);
      auto s = solve_lsc_single(b0, u, f, bat, d);
      auto oa = grid_search_single_frame(Strategy::Ltm, b0, u, f, bat, d, g);
      auto os = grid_search_single_frame(Strategy::Lsc, b0, u, f, bat, d, g);
      const std::string where = fmt("N=%d #%d", N, t);
      for (auto [val, o] : {std::pair{a.objective, &oa}, std::pair{s.objective, &os}}) {
        ++n;
        const double lo = val - (o->grid_objective - o->grid_bound);
        const double hi = val - (o->objective + 1e-9);
        worst_lo = std::min(worst_lo, lo);
        worst_hi = std::max(worst_hi, val - o->objective);
        if (o->grid_objective > 0) worst_rel_bound = std::max(worst_rel_bound, o->grid_bound / o->grid_objective);
        bad_lo += lo < 0;
        bad_hi += hi > 0;
      }
      g_feas.add(a, prof, f, bat, d, "suite1 ltm " + where);
      g_feas.add(s, prof, f, bat, d, "suite1 lsc " + where);
      g_feas.add(oa.ltm, prof, f, bat, d, "suite1 ltm oracle " + where);
      g_feas.add(os.lsc, prof, f, bat, d, "suite1 lsc oracle " + where);
      g_dominance.push_back({a.objective, s.objective, "suite1 " + where});
      kkt(s, prof, d, f, bat);
    }
  notes.push_back(fmt("%zu solver/oracle comparisons; below oracle-grid-bound: %zu; above polished oracle+1e-9: %zu",
                      n, bad_lo, bad_hi));
  notes.push_back(fmt("max(solver - polished oracle) = %.3g; min slack to the lower bound = %.3g", worst_hi, worst_lo));
  notes.push_back(fmt("the rigorous Lipschitz grid bound is loose: up to %.3g x the objective; the upper side carries the test",
                      worst_rel_bound));
  return bad_lo == 0 && bad_hi == 0;
}

// ---------------------------------------------------------------- 2
// Best three-layer ideal allocation for layers i < j < k sent in that order:
// lengths on a grid refined by pattern search, and for each length split the
// best segment energies under prefix energy causality.
double prefix_energy_split(const std::array<double, 3>& l, const std::array<double, 3>& q,
                           const std::array<double, 3>& h, double b0, double u) {
  const double c1 = b0 + u * l[0], c2 = b0 + u * (l[0] + l[1]), c3 = b0 + u * (l[0] + l[1] + l[2]);
  auto seg = [&](int t, double e) { return l[t] > 0 && e > 0 ? q[t] * l[t] * std::log1p(h[t] * e / l[t]) : 0.0; };
  auto best_e2 = [&](double e1) {
    const double hi = std::max(0.0, std::min(c2, c3) - e1);
    auto r = boost::math::tools::brent_find_minima(
        [&](double e2) { return -(seg(1, e2) + seg(2, c3 - e1 - e2)); }, 0.0, hi, 52);
    return -r.second + seg(0, e1);
  };
  auto r = boost::math::tools::brent_find_minima([&](double e1) { return -best_e2(e1); }, 0.0,
                                                 std::min(c1, c3), 52);
  return std::max({-r.second, best_e2(0.0), best_e2(std::min(c1, c3))});
}

double three_layer_brute(const ChannelDist& d, double b0, double u) {
  double best = 0;
  const int G = 20;
  const std::size_t N = d.n();
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j)
      for (std::size_t k = j + 1; k < N; ++k) {
        const std::array<double, 3> q{d.q[i], d.q[j], d.q[k]};
        const std::array<double, 3> h{d.h[i], d.h[j], d.h[k]};
        auto val = [&](double a, double b) {
          if (a < 0 || b < 0 || a + b > 1) return -kInf;
          return prefix_energy_split({a, b, std::max(0.0, 1 - a - b)}, q, h, b0, u);
        };
        double ba = 0, bb = 0, bv = -kInf;
        for (int x = 0; x <= G; ++x)
          for (int y = 0; x + y <= G; ++y) {
            const double v = val(double(x) / G, double(y) / G);
            if (v > bv) bv = v, ba = double(x) / G, bb = double(y) / G;
          }
        for (double step = 1.0 / G; step > 1e-10; step *= 0.5) {
          bool moved = true;
          while (moved) {
            moved = false;
            for (auto [da, db] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}}) {
              const double v = val(ba + da * step, bb + db * step);
              if (v > bv) bv = v, ba += da * step, bb += db * step, moved = true;
            }
          }
        }
        best = std::max(best, bv);
      }
  return best;
}

bool criterion2(std::vector<std::string>& notes) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(0, 1);
  double worst = -kInf, median_gap = 0;
  std::vector<double> gaps;
  std::size_t bad = 0;
  for (int t = 0; t < 100; ++t) {
    auto d = random_channel(rng, 5, t % 2 ? 1000.0 : 10.0);
    const double u = 0.2 * U(rng), b0 = 0.2 * U(rng);
    auto a = solve_ltm_single_ideal(b0, u, 1.0, d);
    const double brute = three_layer_brute(d, b0, u);
    const double rel = (brute - a.objective) / std::max(a.objective, 1e-300);
    worst = std::max(worst, rel);
    gaps.push_back(rel);
    bad += rel > 1e-6;
    g_feas.add(a, HarvestProfile{{u}}, frame(0), battery(0, kInf, b0), d, fmt("suite2 #%d", t));
    auto s = solve_lsc_single(b0, u, frame(0), battery(0, kInf, b0), d);
    g_feas.add(s, HarvestProfile{{u}}, frame(0), battery(0, kInf, b0), d, fmt("suite2 lsc #%d", t));
    kkt(s, HarvestProfile{{u}}, d, frame(0), battery(0, kInf, b0));
    g_dominance.push_back({a.objective, s.objective, fmt("suite2 #%d", t)});
  }
  std::sort(gaps.begin(), gaps.end());
  median_gap = gaps[gaps.size() / 2];
  notes.push_back(fmt("100 instances, N=5; max relative excess of the three-layer search = %.3g; over 1e-6: %zu", worst, bad));
  notes.push_back(fmt("search is tight: median (search - closed form)/closed form = %.3g, min %.3g", median_gap,
                      gaps.front()));
  return bad == 0;
}

// ---------------------------------------------------------------- 3
bool criterion3(std::vector<std::string>& notes) {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> U(0, 1);
  // ideal single frames across random channels and power levels
  for (int t = 0; t < 300; ++t) {
    auto d = random_channel(rng, 1 + t % 5, 1.0);
    const double P = 5 * U(rng);
    auto a = solve_lsc_single(0.0, P, FrameConfig{1, 0, 1, 1}, battery(0), d);
    kkt(a, HarvestProfile{{P}}, d, FrameConfig{1, 0, 1, 1}, battery(0));
  }
  const bool kkt_ok = worst_kkt < 1e-8;
  notes.push_back(fmt("KKT residuals on %zu LSC outputs (suites 1-3): max %.3g", kkt_count, worst_kkt));

  const auto cap = pmax_thresholds(find_active_layers(make_channel({1, 4}, {0.5, 0.5})));
  const bool cap_ok = cap.size() == 2 && std::fabs(cap[1] - 0.5) <= 1e-12;
  notes.push_back(fmt("container cap for h=(1,4), p=(.5,.5): %.17g", cap.size() == 2 ? cap[1] : -1.0));

  std::size_t chain_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    auto d = random_channel(rng, 1 + t % 8, 1.0);
    auto act = find_active_layers(d);
    double prev = -kInf;
    for (std::size_t j = 0; j < act.size(); ++j) {
      const double ratio = act.merged_p[j] / (act.s[j] - act.s[j + 1]);
      if (!(ratio > prev)) ++chain_bad;
      prev = ratio;
    }
  }
  notes.push_back(fmt("ratio chain not strictly increasing in %zu of 1000 distributions", chain_bad));
  return kkt_ok && cap_ok && chain_bad == 0;
}

// ---------------------------------------------------------------- 4
bool criterion4(std::vector<std::string>& notes) {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> U(0, 1);
  std::size_t dec = 0, unbalanced = 0, steps = 0;
  double worst_bal = 0;
  for (int t = 0; t < 200; ++t) {
    auto d = random_channel(rng, 1 + t % 4);
    const std::size_t K = 2 + t % 7;
    HarvestProfile prof;
    for (std::size_t k = 0; k < K; ++k) prof.u.push_back(U(rng) < 0.3 ? 0.0 : 0.1 * U(rng));
    const double b0 = U(rng) < 0.5 ? 0.0 : 0.05 * U(rng);
    auto a = solve_lsc_multiframe_ideal(prof, b0, kInf, frame(0), d);
    g_feas.add(a, prof, frame(0), battery(0, kInf, b0), d, fmt("suite4 #%d", t));
    std::vector<double> P(K, 0.0);
    for (std::size_t k = 0; k < K; ++k)
      for (double x : a.powers[k]) P[k] += x;
    double bal = b0;
    for (std::size_t k = 0; k + 1 < K; ++k) {
      bal += (prof.u[k] - P[k]) * 1.0;
      if (P[k + 1] < P[k] - 1e-12 * std::max(1.0, P[k])) ++dec;
      if (P[k + 1] > P[k] + 1e-9) {
        ++steps;
        worst_bal = std::max(worst_bal, std::fabs(bal));
        unbalanced += std::fabs(bal) > 1e-9;
      }
    }
  }
  notes.push_back(fmt("200 profiles, K=2..8: decreasing steps %zu; strict increases %zu, battery not empty at %zu (max %.3g J)",
                      dec, steps, unbalanced, worst_bal));
  return dec == 0 && unbalanced == 0;
}

// ---------------------------------------------------------------- two-frame outputs for suites 5/6
void two_frame_suite() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> U(0, 1);
  for (int t = 0; t < 40; ++t) {
    auto d = random_channel(rng, 2 + t % 3);
    const auto f = frame(t % 2 ? 0.01 : 0.0);
    const auto bat = battery(t % 3 ? 5.0 : 0.0, t % 4 ? 0.03 : kInf, 0.01 * U(rng));
    HarvestProfile prof{{0.1 * U(rng), 0.1 * U(rng)}};
    auto a = solve_ltm_two_frame(prof, f, bat, d);
    auto s = solve_lsc_two_frame(prof, f, bat, d);
    g_feas.add(a, prof, f, bat, d, fmt("two-frame ltm #%d", t));
    g_feas.add(s, prof, f, bat, d, fmt("two-frame lsc #%d", t));
  }
}

// ---------------------------------------------------------------- 7, 8
const HarvestSupport kSupport{{0.0, 0.05, 0.1}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
const std::vector<Policy> kPolicies{Policy::Offline, Policy::Dp, Policy::Mv, Policy::Greedy};

ChannelDist sim_channel() { return normalize_gains(quantize_gamma_channel(1, 1, 5, 5), FrameConfig{}); }

struct Curve {
  std::vector<double> x;
  std::vector<std::vector<MonteCarloResult>> res;  // [point][policy]
};

Curve sweep(Strategy st, const std::vector<double>& xs, const std::function<BatteryParams(double)>& bat_of,
            std::size_t trials) {
  Curve c;
  c.x = xs;
  const auto d = sim_channel();
  for (double x : xs) {
    auto P = dp_solve(frame(0.01), bat_of(x), d, kSupport, 50, GridOptions{}, st);
    c.res.push_back(monte_carlo(kPolicies, P, trials, 1, 0));
  }
  return c;
}

std::string curve_table(const Curve& c, const char* var) {
  std::string s;
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    s += fmt("%s=%-6g", var, c.x[i]);
    for (std::size_t p = 0; p < kPolicies.size(); ++p)
      s += fmt(" %s %.4f(%.4f)", policy_name(kPolicies[p]), c.res[i][p].mean, c.res[i][p].stderr_);
    s += i + 1 < c.x.size() ? "\n    " : "";
  }
  return s;
}

double tol2(const MonteCarloResult& a, const MonteCarloResult& b) {
  return 2 * std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
}

bool criterion7(std::vector<std::string>& notes) {
  const std::vector<double> rs{0, 1, 2, 5, 10, 20};
  bool mono = true, flat = true, conv = true;
  for (auto st : {Strategy::Lsc, Strategy::Ltm}) {
    const char* sn = st == Strategy::Lsc ? "lsc" : "ltm";
    auto c = sweep(st, rs, [](double r) { return battery(r); }, 10000);
    notes.push_back(fmt("%s (per-frame nat/Hz, stderr):\n    %s", sn, curve_table(c, "r").c_str()));
    for (std::size_t p = 0; p < 3; ++p)
      for (std::size_t i = 0; i + 1 < rs.size(); ++i)
        if (c.res[i + 1][p].mean > c.res[i][p].mean + tol2(c.res[i][p], c.res[i + 1][p])) {
          mono = false;
          notes.push_back(fmt("%s %s increases from r=%g to r=%g", sn, policy_name(kPolicies[p]), rs[i], rs[i + 1]));
        }
    for (std::size_t i = 1; i < rs.size(); ++i)
      if (std::fabs(c.res[i][3].mean - c.res[0][3].mean) > 1e-9 * c.res[0][3].mean) flat = false;
    const auto& last = c.res.back();
    for (std::size_t p = 0; p < 3; ++p) {
      const double gap = last[p].mean - last[3].mean;
      if (std::fabs(gap) > tol2(last[p], last[3])) {
        conv = false;
        notes.push_back(fmt("%s %s at r=20 sits %.4f above greedy (2 stderr = %.4f)", sn, policy_name(kPolicies[p]),
                            gap, tol2(last[p], last[3])));
      }
    }
  }
  notes.push_back(fmt("non-increasing in r: %s; greedy flat: %s; converged to greedy at r=20: %s",
                      mono ? "yes" : "no", flat ? "yes" : "no", conv ? "yes" : "no"));
  if (!conv)
    notes.push_back(
        "analysis: under the quadratic loss model at r=20 the discharge peak still delivers "
        "1/(4a) = 28 mW, above P_C = 10 mW, and a third of the frames harvest nothing; storing "
        "energy for those frames keeps paying, so the stored-energy policies stay above greedy. "
        "The gap shrinks with r (see the table) but has not closed by 20 ohm.");
  return mono && flat && conv;
}

bool criterion8(std::vector<std::string>& notes) {
  const std::vector<double> bm{0, 0.005, 0.01, 0.03, 0.1};
  bool mono = true, plateau = true, flat = true;
  for (auto st : {Strategy::Lsc, Strategy::Ltm}) {
    const char* sn = st == Strategy::Lsc ? "lsc" : "ltm";
    auto c = sweep(st, bm, [](double b) { return battery(5, b); }, 10000);
    notes.push_back(fmt("%s (per-frame nat/Hz, stderr):\n    %s", sn, curve_table(c, "b_max").c_str()));
    for (std::size_t p = 0; p < 3; ++p) {
      for (std::size_t i = 0; i + 1 < bm.size(); ++i)
        if (c.res[i + 1][p].mean < c.res[i][p].mean - tol2(c.res[i][p], c.res[i + 1][p])) {
          mono = false;
          notes.push_back(fmt("%s %s drops from b_max=%g to %g", sn, policy_name(kPolicies[p]), bm[i], bm[i + 1]));
        }
      const auto& a = c.res[bm.size() - 2][p];
      const auto& b = c.res[bm.size() - 1][p];
      if (std::fabs(b.mean - a.mean) > tol2(a, b)) {
        plateau = false;
        notes.push_back(fmt("%s %s: 30 mJ -> 100 mJ changes by %.4f (2 stderr = %.4f)", sn, policy_name(kPolicies[p]),
                            b.mean - a.mean, tol2(a, b)));
      }
    }
    for (std::size_t i = 1; i < bm.size(); ++i)
      if (std::fabs(c.res[i][3].mean - c.res[0][3].mean) > 1e-9 * c.res[0][3].mean) flat = false;
  }
  notes.push_back(fmt("non-decreasing in b_max: %s; plateau: %s; greedy flat: %s", mono ? "yes" : "no",
                      plateau ? "yes" : "no", flat ? "yes" : "no"));
  if (!plateau)
    notes.push_back(
        "analysis: with 1 s frames one 100 mW frame leaves up to 50 mJ above the mean, and runs of "
        "empty frames need several of those carried forward, so 30 mJ and 100 mJ are both on the "
        "rising part. A probe with the CLI (lsc, 2000 trials) puts the plateau between 0.2 J and "
        "0.4 J: offline 3.563, 3.566, 3.565 and dp 3.509, 3.520, 3.520 M nat/s at 0.2, 0.4, 0.8 J.");
  return mono && plateau && flat;
}

// ---------------------------------------------------------------- 9
bool criterion9(std::vector<std::string>& notes) {
  ExperimentConfig c;
  c.channel = ChannelSpec{1, 1, 5, 5, {}, {}};
  c.battery = battery(5, 0.03, 0.03);
  c.frame = frame(0.01);
  c.harvest = HarvestSupport{{0.01}, {1.0}};
  c.K = 1;
  c.trials = 1;
  c.strategies = {Strategy::Ltm, Strategy::Lsc};
  c.modes = {"offline", kCsitMode};
  c.has_sweep = true;
  c.sweep_var = "shape";
  c.sweep_values = {0.5, 1, 2, 4, 8};
  auto rows = run_experiment(c);
  bool ok = true;
  for (const char* st : {"ltm", "lsc"}) {
    std::vector<double> gap;
    std::string line = fmt("%s gap (nat/s):", st);
    for (std::size_t i = 0; i < rows.size(); i += 2) {
      if (rows[i].strategy != st) continue;
      gap.push_back(rows[i + 1].avg_rate_nats - rows[i].avg_rate_nats);
      line += fmt(" x=%s %.6g", rows[i].sweep_value.c_str(), gap.back());
    }
    notes.push_back(line);
    for (std::size_t i = 0; i + 1 < gap.size(); ++i)
      if (gap[i + 1] > gap[i] + 1e-9 * std::fabs(gap[i])) {
        ok = false;
        notes.push_back(fmt("%s gap rises between x=%g and x=%g", st, c.sweep_values[i], c.sweep_values[i + 1]));
      }
  }
  if (!ok)
    notes.push_back(
        "analysis: with h_i = iT/N the lowest level is 1 for every x, and on this instance only that "
        "level is active, so the no-CSIT rate G(h_1 P) does not move with x. The gap is then the "
        "CSIT rate minus a constant, and the CSIT rate depends on how much mass sits above h_1; at "
        "x=0.5 the heavy left tail puts more of it into the lowest bin than at x=1.");
  return ok;
}

// ---------------------------------------------------------------- 10
bool criterion10(std::vector<std::string>& notes) {
  const auto d = sim_channel();
  const auto f = frame(0.01);
  std::mt19937_64 rng(1010);
  bool within = true, order = true;
  double worst_gap = 0, max_bound = 0;
  std::size_t profiles = 0;
  for (auto st : {Strategy::Lsc, Strategy::Ltm}) {
    const char* sn = st == Strategy::Lsc ? "lsc" : "ltm";
    for (double r : {0.0, 5.0}) {
      const auto bat = battery(r, 0.03);
      auto rewards = std::make_shared<RewardTable>(build_reward_table(st, f, bat, d, kSupport, GridOptions{}));
      for (std::size_t K = 1; K <= 5; ++K) {
        auto P = dp_solve(rewards, kSupport, K);
        for (int rep = 0; rep < 4; ++rep) {
          std::vector<std::size_t> idx(K);
          std::vector<double> u(K);
          for (std::size_t k = 0; k < K; ++k) u[k] = kSupport.values[idx[k] = rng() % 3];
          const double dp = simulate_on_grid(Policy::Offline, idx, P, 0) * double(K);
          const HarvestProfile prof{u};
          double off;
          if (st == Strategy::Lsc) {
            auto a = solve_lsc_multiframe_convex(prof, f, bat, d);
            g_feas.add(a, prof, f, bat, d, "suite10 lsc");
            off = a.objective;
          } else {
            auto a = solve_ltm_multiframe_convex(prof, f, bat, d);
            g_feas.add(a, prof, f, bat, d, "suite10 ltm");
            off = a.objective;
          }
          ++profiles;
          worst_gap = std::max(worst_gap, off - dp);
          max_bound = std::max(max_bound, P.grid_bound);
          if (dp > off + 1e-7 || dp < off - P.grid_bound - 1e-9) {
            within = false;
            notes.push_back(fmt("%s r=%g K=%zu: dp %.9g offline %.9g bound %.3g", sn, r, K, dp, off, P.grid_bound));
          }
        }
      }
      // single-support harvest: the stochastic DP value itself
      for (std::size_t iu = 1; iu < 3; ++iu) {
        const HarvestSupport one{{kSupport.values[iu]}, {1.0}};
        auto t1 = std::make_shared<RewardTable>(build_reward_table(st, f, bat, d, one, GridOptions{}));
        auto P = dp_solve(t1, one, 4);
        const double dp = P.value[0][0][0];
        const HarvestProfile prof{std::vector<double>(4, one.values[0])};
        const double off = st == Strategy::Lsc ? solve_lsc_multiframe_convex(prof, f, bat, d).objective
                                               : solve_ltm_multiframe_convex(prof, f, bat, d).objective;
        ++profiles;
        worst_gap = std::max(worst_gap, off - dp);
        if (dp > off + 1e-7 || dp < off - P.grid_bound - 1e-9) {
          within = false;
          notes.push_back(fmt("%s r=%g constant u=%g: dp %.9g offline %.9g bound %.3g", sn, r, one.values[0], dp, off,
                              P.grid_bound));
        }
      }
      // stochastic ordering on 10^4 seeded trials
      auto P = dp_solve(rewards, kSupport, 5);
      std::vector<std::vector<double>> smp;
      auto res = monte_carlo({Policy::Dp, Policy::Mv, Policy::Greedy}, P, 10000, 10, 0, &smp);
      auto paired = [&](int i, int j) {
        double m = 0, s2 = 0;
        const std::size_t n = smp[i].size();
        for (std::size_t t = 0; t < n; ++t) m += smp[i][t] - smp[j][t];
        m /= double(n);
        for (std::size_t t = 0; t < n; ++t) s2 += std::pow(smp[i][t] - smp[j][t] - m, 2);
        return std::pair{m, 2 * std::sqrt(s2 / double(n - 1) / double(n))};
      };
      auto [d1, e1] = paired(0, 1);
      auto [d2, e2] = paired(1, 2);
      notes.push_back(fmt("%s r=%g K=5: dp %.5f mv %.5f greedy %.5f; dp-mv %.5f (eps %.2g), mv-greedy %.5f (eps %.2g)", sn,
                          r, res[0].mean, res[1].mean, res[2].mean, d1, e1, d2, e2));
      if (d1 < -e1 || d2 < -e2) order = false;
    }
  }
  notes.push_back(fmt("%zu deterministic profiles (K<=5): max offline - dp = %.3g nat, largest grid bound %.3g nat",
                      profiles, worst_gap, max_bound));
  return within && order;
}

}  // namespace

int main(int argc, char** argv) {
  bool report_only = false;
  for (int i = 1; i < argc; ++i)
    if (!std::strcmp(argv[i], "--report-only")) report_only = true;
    else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
      // comma list; 5 and 6 pool the outputs of the suites that ran before them
      std::string list = argv[++i];
      for (std::size_t p = 0; p < list.size();) {
        const auto c = list.find(',', p);
        g_only.insert(std::stoi(list.substr(p, c - p)));
        p = c == std::string::npos ? list.size() : c + 1;
      }
    }

  run(1, "single-frame solvers agree with the grid oracle", criterion1);
  run(2, "two layers suffice for ideal LTM", criterion2);
  run(3, "layered water-filling: KKT, container cap, active-set chain", criterion3);
  run(4, "ideal multi-frame LSC powers form a staircase", criterion4);
  two_frame_suite();
  run(5, "no simultaneous charge and discharge; all slacks >= -1e-9", [](std::vector<std::string>& notes) {
    notes.push_back(fmt("%zu solver outputs checked; worst slack %.3g; worst charge*discharge %.3g; violations %zu",
                        g_feas.checked, g_feas.worst_slack, g_feas.worst_comp, g_feas.failed));
    if (g_feas.failed) notes.push_back("first: " + g_feas.first);
    return g_feas.failed == 0;
  });
  run(6, "LSC rate >= LTM rate", [](std::vector<std::string>& notes) {
    std::size_t bad = 0, strict = 0;
    double worst = kInf;
    for (const auto& p : g_dominance) {
      worst = std::min(worst, p.lsc - p.ltm);
      strict += p.lsc > p.ltm * (1 + 1e-9);
      if (p.lsc < p.ltm - 1e-9) {
        if (!bad) notes.push_back("first violation: " + p.where);
        ++bad;
      }
    }
    notes.push_back(fmt("%zu instances from suites 1-2; min(LSC - LTM) = %.3g; LSC strictly better on %zu",
                        g_dominance.size(), worst, strict));
    return bad == 0;
  });
  run(7, "rates fall with internal resistance and approach greedy", criterion7);
  run(8, "rates rise with battery capacity and plateau", criterion8);
  run(9, "CSIT gap shrinks with the Gamma shape", criterion9);
  run(10, "dynamic program against the offline optimum and the online policies", criterion10);

  int failed = 0;
  std::printf("\nsummary\n");
  for (const auto& v : g_verdicts) {
    std::printf("criterion %d: %s\n", v.id, v.pass ? "PASS" : "FAIL");
    failed += !v.pass;
  }
  return report_only ? 0 : failed;
}
