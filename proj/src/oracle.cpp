#include "ehlc/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <sstream>

namespace ehlc {

void GridSpec::validate() const {
  if (points < 2) throw Error(Errc::InvalidArgument, "grid needs at least 2 points per variable");
  if (budget == 0) throw Error(Errc::InvalidArgument, "grid budget must be positive");
}

std::string FeasibilityReport::first_violation(double tol) const {
  for (const Slack& s : slacks)
    if (s.value < -tol) {
      std::ostringstream os;
      os << s.name << " at frame " << s.frame << ": " << s.value;
      return os.str();
    }
  if (max_complementarity >= tol) return "simultaneous charge and discharge";
  return {};
}

namespace {

// Battery/harvest physics written out directly from the loss model so the
// oracle does not share code paths with the solvers it checks.
struct OPhys {
  double u, pc, tau, B, a, vpk, c;

  OPhys(double u_, const FrameConfig& frame, const BatteryParams& bat)
      : u(u_), pc(frame.p_c), tau(frame.tau), B(bat.b_max) {
    a = bat.r / (bat.v_b * bat.v_b);
    vpk = a > 0 ? 0.5 / a : kInf;
    const double v = std::min(u, vpk);
    c = v - a * v * v;
  }
  double quad(double v) const { return v - a * v * v; }
  double quad_inv(double y) const {
    if (a == 0) return y;
    const double disc = 1.0 - 4.0 * a * y;
    if (disc < 0) return kInf;
    return 2.0 * y / (1.0 + std::sqrt(disc));
  }
  // Largest transmit power over a segment of length l when the battery may
  // lose at most `avail` joules during it (negative: must gain -avail).
  double pmax(double l, double avail) const {
    const double x = avail / l;
    if (x >= 0) return u - pc + quad(std::min(x, vpk));
    const double need = -x;
    if (need > c) return -kInf;
    return u - pc - quad_inv(need);
  }
  // Net battery drain rate when transmitting at P. Harvest that neither
  // feeds the transmitter nor the battery is simply not drawn.
  double drain(double P) const {
    const double direct = u - pc;
    if (P >= direct) return quad_inv(P - direct);
    return -quad(std::min(direct - P, vpk));
  }
  // direct-path share and battery draw that realise power P on length l
  void realise(double l, double P, double& beta, double& e) const {
    const double x = drain(P);
    if (x >= 0) {
      beta = l;
      e = x * l;
      return;
    }
    const double v = std::min(u - pc - P, vpk);
    beta = u > 0 ? l * std::clamp(1.0 - v / u, 0.0, 1.0) : l;
    e = 0;
  }
};

double max_qh(const ChannelDist& d) {
  double m = 0;
  for (std::size_t i = 0; i < d.n(); ++i) m = std::max(m, d.q[i] * d.h[i]);
  return m;
}

double sum_qh(const ChannelDist& d) {
  double m = 0;
  for (std::size_t i = 0; i < d.n(); ++i) m += d.q[i] * d.h[i];
  return m;
}

// Compass search on the unit box with axis and pairwise directions.
std::vector<double> pattern_search(const std::function<double(const std::vector<double>&)>& f,
                                   std::vector<double> v, double step, std::size_t& evals) {
  const std::size_t d = v.size();
  std::vector<std::vector<double>> dirs;
  for (std::size_t a = 0; a < d; ++a) {
    std::vector<double> e(d, 0.0);
    e[a] = 1;
    dirs.push_back(e);
    e[a] = -1;
    dirs.push_back(e);
    for (std::size_t b = a + 1; b < d; ++b) {
      for (double sa : {1.0, -1.0})
        for (double sb : {1.0, -1.0}) {
          std::vector<double> g(d, 0.0);
          g[a] = sa;
          g[b] = sb;
          dirs.push_back(g);
        }
    }
  }
  double best = f(v);
  ++evals;
  for (int it = 0; it < 200000 && step > 1e-14; ++it) {
    bool moved = false;
    for (const auto& dir : dirs) {
      std::vector<double> w(v);
      bool inside = true;
      for (std::size_t a = 0; a < d; ++a) {
        w[a] += step * dir[a];
        if (w[a] < 0 || w[a] > 1) inside = false;
      }
      if (!inside) continue;
      const double fw = f(w);
      ++evals;
      if (fw > best) {
        best = fw;
        v = w;
        moved = true;
        break;
      }
    }
    if (!moved) step *= 0.5;
  }
  return v;
}

// ---- LTM single frame: ordered layer pair (i before j) or a single layer j.

struct LtmEval {
  const OPhys& ph;
  const ChannelDist& dist;
  double b0, rho, tol;

  // v = (l_i/tau, l_j/tau, t); P_i = t * pmax_i, layer j takes what is left.
  double operator()(int i, int j, const std::vector<double>& v, double* out = nullptr) const {
    const double li = i < 0 ? 0.0 : v[0] * ph.tau;
    const double lj = v[1] * ph.tau;
    const double idle = ph.tau - li - lj;
    if (idle < -1e-15 * ph.tau) return -kInf;
    double lev = std::min(ph.B, b0 + ph.c * std::max(0.0, idle));
    double val = 0, Pi = 0, Pj = 0;
    if (li > 0) {
      const double pm = ph.pmax(li, lev);
      if (!(pm >= 0)) return -kInf;
      Pi = std::max(v[2] * pm, ph.u - ph.pc - ph.vpk);
      Pi = std::max(Pi, 0.0);
      const double x = ph.drain(Pi);
      if (!std::isfinite(x)) return -kInf;
      lev = std::min(ph.B, lev - x * li);
      if (lev < -tol) return -kInf;
      val += dist.q[i] * li * std::log1p(dist.h[i] * Pi);
    }
    if (lj > 0) {
      const double pm = ph.pmax(lj, lev - rho);
      if (!(pm >= 0)) return -kInf;
      Pj = pm;
      val += dist.q[j] * lj * std::log1p(dist.h[j] * Pj);
    } else if (lev < rho - tol) {
      return -kInf;
    }
    if (out) {
      out[0] = li;
      out[1] = Pi;
      out[2] = lj;
      out[3] = Pj;
    }
    return val;
  }
};

OracleResult ltm_single(double b0, double u, const FrameConfig& frame, const BatteryParams& bat,
                        const ChannelDist& dist, const GridSpec& grid, double rho) {
  const OPhys ph(u, frame, bat);
  const std::size_t N = dist.n(), n = grid.points;
  const std::size_t per_pair = n * (n + 1) / 2 * n;
  const std::size_t est = (N * (N - 1) / 2) * per_pair + N * n;
  if (est > grid.budget)
    throw Error(Errc::BudgetExceeded, "LTM oracle needs " + std::to_string(est) + " evaluations");
  LtmEval ev{ph, dist, b0, rho, grid.feas_tol};
  OracleResult res;
  double best = -kInf;
  int bi = -1, bj = 0;
  std::vector<double> bv{0, 0, 0};
  const double h = 1.0 / double(n - 1);
  // idle-only schedule
  {
    const double lev = std::min(ph.B, b0 + ph.c * ph.tau);
    if (lev >= rho - grid.feas_tol) best = 0;
    ++res.evaluations;
  }
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t a = 1; a < n; ++a) {
      std::vector<double> v{0, a * h, 1};
      const double f = ev(-1, int(j), v);
      ++res.evaluations;
      if (f > best) best = f, bi = -1, bj = int(j), bv = v;
    }
    for (std::size_t i = 0; i < j; ++i) {
      for (std::size_t a = 1; a < n; ++a)
        for (std::size_t b = 0; a + b < n; ++b)
          for (std::size_t t = 0; t < n; ++t) {
            std::vector<double> v{a * h, b * h, t * h};
            const double f = ev(int(i), int(j), v);
            ++res.evaluations;
            if (f > best) best = f, bi = int(i), bj = int(j), bv = v;
          }
    }
  }
  res.grid_objective = best;
  // rounding argument: shorten both segments and lower P_i to grid points
  const double etot = b0 + ph.c * ph.tau;
  double lbound = 0;
  for (std::size_t i = 0; i < N; ++i)
    lbound = std::max(lbound, dist.q[i] * std::log1p(dist.h[i] * (std::max(u, 0.0) + etot / (h * ph.tau))));
  res.grid_bound = 2 * h * ph.tau * lbound + h * max_qh(dist) * (u * ph.tau + etot);
  if (grid.polish && std::isfinite(best) && (bi >= 0 || bv[1] > 0)) {
    auto f = [&](const std::vector<double>& v) { return ev(bi, bj, v); };
    bv = pattern_search(f, bv, h, res.evaluations);
    best = std::max(best, ev(bi, bj, bv));
  }
  res.objective = best;
  res.ltm = LtmAllocation::zeros(1, N);
  if (!std::isfinite(best)) {
    res.ltm.status = Errc::NoFeasibleTransmission;
    res.ltm.objective = -kInf;
    return res;
  }
  if (best > 0) {
    double seg[4] = {0, 0, 0, 0};
    ev(bi, bj, bv, seg);
    auto put = [&](int layer, double l, double P) {
      if (layer < 0 || l <= 0) return;
      double beta, e;
      ph.realise(l, P, beta, e);
      res.ltm.l[layer][0] = l;
      res.ltm.p[layer][0] = P;
      res.ltm.beta[layer][0] = beta;
      res.ltm.e[layer][0] = e;
      res.ltm.phi[0] += l;
    };
    put(bi, seg[0], seg[1]);
    put(bj, seg[2], seg[3]);
  } else {
    res.ltm.status = Errc::NoFeasibleTransmission;
  }
  res.ltm.objective = best;
  return res;
}

// ---- LSC single frame: transmit duration plus nested fractions of the power.

std::vector<double> split_powers(double P, const std::vector<double>& t, std::size_t N) {
  // t[0] is the duration coordinate; t[1..] peel power off the top layers
  std::vector<double> pw(N, 0.0);
  double rest = P;
  for (std::size_t m = N; m-- > 1;) {
    pw[m] = t[N - m] * rest;
    rest -= pw[m];
  }
  pw[0] = rest;
  return pw;
}

double lsc_value(const std::vector<double>& pw, double phi, const ChannelDist& dist) {
  double v = 0, above = 0;
  for (std::size_t i = pw.size(); i-- > 0;) {
    v += dist.q[i] * std::log1p(dist.h[i] * pw[i] / (1.0 + dist.h[i] * above));
    above += pw[i];
  }
  return phi * v;
}

struct LscEval {
  const OPhys& ph;
  const ChannelDist& dist;
  double b0, rho, tol;

  double operator()(const std::vector<double>& v, double* Ptot = nullptr) const {
    const double phi = v[0] * ph.tau;
    const double lev = std::min(ph.B, b0 + ph.c * (ph.tau - phi));
    if (phi <= 0) {
      if (Ptot) *Ptot = 0;
      return lev >= rho - tol ? 0.0 : -kInf;
    }
    const double P = ph.pmax(phi, lev - rho);
    if (!(P >= 0)) return -kInf;
    if (Ptot) *Ptot = P;
    return lsc_value(split_powers(P, v, dist.n()), phi, dist);
  }
};

OracleResult lsc_single(double b0, double u, const FrameConfig& frame, const BatteryParams& bat,
                        const ChannelDist& dist, const GridSpec& grid, double rho) {
  const OPhys ph(u, frame, bat);
  const std::size_t N = dist.n(), n = grid.points;
  double est = 1;
  for (std::size_t d = 0; d < N; ++d) est *= double(n);
  if (est > double(grid.budget))
    throw Error(Errc::BudgetExceeded, "LSC oracle needs " + std::to_string(est) + " evaluations");
  LscEval ev{ph, dist, b0, rho, grid.feas_tol};
  OracleResult res;
  const double h = 1.0 / double(n - 1);
  std::vector<std::size_t> idx(N, 0);
  std::vector<double> v(N, 0.0), bv(N, 0.0);
  double best = -kInf;
  while (true) {
    for (std::size_t d = 0; d < N; ++d) v[d] = idx[d] * h;
    const double f = ev(v);
    ++res.evaluations;
    if (f > best) best = f, bv = v;
    std::size_t d = 0;
    while (d < N && ++idx[d] == n) idx[d++] = 0;
    if (d == N) break;
  }
  res.grid_objective = best;
  const double etot = b0 + ph.c * ph.tau;
  const double ptime = u * ph.tau + etot;  // bounds phi * P
  double wtop = 0;
  for (std::size_t i = 0; i < N; ++i)
    wtop += dist.q[i] * std::log1p(dist.h[i] * (u + etot / (h * ph.tau)));
  res.grid_bound = h * ph.tau * wtop + 4.0 * double(N - 1) * h * sum_qh(dist) * ptime;
  if (grid.polish && std::isfinite(best) && bv[0] > 0) {
    auto f = [&](const std::vector<double>& w) { return ev(w); };
    bv = pattern_search(f, bv, h, res.evaluations);
    best = std::max(best, ev(bv));
  }
  res.objective = best;
  res.lsc = LscAllocation::zeros(1, N);
  if (!std::isfinite(best)) {
    res.lsc.status = Errc::NoFeasibleTransmission;
    res.lsc.objective = -kInf;
    return res;
  }
  double P = 0;
  ev(bv, &P);
  const double phi = bv[0] * ph.tau;
  if (phi > 0 && best > 0) {
    res.lsc.phi[0] = phi;
    res.lsc.powers[0] = split_powers(P, bv, N);
    double above = 0;
    for (std::size_t i = N; i-- > 0;) {
      const double pi = res.lsc.powers[0][i];
      res.lsc.rates[0][i] = phi * std::log1p(dist.h[i] * pi / (1.0 + dist.h[i] * above));
      above += pi;
    }
    ph.realise(phi, P, res.lsc.beta[0], res.lsc.e[0]);
  } else {
    res.lsc.status = Errc::NoFeasibleTransmission;
  }
  res.lsc.objective = best;
  return res;
}

}  // namespace

OracleResult grid_search_single_frame(Strategy st, double b0, double u, const FrameConfig& frame,
                                      const BatteryParams& bat, const ChannelDist& dist,
                                      const GridSpec& grid, double rho) {
  grid.validate();
  if (st == Strategy::Ltm) return ltm_single(b0, u, frame, bat, dist, grid, rho);
  return lsc_single(b0, u, frame, bat, dist, grid, rho);
}

OracleResult grid_search_two_frame(Strategy st, const HarvestProfile& profile,
                                   const FrameConfig& frame, const BatteryParams& bat,
                                   const ChannelDist& dist, const GridSpec& grid) {
  grid.validate();
  if (profile.k() != 2) throw Error(Errc::InvalidArgument, "two-frame oracle needs K = 2");
  const OPhys ph1(profile.u[0], frame, bat);
  const double hi = std::max(0.0, std::min(bat.b_max, bat.b_0 + ph1.c * frame.tau));
  const std::size_t nc = hi > 0 ? grid.points : 1;
  GridSpec inner = grid;
  inner.polish = false;
  inner.budget = std::max<std::size_t>(1, grid.budget / (2 * nc));
  OracleResult res;
  double best = -kInf, best_b1 = 0, bound_inner = 0;
  for (std::size_t a = 0; a < nc; ++a) {
    const double b1 = nc == 1 ? 0.0 : hi * double(a) / double(nc - 1);
    const OracleResult f1 =
        grid_search_single_frame(st, bat.b_0, profile.u[0], frame, bat, dist, inner, b1);
    const OracleResult f2 = grid_search_single_frame(st, b1, profile.u[1], frame, bat, dist, inner);
    res.evaluations += f1.evaluations + f2.evaluations;
    bound_inner = std::max(bound_inner, f1.grid_bound + f2.grid_bound);
    const double v = f1.grid_objective + f2.grid_objective;
    if (v > best) best = v, best_b1 = b1;
  }
  res.grid_objective = best;
  const double db = nc > 1 ? hi / double(nc - 1) : 0.0;
  res.grid_bound = bound_inner + db * std::max(max_qh(dist), sum_qh(dist));
  OracleResult f1 = grid_search_single_frame(st, bat.b_0, profile.u[0], frame, bat, dist, grid, best_b1);
  OracleResult f2 = grid_search_single_frame(st, best_b1, profile.u[1], frame, bat, dist, grid);
  res.evaluations += f1.evaluations + f2.evaluations;
  res.objective = std::max(best, f1.objective + f2.objective);
  const std::size_t N = dist.n();
  if (st == Strategy::Ltm) {
    res.ltm = LtmAllocation::zeros(2, N);
    for (std::size_t i = 0; i < N; ++i) {
      res.ltm.l[i] = {f1.ltm.l[i][0], f2.ltm.l[i][0]};
      res.ltm.beta[i] = {f1.ltm.beta[i][0], f2.ltm.beta[i][0]};
      res.ltm.e[i] = {f1.ltm.e[i][0], f2.ltm.e[i][0]};
      res.ltm.p[i] = {f1.ltm.p[i][0], f2.ltm.p[i][0]};
    }
    res.ltm.phi = {f1.ltm.phi[0], f2.ltm.phi[0]};
    res.ltm.objective = f1.objective + f2.objective;
  } else {
    res.lsc = LscAllocation::zeros(2, N);
    res.lsc.powers = {f1.lsc.powers[0], f2.lsc.powers[0]};
    res.lsc.rates = {f1.lsc.rates[0], f2.lsc.rates[0]};
    res.lsc.beta = {f1.lsc.beta[0], f2.lsc.beta[0]};
    res.lsc.e = {f1.lsc.e[0], f2.lsc.e[0]};
    res.lsc.phi = {f1.lsc.phi[0], f2.lsc.phi[0]};
    res.lsc.objective = f1.objective + f2.objective;
  }
  // the polished allocation is what gets returned; keep objective consistent
  res.objective = f1.objective + f2.objective;
  if (best > res.objective) res.objective = best;
  return res;
}

// ---- residual checks

KktReport kkt_residuals_lsc(const LscAllocation& al, const HarvestProfile& profile,
                            const ChannelDist& dist, const FrameConfig& frame,
                            const BatteryParams& bat) {
  KktReport rep;
  const std::size_t N = dist.n();
  const double a = bat.r / (bat.v_b * bat.v_b);
  const double tau = frame.tau;
  auto fc = [&](double v) { return v - a * v * v; };
  auto fcp = [&](double v) { return 1.0 - 2.0 * a * v; };
  for (std::size_t k = 0; k < al.frames; ++k) {
    const double phi = al.phi[k];
    if (phi <= 0) continue;
    const double U = profile.u[k];
    const double beta = al.beta[k], e = al.e[k], d = e / phi;
    const double V = std::max(0.0, (1.0 - beta / phi) * U);
    const double Va = std::min(U, a > 0 ? 0.5 / a : kInf);
    // cumulative normalised rates C_i and the sums S_i = sum_{l>=i} (s_l - s_{l+1}) e^{C_l}
    std::vector<double> C(N), S(N + 1, 0.0);
    double acc = 0;
    for (std::size_t i = 0; i < N; ++i) C[i] = (acc += al.rates[k][i] / phi);
    for (std::size_t i = N; i-- > 0;)
      S[i] = S[i + 1] + (dist.s[i] - dist.s[i + 1]) * std::exp(C[i]);
    double ptot = 0;
    for (double p : al.powers[k]) ptot += p;
    // unknowns: lambda, Psi, then bound multipliers that complementarity allows
    std::vector<std::array<double, 3>> extra;  // (row, sign, unused)
    const std::size_t rows = N + 3;
    const double ztol = 1e-12;
    for (std::size_t i = 0; i < N; ++i)
      if (al.rates[k][i] <= ztol) extra.push_back({double(i), -1.0, 0});
    if (e <= ztol) extra.push_back({double(N), -1.0, 0});
    if (phi >= tau * (1 - 1e-12)) extra.push_back({double(N + 1), 1.0, 0});
    if (beta <= ztol) extra.push_back({double(N + 2), -1.0, 0});
    if (beta >= phi * (1 - 1e-12)) {
      extra.push_back({double(N + 2), 1.0, 0});
      extra.push_back({double(N + 1), -1.0, 0});  // -omega_beta in the phi row
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, 2 + extra.size());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
    for (std::size_t i = 0; i < N; ++i) {
      A(i, 0) = S[i];
      b[i] = dist.q[i];
    }
    const double fdp = 1.0 - 2.0 * a * d;
    A(N, 0) = -fdp;
    A(N, 1) = 1.0;
    double lam_phi = 0;
    for (std::size_t i = 0; i < N; ++i) lam_phi += (dist.s[i] - dist.s[i + 1]) * std::exp(C[i]) * (1.0 - C[i]);
    lam_phi += -dist.s[0] + frame.p_c + d * fdp - (d - a * d * d);
    A(N + 1, 0) = lam_phi;
    A(N + 1, 1) = (phi > 0 ? -beta * U * fcp(V) / phi : 0.0) - fc(V) + fc(Va);
    A(N + 2, 0) = -U;
    A(N + 2, 1) = U * fcp(V);
    // the beta row pairs with (omega_beta - nu_beta); the phi row carries
    // -omega_beta, so the same multiplier appears in both when beta = phi
    for (std::size_t c = 0; c < extra.size(); ++c) A(std::size_t(extra[c][0]), 2 + c) = extra[c][1];
    if (beta >= phi * (1 - 1e-12)) {
      // merge the two omega_beta columns into one
      const std::size_t cb = extra.size() - 2, cp = extra.size() - 1;
      A.col(2 + cb) += A.col(2 + cp);
      A.col(2 + cp).setZero();
    }
    (void)ptot;
    const Eigen::VectorXd mu = A.completeOrthogonalDecomposition().solve(b);
    const Eigen::VectorXd res = A * mu - b;
    for (Eigen::Index r = 0; r < res.size(); ++r) {
      rep.residuals.push_back(res[r]);
      rep.max_abs = std::max(rep.max_abs, std::fabs(res[r]));
    }
    rep.multipliers.push_back(mu[0]);
    rep.multipliers.push_back(mu[1]);
  }
  return rep;
}

namespace {

struct Sim {
  FeasibilityReport rep;
  double level;
  const BatteryParams& bat;
  void slack(const char* name, std::size_t k, double v) {
    rep.slacks.push_back({name, k, v});
    rep.min_slack = std::min(rep.min_slack, v);
  }
  void add(double delta, std::size_t k) {
    level += delta;
    slack("battery_causality", k, level);
    if (level > bat.b_max) {
      rep.discarded += level - bat.b_max;
      level = bat.b_max;
    }
  }
};

// one transmission segment: power balance, boxes, battery flow
void check_segment(Sim& sim, std::size_t k, double l, double beta, double e, double P, double u,
                   const FrameConfig& frame, const BatteryParams& bat) {
  const double a = bat.r / (bat.v_b * bat.v_b);
  const double vpk = a > 0 ? 0.5 / a : kInf;
  sim.slack("beta_nonneg", k, beta);
  sim.slack("beta_le_len", k, l - beta);
  sim.slack("e_nonneg", k, e);
  sim.slack("power_nonneg", k, P);
  if (l <= 0) {
    sim.slack("empty_segment_energy", k, -std::fabs(e));
    return;
  }
  const double d = e / l;
  sim.slack("drain_le_peak", k, std::isfinite(vpk) ? (vpk - d) * l : 1.0);
  const double v = std::max(0.0, (1.0 - beta / l) * u);
  const double delivered = beta / l * u + (d - a * d * d);
  sim.slack("transmit_energy", k, l * (delivered - P - frame.p_c));
  sim.rep.max_complementarity = std::max(sim.rep.max_complementarity, (l - beta) * e);
  sim.add(l * (v - a * v * v) - e, k);
}

void check_idle(Sim& sim, std::size_t k, double phi, double u, const FrameConfig& frame,
                const BatteryParams& bat) {
  sim.slack("phi_nonneg", k, phi);
  sim.slack("phi_le_tau", k, frame.tau - phi);
  sim.add((frame.tau - phi) * charge_rate(idle_charge_rate(u, bat), bat), k);
}

}  // namespace

FeasibilityReport feasibility_check(const LtmAllocation& al, const HarvestProfile& profile,
                                    const FrameConfig& frame, const BatteryParams& bat,
                                    const ChannelDist& dist) {
  Sim sim{{}, bat.b_0, bat};
  sim.slack("capacity", 0, bat.b_max - bat.b_0);
  for (std::size_t k = 0; k < al.frames; ++k) {
    double sum_l = 0;
    for (std::size_t i = 0; i < al.layers; ++i) sum_l += al.l[i][k];
    sim.slack("partitions_le_phi", k, al.phi[k] - sum_l);
    check_idle(sim, k, al.phi[k], profile.u[k], frame, bat);
    for (std::size_t i = 0; i < al.layers; ++i) {
      sim.slack("length_nonneg", k, al.l[i][k]);
      check_segment(sim, k, al.l[i][k], al.beta[i][k], al.e[i][k], al.p[i][k], profile.u[k], frame, bat);
    }
  }
  (void)dist;
  return sim.rep;
}

FeasibilityReport feasibility_check(const LscAllocation& al, const HarvestProfile& profile,
                                    const FrameConfig& frame, const BatteryParams& bat,
                                    const ChannelDist& dist) {
  Sim sim{{}, bat.b_0, bat};
  sim.slack("capacity", 0, bat.b_max - bat.b_0);
  for (std::size_t k = 0; k < al.frames; ++k) {
    double P = 0;
    for (double p : al.powers[k]) {
      sim.slack("layer_power_nonneg", k, p);
      P += p;
    }
    check_idle(sim, k, al.phi[k], profile.u[k], frame, bat);
    check_segment(sim, k, al.phi[k], al.beta[k], al.e[k], P, profile.u[k], frame, bat);
    // rates must be the ones the powers support
    double above = 0, worst = 0;
    for (std::size_t i = al.layers; i-- > 0;) {
      const double pi = al.powers[k][i];
      const double r = al.phi[k] * std::log1p(dist.h[i] * pi / (1.0 + dist.h[i] * above));
      worst = std::max(worst, std::fabs(r - al.rates[k][i]));
      above += pi;
    }
    sim.slack("rate_consistency", k, -worst);
  }
  return sim.rep;
}

}  // namespace ehlc
