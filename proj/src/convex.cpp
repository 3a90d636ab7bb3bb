#include "ehlc/convex.hpp"

#include <Eigen/Dense>
#include <algorithm>

namespace ehlc {

void Segment::eval(const FramePhysics& ph, double x, double& g, double& g1, double& g2) const {
  const double p = std::max(0.0, ph.power(x));
  const double dp = ph.dpower(x), d2p = ph.d2power(x);
  if (kind == LtmLayer) {
    const double den = 1.0 + h * p;
    g = q * std::log1p(h * p);
    g1 = q * h * dp / den;
    g2 = q * h * (d2p * den - h * dp * dp) / (den * den);
  } else {
    const RateCurve rc = lsc_rate_curve(p, *active);
    g = rc.w;
    g1 = rc.w1 * dp;
    g2 = rc.w2 * dp * dp + rc.w1 * d2p;
  }
}

double segment_objective(const SegmentProgram& prog, const std::vector<double>& l,
                         const std::vector<double>& energy) {
  double f = 0;
  for (std::size_t s = 0; s < prog.segments.size(); ++s) {
    if (l[s] <= 0) continue;
    double g, g1, g2;
    const FramePhysics& ph = prog.frames[prog.segments[s].frame];
    const double x = std::clamp(energy[s] / l[s], ph.x_lo, ph.x_hi);
    prog.segments[s].eval(ph, x, g, g1, g2);
    f += l[s] * g;
  }
  return f;
}

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct Rows {
  Mat a;
  Vec b;
};

// Linear constraints a z <= b with z = (l_0, E_0, l_1, E_1, ...).
Rows build_rows(const SegmentProgram& prog, const std::vector<char>& active) {
  const std::size_t S = prog.segments.size();
  const std::size_t n = 2 * S;
  std::vector<Vec> ra;
  std::vector<double> rb;
  auto add = [&](const Vec& coef, double rhs) {
    if (coef.cwiseAbs().maxCoeff() == 0.0) {
      if (rhs < 0) {
        ra.push_back(coef);
        rb.push_back(rhs);
      }
      return;
    }
    ra.push_back(coef);
    rb.push_back(rhs);
  };
  // cumulative net consumption after each event, as an affine form
  struct Event {
    Vec coef;
    double c;
    bool is_seg;
  };
  std::vector<Event> ev;
  Vec cur = Vec::Zero(n);
  double cc = 0;
  std::size_t s = 0;
  const std::size_t K = prog.frames.size();
  for (std::size_t k = 0; k < K; ++k) {
    const FramePhysics& ph = prog.frames[k];
    std::size_t s_end = s;
    while (s_end < S && prog.segments[s_end].frame == k) ++s_end;
    cc -= ph.c * ph.tau;
    for (std::size_t j = s; j < s_end; ++j)
      if (active[j]) cur[2 * j] += ph.c;
    ev.push_back({cur, cc, false});
    Vec trow = Vec::Zero(n);
    for (std::size_t j = s; j < s_end; ++j) {
      if (!active[j]) continue;
      cur[2 * j + 1] += 1.0;
      ev.push_back({cur, cc, true});
      trow[2 * j] = 1.0;
    }
    add(trow, ph.tau);
    s = s_end;
  }
  const double bmax = prog.frames.empty() ? kInf : prog.frames[0].bmax;
  for (std::size_t t = 0; t < ev.size(); ++t) {
    const bool last = t + 1 == ev.size();
    if (!ev[t].is_seg && !last) continue;
    const double req = last ? prog.reserve : 0.0;
    add(ev[t].coef, prog.b0 - req - ev[t].c);
    if (std::isfinite(bmax)) {
      for (std::size_t p = 0; p < t; ++p) {
        add(ev[t].coef - ev[p].coef, bmax - req - (ev[t].c - ev[p].c));
      }
      if (last && !ev[t].is_seg) add(Vec::Zero(n), bmax - req);
    }
  }
  for (std::size_t j = 0; j < S; ++j) {
    const FramePhysics& ph = prog.frames[prog.segments[j].frame];
    if (!active[j]) {
      // pin to zero: l <= 0 and E <= 0, E >= 0 handled by elimination below
      continue;
    }
    Vec r = Vec::Zero(n);
    r[2 * j] = -1.0;
    add(r, 0.0);
    r.setZero();
    r[2 * j] = ph.x_lo;
    r[2 * j + 1] = -1.0;
    add(r, 0.0);
    if (std::isfinite(ph.x_hi)) {
      r.setZero();
      r[2 * j + 1] = 1.0;
      r[2 * j] = -ph.x_hi;
      add(r, 0.0);
    }
  }
  Rows out;
  out.a.resize(ra.size(), n);
  out.b.resize(ra.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    out.a.row(i) = ra[i].transpose();
    out.b[i] = rb[i];
  }
  return out;
}

struct Barrier {
  const SegmentProgram& prog;
  const std::vector<char>& active;
  const Rows& rows;
  std::vector<std::size_t> var;  // active segment ids

  double f(const Vec& z) const {
    double tot = 0;
    for (std::size_t j : var) {
      const double l = z[2 * j], e = z[2 * j + 1];
      const FramePhysics& ph = prog.frames[prog.segments[j].frame];
      double g, g1, g2;
      prog.segments[j].eval(ph, std::clamp(e / l, ph.x_lo, ph.x_hi), g, g1, g2);
      tot += l * g;
    }
    return tot;
  }

  void derivs(const Vec& z, double& fz, Vec& grad, Mat& hess) const {
    fz = 0;
    grad.setZero();
    hess.setZero();
    for (std::size_t j : var) {
      const double l = z[2 * j], e = z[2 * j + 1];
      const FramePhysics& ph = prog.frames[prog.segments[j].frame];
      const double x = std::clamp(e / l, ph.x_lo, ph.x_hi);
      double g, g1, g2;
      prog.segments[j].eval(ph, x, g, g1, g2);
      fz += l * g;
      grad[2 * j] = g - x * g1;
      grad[2 * j + 1] = g1;
      const double k = g2 / l;
      hess(2 * j, 2 * j) = k * x * x;
      hess(2 * j, 2 * j + 1) = hess(2 * j + 1, 2 * j) = -k * x;
      hess(2 * j + 1, 2 * j + 1) = k;
    }
  }
};

}  // namespace

SegmentSolution solve_segment_program(const SegmentProgram& prog, double gap_tol) {
  const std::size_t S = prog.segments.size();
  const std::size_t n = 2 * S;
  SegmentSolution sol;
  sol.l.assign(S, 0.0);
  sol.energy.assign(S, 0.0);
  std::vector<char> active(S, 0);
  for (std::size_t j = 0; j < S; ++j) {
    const FramePhysics& ph = prog.frames[prog.segments[j].frame];
    active[j] = ph.can_tx && ph.x_lo < ph.x_hi;
  }
  Rows rows = build_rows(prog, active);
  const std::size_t m = rows.b.size();
  // a start with tiny, conservative segments is strictly feasible whenever
  // the feasible set has an interior; otherwise relax the rows slightly
  Vec z = Vec::Zero(n);
  bool have_start = false;
  std::size_t nact = 0;
  for (char c : active) nact += c;
  double scale = 1e-3;
  for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, std::fabs(rows.b[i]));
  for (double relax : {0.0, 1e-13, 1e-11, 1e-9}) {
    Vec b = rows.b.array() + relax * scale;
    for (double eta : {0.5, 0.1, 1e-2, 1e-3, 1e-5, 1e-7, 1e-9}) {
      z.setZero();
      std::vector<std::size_t> per_frame(prog.frames.size(), 0);
      for (std::size_t j = 0; j < S; ++j)
        if (active[j]) ++per_frame[prog.segments[j].frame];
      for (std::size_t j = 0; j < S; ++j) {
        if (!active[j]) continue;
        const FramePhysics& ph = prog.frames[prog.segments[j].frame];
        const double l = eta * ph.tau / double(per_frame[prog.segments[j].frame] + 1);
        const double span = std::isfinite(ph.x_hi) ? ph.x_hi - ph.x_lo : 1.0;
        z[2 * j] = l;
        z[2 * j + 1] = l * (ph.x_lo + 1e-3 * std::min(span, 1.0));
      }
      if (m == 0 || ((b - rows.a * z).minCoeff() > 0)) {
        rows.b = b;
        have_start = true;
        break;
      }
    }
    if (have_start) break;
  }
  if (!have_start) {
    // an all-idle schedule is the only candidate left
    Vec zero = Vec::Zero(n);
    sol.feasible = m == 0 || (rows.b - rows.a * zero).minCoeff() >= -1e-12 * scale;
    sol.objective = sol.feasible ? 0.0 : -kInf;
    return sol;
  }
  if (nact == 0) {
    sol.feasible = true;
    return sol;
  }
  Barrier bar{prog, active, rows, {}};
  for (std::size_t j = 0; j < S; ++j)
    if (active[j]) bar.var.push_back(j);
  // eliminate inactive variables by pinning them through the Hessian
  std::vector<char> pinned(n, 0);
  for (std::size_t j = 0; j < S; ++j)
    if (!active[j]) pinned[2 * j] = pinned[2 * j + 1] = 1;

  auto slacks = [&](const Vec& zz) { return Vec(rows.b - rows.a * zz); };
  auto barrier_value = [&](const Vec& zz, double t) {
    const Vec s = slacks(zz);
    if (s.minCoeff() <= 0) return -kInf;
    return t * bar.f(zz) + s.array().log().sum();
  };
  double t = 1.0;
  Vec grad(n);
  Mat hess(n, n);
  int steps = 0;
  const int max_steps = 2000;
  while (true) {
    for (int inner = 0; inner < 100 && steps < max_steps; ++inner, ++steps) {
      double fz;
      bar.derivs(z, fz, grad, hess);
      const Vec s = slacks(z);
      const Vec inv = s.cwiseInverse();
      Vec g = t * grad - rows.a.transpose() * inv;
      Mat H = -t * hess + rows.a.transpose() * inv.cwiseAbs2().asDiagonal() * rows.a;
      for (std::size_t i = 0; i < n; ++i) {
        if (pinned[i]) {
          H.row(i).setZero();
          H.col(i).setZero();
          H(i, i) = 1.0;
          g[i] = 0.0;
        }
      }
      Eigen::LDLT<Mat> ldlt(H);
      Vec dz = ldlt.solve(g);
      if (!dz.allFinite()) {
        H.diagonal().array() += 1e-12 * H.diagonal().cwiseAbs().maxCoeff();
        dz = Eigen::LDLT<Mat>(H).solve(g);
        if (!dz.allFinite()) break;
      }
      const double dec = g.dot(dz);
      if (dec <= 1e-9) break;
      const Vec adz = rows.a * dz;
      double step = 1.0;
      for (std::size_t i = 0; i < m; ++i)
        if (adz[i] > 0) step = std::min(step, 0.99 * s[i] / adz[i]);
      const double f0 = barrier_value(z, t);
      // near the optimum barrier values lose relative precision, so accept a
      // full step once the decrement is below the rounding level of f0
      const bool tiny = dec < 1e-13 * std::fabs(f0);
      while (!tiny && step > 1e-10) {
        const double f1 = barrier_value(z + step * dz, t);
        if (f1 >= f0 + 0.25 * step * dec) break;
        step *= 0.5;
      }
      if (step <= 1e-10) break;
      z += step * dz;
      if (tiny) break;
    }
    if (double(m) / t < gap_tol || steps >= max_steps) break;
    t *= 40.0;
  }
  sol.newton_steps = steps;
  for (std::size_t j = 0; j < S; ++j) {
    if (!active[j]) continue;
    const FramePhysics& ph = prog.frames[prog.segments[j].frame];
    double l = std::max(0.0, z[2 * j]);
    double e = z[2 * j + 1];
    if (l < 1e-9 * ph.tau) {
      l = 0;
      e = 0;
    }
    sol.l[j] = l;
    sol.energy[j] = e;
  }
  sol.objective = segment_objective(prog, sol.l, sol.energy);
  sol.feasible = true;
  return sol;
}

}  // namespace ehlc
