#include "ehlc/numeric.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cstdint>

#include "ehlc/model.hpp"

namespace ehlc {

Argmax unimodal_max(const std::function<double(double)>& f, double a, double b, double xtol,
                  int max_iter) {
  Argmax best;
  auto consider = [&](double x, double fx) {
    if (fx > best.f) {
      best.x = x;
      best.f = fx;
    }
  };
  consider(a, f(a));
  if (!(b > a)) return best;
  consider(b, f(b));
  const int bits = std::clamp(int(std::ceil(-std::log2(xtol))), 8, std::numeric_limits<double>::digits);
  std::uintmax_t iters = std::uintmax_t(max_iter);
  const auto r = boost::math::tools::brent_find_minima([&](double x) { return -f(x); }, a, b, bits, iters);
  consider(r.first, -r.second);
  return best;
}

double bracket_root(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  if ((flo > 0) == (fhi > 0)) throw Error(Errc::NoRootInBracket, "no sign change in bracket");
  std::uintmax_t it = 200;
  auto tol = [](double x, double y) {
    return std::fabs(x - y) <= 4 * std::numeric_limits<double>::epsilon() * std::max(std::fabs(x), std::fabs(y)) ||
           std::fabs(x - y) < 1e-300;
  };
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, it);
  // pick the endpoint with the smaller residual
  const double a = r.first, b = r.second;
  return std::fabs(f(a)) <= std::fabs(f(b)) ? a : b;
}

std::vector<double> scan_roots(const std::function<double(double)>& f, double lo, double hi,
                               int points, bool log_spaced) {
  std::vector<double> roots;
  if (!(hi > lo) || points < 2) return roots;
  std::vector<double> xs(points);
  for (int i = 0; i < points; ++i) {
    const double t = double(i) / (points - 1);
    xs[i] = log_spaced ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
  }
  xs.front() = lo;
  xs.back() = hi;
  double fprev = f(xs[0]);
  if (fprev == 0) roots.push_back(xs[0]);
  for (int i = 1; i < points; ++i) {
    const double fx = f(xs[i]);
    if (!std::isfinite(fx) || !std::isfinite(fprev)) {
      fprev = fx;
      continue;
    }
    if (fx == 0) {
      roots.push_back(xs[i]);
    } else if (fprev != 0 && (fprev > 0) != (fx > 0)) {
      roots.push_back(bracket_root(f, xs[i - 1], xs[i]));
    }
    fprev = fx;
  }
  return roots;
}

}  // namespace ehlc
