#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace ehlc {

struct Argmax {
  double x = 0;
  double f = -INFINITY;
};

// Brent maximisation of a unimodal (concave) function on [a, b]; both
// endpoints are also evaluated so boundary optima are returned exactly.
Argmax unimodal_max(const std::function<double(double)>& f, double a, double b,
                  double xtol = 1e-13, int max_iter = 200);

// All sign changes of f over a scan grid, each refined with TOMS 748.
// When log_spaced is set the grid is geometric between lo > 0 and hi.
std::vector<double> scan_roots(const std::function<double(double)>& f, double lo, double hi,
                               int points = 512, bool log_spaced = false);

// Single root in a bracket with f(lo), f(hi) of opposite sign (or zero).
double bracket_root(const std::function<double(double)>& f, double lo, double hi);

}  // namespace ehlc
