#include <doctest.h>

#include <cmath>
#include <random>

#include "ehlc/model.hpp"

using namespace ehlc;

namespace {
BatteryParams lossy(double r = 5.0) {
  BatteryParams b;
  b.r = r;
  b.v_b = 1.5;
  return b;
}
}  // namespace

TEST_CASE("charge loss") {
  CHECK(charge_rate(0.0, lossy()) == 0.0);
  CHECK(charge_rate(0.01, lossy(0.0)) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(charge_rate(0.225, lossy()) == doctest::Approx(0.1125).epsilon(1e-14));
  // 0.225 W is the argmax
  double best = 0, arg = 0;
  for (int i = 0; i <= 10000; ++i) {
    const double v = 0.45 * i / 10000.0;
    if (charge_rate(v, lossy()) > best) best = charge_rate(v, lossy()), arg = v;
  }
  CHECK(arg == doctest::Approx(0.225).epsilon(1e-4));
}

TEST_CASE("discharge loss and its inverse") {
  CHECK(discharge_delivered(0.0, lossy()) == 0.0);
  CHECK(discharge_delivered(0.01, lossy(0.0)) == doctest::Approx(0.01).epsilon(1e-15));
  const double del = discharge_delivered(0.1, lossy());
  CHECK(del == doctest::Approx(0.1 - 5 * 0.01 / 2.25).epsilon(1e-14));
  CHECK(invert_discharge(0.0, lossy()) == 0.0);
  CHECK(invert_discharge(0.037, lossy(0.0)) == doctest::Approx(0.037).epsilon(1e-15));
  CHECK(invert_discharge(del, lossy()) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(peak_power(lossy()) == doctest::Approx(0.225).epsilon(1e-15));
  CHECK(std::isinf(peak_power(lossy(0.0))));
}

TEST_CASE("idle charge rate") {
  CHECK(idle_charge_rate(0.3, lossy(0.0)) == doctest::Approx(0.3));
  CHECK(idle_charge_rate(0.01, lossy()) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(idle_charge_rate(1.0, lossy()) == doctest::Approx(0.225).epsilon(1e-15));
  // maximises F_c over [0, u]
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0, 1);
  for (int t = 0; t < 50; ++t) {
    const double u = U(rng), r = 10 * U(rng);
    const auto b = lossy(r);
    const double v = idle_charge_rate(u, b);
    CHECK(v <= u + 1e-15);
    double best = 0;
    for (int i = 0; i <= 10000; ++i) best = std::max(best, charge_rate(u * i / 10000.0, b));
    CHECK(best <= charge_rate(v, b) + 1e-9);
  }
}

TEST_CASE("loss functions are concave, bounded by the input and decreasing in r") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0, 1);
  for (int t = 0; t < 1000; ++t) {
    const auto b = lossy(10 * U(rng));
    const double lim = peak_power(b) < 1.0 ? peak_power(b) : 1.0;
    const double x = lim * U(rng), y = lim * U(rng), th = U(rng);
    const double m = th * x + (1 - th) * y;
    CHECK(charge_rate(m, b) >= th * charge_rate(x, b) + (1 - th) * charge_rate(y, b) - 1e-12);
    CHECK(discharge_delivered(m, b) >= th * discharge_delivered(x, b) + (1 - th) * discharge_delivered(y, b) - 1e-12);
    CHECK(charge_rate(x, b) <= x);
    CHECK(discharge_delivered(x, b) <= x);
    auto b2 = b;
    b2.r += U(rng);
    CHECK(charge_rate(x, b2) <= charge_rate(x, b));
  }
}

TEST_CASE("rate and its inverse") {
  CHECK(rate(0.0) == 0.0);
  CHECK(rate(std::exp(1.0) - 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(inv_rate(0.0) == 0.0);
  CHECK(inv_rate(1.0) == doctest::Approx(std::exp(1.0) - 1).epsilon(1e-15));
  // 1 mW at 1 MHz and 1 nW/Hz: SNR 1, 1e6 ln 2 nat/s
  FrameConfig f;
  CHECK(f.bandwidth * rate(1e-3 / (f.n0 * f.bandwidth)) == doctest::Approx(1e6 * std::log(2.0)));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 50);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const double r = U(rng) / 10;
    worst = std::max(worst, std::fabs(rate(inv_rate(r)) - r));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("gamma quantisation") {
  auto one = quantize_gamma_channel(1, 1, 5, 1);
  REQUIRE(one.n() == 1);
  CHECK(one.h[0] == 5.0);
  CHECK(one.p[0] == 1.0);
  auto d = quantize_gamma_channel(1, 1, 5, 5);
  CHECK(d.p[0] == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-12));
  CHECK(d.p[4] == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));
  for (int i = 0; i < 5; ++i) CHECK(d.h[i] == doctest::Approx(i + 1.0));
  // bin masses against a trapezoid integral of the density
  auto g = quantize_gamma_channel(2.5, 1.7, 4, 4);
  for (int i = 0; i < 3; ++i) {
    const double lo = i, hi = i + 1.0;
    double s = 0;
    const int n = 200000;
    for (int k = 0; k <= n; ++k) {
      const double h = lo + (hi - lo) * k / n;
      const double f = std::pow(1.7, 2.5) * std::pow(h, 1.5) * std::exp(-1.7 * h) / std::tgamma(2.5);
      s += (k == 0 || k == n ? 0.5 : 1.0) * f;
    }
    CHECK(g.p[i] == doctest::Approx(s * (hi - lo) / n).epsilon(1e-8));
  }
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.1, 8);
  for (int t = 0; t < 100; ++t) {
    auto c = quantize_gamma_channel(U(rng), U(rng), U(rng), 1 + int(U(rng)));
    double s = 0;
    for (double p : c.p) s += p;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(c.q[0] == 1.0);
    for (std::size_t i = 1; i < c.n(); ++i) {
      CHECK(c.h[i] > c.h[i - 1]);
      CHECK(c.q[i] <= c.q[i - 1]);
    }
  }
}

TEST_CASE("channel construction stores tail weights and inverse gains") {
  auto d = make_channel({1, 4}, {0.5, 0.5});
  CHECK(d.q[0] == 1.0);
  CHECK(d.q[1] == 0.5);
  CHECK(d.s[0] == 1.0);
  CHECK(d.s[1] == 0.25);
  CHECK(d.s[2] == 0.0);
  CHECK_THROWS_AS(make_channel({2, 1}, {0.5, 0.5}).validate(), Error);
  auto n = normalize_gains(d, FrameConfig{});
  CHECK(n.h[1] == doctest::Approx(4000.0));
}

TEST_CASE("parameter validation") {
  BatteryParams b;
  b.r = -1;
  CHECK_THROWS_AS(b.validate(), Error);
  b = BatteryParams{};
  b.b_0 = -1;
  CHECK_THROWS_AS(b.validate(), Error);
  FrameConfig f;
  f.tau = 0;
  CHECK_THROWS_AS(f.validate(), Error);
}

TEST_CASE("frame physics maps drain to power") {
  FrameConfig f;
  f.p_c = 0.01;
  FramePhysics ph(0.05, f, lossy());
  CHECK(ph.power(0.0) == doctest::Approx(0.04));
  CHECK(ph.power(0.1) == doctest::Approx(0.04 + discharge_delivered(0.1, lossy())));
  CHECK(ph.drain_for_power(ph.power(0.07)) == doctest::Approx(0.07).epsilon(1e-12));
  // charging from the direct path lowers the transmit power
  CHECK(ph.power(-0.01) < 0.04);
  CHECK(ph.drain_for_power(ph.power(-0.01)) == doctest::Approx(-0.01).epsilon(1e-12));
  const double h = 1e-6;
  CHECK(ph.dpower(0.05) == doctest::Approx((ph.power(0.05 + h) - ph.power(0.05 - h)) / (2 * h)).epsilon(1e-6));
}
