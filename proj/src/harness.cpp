#include "ehlc/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ehlc/lsc.hpp"
#include "ehlc/ltm.hpp"

namespace ehlc {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  throw Error(Errc::ConfigInvalid, path + ": " + msg);
}

double num(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
  }
  if (j.is_null()) return kInf;
  bad(path, "expected a number");
}

template <class F>
void opt_field(const json& obj, const char* key, const std::string& path, F&& set) {
  if (!obj.is_object()) bad(path.empty() ? "<document>" : path, "expected an object");
  auto it = obj.find(key);
  if (it != obj.end()) set(*it, path.empty() ? std::string(key) : path + "." + key);
}

std::vector<double> num_list(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(num(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) bad(path, "expected a non-negative integer");
  return j.get<std::size_t>();
}

Strategy parse_strategy(const std::string& s, const std::string& path) {
  if (s == "ltm" || s == "LTM") return Strategy::Ltm;
  if (s == "lsc" || s == "LSC") return Strategy::Lsc;
  bad(path, "unknown strategy '" + s + "'");
}

const char* strategy_name(Strategy s) { return s == Strategy::Ltm ? "ltm" : "lsc"; }

const std::vector<std::string> kModes{"offline", "dp", "mv", "greedy", kCsitMode};
const std::vector<std::string> kSweepVars{"r", "b_max", "b_0", "v_b", "p_c", "tau", "shape", "K"};

void rethrow_as_config(const std::string& path, const std::exception& e) {
  bad(path, e.what());
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void ExperimentConfig::validate() const {
  if (channel.h.empty()) {
    if (!(channel.x > 0)) bad("channel.x", "shape must be > 0");
    if (!(channel.y > 0)) bad("channel.y", "rate must be > 0");
    if (!(channel.T > 0)) bad("channel.T", "truncation must be > 0");
    if (channel.N < 1) bad("channel.N", "levels must be >= 1");
  } else if (channel.h.size() != channel.p.size()) {
    bad("channel.p", "must match channel.h in length");
  }
  try {
    build_channel(*this).validate();
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigInvalid) throw;
    rethrow_as_config("channel", e);
  }
  try { battery.validate(); } catch (const Error& e) { rethrow_as_config("battery", e); }
  try { frame.validate(); } catch (const Error& e) { rethrow_as_config("frame", e); }
  try { harvest.validate(); } catch (const Error& e) { rethrow_as_config("harvest", e); }
  for (std::size_t i = 0; i < profile.size(); ++i)
    if (!(profile[i] >= 0) || !std::isfinite(profile[i]))
      bad("harvest.profile[" + std::to_string(i) + "]", "must be finite and >= 0");
  if (K < 1) bad("harvest.K", "must be >= 1");
  if (trials < 1) bad("harvest.trials", "must be >= 1");
  if (strategies.empty()) bad("run.strategy", "no strategy given");
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (std::find(kModes.begin(), kModes.end(), modes[i]) == kModes.end())
      bad("run.modes[" + std::to_string(i) + "]", "unknown mode '" + modes[i] + "'");
  if (modes.empty()) bad("run.modes", "no mode given");
  if (has_sweep && std::find(kSweepVars.begin(), kSweepVars.end(), sweep_var) == kSweepVars.end())
    bad("run.sweep.var", "unknown sweep variable '" + sweep_var + "'");
  if (grid.points < 2) bad("run.grid.points", "must be >= 2");
  if (!(grid.cap_if_unbounded > 0)) bad("run.grid.cap", "must be > 0");
  if (std::isfinite(battery.b_max) && battery.b_0 > battery.b_max)
    bad("battery.b_0", "exceeds battery.b_max");
  for (std::size_t i = 0; i < sweep_values.size(); ++i) {
    const std::string path = "run.sweep.values[" + std::to_string(i) + "]";
    const double v = sweep_values[i];
    if (std::isnan(v)) bad(path, "is NaN");
    ExperimentConfig c = *this;
    c.has_sweep = false;
    c.sweep_values.clear();
    try {
      c = apply_sweep(c, v);
      c.validate();
    } catch (const Error& e) {
      bad(path, e.what());
    }
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    bad("<document>", e.what());
  }
  if (!root.is_object()) bad("<document>", "expected an object");
  ExperimentConfig c;

  opt_field(root, "channel", "", [&](const json& ch, const std::string& p) {
    opt_field(ch, "x", p, [&](const json& j, const std::string& q) { c.channel.x = num(j, q); });
    opt_field(ch, "y", p, [&](const json& j, const std::string& q) { c.channel.y = num(j, q); });
    opt_field(ch, "T", p, [&](const json& j, const std::string& q) { c.channel.T = num(j, q); });
    opt_field(ch, "N", p, [&](const json& j, const std::string& q) { c.channel.N = int(count(j, q)); });
    opt_field(ch, "h", p, [&](const json& j, const std::string& q) { c.channel.h = num_list(j, q); });
    opt_field(ch, "p", p, [&](const json& j, const std::string& q) { c.channel.p = num_list(j, q); });
  });
  opt_field(root, "battery", "", [&](const json& b, const std::string& p) {
    opt_field(b, "r", p, [&](const json& j, const std::string& q) { c.battery.r = num(j, q); });
    opt_field(b, "v_b", p, [&](const json& j, const std::string& q) { c.battery.v_b = num(j, q); });
    opt_field(b, "b_max", p, [&](const json& j, const std::string& q) { c.battery.b_max = num(j, q); });
    opt_field(b, "b_0", p, [&](const json& j, const std::string& q) { c.battery.b_0 = num(j, q); });
  });
  opt_field(root, "frame", "", [&](const json& f, const std::string& p) {
    opt_field(f, "tau", p, [&](const json& j, const std::string& q) { c.frame.tau = num(j, q); });
    opt_field(f, "p_c", p, [&](const json& j, const std::string& q) { c.frame.p_c = num(j, q); });
    opt_field(f, "bandwidth", p, [&](const json& j, const std::string& q) { c.frame.bandwidth = num(j, q); });
    opt_field(f, "n0", p, [&](const json& j, const std::string& q) { c.frame.n0 = num(j, q); });
  });
  bool have_harvest = false;
  opt_field(root, "harvest", "", [&](const json& h, const std::string& p) {
    have_harvest = true;
    opt_field(h, "values", p, [&](const json& j, const std::string& q) { c.harvest.values = num_list(j, q); });
    opt_field(h, "probs", p, [&](const json& j, const std::string& q) { c.harvest.probs = num_list(j, q); });
    opt_field(h, "profile", p, [&](const json& j, const std::string& q) { c.profile = num_list(j, q); });
    opt_field(h, "K", p, [&](const json& j, const std::string& q) { c.K = count(j, q); });
    opt_field(h, "trials", p, [&](const json& j, const std::string& q) { c.trials = count(j, q); });
    opt_field(h, "seed", p, [&](const json& j, const std::string& q) {
      if (!j.is_number_unsigned() && !j.is_number_integer()) bad(q, "expected an unsigned integer");
      c.seed = j.get<std::uint64_t>();
    });
  });
  if (!have_harvest) bad("harvest", "missing");
  if (c.harvest.probs.empty() && !c.harvest.values.empty())
    c.harvest.probs.assign(c.harvest.values.size(), 1.0 / double(c.harvest.values.size()));
  opt_field(root, "run", "", [&](const json& r, const std::string& p) {
    opt_field(r, "strategy", p, [&](const json& j, const std::string& q) {
      c.strategies.clear();
      if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "both") c.strategies = {Strategy::Ltm, Strategy::Lsc};
        else c.strategies.push_back(parse_strategy(s, q));
      } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
          const std::string qi = q + "[" + std::to_string(i) + "]";
          if (!j[i].is_string()) bad(qi, "expected a string");
          c.strategies.push_back(parse_strategy(j[i].get<std::string>(), qi));
        }
      } else {
        bad(q, "expected a string or an array");
      }
    });
    auto read_modes = [&](const json& j, const std::string& q) {
      c.modes.clear();
      if (j.is_string()) {
        c.modes.push_back(j.get<std::string>());
        return;
      }
      if (!j.is_array()) bad(q, "expected a string or an array");
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_string()) bad(q + "[" + std::to_string(i) + "]", "expected a string");
        c.modes.push_back(j[i].get<std::string>());
      }
    };
    opt_field(r, "mode", p, read_modes);
    opt_field(r, "modes", p, read_modes);
    opt_field(r, "sweep", p, [&](const json& s, const std::string& q) {
      c.has_sweep = true;
      opt_field(s, "var", q, [&](const json& j, const std::string& qq) {
        if (!j.is_string()) bad(qq, "expected a string");
        c.sweep_var = j.get<std::string>();
      });
      opt_field(s, "values", q, [&](const json& j, const std::string& qq) { c.sweep_values = num_list(j, qq); });
      if (c.sweep_var.empty()) bad(q + ".var", "missing");
    });
    opt_field(r, "grid", p, [&](const json& g, const std::string& q) {
      opt_field(g, "points", q, [&](const json& j, const std::string& qq) { c.grid.points = count(j, qq); });
      opt_field(g, "cap", q, [&](const json& j, const std::string& qq) { c.grid.cap_if_unbounded = num(j, qq); });
    });
  });
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigInvalid, path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ChannelDist build_channel(const ExperimentConfig& cfg) {
  const auto& ch = cfg.channel;
  ChannelDist raw = ch.h.empty() ? quantize_gamma_channel(ch.x, ch.y, ch.T, ch.N)
                                 : make_channel(ch.h, ch.p);
  return normalize_gains(raw, cfg.frame);
}

ExperimentConfig apply_sweep(const ExperimentConfig& cfg, double v) {
  ExperimentConfig c = cfg;
  const auto& s = cfg.sweep_var;
  if (s == "r") c.battery.r = v;
  else if (s == "b_max") c.battery.b_max = v;
  else if (s == "b_0") c.battery.b_0 = v;
  else if (s == "v_b") c.battery.v_b = v;
  else if (s == "p_c") c.frame.p_c = v;
  else if (s == "tau") c.frame.tau = v;
  else if (s == "shape") {
    // unit-mean Gamma: scale 1/x, i.e. rate x
    c.channel.x = v;
    c.channel.y = v;
  } else if (s == "K") {
    if (!(v >= 1) || v != std::floor(v)) throw Error(Errc::ConfigInvalid, "K must be a positive integer");
    c.K = std::size_t(v);
  } else {
    throw Error(Errc::ConfigInvalid, "run.sweep.var: unknown sweep variable '" + s + "'");
  }
  return c;
}

PowerSchedule schedule_of(const LtmAllocation& a) {
  PowerSchedule s(a.frames);
  for (std::size_t k = 0; k < a.frames; ++k)
    for (std::size_t i = 0; i < a.layers; ++i)
      if (a.l[i][k] > 0) s[k].push_back({a.l[i][k], a.p[i][k]});
  return s;
}

PowerSchedule schedule_of(const LscAllocation& a) {
  PowerSchedule s(a.frames);
  for (std::size_t k = 0; k < a.frames; ++k) {
    double p = 0;
    for (double x : a.powers[k]) p += x;
    if (a.phi[k] > 0) s[k].push_back({a.phi[k], p});
  }
  return s;
}

double with_csit_baseline(const PowerSchedule& schedule, const ChannelDist& dist) {
  if (schedule.empty()) return 0.0;
  double total = 0;
  for (const auto& frame : schedule)
    for (const auto& seg : frame)
      for (std::size_t j = 0; j < dist.n(); ++j)
        total += dist.p[j] * seg.duration * rate(dist.h[j] * seg.power);
  return total / double(schedule.size());
}

void write_csv(const std::vector<CsvRow>& rows, std::ostream& os) {
  os << "sweep_var,sweep_value,strategy,mode,avg_rate_nats,avg_rate_bits,stderr,trials,seed\n";
  for (const auto& r : rows) {
    os << r.sweep_var << ',' << r.sweep_value << ',' << r.strategy << ',' << r.mode << ','
       << format_double(r.avg_rate_nats) << ',' << format_double(r.avg_rate_bits) << ','
       << format_double(r.stderr_) << ',' << r.trials << ',' << r.seed << '\n';
  }
}

namespace {

struct Point {
  ExperimentConfig cfg;
  std::string var, value;
};

// nat per frame -> nat/s
double to_rate(double per_frame, const FrameConfig& f) { return per_frame * f.bandwidth / f.tau; }

CsvRow make_row(const Point& pt, Strategy st, const std::string& mode) {
  CsvRow r;
  r.sweep_var = pt.var;
  r.sweep_value = pt.value;
  r.strategy = strategy_name(st);
  r.mode = mode;
  r.seed = pt.cfg.seed;
  return r;
}

void fill(CsvRow& r, double mean_per_frame, double se_per_frame, std::size_t trials,
          const FrameConfig& f) {
  r.avg_rate_nats = to_rate(mean_per_frame, f);
  r.avg_rate_bits = r.avg_rate_nats / std::log(2.0);
  r.stderr_ = to_rate(se_per_frame, f);
  r.trials = trials;
}

void fail(CsvRow& r, const std::string& msg) {
  r.avg_rate_nats = r.avg_rate_bits = r.stderr_ = std::nan("");
  r.trials = 0;
  r.error = msg;
}

double single_frame(Strategy st, double b0, double u, const ExperimentConfig& c,
                    const ChannelDist& dist, PowerSchedule* sched) {
  if (st == Strategy::Ltm) {
    auto a = solve_ltm_single(b0, u, c.frame, c.battery, dist);
    if (sched) *sched = schedule_of(a);
    return a.objective;
  }
  auto a = solve_lsc_single(b0, u, c.frame, c.battery, dist);
  if (sched) *sched = schedule_of(a);
  return a.objective;
}

std::size_t snap_index(const std::vector<double>& grid, double b) {
  auto it = std::upper_bound(grid.begin(), grid.end(), b + 1e-12);
  return it == grid.begin() ? 0 : std::size_t(it - grid.begin()) - 1;
}

// rows for one (sweep point, strategy), in the order of cfg.modes
std::vector<CsvRow> run_point(const Point& pt, Strategy st) {
  const ExperimentConfig& c = pt.cfg;
  std::vector<CsvRow> rows;
  for (const auto& m : c.modes) rows.push_back(make_row(pt, st, m));

  ChannelDist dist;
  try {
    dist = build_channel(c);
  } catch (const std::exception& e) {
    for (auto& r : rows) fail(r, e.what());
    return rows;
  }

  // K = 1 offline and the CSIT baseline: exact expectation over the support
  auto exact = [&](bool csit) {
    double m = 0;
    for (std::size_t i = 0; i < c.harvest.values.size(); ++i) {
      if (c.harvest.probs[i] == 0) continue;
      PowerSchedule s;
      const double v = single_frame(st, c.battery.b_0, c.harvest.values[i], c, dist, csit ? &s : nullptr);
      m += c.harvest.probs[i] * (csit ? with_csit_baseline(s, dist) : v);
    }
    return m;
  };

  std::vector<Policy> mc;
  std::vector<std::size_t> mc_row;
  for (std::size_t i = 0; i < c.modes.size(); ++i) {
    const auto& m = c.modes[i];
    try {
      if (m == kCsitMode) {
        if (c.K != 1) throw Error(Errc::InvalidArgument, "the CSIT baseline is computed for K = 1 only");
        fill(rows[i], exact(true), 0.0, 0, c.frame);
      } else if (m == "offline" && c.K == 1) {
        fill(rows[i], exact(false), 0.0, 0, c.frame);
      } else {
        mc.push_back(m == "offline" ? Policy::Offline
                     : m == "dp"    ? Policy::Dp
                     : m == "mv"    ? Policy::Mv
                                    : Policy::Greedy);
        mc_row.push_back(i);
      }
    } catch (const std::exception& e) {
      fail(rows[i], e.what());
    }
  }
  if (mc.empty()) return rows;
  try {
    auto table = dp_solve(c.frame, c.battery, dist, c.harvest, c.K, c.grid, st);
    const std::size_t b0 = snap_index(table.battery_grid, c.battery.b_0);
    auto res = monte_carlo(mc, table, c.trials, c.seed, b0);
    for (std::size_t j = 0; j < mc.size(); ++j)
      fill(rows[mc_row[j]], res[j].mean, res[j].stderr_, res[j].trials, c.frame);
  } catch (const std::exception& e) {
    for (auto idx : mc_row) fail(rows[idx], e.what());
  }
  return rows;
}

}  // namespace

std::vector<CsvRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<Point> points;
  if (!cfg.has_sweep) {
    points.push_back({cfg, "none", ""});
  } else {
    for (double v : cfg.sweep_values) points.push_back({apply_sweep(cfg, v), cfg.sweep_var, format_double(v)});
  }
  const std::size_t S = cfg.strategies.size();
  std::vector<std::vector<CsvRow>> out(points.size() * S);
  // the Monte Carlo inside each point already uses the pool; points run in sequence
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = run_point(points[t / S], cfg.strategies[t % S]);
  std::vector<CsvRow> rows;
  for (auto& v : out)
    for (auto& r : v) rows.push_back(std::move(r));
  return rows;
}

}  // namespace ehlc
