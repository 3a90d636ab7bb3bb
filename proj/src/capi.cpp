#include "ehlc/ehlc.h"

#include <cmath>
#include <cstring>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ehlc/harness.hpp"
#include "ehlc/lsc.hpp"
#include "ehlc/ltm.hpp"
#include "ehlc/oracle.hpp"

struct ehlc_config {
  ehlc::ExperimentConfig cfg;
};

struct ehlc_result {
  std::vector<ehlc::CsvRow> rows;
};

namespace {

thread_local std::string g_last_error;

ehlc_status to_status(ehlc::Errc c) { return static_cast<ehlc_status>(static_cast<int>(c)); }

template <class F>
ehlc_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const ehlc::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return EHLC_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EHLC_INTERNAL;
  }
}

ehlc_status invalid(const char* msg) {
  g_last_error = msg;
  return EHLC_INVALID_ARGUMENT;
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

using nlohmann::json;
using namespace ehlc;

json vec2(const std::vector<std::vector<double>>& m) { return json(m); }

json alloc_json(const LtmAllocation& a) {
  return json{{"l", vec2(a.l)}, {"beta", vec2(a.beta)}, {"e", vec2(a.e)}, {"p", vec2(a.p)},
              {"phi", a.phi}, {"status", errc_name(a.status)}};
}

json alloc_json(const LscAllocation& a) {
  return json{{"powers", vec2(a.powers)}, {"rates", vec2(a.rates)}, {"beta", a.beta},
              {"e", a.e}, {"phi", a.phi}, {"status", errc_name(a.status)}};
}

json report_json(const FeasibilityReport& r) {
  return json{{"min_slack", std::isfinite(r.min_slack) ? r.min_slack : 0.0},
              {"max_complementarity", r.max_complementarity},
              {"discarded", r.discarded},
              {"ok", r.ok()}};
}

std::vector<double> offline_profile(const ExperimentConfig& c) {
  if (!c.profile.empty()) return c.profile;
  auto idx = draw_harvest(c.harvest, c.K, c.seed, 0);
  std::vector<double> u;
  for (auto i : idx) u.push_back(c.harvest.values[i]);
  return u;
}

template <class A>
A offline_solve(const HarvestProfile& prof, const ExperimentConfig& c, const ChannelDist& dist);

template <>
LtmAllocation offline_solve(const HarvestProfile& prof, const ExperimentConfig& c,
                            const ChannelDist& dist) {
  if (prof.k() == 1) return solve_ltm_single(c.battery.b_0, prof.u[0], c.frame, c.battery, dist);
  if (prof.k() == 2) return solve_ltm_two_frame(prof, c.frame, c.battery, dist);
  return solve_ltm_multiframe_convex(prof, c.frame, c.battery, dist);
}

template <>
LscAllocation offline_solve(const HarvestProfile& prof, const ExperimentConfig& c,
                            const ChannelDist& dist) {
  if (prof.k() == 1) return solve_lsc_single(c.battery.b_0, prof.u[0], c.frame, c.battery, dist);
  if (prof.k() == 2) return solve_lsc_two_frame(prof, c.frame, c.battery, dist);
  return solve_lsc_multiframe_convex(prof, c.frame, c.battery, dist);
}

std::vector<double> trajectory(const LtmAllocation& a, const HarvestProfile& p, const ExperimentConfig& c) {
  return ltm_battery_trajectory(a, p, c.frame, c.battery);
}
std::vector<double> trajectory(const LscAllocation& a, const HarvestProfile& p, const ExperimentConfig& c) {
  return lsc_battery_trajectory(a, p, c.frame, c.battery);
}

template <class A>
json offline_json(const ExperimentConfig& c, const ChannelDist& dist, const HarvestProfile& prof) {
  A a = offline_solve<A>(prof, c, dist);
  const auto rep = feasibility_check(a, prof, c.frame, c.battery, dist);
  const double per_frame = a.objective / double(prof.k());
  return json{{"objective_nats_per_hz", a.objective},
              {"avg_rate_nats", per_frame * c.frame.bandwidth / c.frame.tau},
              {"avg_rate_bits", per_frame * c.frame.bandwidth / c.frame.tau / std::log(2.0)},
              {"battery", trajectory(a, prof, c)},
              {"allocation", alloc_json(a)},
              {"feasibility", report_json(rep)}};
}

// shrinks the grid until the oracle fits its evaluation budget
OracleResult oracle_within_budget(Strategy st, double b0, double u, const ExperimentConfig& c,
                                  const ChannelDist& dist, GridSpec g) {
  for (;;) {
    try {
      return grid_search_single_frame(st, b0, u, c.frame, c.battery, dist, g);
    } catch (const Error& e) {
      if (e.code() != Errc::BudgetExceeded || g.points <= 4) throw;
      g.points /= 2;
    }
  }
}

}  // namespace

extern "C" {

const char* ehlc_last_error(void) { return g_last_error.c_str(); }

const char* ehlc_status_name(ehlc_status s) {
  switch (s) {
    case EHLC_IO_ERROR: return "IoError";
    case EHLC_CHECK_FAILED: return "CheckFailed";
    case EHLC_INTERNAL: return "Internal";
    default: return errc_name(static_cast<Errc>(static_cast<int>(s)));
  }
}

void ehlc_string_free(char* s) { std::free(s); }

ehlc_status ehlc_config_load(const char* path, ehlc_config** out) {
  if (!path || !out) return invalid("null argument");
  return guarded([&] {
    *out = new ehlc_config{load_config(path)};
    return EHLC_OK;
  });
}

ehlc_status ehlc_config_parse(const char* text, ehlc_config** out) {
  if (!text || !out) return invalid("null argument");
  return guarded([&] {
    *out = new ehlc_config{parse_config(text)};
    return EHLC_OK;
  });
}

void ehlc_config_free(ehlc_config* cfg) { delete cfg; }

ehlc_status ehlc_config_set_seed(ehlc_config* cfg, uint64_t seed) {
  if (!cfg) return invalid("null config");
  cfg->cfg.seed = seed;
  return EHLC_OK;
}

ehlc_status ehlc_config_set_strategy(ehlc_config* cfg, ehlc_strategy st) {
  if (!cfg) return invalid("null config");
  if (st != EHLC_LTM && st != EHLC_LSC) return invalid("unknown strategy");
  cfg->cfg.strategies = {st == EHLC_LTM ? Strategy::Ltm : Strategy::Lsc};
  return EHLC_OK;
}

ehlc_status ehlc_config_set_modes(ehlc_config* cfg, const char* modes) {
  if (!cfg || !modes) return invalid("null argument");
  return guarded([&] {
    ExperimentConfig c = cfg->cfg;
    c.modes.clear();
    std::stringstream ss(modes);
    std::string m;
    while (std::getline(ss, m, ','))
      if (!m.empty()) c.modes.push_back(m);
    c.validate();
    cfg->cfg = std::move(c);
    return EHLC_OK;
  });
}

ehlc_status ehlc_config_clear_sweep(ehlc_config* cfg) {
  if (!cfg) return invalid("null config");
  cfg->cfg.has_sweep = false;
  cfg->cfg.sweep_var.clear();
  cfg->cfg.sweep_values.clear();
  return EHLC_OK;
}

ehlc_status ehlc_run(const ehlc_config* cfg, ehlc_result** out) {
  if (!cfg || !out) return invalid("null argument");
  return guarded([&] {
    *out = new ehlc_result{run_experiment(cfg->cfg)};
    return EHLC_OK;
  });
}

void ehlc_result_free(ehlc_result* res) { delete res; }

size_t ehlc_result_rows(const ehlc_result* res) { return res ? res->rows.size() : 0; }

ehlc_status ehlc_result_row(const ehlc_result* res, size_t i, ehlc_row* row) {
  if (!res || !row) return invalid("null argument");
  if (i >= res->rows.size()) return invalid("row index out of range");
  const auto& r = res->rows[i];
  *row = ehlc_row{r.sweep_var.c_str(), r.sweep_value.c_str(), r.strategy.c_str(), r.mode.c_str(),
                  r.avg_rate_nats, r.avg_rate_bits, r.stderr_, r.trials, r.seed, r.error.c_str()};
  return EHLC_OK;
}

ehlc_status ehlc_result_csv(const ehlc_result* res, char** csv) {
  if (!res || !csv) return invalid("null argument");
  return guarded([&] {
    std::ostringstream os;
    write_csv(res->rows, os);
    *csv = dup(os.str());
    return EHLC_OK;
  });
}

ehlc_status ehlc_solve_offline(const ehlc_config* cfg, char** json_out) {
  if (!cfg || !json_out) return invalid("null argument");
  return guarded([&] {
    const ExperimentConfig& c = cfg->cfg;
    const ChannelDist dist = build_channel(c);
    HarvestProfile prof{offline_profile(c)};
    json doc{{"profile", prof.u}, {"b_0", c.battery.b_0}, {"seed", c.seed}};
    json solutions = json::array();
    for (Strategy st : c.strategies) {
      json s = st == Strategy::Ltm ? offline_json<LtmAllocation>(c, dist, prof)
                                   : offline_json<LscAllocation>(c, dist, prof);
      s["strategy"] = st == Strategy::Ltm ? "ltm" : "lsc";
      solutions.push_back(std::move(s));
    }
    doc["solutions"] = std::move(solutions);
    *json_out = dup(doc.dump(2) + "\n");
    return EHLC_OK;
  });
}

ehlc_status ehlc_oracle_check(const ehlc_config* cfg, char** json_out, int* passed) {
  if (!cfg || !json_out || !passed) return invalid("null argument");
  return guarded([&] {
    const ExperimentConfig& c = cfg->cfg;
    const ChannelDist dist = build_channel(c);
    const double b0 = c.battery.b_0;
    bool all = true;
    json checks = json::array();
    for (Strategy st : c.strategies) {
      for (double u : c.harvest.values) {
        json row{{"strategy", st == Strategy::Ltm ? "ltm" : "lsc"}, {"u", u}};
        double solver = 0;
        FeasibilityReport rep;
        if (st == Strategy::Ltm) {
          auto a = solve_ltm_single(b0, u, c.frame, c.battery, dist);
          solver = a.objective;
          rep = feasibility_check(a, HarvestProfile{{u}}, c.frame, c.battery, dist);
        } else {
          auto a = solve_lsc_single(b0, u, c.frame, c.battery, dist);
          solver = a.objective;
          rep = feasibility_check(a, HarvestProfile{{u}}, c.frame, c.battery, dist);
        }
        row["solver"] = solver;
        row["feasibility"] = report_json(rep);
        bool ok = rep.ok();
        try {
          auto o = oracle_within_budget(st, b0, u, c, dist, GridSpec{});
          row["oracle"] = o.objective;
          row["oracle_grid"] = o.grid_objective;
          row["grid_bound"] = o.grid_bound;
          row["evaluations"] = o.evaluations;
          ok = ok && solver >= o.grid_objective - o.grid_bound && solver <= o.objective + 1e-9;
        } catch (const Error& e) {
          row["oracle_error"] = e.what();
          ok = false;
        }
        row["pass"] = ok;
        all = all && ok;
        checks.push_back(std::move(row));
      }
    }
    *passed = all ? 1 : 0;
    *json_out = dup(json{{"checks", checks}, {"pass", all}}.dump(2) + "\n");
    return EHLC_OK;
  });
}

ehlc_status ehlc_solve_single(ehlc_strategy st, double u, const ehlc_frame_params* frame,
                              const ehlc_battery_params* bat, const double* h, const double* p,
                              size_t n, double* objective, double* tx_time) {
  if (!frame || !bat || !h || !p || !objective || n == 0) return invalid("null argument");
  return guarded([&] {
    FrameConfig f{frame->tau, frame->p_c, frame->bandwidth, frame->n0};
    BatteryParams b{bat->r, bat->v_b, bat->b_max, bat->b_0};
    f.validate();
    b.validate();
    const ChannelDist dist = normalize_gains(make_channel({h, h + n}, {p, p + n}), f);
    double obj = 0, t = 0;
    if (st == EHLC_LTM) {
      auto a = solve_ltm_single(b.b_0, u, f, b, dist);
      obj = a.objective;
      for (std::size_t i = 0; i < a.layers; ++i) t += a.l[i][0];
    } else {
      auto a = solve_lsc_single(b.b_0, u, f, b, dist);
      obj = a.objective;
      t = a.phi[0];
    }
    *objective = obj;
    if (tx_time) *tx_time = t;
    return EHLC_OK;
  });
}

}  // extern "C"
