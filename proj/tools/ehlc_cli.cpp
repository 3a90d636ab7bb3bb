#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ehlc/ehlc.h"

namespace {

struct Common {
  std::string config, out, strategy;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output file, stdout when omitted");
  sub->add_option("--seed", c.seed, "overrides harvest.seed");
  sub->add_option("--strategy", c.strategy, "overrides run.strategy")
      ->check(CLI::IsMember({"ltm", "lsc"}));
}

int report(ehlc_status s) {
  std::fprintf(stderr, "ehlc: %s: %s\n", ehlc_status_name(s), ehlc_last_error());
  return s == EHLC_CONFIG_INVALID ? 2 : 1;
}

bool emit(const std::string& path, const char* text) {
  if (path.empty() || path == "-") {
    std::fputs(text, stdout);
    return true;
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  return bool(f);
}

struct ConfigHandle {
  ehlc_config* p = nullptr;
  ~ConfigHandle() { ehlc_config_free(p); }
};

ehlc_status open_config(const Common& c, ConfigHandle& h) {
  ehlc_status s = ehlc_config_load(c.config.c_str(), &h.p);
  if (s != EHLC_OK) return s;
  if (c.seed) s = ehlc_config_set_seed(h.p, *c.seed);
  if (s == EHLC_OK && !c.strategy.empty())
    s = ehlc_config_set_strategy(h.p, c.strategy == "ltm" ? EHLC_LTM : EHLC_LSC);
  return s;
}

int run_csv(const Common& c, const char* modes, bool keep_sweep) {
  ConfigHandle h;
  ehlc_status s = open_config(c, h);
  if (s == EHLC_OK && modes) s = ehlc_config_set_modes(h.p, modes);
  if (s == EHLC_OK && !keep_sweep) s = ehlc_config_clear_sweep(h.p);
  if (s != EHLC_OK) return report(s);
  ehlc_result* res = nullptr;
  if ((s = ehlc_run(h.p, &res)) != EHLC_OK) return report(s);
  int rc = 0;
  for (size_t i = 0; i < ehlc_result_rows(res); ++i) {
    ehlc_row row;
    ehlc_result_row(res, i, &row);
    if (row.error[0]) {
      std::fprintf(stderr, "ehlc: %s=%s %s %s: %s\n", row.sweep_var, row.sweep_value, row.strategy,
                   row.mode, row.error);
      rc = 3;
    }
  }
  char* csv = nullptr;
  s = ehlc_result_csv(res, &csv);
  ehlc_result_free(res);
  if (s != EHLC_OK) return report(s);
  const bool ok = emit(c.out, csv);
  ehlc_string_free(csv);
  if (!ok) {
    std::fprintf(stderr, "ehlc: cannot write %s\n", c.out.c_str());
    return 1;
  }
  return rc;
}

int run_json(const Common& c, bool oracle) {
  ConfigHandle h;
  ehlc_status s = open_config(c, h);
  if (s != EHLC_OK) return report(s);
  char* text = nullptr;
  int passed = 1;
  s = oracle ? ehlc_oracle_check(h.p, &text, &passed) : ehlc_solve_offline(h.p, &text);
  if (s != EHLC_OK) return report(s);
  const bool ok = emit(c.out, text);
  ehlc_string_free(text);
  if (!ok) {
    std::fprintf(stderr, "ehlc: cannot write %s\n", c.out.c_str());
    return 1;
  }
  return passed ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered-coding rate optimisation for an energy-harvesting transmitter"};
  app.require_subcommand(1);

  Common off, on, sw, orc;
  auto* s_off = app.add_subcommand("solve-offline", "offline allocation for a known harvest profile (JSON)");
  add_common(s_off, off);
  auto* s_on = app.add_subcommand("solve-online", "Monte Carlo of the online policies, one CSV row per mode");
  add_common(s_on, on);
  std::string on_modes = "dp,mv,greedy";
  s_on->add_option("--modes", on_modes, "comma separated policies");
  auto* s_sw = app.add_subcommand("sweep", "run the configured sweep and write CSV");
  add_common(s_sw, sw);
  auto* s_orc = app.add_subcommand("oracle-check", "compare single-frame solvers with the grid oracle (JSON)");
  add_common(s_orc, orc);

  CLI11_PARSE(app, argc, argv);

  if (*s_off) return run_json(off, false);
  if (*s_on) return run_csv(on, on_modes.c_str(), false);
  if (*s_sw) return run_csv(sw, nullptr, true);
  return run_json(orc, true);
}
