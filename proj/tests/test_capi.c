#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "ehlc/ehlc.h"

static int failures = 0;
#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

int main(int argc, char** argv) {
  char path[1024];
  const char* dir = argc > 1 ? argv[1] : ".";

  ehlc_config* bad = NULL;
  snprintf(path, sizeof path, "%s/bad.json", dir);
  EXPECT(ehlc_config_load(path, &bad) == EHLC_CONFIG_INVALID);
  EXPECT(strstr(ehlc_last_error(), "harvest") != NULL);
  EXPECT(ehlc_config_load("/no/such/file.json", &bad) == EHLC_CONFIG_INVALID);
  EXPECT(ehlc_config_parse(NULL, &bad) == EHLC_INVALID_ARGUMENT);

  ehlc_config* cfg = NULL;
  snprintf(path, sizeof path, "%s/small.json", dir);
  EXPECT(ehlc_config_load(path, &cfg) == EHLC_OK);
  if (!cfg) return 1;
  EXPECT(ehlc_config_set_modes(cfg, "dp,warp") == EHLC_CONFIG_INVALID);
  EXPECT(ehlc_config_set_strategy(cfg, (ehlc_strategy)7) == EHLC_INVALID_ARGUMENT);

  ehlc_result* res = NULL;
  EXPECT(ehlc_run(cfg, &res) == EHLC_OK);
  EXPECT(ehlc_result_rows(res) == 8);
  ehlc_row row;
  EXPECT(ehlc_result_row(res, 0, &row) == EHLC_OK);
  EXPECT(strcmp(row.sweep_var, "r") == 0);
  EXPECT(strcmp(row.mode, "offline") == 0);
  EXPECT(row.avg_rate_nats > 0 && row.error[0] == '\0');
  EXPECT(ehlc_result_row(res, 8, &row) == EHLC_INVALID_ARGUMENT);
  char* csv1 = NULL;
  EXPECT(ehlc_result_csv(res, &csv1) == EHLC_OK);
  ehlc_result_free(res);

  /* same config and seed: byte-identical CSV */
  char* csv2 = NULL;
  res = NULL;
  EXPECT(ehlc_run(cfg, &res) == EHLC_OK);
  EXPECT(ehlc_result_csv(res, &csv2) == EHLC_OK);
  EXPECT(csv1 && csv2 && strcmp(csv1, csv2) == 0);
  ehlc_result_free(res);
  ehlc_string_free(csv1);
  ehlc_string_free(csv2);

  char* json = NULL;
  EXPECT(ehlc_solve_offline(cfg, &json) == EHLC_OK);
  EXPECT(json && strstr(json, "\"solutions\"") != NULL);
  ehlc_string_free(json);

  int passed = 0;
  json = NULL;
  EXPECT(ehlc_oracle_check(cfg, &json, &passed) == EHLC_OK);
  EXPECT(passed == 1);
  ehlc_string_free(json);
  ehlc_config_free(cfg);

  ehlc_frame_params f = {1.0, 0.0, 1.0, 1.0};
  ehlc_battery_params b = {0.0, 1.5, INFINITY, 0.0};
  double h[1] = {1.0}, p[1] = {1.0}, obj = 0, t = 0;
  EXPECT(ehlc_solve_single(EHLC_LSC, 1.0, &f, &b, h, p, 1, &obj, &t) == EHLC_OK);
  EXPECT(fabs(obj - log(2.0)) < 1e-12);
  EXPECT(fabs(t - 1.0) < 1e-12);
  EXPECT(ehlc_solve_single(EHLC_LTM, 1.0, &f, &b, h, p, 1, &obj, NULL) == EHLC_OK);
  EXPECT(fabs(obj - log(2.0)) < 1e-12);
  b.r = -1;
  EXPECT(ehlc_solve_single(EHLC_LTM, 1.0, &f, &b, h, p, 1, &obj, NULL) == EHLC_INVALID_ARGUMENT);
  EXPECT(strcmp(ehlc_status_name(EHLC_CONFIG_INVALID), "ConfigInvalid") == 0);

  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  return failures ? 1 : 0;
}
