#include <stdio.h>
#include <string.h>

#include "lattice_vis.h"

#define CHECK(cond)                                             \
  do {                                                          \
    if (!(cond)) {                                              \
      fprintf(stderr, "check failed at line %d: %s\n", __LINE__, #cond); \
      return 1;                                                 \
    }                                                           \
  } while (0)

int main(void) {
  double inv_zeta = 0.0, euler2 = 0.0, delta = 0.0, p = 0.0;
  CHECK(lv_theory_constants(2, 1e-12, &inv_zeta, &euler2) == LV_STATUS_OK);
  CHECK(inv_zeta > 0.6079 && inv_zeta < 0.6080);
  CHECK(lv_delta(2, 1, 2, &delta) == LV_STATUS_OK);
  CHECK(delta > 0.4052 && delta < 0.4053);
  CHECK(lv_delta(2, 1, 6, &delta) == LV_STATUS_UNSUPPORTED_MODULUS);
  CHECK(strstr(lv_last_error(), "unsupported modulus") != NULL);

  LvConfig *cfg = NULL;
  CHECK(lv_config_from_json("{\"k\":2,\"alphas\":[[0.5,0.5]],\"seed\":3}", &cfg) == LV_STATUS_OK);
  char *exact = NULL;
  CHECK(lv_exact_visible_prob(cfg, 2, &exact) == LV_STATUS_OK);
  CHECK(strcmp(exact, "1/2") == 0);
  lv_string_free(exact);

  LvSimulation *sim = NULL;
  CHECK(lv_simulate(cfg, 1, 3, 1, 1, &sim) == LV_STATUS_OK);
  CHECK(lv_simulation_proportion(sim, LV_STAT_VISIBLE, 0, &p) == LV_STATUS_OK);
  CHECK(p == 1.0);
  char *csv = NULL;
  CHECK(lv_simulation_csv(sim, &csv) == LV_STATUS_OK);
  CHECK(strncmp(csv, "stat,k,m,a,n,count,proportion", 29) == 0);
  lv_string_free(csv);
  lv_simulation_free(sim);
  lv_config_free(cfg);

  CHECK(lv_config_from_json("{\"k\":2}", &cfg) == LV_STATUS_INVALID_CONFIG);
  puts("ok");
  return 0;
}
