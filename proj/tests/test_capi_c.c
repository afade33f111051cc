/* The public header must compile as C and link against the shared library. */
#include <quotefam/quotefam.h>

#include <stdio.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

int main(void) {
  qf_config* config = qf_config_new();
  char buf[128];
  size_t needed = 0;
  size_t d = 0;
  qf_rate_model* model;
  qf_simfamily* fam = NULL;

  EXPECT(config != NULL);
  EXPECT(qf_config_set(config, "max-edit", "2") == QF_OK);
  EXPECT(qf_config_get(config, "max_edit", buf, sizeof buf, &needed) == QF_OK);
  EXPECT(strcmp(buf, "2") == 0);
  EXPECT(needed == 2);
  EXPECT(qf_config_set(config, "max_edit", "0") == QF_OK);
  EXPECT(qf_config_validate(config) == QF_ERR_CONFIG);
  EXPECT(strstr(qf_last_error(), "max_edit") != NULL);
  qf_config_free(config);

  EXPECT(qf_token_edit_distance("is subjected", "is being subjected", &d) == QF_OK);
  EXPECT(d == 1);

  model = qf_rate_model_constant(0.0, 0.0);
  EXPECT(qf_simulate_family(model, 8, 25, 3, &fam) == QF_OK);
  EXPECT(qf_simfamily_versions(fam) == 1);
  EXPECT(qf_simfamily_mentions(fam) == 25);
  qf_simfamily_free(fam);
  qf_rate_model_free(model);

  if (failures) return 1;
  puts("c header checks passed");
  return 0;
}
