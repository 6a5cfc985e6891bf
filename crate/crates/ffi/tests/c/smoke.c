#include <stdio.h>
#include <string.h>

#include "hypervsa.h"

#define CHECK(call)                                                        \
  do {                                                                     \
    HvStatus s_ = (call);                                                  \
    if (s_ != HV_STATUS_OK) {                                              \
      fprintf(stderr, "%s failed: %d %s\n", #call, (int)s_, hv_last_error()); \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  HvRng *rng = hv_rng_new(7, 0);
  HvVector *a = NULL, *b = NULL, *ab = NULL, *back = NULL;
  CHECK(hv_vector_random(0, 4096, rng, &a));
  CHECK(hv_vector_random(0, 4096, rng, &b));
  CHECK(hv_bind(a, b, &ab));
  CHECK(hv_bind(ab, b, &back));
  double s = 0.0;
  CHECK(hv_similarity(back, a, &s));
  if (s != 1.0) {
    fprintf(stderr, "unbind similarity %f\n", s);
    return 1;
  }

  HvVector *g = NULL;
  if (hv_vector_random(0, 100, rng, &g) != HV_STATUS_OK) return 1;
  if (hv_similarity(a, g, &s) != HV_STATUS_DIM_MISMATCH || hv_last_error() == NULL) {
    fprintf(stderr, "expected a dimension mismatch\n");
    return 1;
  }

  HvCdcReport r;
  CHECK(hv_cdc(784, 10000, 3, &r));
  if (r.binary_hdc.rounded != 295 || r.group.rounded != 405 || r.perceptron.rounded != 1299) {
    fprintf(stderr, "cdc %llu %llu %llu\n", (unsigned long long)r.binary_hdc.rounded,
            (unsigned long long)r.group.rounded, (unsigned long long)r.perceptron.rounded);
    return 1;
  }

  double third[9] = {1, -1.0 / 3, -1.0 / 3, -1.0 / 3, 1, -1.0 / 3, -1.0 / 3, -1.0 / 3, 1};
  bool feasible = false;
  CHECK(hv_check_expressible(third, 3, 1e-9, &feasible, NULL));
  if (!feasible) return 1;

  hv_vector_free(a);
  hv_vector_free(b);
  hv_vector_free(ab);
  hv_vector_free(back);
  hv_vector_free(g);
  hv_rng_free(rng);
  printf("ok %s\n", hv_version());
  return 0;
}
