#include <math.h>
#include <stdio.h>
#include <string.h>

#include "invset.h"

#define CHECK(cond)                                                        \
  do {                                                                     \
    if (!(cond)) {                                                         \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond,       \
              invset_last_error());                                        \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  InvsetPadic *x = NULL, *y = NULL, *sum = NULL;
  char *s = NULL;

  CHECK(invset_padic_new("1/3", 3, 16, &x) == INVSET_STATUS_OK);
  CHECK(invset_padic_norm(x, &s) == INVSET_STATUS_OK);
  CHECK(strcmp(s, "3") == 0);
  invset_string_free(s);

  CHECK(invset_padic_new("2/3", 3, 16, &y) == INVSET_STATUS_OK);
  CHECK(invset_padic_add(x, y, &sum) == INVSET_STATUS_OK);
  CHECK(invset_padic_norm(sum, &s) == INVSET_STATUS_OK);
  CHECK(strcmp(s, "1") == 0);
  invset_string_free(s);

  CHECK(invset_padic_new("1", 4, 16, &y) == INVSET_STATUS_DOMAIN_ERROR);
  CHECK(strlen(invset_last_error()) > 0);

  InvsetPadic *three = NULL;
  InvsetCantorPoint *pt = NULL;
  CHECK(invset_padic_new("3", 2, 8, &three) == INVSET_STATUS_OK);
  CHECK(invset_cantor_encode(three, &pt) == INVSET_STATUS_OK);
  CHECK(invset_cantor_point_coordinate(pt, &s) == INVSET_STATUS_OK);
  CHECK(strcmp(s, "8/9") == 0);
  invset_string_free(s);

  double dim = 0;
  CHECK(invset_hausdorff_dimension(2, &dim) == INVSET_STATUS_OK);
  CHECK(fabs(dim - log(2.0) / log(3.0)) < 1e-12);

  InvsetChshReport *r = NULL;
  bool undefined = false;
  CHECK(invset_chsh_run(10, 0, 7, true, &r) == INVSET_STATUS_OK);
  CHECK(invset_chsh_report_a_prime(r, &s) == INVSET_STATUS_OK);
  CHECK(strcmp(s, "181/64") == 0);
  invset_string_free(s);
  CHECK(invset_chsh_report_a_undefined(r, &undefined) == INVSET_STATUS_OK);
  CHECK(undefined);

  CHECK(invset_padic_norm(NULL, &s) == INVSET_STATUS_NULL_POINTER);

  invset_chsh_report_free(r);
  invset_cantor_point_free(pt);
  invset_padic_free(three);
  invset_padic_free(sum);
  invset_padic_free(x);
  printf("ok %s\n", invset_version());
  return 0;
}
