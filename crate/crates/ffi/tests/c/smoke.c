/* SPDX-License-Identifier: Apache-2.0 */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "relu_dissect.h"

#define CHECK(expr)                                                        \
  do {                                                                     \
    if (!(expr)) {                                                         \
      const char *msg = rd_last_error();                                   \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #expr,       \
              msg ? msg : "no message");                                   \
      return 1;                                                            \
    }                                                                      \
  } while (0)

static const char *NET =
    "{\"input_dim\": 2, \"layers\": ["
    "{\"type\": \"dense\", \"weights\": [[1.0, 0.2], [-0.3, 1.0], [0.7, 0.7]],"
    " \"bias\": [0.1, -0.2, 0.5]},"
    "{\"type\": \"relu\"},"
    "{\"type\": \"dense\", \"weights\": [[1.0, -2.0, 0.5]], \"bias\": [0.0]}]}";

int main(void) {
  RdNetwork *net = NULL;
  RdPwa *pwa = NULL;
  size_t count = 0;
  double x[2] = {0.3, -0.4};
  double a = 0.0, b = 0.0;
  char *json = NULL;

  CHECK(rd_network_from_json(NET, &net) == RD_STATUS_OK);
  CHECK(rd_convert(net, 10.0, 0, &pwa) == RD_STATUS_OK);
  CHECK(rd_pwa_region_count(pwa, &count) == RD_STATUS_OK);
  CHECK(count == 7);
  CHECK(rd_network_forward(net, x, 2, &a, 1) == RD_STATUS_OK);
  CHECK(rd_pwa_eval(pwa, x, 2, 1e-7, &b, 1) == RD_STATUS_OK);
  CHECK(fabs(a - b) < 1e-12);
  CHECK(rd_pwa_to_json(pwa, &json) == RD_STATUS_OK);
  CHECK(strstr(json, "\"regions\"") != NULL);
  rd_string_free(json);

  x[0] = 20.0;
  CHECK(rd_pwa_eval(pwa, x, 2, 1e-7, &b, 1) == RD_STATUS_OUTSIDE_DOMAIN);
  CHECK(rd_last_error() != NULL);

  rd_pwa_free(pwa);
  rd_network_free(net);
  printf("ok %s\n", rd_version());
  return 0;
}
