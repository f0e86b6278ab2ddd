/* StateDump round trip: writer followed by parser must reproduce every
 * value bit for bit, including signed zero, subnormals, and the extremes
 * of the binary64 range. */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "../src/statedump.h"

static int failures = 0;

static void check(int ok, const char *what) {
  printf("%s %s\n", ok ? "ok  " : "FAIL", what);
  if (!ok) failures++;
}

static int same_bits(double a, double b) {
  return memcmp(&a, &b, sizeof a) == 0;
}

int main(void) {
  const double tricky[] = {
    0.1, -0.0, 1.0 / 3.0, 4.9406564584124654e-324, 2.2250738585072014e-308,
    1.7976931348623157e308, -1.2345678901234567e-9, 3.141592653589793,
  };
  enum { CELLS = 24, NVARS = 3 };
  StateDump out = {
    .cells = CELLS, .t = 0.8999999999999999, .step = 171, .nvars = NVARS,
  };
  snprintf(out.system, sizeof out.system, "isothermal-euler");
  out.x = malloc(CELLS * sizeof *out.x);
  out.vals = malloc(CELLS * NVARS * sizeof *out.vals);
  for (int i = 0; i < CELLS; i++) {
    out.x[i] = (i + 0.5) / CELLS;
    for (int k = 0; k < NVARS; k++)
      out.vals[i * NVARS + k] = tricky[(i * NVARS + k) % 8];
  }

  const char *path = "/tmp/charness-roundtrip.csv";
  check(sd_write(path, &out) == 0, "writer succeeds");

  StateDump in;
  char err[256] = "";
  check(sd_read(path, &in, err, sizeof err) == 0, "parser succeeds");
  check(strcmp(in.system, out.system) == 0, "system name survives");
  check(in.cells == out.cells && in.nvars == out.nvars, "shape survives");
  check(same_bits(in.t, out.t) && in.step == out.step, "header survives");

  int exact = 1;
  for (int i = 0; i < CELLS && exact; i++) {
    exact = same_bits(in.x[i], out.x[i]);
    for (int k = 0; k < NVARS && exact; k++)
      exact = same_bits(in.vals[i * NVARS + k], out.vals[i * NVARS + k]);
  }
  check(exact, "all values identical to the last bit");
  check(sd_linf(&in, &out) == 0.0, "self distance is zero");

  StateDump narrow = in;
  narrow.nvars = NVARS - 1;
  check(sd_linf(&narrow, &out) == -1.0, "shape mismatch is signalled");

  check(sd_read("/tmp/charness-no-such-file.csv", &narrow,
                err, sizeof err) != 0 && err[0] != 0,
        "missing file reports an error");

  sd_free(&in);
  free(out.x);
  free(out.vals);
  remove(path);
  return failures != 0;
}
