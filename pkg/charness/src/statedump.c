#include "statedump.h"

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static void fail(char *err, size_t errlen, const char *msg, const char *arg) {
  if (err && errlen)
    snprintf(err, errlen, "%s%s%s", msg, arg ? ": " : "", arg ? arg : "");
}

static int count_columns(const char *line) {
  int n = 1;
  for (const char *p = line; *p && *p != '\n'; p++)
    if (*p == ',') n++;
  return n;
}

int sd_read(const char *path, StateDump *sd, char *err, size_t errlen) {
  memset(sd, 0, sizeof *sd);
  FILE *f = fopen(path, "r");
  if (!f) {
    fail(err, errlen, "cannot open", path);
    return 1;
  }
  char line[8192];
  if (!fgets(line, sizeof line, f) ||
      sscanf(line, "# system=%63s cells=%d t=%lf step=%ld",
             sd->system, &sd->cells, &sd->t, &sd->step) != 4 ||
      sd->cells <= 0) {
    fail(err, errlen, "bad header", path);
    fclose(f);
    return 1;
  }
  int rows = 0;
  while (fgets(line, sizeof line, f)) {
    if (line[0] == '#' || line[0] == '\n') continue;
    if (rows == 0) {
      sd->nvars = count_columns(line) - 2;
      if (sd->nvars < 1) {
        fail(err, errlen, "no value columns", path);
        fclose(f);
        return 1;
      }
      sd->x = malloc(sd->cells * sizeof *sd->x);
      sd->vals = malloc((size_t) sd->cells * sd->nvars * sizeof *sd->vals);
    }
    if (rows >= sd->cells) {
      fail(err, errlen, "more rows than cells", path);
      break;
    }
    char *p = line;
    long idx = strtol(p, &p, 10);
    if (idx != rows || *p != ',') {
      fail(err, errlen, "bad row index", path);
      break;
    }
    sd->x[rows] = strtod(p + 1, &p);
    for (int k = 0; k < sd->nvars; k++) {
      if (*p != ',') {
        fail(err, errlen, "short row", path);
        fclose(f);
        sd_free(sd);
        return 1;
      }
      sd->vals[(size_t) rows * sd->nvars + k] = strtod(p + 1, &p);
    }
    rows++;
  }
  fclose(f);
  if (rows != sd->cells) {
    if (rows < sd->cells) fail(err, errlen, "row count below header cells", path);
    sd_free(sd);
    return 1;
  }
  return 0;
}

int sd_write(const char *path, const StateDump *sd) {
  FILE *f = fopen(path, "w");
  if (!f) return 1;
  fprintf(f, "# system=%s cells=%d t=%.17g step=%ld\n",
          sd->system, sd->cells, sd->t, sd->step);
  for (int i = 0; i < sd->cells; i++) {
    fprintf(f, "%d,%.17g", i, sd->x[i]);
    for (int k = 0; k < sd->nvars; k++)
      fprintf(f, ",%.17g", sd->vals[(size_t) i * sd->nvars + k]);
    fputc('\n', f);
  }
  return fclose(f) != 0;
}

void sd_free(StateDump *sd) {
  free(sd->x);
  free(sd->vals);
  sd->x = 0;
  sd->vals = 0;
}

double sd_linf(const StateDump *a, const StateDump *b) {
  if (a->cells != b->cells || a->nvars != b->nvars) return -1.0;
  double worst = 0.0;
  for (size_t n = (size_t) a->cells * a->nvars, j = 0; j < n; j++) {
    double d = fabs(a->vals[j] - b->vals[j]);
    if (d > worst || isnan(d)) worst = d;
  }
  return worst;
}
