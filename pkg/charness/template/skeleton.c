/* Canonical finite-volume runtime skeleton.
 *
 * The four splice anchors below -- DT_EXPR, FLUX_EXPR, UPDATE_EXPR and
 * LIMITER_EXPR -- are bare identifiers, not valid C.  The file refuses to
 * compile until every anchor has been replaced with an expression, so a
 * half-spliced program can never build silently.
 *
 * Grid and system constants are overridable on the compile line with -D.
 * The program reads an initial StateDump CSV, marches the conservative
 * update to the requested end time (final step clipped), and writes a
 * StateDump to stdout; an optional third argument dumps every N steps.
 */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#ifndef SYSTEM_NAME
#define SYSTEM_NAME "unnamed"
#endif
#ifndef NV
#define NV 1
#endif
#ifndef N_CELLS
#define N_CELLS 100
#endif
#ifndef NG
#define NG 2
#endif
#ifndef X_LO
#define X_LO 0.0
#endif
#ifndef X_HI
#define X_HI 1.0
#endif
#ifndef CFL
#define CFL 0.9
#endif
#ifndef BC_PERIODIC
#define BC_PERIODIC 1
#endif

#define DX ((X_HI - X_LO) / N_CELLS)
#define M (N_CELLS + 2 * NG)

static double U[NV][M];
static double UNEW[NV][M];
static double FLX[NV][M];

/* slope-ratio limiter; order-1 splices can supply the constant 1.0 */
static double limiter(double r) {
  return LIMITER_EXPR;
}

static void fill_ghosts(void) {
  for (int k = 0; k < NV; k++) {
    for (int g = 0; g < NG; g++) {
#if BC_PERIODIC
      U[k][g] = U[k][N_CELLS + g];
      U[k][N_CELLS + NG + g] = U[k][NG + g];
#else
      U[k][g] = U[k][NG];
      U[k][N_CELLS + NG + g] = U[k][N_CELLS + NG - 1];
#endif
    }
  }
}

/* largest interior |state| entry; DT_EXPR may use it as a wave-speed bound */
static double max_abs_state(void) {
  double amax = 0.0;
  for (int k = 0; k < NV; k++)
    for (int i = NG; i < N_CELLS + NG; i++)
      amax = fmax(amax, fabs(U[k][i]));
  return amax;
}

static void step(double dt) {
  fill_ghosts();
  for (int j = NG - 1; j < N_CELLS + NG; j++) {
    for (int k = 0; k < NV; k++) {
      FLX[k][j] = FLUX_EXPR;
    }
  }
  for (int i = NG; i < N_CELLS + NG; i++) {
    for (int k = 0; k < NV; k++) {
      UNEW[k][i] = UPDATE_EXPR;
    }
  }
  for (int i = NG; i < N_CELLS + NG; i++)
    for (int k = 0; k < NV; k++)
      U[k][i] = UNEW[k][i];
}

static int state_finite(void) {
  for (int k = 0; k < NV; k++)
    for (int i = NG; i < N_CELLS + NG; i++)
      if (!isfinite(U[k][i])) return 0;
  return 1;
}

static void dump(double t, long step_no) {
  printf("# system=%s cells=%d t=%.17g step=%ld\n",
         SYSTEM_NAME, N_CELLS, t, step_no);
  for (int i = 0; i < N_CELLS; i++) {
    double x = X_LO + (((double) i + 0.5) * DX);
    printf("%d,%.17g", i, x);
    for (int k = 0; k < NV; k++)
      printf(",%.17g", U[k][i + NG]);
    printf("\n");
  }
}

static int read_state(const char *path) {
  FILE *f = fopen(path, "r");
  if (!f) return 0;
  char line[4096];
  int rows = 0;
  while (fgets(line, sizeof line, f)) {
    if (line[0] == '#' || line[0] == '\n') continue;
    char *p = line;
    long idx = strtol(p, &p, 10);
    if (*p == ',') p++;
    strtod(p, &p); /* cell center, recomputed on output */
    for (int k = 0; k < NV; k++) {
      if (*p == ',') p++;
      U[k][idx + NG] = strtod(p, &p);
    }
    rows++;
  }
  fclose(f);
  return rows == N_CELLS;
}

int main(int argc, char **argv) {
  (void) limiter;
  (void) max_abs_state;
  if (argc < 3) {
    fprintf(stderr, "usage: %s <init.csv> <t-end> [cadence]\n", argv[0]);
    return 1;
  }
  if (!read_state(argv[1])) {
    fprintf(stderr, "bad initial state %s\n", argv[1]);
    return 1;
  }
  double t_end = strtod(argv[2], 0);
  long cadence = argc > 3 ? strtol(argv[3], 0, 10) : 0;
  double t = 0.0;
  long step_no = 0;
  while (t < t_end) {
    fill_ghosts();
    double dt = DT_EXPR;
    if (t + dt > t_end) dt = t_end - t;
    step(dt);
    t += dt;
    step_no++;
    if (!state_finite()) {
      fprintf(stderr, "non-finite state at step %ld\n", step_no);
      return 3;
    }
    if (cadence > 0 && step_no % cadence == 0) dump(t, step_no);
  }
  dump(t, step_no);
  return 0;
}
