/* Conformance driver.
 *
 * For each system/scheme/order combination this generates a standalone C
 * solver with the fvcert toolkit, compiles it with the pinned strict
 * floating-point command, runs it from a preset initial state, runs the
 * native reference simulator with identical inputs, and reports the
 * per-cell L-infinity difference between the two final states.
 *
 * Combinations run concurrently in separate processes (-j).  Exit status
 * is 0 only if every combination stays within tolerance; a deliberately
 * mismatched --native-cfl is reported as DIVERGED.
 *
 *   conformance --diff a.csv b.csv   just compares two dumps.
 */
#include <errno.h>
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include "statedump.h"

#define MAX_COMBOS 64
#define DIR_MAX 512
#define CMD_MAX 8192
#define FULL_MAX (CMD_MAX + DIR_MAX + 64)

typedef struct {
  const char *system;
  const char *scheme;
  int order;
  const char *limiter; /* 0 for order 1 */
} Combo;

static const char *const ALL_SYSTEMS[] = {
  /* builtin roster of the toolkit's `list` subcommand */
  "linear-advection", "inviscid-burgers",
  "maxwell-ey-bz", "maxwell-ez-by", "maxwell-ex-phi", "maxwell-bx-psi",
  "isothermal-euler", "isothermal-euler-transverse",
};
#define N_SYSTEMS ((int) (sizeof ALL_SYSTEMS / sizeof *ALL_SYSTEMS))

typedef struct {
  const char *fvcert;
  const char *cc;      /* pinned compile command prefix */
  const char *workdir;
  const char *init;
  int cells;
  double cfl;
  double native_cfl;
  double t_end;
  double tol;
  long min_steps;
  int jobs;
} Options;

/* exit codes of a single combo run */
enum { RUN_OK, RUN_DIVERGED, RUN_COMPILE, RUN_RUNTIME, RUN_FORMAT, RUN_TOOL };

static int run_logged(const char *cmd, const char *log) {
  char full[FULL_MAX];
  snprintf(full, sizeof full, "%s > %s 2>&1", cmd, log);
  int rc = system(full);
  return rc == 0 ? 0 : 1;
}

static void first_log_line(const char *log, char *out, size_t outlen) {
  out[0] = 0;
  FILE *f = fopen(log, "r");
  if (!f) return;
  if (fgets(out, outlen, f))
    out[strcspn(out, "\n")] = 0;
  fclose(f);
}

static int parse_nv(const char *header_path) {
  FILE *f = fopen(header_path, "r");
  if (!f) return -1;
  char line[256];
  int nv = -1;
  while (fgets(line, sizeof line, f))
    if (sscanf(line, "#define NV %d", &nv) == 1) break;
  fclose(f);
  return nv;
}

/* presets mirror the simulator CLI: the leading variable carries the
   profile, later variables start at rest */
static double preset_value(const char *name, double x) {
  if (strcmp(name, "sine") == 0)
    return 0.5 + 0.25 * sin(2.0 * 3.141592653589793 * x);
  if (strcmp(name, "square") == 0)
    return (x >= 0.25 && x < 0.75) ? 1.0 : 0.5;
  return x < 0.5 ? 1.0 : 0.125; /* riemann */
}

static int write_init(const char *path, const char *system_name,
                      const char *preset, int cells, int nvars) {
  FILE *f = fopen(path, "w");
  if (!f) return 1;
  double dx = 1.0 / cells;
  fprintf(f, "# system=%s cells=%d t=0 step=0\n", system_name, cells);
  for (int i = 0; i < cells; i++) {
    double x = 0.0 + ((double) i + 0.5) * dx;
    fprintf(f, "%d,%.17g,%.17g", i, x, preset_value(preset, x));
    for (int k = 1; k < nvars; k++)
      fputs(",0", f);
    fputc('\n', f);
  }
  return fclose(f) != 0;
}

static void report(const char *dir, const char *text) {
  char path[DIR_MAX + 32];
  snprintf(path, sizeof path, "%s/report.txt", dir);
  FILE *f = fopen(path, "w");
  if (f) {
    fputs(text, f);
    fputc('\n', f);
    fclose(f);
  }
}

static int run_combo(const Options *opt, const Combo *c, const char *dir) {
  char cmd[CMD_MAX], log[DIR_MAX + 32], path[DIR_MAX + 32], line[1024];
  char limiter_flag[128] = "";
  if (c->limiter)
    snprintf(limiter_flag, sizeof limiter_flag, " --limiter %s", c->limiter);
  const char *tag = c->limiter ? c->limiter : "-";

  mkdir(dir, 0777);
  snprintf(cmd, sizeof cmd,
           "%s codegen --system %s --scheme %s --order %d%s"
           " --cells %d --cfl %.17g --bc periodic --out %s",
           opt->fvcert, c->system, c->scheme, c->order, limiter_flag,
           opt->cells, opt->cfl, dir);
  snprintf(log, sizeof log, "%s/codegen.log", dir);
  if (run_logged(cmd, log)) {
    first_log_line(log, line, sizeof line);
    snprintf(cmd, sizeof cmd, "%s %s order=%d %s ERROR codegen: %s",
             c->system, c->scheme, c->order, tag, line);
    report(dir, cmd);
    return RUN_TOOL;
  }

  snprintf(path, sizeof path, "%s/system.h", dir);
  int nv = parse_nv(path);
  snprintf(path, sizeof path, "%s/init.csv", dir);
  if (nv < 1 || write_init(path, c->system, opt->init, opt->cells, nv)) {
    snprintf(cmd, sizeof cmd, "%s %s order=%d %s ERROR format: "
             "cannot stage initial state", c->system, c->scheme, c->order, tag);
    report(dir, cmd);
    return RUN_FORMAT;
  }

  snprintf(cmd, sizeof cmd, "%s -o %s/solver %s/solver.c -lm",
           opt->cc, dir, dir);
  snprintf(log, sizeof log, "%s/compile.log", dir);
  if (run_logged(cmd, log)) {
    first_log_line(log, line, sizeof line);
    snprintf(cmd, sizeof cmd, "%s %s order=%d %s ERROR compile: %s",
             c->system, c->scheme, c->order, tag, line);
    report(dir, cmd);
    return RUN_COMPILE;
  }

  snprintf(cmd, sizeof cmd, "%s/solver %s/init.csv %.17g > %s/c.csv",
           dir, dir, opt->t_end, dir);
  snprintf(log, sizeof log, "%s/run.log", dir);
  char full[FULL_MAX];
  snprintf(full, sizeof full, "%s 2> %s", cmd, log);
  if (system(full) != 0) {
    first_log_line(log, line, sizeof line);
    snprintf(cmd, sizeof cmd, "%s %s order=%d %s ERROR runtime: %s",
             c->system, c->scheme, c->order, tag, line);
    report(dir, cmd);
    return RUN_RUNTIME;
  }

  snprintf(cmd, sizeof cmd,
           "%s simulate --system %s --scheme %s --order %d%s"
           " --cells %d --cfl %.17g --init %s --t-end %.17g"
           " --dump %s/native.csv",
           opt->fvcert, c->system, c->scheme, c->order, limiter_flag,
           opt->cells, opt->native_cfl, opt->init, opt->t_end, dir);
  snprintf(log, sizeof log, "%s/native.log", dir);
  if (run_logged(cmd, log)) {
    first_log_line(log, line, sizeof line);
    snprintf(cmd, sizeof cmd, "%s %s order=%d %s ERROR native: %s",
             c->system, c->scheme, c->order, tag, line);
    report(dir, cmd);
    return RUN_TOOL;
  }

  StateDump got, want;
  char err[256];
  snprintf(path, sizeof path, "%s/c.csv", dir);
  if (sd_read(path, &got, err, sizeof err)) {
    snprintf(cmd, sizeof cmd, "%s %s order=%d %s ERROR format: %s",
             c->system, c->scheme, c->order, tag, err);
    report(dir, cmd);
    return RUN_FORMAT;
  }
  snprintf(path, sizeof path, "%s/native.csv", dir);
  if (sd_read(path, &want, err, sizeof err)) {
    sd_free(&got);
    snprintf(cmd, sizeof cmd, "%s %s order=%d %s ERROR format: %s",
             c->system, c->scheme, c->order, tag, err);
    report(dir, cmd);
    return RUN_FORMAT;
  }

  double linf = sd_linf(&got, &want);
  long steps = got.step < want.step ? got.step : want.step;
  int bad = linf < 0.0 || linf > opt->tol || isnan(linf)
      || steps < opt->min_steps;
  snprintf(cmd, sizeof cmd, "%s %s order=%d %s steps=%ld linf=%.3g %s",
           c->system, c->scheme, c->order, tag, steps,
           linf, bad ? "DIVERGED" : "ok");
  report(dir, cmd);
  sd_free(&got);
  sd_free(&want);
  return bad ? RUN_DIVERGED : RUN_OK;
}

static int diff_mode(const char *a, const char *b, double tol) {
  StateDump da, db;
  char err[256];
  if (sd_read(a, &da, err, sizeof err)) {
    fprintf(stderr, "conformance: %s\n", err);
    return RUN_FORMAT;
  }
  if (sd_read(b, &db, err, sizeof err)) {
    sd_free(&da);
    fprintf(stderr, "conformance: %s\n", err);
    return RUN_FORMAT;
  }
  double linf = sd_linf(&da, &db);
  printf("linf=%.17g\n", linf);
  sd_free(&da);
  sd_free(&db);
  if (linf < 0.0) {
    fprintf(stderr, "conformance: shape mismatch\n");
    return RUN_FORMAT;
  }
  return linf <= tol ? RUN_OK : RUN_DIVERGED;
}

static int parse_combo(char *spec, Combo *c) {
  char *save = 0;
  char *sys = strtok_r(spec, ":", &save);
  char *scheme = strtok_r(0, ":", &save);
  char *order = strtok_r(0, ":", &save);
  char *limiter = strtok_r(0, ":", &save);
  if (!sys || !scheme || !order) return 1;
  c->system = sys;
  c->scheme = scheme;
  c->order = atoi(order);
  c->limiter = limiter;
  if (c->order == 2 && !limiter) return 1;
  return c->order != 1 && c->order != 2;
}

int main(int argc, char **argv) {
  Options opt = {
    .fvcert = "fvcert",
    .cc = "gcc -O1 -ffp-contract=off -fno-fast-math -Wall -Werror",
    .workdir = "conformance-out",
    .init = "sine",
    .cells = 128,
    .cfl = 0.9,
    .native_cfl = -1.0,
    .t_end = 1.2,
    .tol = 1e-12,
    .min_steps = 100,
    .jobs = 4,
  };
  Combo combos[MAX_COMBOS];
  int n_combos = 0;

  for (int i = 1; i < argc; i++) {
    const char *a = argv[i];
    const char *v = i + 1 < argc ? argv[i + 1] : 0;
    if (strcmp(a, "--diff") == 0 && i + 2 < argc)
      return diff_mode(argv[i + 1], argv[i + 2], opt.tol);
    if (!v) {
      fprintf(stderr, "conformance: %s needs a value\n", a);
      return RUN_TOOL;
    }
    if (strcmp(a, "--fvcert") == 0) opt.fvcert = v;
    else if (strcmp(a, "--cc") == 0) opt.cc = v;
    else if (strcmp(a, "--workdir") == 0) opt.workdir = v;
    else if (strcmp(a, "--init") == 0) opt.init = v;
    else if (strcmp(a, "--cells") == 0) opt.cells = atoi(v);
    else if (strcmp(a, "--cfl") == 0) opt.cfl = atof(v);
    else if (strcmp(a, "--native-cfl") == 0) opt.native_cfl = atof(v);
    else if (strcmp(a, "--t-end") == 0) opt.t_end = atof(v);
    else if (strcmp(a, "--tol") == 0) opt.tol = atof(v);
    else if (strcmp(a, "--min-steps") == 0) opt.min_steps = atol(v);
    else if (strcmp(a, "--jobs") == 0 || strcmp(a, "-j") == 0)
      opt.jobs = atoi(v);
    else if (strcmp(a, "--combo") == 0) {
      if (n_combos == MAX_COMBOS || parse_combo(argv[i + 1],
                                                &combos[n_combos])) {
        fprintf(stderr, "conformance: bad combo %s "
                "(want SYSTEM:SCHEME:ORDER[:LIMITER])\n", v);
        return RUN_TOOL;
      }
      n_combos++;
    } else {
      fprintf(stderr, "conformance: unknown option %s\n", a);
      return RUN_TOOL;
    }
    i++;
  }
  if (opt.native_cfl < 0.0) opt.native_cfl = opt.cfl;
  if (opt.jobs < 1) opt.jobs = 1;

  if (n_combos == 0) {
    /* every builtin system, both schemes, both orders */
    for (int s = 0; s < N_SYSTEMS; s++) {
      const char *schemes[] = {"lax-friedrichs", "roe"};
      for (int sc = 0; sc < 2; sc++) {
        combos[n_combos++] = (Combo) {ALL_SYSTEMS[s], schemes[sc], 1, 0};
        combos[n_combos++] = (Combo) {ALL_SYSTEMS[s], schemes[sc], 2,
                                      "minmod"};
      }
    }
  }

  mkdir(opt.workdir, 0777);
  static char dirs[MAX_COMBOS][DIR_MAX];
  for (int i = 0; i < n_combos; i++)
    snprintf(dirs[i], DIR_MAX, "%s/%02d-%s-%s-o%d", opt.workdir, i,
             combos[i].system, combos[i].scheme, combos[i].order);

  pid_t pids[MAX_COMBOS] = {0};
  int status[MAX_COMBOS];
  int next = 0, running = 0, done = 0;
  while (done < n_combos) {
    while (next < n_combos && running < opt.jobs) {
      pid_t pid = fork();
      if (pid == 0)
        _exit(run_combo(&opt, &combos[next], dirs[next]));
      if (pid < 0) {
        perror("fork");
        return RUN_TOOL;
      }
      pids[next++] = pid;
      running++;
    }
    int wstatus;
    pid_t pid = wait(&wstatus);
    if (pid < 0 && errno == EINTR) continue;
    for (int i = 0; i < n_combos; i++)
      if (pids[i] == pid) {
        status[i] = WIFEXITED(wstatus) ? WEXITSTATUS(wstatus) : RUN_TOOL;
        running--;
        done++;
      }
  }

  int failures = 0;
  for (int i = 0; i < n_combos; i++) {
    char path[DIR_MAX + 32], line[CMD_MAX];
    snprintf(path, sizeof path, "%s/report.txt", dirs[i]);
    first_log_line(path, line, sizeof line);
    puts(line[0] ? line : "(missing report)");
    if (status[i] != RUN_OK) failures++;
  }
  printf("combos: %d  ok: %d\n", n_combos, n_combos - failures);
  return failures ? RUN_DIVERGED : RUN_OK;
}
