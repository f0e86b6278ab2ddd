/* StateDump CSV: one header line
 *   # system=<name> cells=<n> t=<float> step=<int>
 * followed by one row per interior cell,
 *   i,x,<var1>,...,<varNV>
 * with every float printed to 17 significant digits so binary64 values
 * survive a write/read round trip bit for bit.
 */
#ifndef STATEDUMP_H
#define STATEDUMP_H

#include <stddef.h>

#define SD_MAX_NAME 64

typedef struct {
  char system[SD_MAX_NAME];
  int cells;
  double t;
  long step;
  int nvars;
  double *x;    /* cells entries */
  double *vals; /* cells * nvars entries, row-major */
} StateDump;

/* Both return 0 on success.  On failure sd_read leaves a message in err. */
int sd_read(const char *path, StateDump *sd, char *err, size_t errlen);
int sd_write(const char *path, const StateDump *sd);
void sd_free(StateDump *sd);

/* Largest |a - b| over all value columns, or -1.0 on shape mismatch. */
double sd_linf(const StateDump *a, const StateDump *b);

#endif
