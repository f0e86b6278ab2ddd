/* splice <template> <out> NAME=EXPR ...
 *
 * Replaces every whole-word occurrence of NAME in the template with
 * (EXPR).  Exits nonzero if any requested anchor never occurs, so a typo
 * in an anchor name cannot produce a silently unspliced program.
 */
#include <ctype.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static char *read_file(const char *path) {
  FILE *f = fopen(path, "rb");
  if (!f) return 0;
  fseek(f, 0, SEEK_END);
  long n = ftell(f);
  fseek(f, 0, SEEK_SET);
  char *buf = malloc(n + 1);
  if (fread(buf, 1, n, f) != (size_t) n) {
    fclose(f);
    free(buf);
    return 0;
  }
  buf[n] = 0;
  fclose(f);
  return buf;
}

static int word_char(char c) {
  return isalnum((unsigned char) c) || c == '_';
}

/* replace whole-word `name` with `(expr)`; returns replacement count */
static int substitute(char **text, const char *name, const char *expr) {
  size_t nlen = strlen(name);
  size_t elen = strlen(expr);
  int hits = 0;
  for (char *at = *text;;) {
    char *hit = strstr(at, name);
    if (!hit) break;
    if ((hit > *text && word_char(hit[-1])) || word_char(hit[nlen])) {
      at = hit + 1;
      continue;
    }
    size_t before = hit - *text;
    size_t rest = strlen(hit + nlen);
    char *out = malloc(before + elen + rest + 3);
    memcpy(out, *text, before);
    out[before] = '(';
    memcpy(out + before + 1, expr, elen);
    out[before + 1 + elen] = ')';
    memcpy(out + before + 2 + elen, hit + nlen, rest + 1);
    free(*text);
    *text = out;
    at = out + before + 2 + elen;
    hits++;
  }
  return hits;
}

int main(int argc, char **argv) {
  if (argc < 4) {
    fprintf(stderr, "usage: %s <template> <out> NAME=EXPR ...\n", argv[0]);
    return 1;
  }
  char *text = read_file(argv[1]);
  if (!text) {
    fprintf(stderr, "splice: cannot read %s\n", argv[1]);
    return 1;
  }
  for (int i = 3; i < argc; i++) {
    char *eq = strchr(argv[i], '=');
    if (!eq || eq == argv[i]) {
      fprintf(stderr, "splice: bad binding %s\n", argv[i]);
      free(text);
      return 1;
    }
    *eq = 0;
    if (substitute(&text, argv[i], eq + 1) == 0) {
      fprintf(stderr, "splice: anchor %s not found in %s\n", argv[i], argv[1]);
      free(text);
      return 1;
    }
  }
  FILE *f = fopen(argv[2], "w");
  if (!f || fputs(text, f) == EOF || fclose(f) != 0) {
    fprintf(stderr, "splice: cannot write %s\n", argv[2]);
    free(text);
    return 1;
  }
  free(text);
  return 0;
}
