#include <math.h>
#include <stdio.h>
#include <string.h>

#include "lightcone.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s (line %d)\n", #cond, __LINE__); return 1; } } while (0)

int main(void) {
    CHECK(strlen(lc_version()) > 0);

    LcParams *p = NULL;
    CHECK(lc_params_worked(&p) == LC_STATUS_OK);
    CHECK(lc_params_n(p) == 2);

    LcVerdict v;
    CHECK(lc_classify(p, &v) == LC_STATUS_OK);
    CHECK(v == LC_VERDICT_BOUNDED);

    LcWitness *w = NULL;
    CHECK(lc_witness_new(p, &w) == LC_STATUS_OK);
    double t, lo, hi;
    CHECK(lc_witness_t(w, &t, &lo, &hi) == LC_STATUS_OK);
    CHECK(lo < t && t < hi);
    CHECK(lc_witness_identities_hold(w) == 1);
    lc_witness_free(w);
    lc_params_free(p);

    double zero[1] = {0.0};
    CHECK(lc_params_new(1, 0.5, 2.0, zero, zero, zero, zero, NULL, &p) == LC_STATUS_INVALID_INPUT);
    char msg[256];
    CHECK(lc_last_error_length() > 1);
    CHECK(lc_last_error_message(msg, sizeof msg) == LC_STATUS_OK);

    double l[1] = {0.0}, r[1] = {3.0}, x[1] = {0.0}, y[1] = {1.0}, stated, corrected;
    CHECK(lc_tube_abs_closed(1, l, r, x, y, &stated, &corrected) == LC_STATUS_OK);
    CHECK(fabs(corrected - 2.0) < 1e-12);

    puts("ok");
    return 0;
}
