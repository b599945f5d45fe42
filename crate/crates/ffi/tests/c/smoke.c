#include <stdio.h>
#include <stdlib.h>

#include "nppac.h"

int main(void) {
    NppacSim *sim = NULL;
    if (nppac_sim_new_from_config("nx = 16\nny = 16\n", &sim) != NPPAC_STATUS_OK) {
        fprintf(stderr, "create: %s\n", nppac_last_error());
        return 1;
    }
    if (nppac_sim_step(sim, 3) != NPPAC_STATUS_OK) {
        fprintf(stderr, "step: %s\n", nppac_last_error());
        return 1;
    }
    size_t n = 0, k = 0;
    double t = 0.0;
    nppac_sim_num_nodes(sim, &n);
    nppac_sim_time(sim, &t, &k);
    double *u = malloc(n * sizeof(double));
    if (nppac_sim_copy_field(sim, NPPAC_FIELD_U, u, n - 1) != NPPAC_STATUS_BUFFER_TOO_SMALL) {
        return 1;
    }
    if (nppac_sim_copy_field(sim, NPPAC_FIELD_U, u, n) != NPPAC_STATUS_OK) {
        return 1;
    }
    printf("nodes=%zu k=%zu t=%.6f u0=%.6f version=%s\n", n, k, t, u[0], nppac_version());
    free(u);
    nppac_sim_free(sim);
    return 0;
}
