#include <stdio.h>
#include <string.h>
#include "kacbench.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "line %d: %s\n", __LINE__, #cond);        \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    KbSystem *sys = NULL;
    CHECK(kb_system_cycle(5, &sys) == KB_STATUS_OK);
    CHECK(kb_system_n_points(sys) == 5);

    size_t target[] = {0, 1};
    char *integral = NULL;
    bool holds = false;
    CHECK(kb_classical_kac(sys, target, 2, &integral, &holds) == KB_STATUS_OK);
    CHECK(holds && strcmp(integral, "1/1") == 0);
    kb_string_free(integral);

    KbAllocation *alloc = NULL;
    CHECK(kb_allocation_greedy(sys, target, 2, 1000, &alloc) == KB_STATUS_OK);
    int64_t coords[4];
    size_t len = 0;
    CHECK(kb_allocation_kappa(alloc, 3, coords, 4, &len) == KB_STATUS_OK);
    CHECK(len == 1 && coords[0] == -2);
    size_t size = 0;
    CHECK(kb_allocation_cell_size(alloc, 1, &size) == KB_STATUS_OK && size == 3);

    const char *f[] = {"0", "0", "0", "1", "0"};
    char *json = NULL;
    CHECK(kb_allocation_identity(alloc, f, 5, &json) == KB_STATUS_OK);
    CHECK(strstr(json, "\"equal\":true") != NULL);
    kb_string_free(json);

    CHECK(kb_system_new("Q", 1, NULL, NULL, &sys) == KB_STATUS_INVALID_ARGUMENT);
    CHECK(kb_last_error() != NULL);

    kb_allocation_free(alloc);
    kb_system_free(sys);
    puts("ok");
    return 0;
}
