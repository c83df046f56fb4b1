#include <stdio.h>
#include "swor.h"

int main(void) {
    const int64_t num[4] = {415, 25, 25, 85};
    const int64_t den[4] = {1000, 100, 100, 1000};
    SworDesign *d = NULL;
    if (swor_design_new(num, den, 4, 2, &d) != SWOR_STATUS_OK) {
        fprintf(stderr, "%s\n", swor_last_error_message());
        return 1;
    }
    size_t tuple[2] = {0, 1};
    int64_t a = 0, b = 0;
    if (swor_design_joint_pmf_exact(d, tuple, 2, &a, &b) != SWOR_STATUS_OK || a != 199 || b != 1200) {
        return 2;
    }
    double min = 0.0;
    SworVerdict verdict = SWOR_VERDICT_PSD;
    if (swor_design_psd(d, 1e-9, &min, &verdict) != SWOR_STATUS_OK || verdict != SWOR_VERDICT_INDEFINITE) {
        return 3;
    }
    swor_design_free(d);

    SworDesign *bad = NULL;
    if (swor_design_new(num, den, 4, 3, &bad) != SWOR_STATUS_INFEASIBLE || bad != NULL) {
        return 4;
    }
    printf("ok %lld/%lld %.6f\n", (long long)a, (long long)b, min);
    return 0;
}
