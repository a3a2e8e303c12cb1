/* Solves the reference calibration through the C header and static library. */
#include <math.h>
#include <stdio.h>
#include "annuitize.h"

int main(void) {
    AnnuitizeParams *p = annuitize_params_reference();
    AnnuitizeShockSolution *s = NULL;
    if (annuitize_solve_shock(p, &s) != ANNUITIZE_STATUS_OK) {
        fprintf(stderr, "solve failed: %s\n", annuitize_last_error());
        return 1;
    }
    double xl = 0.0, xh = 0.0;
    annuitize_shock_thresholds(s, &xl, &xh);
    printf("%s %.2f %.2f\n", annuitize_shock_regime(s), xl, xh);
    AnnuitizeShockSolution *none = NULL;
    int code = annuitize_solve_shock(NULL, &none);
    printf("null %d %s\n", code, annuitize_last_error());
    annuitize_shock_solution_free(s);
    annuitize_params_free(p);
    return 0;
}
