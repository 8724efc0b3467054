#include "fiberip.h"
#include <math.h>
#include <stdio.h>
#include <string.h>

static int fail(const char *what) {
    fprintf(stderr, "%s: %s\n", what, fip_last_error());
    return 1;
}

int main(void) {
    const double m[2] = {6.0, 12.0};
    const double k[2] = {-1e-7, 5e-25};
    FipLaw *law = NULL;
    if (fip_law_new(m, k, 2, 0.02, 0.02, 1.0, 1.0, &law) != FIP_STATUS_OK) return fail("law");
    double v = 0.0;
    if (fip_issip_value(law, 0.0, 0.001, &v) != FIP_STATUS_OK) return fail("value");
    FipDerivatives d;
    if (fip_issip_derivatives(law, 0.0, 0.001, &d) != FIP_STATUS_OK) return fail("derivs");
    if (d.phi != v) return fail("phi mismatch");
    double gap = 0.0;
    if (fip_equilibrium_gap(law, &gap) != FIP_STATUS_OK) return fail("gap");
    const double before = v;
    if (fip_issip_value(law, 0.0, -1.0, &v) != FIP_STATUS_CONTACT) return fail("contact expected");
    if (v != before) return fail("output written on failure");
    if (strlen(fip_last_error()) == 0) return fail("message expected");
    fip_law_free(law);
    double g = 0.0;
    if (fip_gamma(5.0, &g) != FIP_STATUS_OK || g != 24.0) return fail("gamma");
    printf("%s %.17g %.17g\n", fip_version(), v, gap);
    return 0;
}
