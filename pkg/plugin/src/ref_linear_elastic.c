/* Isotropic linear-elastic material against the plugin wire contract.
 *
 * props = [E, nu]; small strain, no state variables:
 *
 *   stress_out = stress_in + D dstran,  ddsdde = D
 *
 * with the engineering-shear stiffness (lambda/mu blocks, mu shear diag).
 */
#include "plugin_common.h"

void umat_entry(UMAT_ENTRY_ARGS)
{
    (void)statev; (void)stran; (void)time; (void)dtime; (void)nstatv;
    (void)dfgrd0; (void)dfgrd1; (void)drot;

    *status = 0;
    if (ntens != 6 || nprops < 2) {
        *status = 2;
        return;
    }
    const double e = props[0];
    const double nu = props[1];
    const double lam = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    const double mu = e / (2.0 * (1.0 + nu));

    double d[6][6] = {{0.0}};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j)
            d[i][j] = lam;
        d[i][i] += 2.0 * mu;
        d[i + 3][i + 3] = mu;
    }

    for (int i = 0; i < 6; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 6; ++j)
            acc += d[i][j] * dstran[j];
        stress[i] += acc;
    }
    for (int col = 0; col < 6; ++col)
        for (int row = 0; row < 6; ++row)
            ddsdde[col * 6 + row] = d[row][col];
}
