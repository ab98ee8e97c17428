/* Compressible neo-Hookean material against the plugin wire contract.
 *
 * props = [E, nu]; finite strain (uses dfgrd1 only), no state variables.
 *
 *   sigma = (mu/J) dev(B) + K (J - 1) I,  B = F F^T,  J = det F
 *
 * Corotational-rate modulus (written to ddsdde, umat pairs, engineering
 * shear columns, column-major):
 *
 *   C_ijkl = (1/J) [ mu/2 (d_ik B_jl + d_il B_jk + B_ik d_jl + B_il d_jk)
 *                    - (2 mu / 3) d_ij B_kl ] + K (2J - 1) d_ij d_kl
 */
#include "plugin_common.h"

void umat_entry(UMAT_ENTRY_ARGS)
{
    (void)statev; (void)stran; (void)dstran; (void)time; (void)dtime;
    (void)nstatv; (void)dfgrd0; (void)drot;

    *status = 0;
    if (ntens != 6 || nprops < 2) {
        *status = 2;
        return;
    }
    const double e = props[0];
    const double nu = props[1];
    const double mu = e / (2.0 * (1.0 + nu));
    const double bulk = e / (3.0 * (1.0 - 2.0 * nu));

    double f[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            f[i][j] = mat_at(dfgrd1, i, j);

    const double jdet = det3x3(f);
    if (jdet <= 0.0) {
        *status = 1;
        return;
    }

    double b[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int q = 0; q < 3; ++q)
                acc += f[i][q] * f[j][q];
            b[i][j] = acc;
        }
    const double trb = b[0][0] + b[1][1] + b[2][2];

    for (int a = 0; a < 6; ++a) {
        const int i = VOIGT_I[a], j = VOIGT_J[a];
        double dev = b[i][j] - (i == j ? trb / 3.0 : 0.0);
        stress[a] = (mu / jdet) * dev
                  + (i == j ? bulk * (jdet - 1.0) : 0.0);
    }

    const double vol = bulk * (2.0 * jdet - 1.0);
    for (int col = 0; col < 6; ++col) {
        const int k = VOIGT_I[col], l = VOIGT_J[col];
        for (int row = 0; row < 6; ++row) {
            const int i = VOIGT_I[row], j = VOIGT_J[row];
            double c = 0.5 * mu * ((i == k ? b[j][l] : 0.0)
                                   + (i == l ? b[j][k] : 0.0)
                                   + (j == l ? b[i][k] : 0.0)
                                   + (j == k ? b[i][l] : 0.0));
            c -= (2.0 * mu / 3.0) * (i == j ? b[k][l] : 0.0);
            c /= jdet;
            c += (i == j && k == l) ? vol : 0.0;
            ddsdde[col * 6 + row] = c;
        }
    }
}
