/* Shared declarations for the reference material plugins.
 *
 * Entry-point contract (all floating point double, all integers int32):
 *
 *   void umat_entry(double* stress,        [6]  in/out, umat order
 *                   double* statev,        [nstatv] in/out
 *                   double* ddsdde,        [36] out, column-major
 *                   const double* stran,   [6]
 *                   const double* dstran,  [6]
 *                   const double* time,    [2] step time, total time
 *                   double dtime,
 *                   const double* props,   [nprops]
 *                   int32_t nprops,
 *                   int32_t nstatv,
 *                   const double* dfgrd0,  [9] column-major
 *                   const double* dfgrd1,  [9] column-major
 *                   const double* drot,    [9] column-major
 *                   int32_t ntens,
 *                   int32_t* status);      0 ok, 1 invalid configuration,
 *                                          2 unsupported call layout
 *
 * No dynamic allocation, no globals: every entry is reentrant and callable
 * concurrently. On nonzero status the output arrays are left untouched.
 */
#ifndef CONSTIKIT_PLUGIN_COMMON_H
#define CONSTIKIT_PLUGIN_COMMON_H

#include <stdint.h>

#define UMAT_ENTRY_ARGS                                                   \
    double* stress, double* statev, double* ddsdde, const double* stran,  \
    const double* dstran, const double* time, double dtime,               \
    const double* props, int32_t nprops, int32_t nstatv,                  \
    const double* dfgrd0, const double* dfgrd1, const double* drot,       \
    int32_t ntens, int32_t* status

void umat_entry(UMAT_ENTRY_ARGS);

/* column-major [9] -> row/col indexed */
static inline double mat_at(const double* m, int row, int col)
{
    return m[col * 3 + row];
}

static inline double det3x3(const double f[3][3])
{
    return f[0][0] * (f[1][1] * f[2][2] - f[1][2] * f[2][1])
         - f[0][1] * (f[1][0] * f[2][2] - f[1][2] * f[2][0])
         + f[0][2] * (f[1][0] * f[2][1] - f[1][1] * f[2][0]);
}

/* umat Voigt slot -> tensor index pair: 11, 22, 33, 12, 13, 23 */
static const int VOIGT_I[6] = {0, 1, 2, 0, 0, 1};
static const int VOIGT_J[6] = {0, 1, 2, 1, 2, 2};

#endif
