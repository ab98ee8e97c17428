/* Conformance harness for the reference plugins.
 *
 * Loads the libraries dynamically (the same way any host would), resolves
 * umat_entry, and checks the documented behaviours:
 *
 *   neo-Hookean:  F = I            -> zero stress, status 0
 *                 F = 1.1 I        -> hydrostatic E/(3(1-2nu)) (J-1)
 *                 det F < 0        -> status 1, outputs untouched
 *                 repeated call    -> bitwise identical outputs
 *   elastic:      dstran = 0       -> stress passthrough
 *                 uniaxial dstran  -> lambda/mu response
 *
 * Usage: test_plugin <libconstikit_ref.so> <libconstikit_ref_le.so>
 */
#include <dlfcn.h>
#include <math.h>
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

typedef void (*entry_fn)(double*, double*, double*, const double*,
                         const double*, const double*, double, const double*,
                         int32_t, int32_t, const double*, const double*,
                         const double*, int32_t, int32_t*);

static int failures = 0;

static void check(int ok, const char* what)
{
    printf("%s: %s\n", ok ? "PASS" : "FAIL", what);
    if (!ok)
        failures++;
}

static entry_fn load(const char* path)
{
    void* lib = dlopen(path, RTLD_NOW | RTLD_LOCAL);
    if (!lib) {
        fprintf(stderr, "cannot open %s: %s\n", path, dlerror());
        exit(2);
    }
    entry_fn fn = (entry_fn)dlsym(lib, "umat_entry");
    if (!fn) {
        fprintf(stderr, "no umat_entry in %s\n", path);
        exit(2);
    }
    return fn;
}

static void call_finite(entry_fn fn, const double f[9], const double props[2],
                        double stress[6], double ddsdde[36], int32_t* status)
{
    double stran[6] = {0}, dstran[6] = {0}, time2[2] = {0};
    double eye[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    fn(stress, NULL, ddsdde, stran, dstran, time2, 1.0, props, 2, 0,
       eye, f, eye, 6, status);
}

int main(int argc, char** argv)
{
    if (argc < 3) {
        fprintf(stderr, "usage: %s <neo_lib> <elastic_lib>\n", argv[0]);
        return 2;
    }
    entry_fn neo = load(argv[1]);
    entry_fn ela = load(argv[2]);
    const double props[2] = {1.0e6, 0.3};

    /* reference configuration is stress free */
    {
        double f[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        double stress[6] = {0}, dd[36] = {0};
        int32_t status = 99;
        call_finite(neo, f, props, stress, dd, &status);
        int ok = status == 0;
        for (int i = 0; i < 6; ++i)
            ok = ok && fabs(stress[i]) < 1e-12;
        check(ok, "neo-hookean F=I gives zero stress");
    }

    /* hydrostatic dilation */
    {
        double f[9] = {1.1, 0, 0, 0, 1.1, 0, 0, 0, 1.1};
        double stress[6] = {0}, dd[36] = {0};
        int32_t status = 99;
        call_finite(neo, f, props, stress, dd, &status);
        double jm1 = 1.1 * 1.1 * 1.1 - 1.0;
        double expect = props[0] / (3.0 * (1.0 - 2.0 * props[1])) * jm1;
        int ok = status == 0;
        for (int i = 0; i < 3; ++i)
            ok = ok && fabs(stress[i] - expect) < 1e-6 * expect;
        for (int i = 3; i < 6; ++i)
            ok = ok && fabs(stress[i]) < 1e-9 * expect;
        ok = ok && fabs(expect - 2.758e5) < 1e3;
        check(ok, "neo-hookean F=1.1I hydrostatic 2.758e5 Pa");
    }

    /* inverted configuration is rejected without touching outputs */
    {
        double f[9] = {-1, 0, 0, 0, 1, 0, 0, 0, 1};
        double stress[6], dd[36];
        for (int i = 0; i < 6; ++i)
            stress[i] = 123.25;
        for (int i = 0; i < 36; ++i)
            dd[i] = -7.5;
        int32_t status = 0;
        call_finite(neo, f, props, stress, dd, &status);
        int ok = status == 1;
        for (int i = 0; i < 6; ++i)
            ok = ok && stress[i] == 123.25;
        for (int i = 0; i < 36; ++i)
            ok = ok && dd[i] == -7.5;
        check(ok, "neo-hookean det F < 0 sets status 1, outputs untouched");
    }

    /* bitwise stability across repeated calls */
    {
        double f[9] = {1.07, 0.02, -0.01, 0.03, 0.95, 0.04, 0.01, -0.02, 1.1};
        double s1[6] = {0}, s2[6] = {0}, d1[36] = {0}, d2[36] = {0};
        int32_t st1 = 0, st2 = 0;
        call_finite(neo, f, props, s1, d1, &st1);
        call_finite(neo, f, props, s2, d2, &st2);
        int ok = st1 == 0 && st2 == 0
                 && memcmp(s1, s2, sizeof s1) == 0
                 && memcmp(d1, d2, sizeof d1) == 0;
        check(ok, "neo-hookean repeated calls are bitwise identical");
    }

    /* elastic passthrough and uniaxial response */
    {
        double stress[6] = {3.0e5, -1.0e5, 0, 5.0e4, 0, 0};
        double keep[6];
        memcpy(keep, stress, sizeof keep);
        double dd[36] = {0}, stran[6] = {0}, dstran[6] = {0}, time2[2] = {0};
        double eye[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        int32_t status = 9;
        ela(stress, NULL, dd, stran, dstran, time2, 1.0, props, 2, 0,
            eye, eye, eye, 6, &status);
        int ok = status == 0 && memcmp(stress, keep, sizeof keep) == 0;
        check(ok, "elastic dstran=0 passthrough is bit exact");

        double lam = props[0] * props[1]
                     / ((1 + props[1]) * (1 - 2 * props[1]));
        double mu = props[0] / (2 * (1 + props[1]));
        memset(stress, 0, sizeof stress);
        dstran[0] = 1e-3;
        ela(stress, NULL, dd, stran, dstran, time2, 1.0, props, 2, 0,
            eye, eye, eye, 6, &status);
        ok = status == 0
             && fabs(stress[0] - (lam + 2 * mu) * 1e-3) < 1e-9 * props[0]
             && fabs(stress[1] - lam * 1e-3) < 1e-9 * props[0]
             && fabs(dd[0] - (lam + 2 * mu)) < 1e-6
             && fabs(dd[6 * 3 + 3] - mu) < 1e-6;
        check(ok, "elastic uniaxial strain gives lambda/mu response");
    }

    printf(failures ? "%d FAILURES\n" : "ALL OK\n", failures);
    return failures ? 1 : 0;
}
