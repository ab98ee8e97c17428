"""Plugin loader: ABI marshalling, parity with built-ins, fault injection."""

import os
import subprocess
import textwrap
import threading

import numpy as np
import pytest
from util import finite_request, random_f

from constikit.bridge import eval_material
from constikit.errors import (
    ContractViolationError,
    MaterialError,
    PluginLoadError,
    PluginSymbolError,
)
from constikit.material_api import Regime, UmatCall
from constikit.materials import IsotropicElastic, LinearElastic, NeoHookean
from constikit.plugins import load_plugin, open_plugin
from constikit.voigt import umat_strain, umat_stress

PLUGIN_DIR = os.path.join(os.path.dirname(__file__), "..", "plugin")
NEO_LIB = os.path.join(PLUGIN_DIR, "build", "libconstikit_ref.so")
ELASTIC_LIB = os.path.join(PLUGIN_DIR, "build", "libconstikit_ref_le.so")


@pytest.fixture(scope="session", autouse=True)
def built_plugins():
    subprocess.run(["make", "-C", PLUGIN_DIR], check=True,
                   capture_output=True)
    return NEO_LIB, ELASTIC_LIB


def compile_snippet(tmp_path, name, body):
    src = tmp_path / f"{name}.c"
    lib = tmp_path / f"lib{name}.so"
    src.write_text(body)
    subprocess.run(["cc", "-O2", "-fPIC", "-shared", "-o", str(lib), str(src)],
                   check=True, capture_output=True)
    return str(lib)


def make_call(material, f_new, f_old=None, stress_in=None, dstran=None):
    return UmatCall(
        stress_in=umat_stress(np.zeros(6) if stress_in is None else stress_in),
        statev_in=np.zeros(material.nstatv_user),
        stran=umat_strain(np.zeros(6)),
        dstran=umat_strain(np.zeros(6) if dstran is None else dstran),
        time=0.0,
        dtime=1.0,
        props=material.props if hasattr(material, "props") else np.array([]),
        dfgrd0=np.eye(3) if f_old is None else f_old,
        dfgrd1=f_new,
    )


class TestLoader:
    def test_missing_file(self):
        with pytest.raises(PluginLoadError) as err:
            open_plugin("/nonexistent/libnothing.so",
                        metadata=dict(name="x", nprops=0, nstatv_user=0,
                                      regime="finite_strain"))
        assert "libnothing.so" in str(err.value)

    def test_missing_symbol(self, tmp_path):
        lib = compile_snippet(tmp_path, "nosym", "int not_the_entry(void){return 0;}\n")
        with pytest.raises(PluginSymbolError):
            open_plugin(lib, metadata=dict(name="x", nprops=0, nstatv_user=0,
                                           regime="finite_strain"))

    def test_sidecar_metadata(self):
        handle = open_plugin(NEO_LIB)
        assert handle.name == "constikit_ref"
        assert handle.nprops == 2 and handle.nstatv_user == 0
        assert handle.regime is Regime.FINITE_STRAIN

    def test_metadata_mismatch(self):
        with pytest.raises(ContractViolationError):
            load_plugin(NEO_LIB, props=[1e6, 0.3, 99.0])

    def test_search_path_env(self, monkeypatch):
        monkeypatch.setenv("CONSTIKIT_PLUGIN_PATH",
                           os.pathsep.join(["/nowhere",
                                            os.path.join(PLUGIN_DIR, "build")]))
        mat = load_plugin("libconstikit_ref.so", props=[1e6, 0.3])
        assert mat.name == "constikit_ref"

    def test_reload_new_file_picks_new_behavior(self, tmp_path):
        template = textwrap.dedent("""\
            #include <stdint.h>
            void umat_entry(double* stress, double* statev, double* ddsdde,
                            const double* stran, const double* dstran,
                            const double* time, double dtime,
                            const double* props, int32_t nprops,
                            int32_t nstatv, const double* dfgrd0,
                            const double* dfgrd1, const double* drot,
                            int32_t ntens, int32_t* status)
            {
                (void)statev;(void)stran;(void)dstran;(void)time;(void)dtime;
                (void)props;(void)nprops;(void)nstatv;(void)dfgrd0;
                (void)dfgrd1;(void)drot;(void)ntens;
                for (int i = 0; i < 6; ++i) stress[i] = %s;
                for (int i = 0; i < 36; ++i) ddsdde[i] = 1.0;
                *status = 0;
            }
        """)
        meta = dict(name="v", nprops=0, nstatv_user=0, regime="finite_strain")
        lib1 = compile_snippet(tmp_path, "v1", template % "1.0")
        lib2 = compile_snippet(tmp_path, "v2", template % "2.0")
        m1 = load_plugin(lib1, props=[], metadata=meta)
        m2 = load_plugin(lib2, props=[], metadata=meta)
        c = make_call(m1, np.eye(3))
        assert m1.evaluate(c).stress_out.components[0] == 1.0
        assert m2.evaluate(c).stress_out.components[0] == 2.0


class TestConformance:
    def test_identity_call_matches_builtin_bit_exact(self):
        plugin = load_plugin(ELASTIC_LIB, props=[70e9, 0.2])
        builtin = LinearElastic(IsotropicElastic(70e9, 0.2))
        sig0 = np.array([1e6, -2e6, 3e5, 4e4, -5e4, 6e4])
        call = make_call(plugin, np.eye(3), stress_in=sig0)
        a = plugin.evaluate(call)
        b = builtin.evaluate(call)
        assert np.array_equal(a.stress_out.components, b.stress_out.components)

    def test_elastic_random_calls_match_builtin(self):
        plugin = load_plugin(ELASTIC_LIB, props=[70e9, 0.2])
        builtin = LinearElastic(IsotropicElastic(70e9, 0.2))
        rng = np.random.default_rng(80)
        for _ in range(20):
            call = make_call(plugin, np.eye(3),
                             stress_in=1e8 * rng.standard_normal(6),
                             dstran=1e-3 * rng.standard_normal(6))
            a = plugin.evaluate(call)
            b = builtin.evaluate(call)
            np.testing.assert_allclose(a.stress_out.components,
                                       b.stress_out.components, rtol=1e-13)
            np.testing.assert_allclose(a.ddsdde, b.ddsdde, rtol=1e-13)

    def test_neo_hookean_50_call_parity_corpus(self):
        plugin = load_plugin(NEO_LIB, props=[1e6, 0.3])
        builtin = NeoHookean(IsotropicElastic(1e6, 0.3))
        rng = np.random.default_rng(81)
        for _ in range(50):
            f = random_f(rng)
            call = make_call(plugin, f)
            a = plugin.evaluate(call)
            b = builtin.evaluate(call)
            np.testing.assert_allclose(a.stress_out.components,
                                       b.stress_out.components,
                                       rtol=1e-12, atol=1e-12)
            np.testing.assert_allclose(a.ddsdde, b.ddsdde, rtol=1e-12,
                                       atol=1e-12 * np.max(np.abs(b.ddsdde)))

    def test_full_case_parity_with_builtin(self):
        # same twist case solved with the plugin and the built-in material
        from constikit.fe.casefile import load_case
        from constikit.fe.runner import run_case

        path = os.path.join(os.path.dirname(__file__), "..", "src",
                            "constikit", "cases", "twisted_cube_neo.yaml")
        case = load_case(path)
        case.mesh = _small_cube()
        case.stepping.increments = 2
        ref = run_case(case)

        case2 = load_case(path)
        case2.mesh = _small_cube()
        case2.stepping.increments = 2
        case2.materials[0].name = None
        case2.materials[0].plugin = NEO_LIB
        via_plugin = run_case(case2)

        a, b = ref.u_history[-1], via_plugin.u_history[-1]
        assert np.linalg.norm(a - b) <= 1e-10 * np.linalg.norm(a)

    def test_concurrent_hammer_matches_serial(self):
        plugin = load_plugin(NEO_LIB, props=[1e6, 0.3])
        rng = np.random.default_rng(82)
        fs = [random_f(rng) for _ in range(40)]
        serial = [plugin.evaluate(make_call(plugin, f)).stress_out.components
                  for f in fs]
        out = [None] * len(fs)

        def worker(idx0):
            for i in range(idx0, len(fs), 2):
                out[i] = plugin.evaluate(make_call(plugin, fs[i])).stress_out.components

        threads = [threading.Thread(target=worker, args=(k,)) for k in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        for got, want in zip(out, serial):
            assert np.array_equal(got, want)

    def test_nan_emitting_plugin_raises_material_error(self, tmp_path):
        body = textwrap.dedent("""\
            #include <stdint.h>
            #include <math.h>
            void umat_entry(double* stress, double* statev, double* ddsdde,
                            const double* stran, const double* dstran,
                            const double* time, double dtime,
                            const double* props, int32_t nprops,
                            int32_t nstatv, const double* dfgrd0,
                            const double* dfgrd1, const double* drot,
                            int32_t ntens, int32_t* status)
            {
                (void)statev;(void)stran;(void)dstran;(void)time;(void)dtime;
                (void)props;(void)nprops;(void)nstatv;(void)dfgrd0;
                (void)dfgrd1;(void)drot;(void)ntens;
                for (int i = 0; i < 6; ++i) stress[i] = NAN;
                for (int i = 0; i < 36; ++i) ddsdde[i] = 0.0;
                *status = 0;
            }
        """)
        lib = compile_snippet(tmp_path, "nanmat", body)
        mat = load_plugin(lib, props=[], metadata=dict(
            name="nanmat", nprops=0, nstatv_user=0, regime="finite_strain"))
        with pytest.raises(MaterialError):
            mat.evaluate(make_call(mat, np.eye(3)))
        # process still healthy: a good plugin keeps working afterwards
        good = load_plugin(NEO_LIB, props=[1e6, 0.3])
        good.evaluate(make_call(good, np.eye(3)))

    def test_status_flag_raises_material_error(self):
        plugin = load_plugin(NEO_LIB, props=[1e6, 0.3])
        with pytest.raises(MaterialError):
            plugin.evaluate(make_call(plugin, -np.eye(3)))

    def test_bridge_integration(self):
        # plugin is indistinguishable from a built-in through the bridge
        plugin = load_plugin(NEO_LIB, props=[1e6, 0.3])
        builtin = NeoHookean(IsotropicElastic(1e6, 0.3))
        rng = np.random.default_rng(83)
        f = random_f(rng)
        sp = eval_material(finite_request(plugin, np.eye(3), f,
                                          plugin.initial_state()), plugin)
        sb = eval_material(finite_request(builtin, np.eye(3), f,
                                          builtin.initial_state()), builtin)
        np.testing.assert_allclose(sp.s.components, sb.s.components,
                                   rtol=1e-12, atol=1e-9)
        np.testing.assert_allclose(sp.tangent, sb.tangent, rtol=1e-12,
                                   atol=1e-12 * np.max(np.abs(sb.tangent)))


def _small_cube():
    from constikit.fe.meshgen import box_mesh
    return box_mesh(1, 1, 1, 2, 2, 2, etype="tet4")
