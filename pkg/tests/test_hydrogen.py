"""Hydrogen transport: trapping laws, drift-diffusion FE, staggered coupling."""

import os

import numpy as np
import pytest

from constikit.fe.meshgen import interval_mesh, rect_mesh
from constikit.hydrogen import (
    AVOGADRO,
    R_GAS,
    TransportModel,
    TransportParams,
    TransportState,
    capacity,
    occupancy,
    oriani_trapped,
    staggered_couple,
    transport_step,
    trap_density,
)

PAPER = TransportParams(d_l=1.27e-8, n_l=8.469, v_h=2.0e-6, w_b=60.0e3,
                        temperature=300.0, c0=0.00346)


class TestTrapDensity:
    def test_virgin_material(self):
        # exponent 23.26 - 2.33 at zero plastic strain
        assert trap_density(0.0) == pytest.approx(10 ** 20.93 / AVOGADRO, rel=1e-12)
        assert trap_density(0.0) == pytest.approx(1.413e-3, rel=1e-3)

    def test_saturation(self):
        assert trap_density(60.0) == pytest.approx(10 ** 23.26 / AVOGADRO, rel=1e-9)
        assert trap_density(60.0) == pytest.approx(0.3022, rel=1e-3)

    def test_strictly_increasing(self):
        eps = np.linspace(0.0, 2.0, 300)
        nt = trap_density(eps)
        assert np.all(np.diff(nt) > 0.0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            trap_density(-0.1)


class TestOriani:
    def test_zero_lattice_zero_trapped(self):
        assert oriani_trapped(0.0, 1e-3, PAPER) == 0.0

    def test_paper_occupancy_regime(self):
        theta = (PAPER.c0 / PAPER.n_l) * np.exp(PAPER.w_b / (R_GAS * 300.0))
        assert theta == pytest.approx(1.144e7, rel=1e-3)
        nt = trap_density(0.0)
        ct = oriani_trapped(PAPER.c0, nt, PAPER)
        assert ct / nt == pytest.approx(1.0 - 1.0 / theta, rel=1e-9)
        assert ct / nt > 1.0 - 1e-6

    def test_trapped_strictly_below_density(self):
        rng = np.random.default_rng(90)
        for _ in range(50):
            c = 10.0 ** rng.uniform(-12, 2)
            nt = 10.0 ** rng.uniform(-6, 1)
            assert 0.0 < oriani_trapped(c, nt, PAPER) < nt


class TestCapacity:
    def test_zero_limit(self):
        nt = 2.5e-3
        assert capacity(0.0, nt, PAPER) == pytest.approx(
            nt * PAPER.binding_factor / PAPER.n_l, rel=1e-12)

    def test_saturated_limit(self):
        assert capacity(10.0, 1e-3, PAPER) < 1e-12

    def test_matches_fd_on_100_random_states(self):
        # sample around the occupancy transition where the derivative is
        # well-conditioned for central differences
        rng = np.random.default_rng(91)
        c_mid = PAPER.n_l / PAPER.binding_factor
        for _ in range(100):
            c = c_mid * 10.0 ** rng.uniform(-3, 3)
            nt = 10.0 ** rng.uniform(-4, 0)
            h = 1e-5 * c
            fd = (oriani_trapped(c + h, nt, PAPER)
                  - oriani_trapped(c - h, nt, PAPER)) / (2 * h)
            assert capacity(c, nt, PAPER) == pytest.approx(fd, rel=1e-6)


class TestTransportStep:
    def test_uniform_state_is_stationary(self):
        mesh = interval_mesh(0.01, 50)
        state = TransportState(c_l=np.full(mesh.n_nodes, PAPER.c0),
                               sigma_h=np.full(mesh.n_nodes, 100e6),
                               eps_p=np.zeros(mesh.n_nodes))
        out = transport_step(state, state.sigma_h, state.eps_p, 100.0, PAPER, mesh)
        np.testing.assert_allclose(out.c_l, PAPER.c0, rtol=1e-12)

    def test_steady_state_matches_drift_balance(self):
        # no-flux bar with a frozen linear stress ramp 0..500 MPa:
        # C_L ~ exp(V_H sigma_h / R T), end-to-end ratio e^0.401
        mesh = interval_mesh(0.01, 199)
        x = mesh.nodes[:, 0]
        sigma = 500e6 * x / 0.01
        model = TransportModel(mesh, PAPER)
        c = np.full(mesh.n_nodes, PAPER.c0)
        nt = trap_density(np.zeros(mesh.n_nodes))
        for _ in range(60):
            c = model.step(c, sigma, nt, 500.0)
        expected = np.exp(PAPER.v_h * sigma / (R_GAS * 300.0))
        ratio = c / c[0]
        np.testing.assert_allclose(ratio, expected / expected[0], rtol=1e-2)
        assert c[-1] / c[0] == pytest.approx(np.exp(0.40093), rel=1e-3)

    def test_mass_conserved_with_frozen_traps(self):
        mesh = interval_mesh(0.01, 80)
        x = mesh.nodes[:, 0]
        sigma = 400e6 * np.sin(np.pi * x / 0.01)
        model = TransportModel(mesh, PAPER)
        eps = np.zeros(mesh.n_nodes)
        nt = trap_density(eps)
        c = np.full(mesh.n_nodes, PAPER.c0)
        total0 = model.total_content(c, eps)
        for _ in range(25):
            c = model.step(c, sigma, nt, 300.0)
        total1 = model.total_content(c, eps)
        assert abs(total1 - total0) / total0 <= 1e-4

    def test_time_convergence_order(self):
        # one step vs two half steps: backward Euler is first order
        mesh = interval_mesh(0.01, 100)
        x = mesh.nodes[:, 0]
        sigma = 500e6 * x / 0.01
        model = TransportModel(mesh, PAPER)
        nt = trap_density(np.zeros(mesh.n_nodes))
        c0 = np.full(mesh.n_nodes, PAPER.c0)

        def advance(dt, n):
            c = c0.copy()
            for _ in range(n):
                c = model.step(c, sigma, nt, dt)
            return c

        ref = advance(12.5, 16)
        errs = []
        for dt, n in ((200.0, 1), (100.0, 2), (50.0, 4)):
            errs.append(np.linalg.norm(advance(dt, n) - ref))
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders >= 0.9)

    def test_trapped_bounded_by_density_everywhere(self):
        mesh = rect_mesh(2e-3, 1e-3, 8, 4, etype="quad4")
        x = mesh.nodes[:, 0]
        sigma = 300e6 * x / 2e-3
        eps = 0.05 * (x / 2e-3) ** 2
        state = TransportState(c_l=np.full(mesh.n_nodes, PAPER.c0),
                               sigma_h=np.zeros(mesh.n_nodes),
                               eps_p=np.zeros(mesh.n_nodes))
        for _ in range(5):
            state = transport_step(state, sigma, eps, 100.0, PAPER, mesh,
                                   fixed_nodes=mesh.select_nodes({"x": 0.0}))
            assert np.all(state.c_l >= -1e-15)
            assert np.all(state.c_t >= 0.0)
            assert np.all(state.c_t <= state.n_t * (1 + 1e-12))


class TestStaggeredCoupling:
    def _case(self, traction):
        from constikit.fe.casefile import load_case

        path = os.path.join(os.path.dirname(__file__), "..", "src",
                            "constikit", "cases", "hydrogen_strip.yaml")
        case = load_case(path)
        # desk-test size: coarser mesh, fewer steps
        from constikit.fe.meshgen import plate_with_hole
        case.mesh = plate_with_hole(width=5e-3, height=5e-3, radius=1e-3,
                                    n_hoop=6, n_radial=6)
        case.stepping.dt = [2000.0] * 8
        case.neumann[0].traction = np.array([traction, 0.0])
        return case

    def test_zero_load_reduces_to_pure_diffusion(self):
        case = self._case(0.0)
        res = staggered_couple(case, PAPER, fixed_where={"x": 5e-3})
        # uniform initial state + uniform boundary: stays at c0
        np.testing.assert_allclose(res.c_l[-1], PAPER.c0, rtol=1e-10)
        assert np.max(np.abs(res.sigma_h[-1])) < 1.0

    def test_concentration_tracks_stress_peak(self):
        case = self._case(120e6)
        res = staggered_couple(case, PAPER, fixed_where={"x": 5e-3})
        c, s = res.c_l[-1], res.sigma_h[-1]
        corr = np.corrcoef(c, s)[0, 1]
        assert corr > 0.9
        assert np.argmax(c) == np.argmax(s) or c[np.argmax(s)] > 0.95 * np.max(c)

    def test_rigid_response_matches_uncoupled_transport(self):
        case = self._case(0.0)
        res = staggered_couple(case, PAPER, fixed_where={"x": 5e-3})
        mesh = case.mesh
        model = TransportModel(mesh, PAPER, mesh.select_nodes({"x": 5e-3}))
        c = np.full(mesh.n_nodes, PAPER.c0)
        nt = trap_density(np.zeros(mesh.n_nodes))
        for dt in case.stepping.dt:
            c = model.step(c, np.zeros(mesh.n_nodes), nt, dt)
        np.testing.assert_allclose(res.c_l[-1], c, rtol=1e-10, atol=1e-18)
