"""FE assembly and Newton driver: patch tests, equilibrium, convergence order."""

import numpy as np
import pytest

from constikit.errors import IncrementFailureError
from constikit.fe.assembly import FEModel
from constikit.fe.meshgen import box_mesh, plate_with_hole, rect_mesh
from constikit.fe.newton import (
    DirichletBC,
    NewtonSolver,
    stationary_schedule,
)
from constikit.material_api import Regime
from constikit.materials import IsotropicElastic, LinearElastic, NeoHookean, create

ELASTIC = IsotropicElastic(1e9, 0.3)


def affine_dirichlet(mesh, nodes, a, b=None):
    """Dirichlet pinning u = A x (+ b) at the given nodes, all components."""
    dim = mesh.dim
    b = np.zeros(dim) if b is None else b
    dofs, vals = [], []
    for n in nodes:
        u = a @ mesh.nodes[n] + b
        for c in range(dim):
            dofs.append(n * dim + c)
            vals.append(u[c])
    return DirichletBC(np.array(dofs, dtype=int), np.array(vals))


def boundary_nodes(mesh):
    out = set()
    for _, _, nodes in mesh.boundary_sides():
        out.update(nodes)
    return sorted(out)


MESHES_2D = [
    ("tri3", lambda: rect_mesh(2.0, 1.0, 4, 3, etype="tri3", distort=0.25)),
    ("tri6", lambda: rect_mesh(2.0, 1.0, 3, 2, etype="tri6", distort=0.25)),
    ("quad4", lambda: rect_mesh(2.0, 1.0, 4, 3, etype="quad4", distort=0.25)),
]
MESHES_3D = [
    ("tet4", lambda: box_mesh(1, 1, 1, 2, 2, 2, etype="tet4", distort=0.2)),
    ("tet10", lambda: box_mesh(1, 1, 1, 2, 2, 2, etype="tet10", split="five",
                               distort=0.0)),
    ("hex8", lambda: box_mesh(1, 1, 1, 2, 2, 2, etype="hex8", distort=0.2)),
]


class TestPatch:
    @pytest.mark.parametrize("name,build", MESHES_2D)
    def test_patch_2d(self, name, build):
        mesh = build()
        mesh.validate_jacobians()
        model = FEModel(mesh, {0: LinearElastic(ELASTIC)},
                        Regime.SMALL_STRAIN, model="plane_strain")
        a = np.array([[1e-3, 4e-4], [-2e-4, 6e-4]])
        bc = affine_dirichlet(mesh, boundary_nodes(mesh), a)
        solver = NewtonSolver(model, [bc], np.zeros(model.ndof))
        u_hist, trace, committed, _ = solver.solve(stationary_schedule(1))
        assert trace.increments[-1].n_iterations == 1

        u = u_hist[-1]
        # exact affine solution everywhere
        exact = mesh.nodes @ a.T
        np.testing.assert_allclose(u.reshape(-1, 2), exact,
                                   atol=1e-10 * np.max(np.abs(exact)))
        # interior residual vanishes
        f_int, _, _ = model.assemble(u, committed, 1.0, need_matrix=False)
        scale = np.max(np.abs(f_int))
        assert np.max(np.abs(f_int[solver.free])) <= 1e-10 * scale
        # constant stress across all Gauss points
        stresses = np.array([st[1:7] for el in committed.states for st in el])
        assert np.max(np.ptp(stresses, axis=0)) <= 1e-9 * np.max(np.abs(stresses))

    @pytest.mark.parametrize("name,build", MESHES_3D)
    def test_patch_3d(self, name, build):
        mesh = build()
        mesh.validate_jacobians()
        model = FEModel(mesh, {0: LinearElastic(ELASTIC)}, Regime.SMALL_STRAIN)
        a = np.array([[1e-3, 4e-4, -1e-4],
                      [-2e-4, 6e-4, 3e-4],
                      [2e-4, -5e-4, 8e-4]])
        bc = affine_dirichlet(mesh, boundary_nodes(mesh), a)
        solver = NewtonSolver(model, [bc], np.zeros(model.ndof))
        u_hist, trace, committed, _ = solver.solve(stationary_schedule(1))
        assert trace.increments[-1].n_iterations == 1
        u = u_hist[-1]
        exact = mesh.nodes @ a.T
        np.testing.assert_allclose(u.reshape(-1, 3), exact,
                                   atol=1e-10 * np.max(np.abs(exact)))
        f_int, _, _ = model.assemble(u, committed, 1.0, need_matrix=False)
        scale = np.max(np.abs(f_int))
        assert np.max(np.abs(f_int[solver.free])) <= 1e-10 * scale
        stresses = np.array([st[1:7] for el in committed.states for st in el])
        assert np.max(np.ptp(stresses, axis=0)) <= 1e-9 * np.max(np.abs(stresses))


class TestSingleElement:
    def test_tet4_hand_assembly(self):
        # one tetrahedron under an affine field: f_int = V * B^T sigma
        mesh = box_mesh(1, 1, 1, 1, 1, 1, etype="tet4")
        mesh.elements = mesh.elements[:1]
        mesh.tags = mesh.tags[:1]
        model = FEModel(mesh, {0: LinearElastic(ELASTIC)}, Regime.SMALL_STRAIN)
        a = np.array([[2e-3, 1e-4, 0.0],
                      [0.0, -1e-3, 2e-4],
                      [3e-4, 0.0, 5e-4]])
        u = (mesh.nodes @ a.T).ravel()
        committed = model.initial_gauss_state()
        f_int, _, _ = model.assemble(u, committed, 1.0, need_matrix=False)

        conn = mesh.elements[0]
        coords = mesh.nodes[conn]
        _, dn = mesh.etype.shape_values[0]
        jac = coords.T @ dn
        vol = np.linalg.det(jac) / 6.0
        dndx = dn @ np.linalg.inv(jac)
        eps = 0.5 * (a + a.T)
        lam, mu = ELASTIC.lam, ELASTIC.mu
        sig = lam * np.trace(eps) * np.eye(3) + 2 * mu * eps
        expected = np.zeros(model.ndof)
        dofs = (conn[:, None] * 3 + np.arange(3)).ravel()
        expected[dofs] = vol * (dndx @ sig.T).ravel()
        np.testing.assert_allclose(f_int, expected, rtol=1e-12, atol=1e-6)

    def test_zero_displacement_zero_residual(self):
        mesh = rect_mesh(1.0, 1.0, 2, 2, etype="quad4")
        model = FEModel(mesh, {0: LinearElastic(ELASTIC)},
                        Regime.SMALL_STRAIN, model="plane_strain")
        f_int, _, _ = model.assemble(np.zeros(model.ndof),
                                     model.initial_gauss_state(), 1.0,
                                     need_matrix=False)
        assert np.all(f_int == 0.0)


class TestNeumannAndReactions:
    def test_uniaxial_traction_plane_stress(self):
        # plane-stress strip in tension: sigma = t, eps = t/E
        mesh = rect_mesh(2.0, 1.0, 4, 2, etype="quad4")
        mat = LinearElastic(IsotropicElastic(1e9, 0.25))
        model = FEModel(mesh, {0: mat}, Regime.SMALL_STRAIN, model="plane_stress")
        t = 1e6
        f_ext = model.neumann_force(mesh.select_sides({"x": 2.0}), [t, 0.0])
        bcs = [
            DirichletBC(np.array([n * 2 for n in mesh.select_nodes({"x": 0.0})]),
                        np.zeros(len(mesh.select_nodes({"x": 0.0})))),
            DirichletBC(np.array([n * 2 + 1 for n in mesh.select_nodes({"y": 0.0})]),
                        np.zeros(len(mesh.select_nodes({"y": 0.0})))),
        ]
        solver = NewtonSolver(model, bcs, f_ext)
        u_hist, trace, committed, reactions = solver.solve(stationary_schedule(2))
        assert trace.converged_all()
        # both norms recorded every iteration; final active norm under tol
        for rec in trace.increments:
            assert rec.n_iterations >= 1
            for it in rec.iterations:
                assert np.isfinite(it.norm_abaqus) and np.isfinite(it.norm_comsol)
            assert rec.iterations[-1].norm_comsol < solver.tol
        u = u_hist[-1].reshape(-1, 2)
        np.testing.assert_allclose(u[mesh.select_nodes({"x": 2.0}), 0],
                                   2.0 * t / 1e9, rtol=1e-9)
        # transverse contraction: nu * t / E
        np.testing.assert_allclose(u[mesh.select_nodes({"y": 1.0}), 1],
                                   -0.25 * t / 1e9, rtol=1e-9)
        # reaction balance
        rx = reactions[-1][0::2]
        assert abs(np.sum(rx) + 1.0 * t) <= 1e-8 * t  # edge area = 1 x thickness

    def test_reaction_equilibrium_every_increment(self):
        mesh = plate_with_hole(n_hoop=6, n_radial=6)
        mat = create("j2", [70e9, 0.2, 243e6, 2171e6])
        model = FEModel(mesh, {0: mat}, Regime.SMALL_STRAIN, model="plane_stress")
        f_ext = model.neumann_force(mesh.select_sides({"x": 18e-3}), [133.65e6, 0.0])
        x0 = mesh.select_nodes({"x": 0.0})
        y0 = mesh.select_nodes({"y": 0.0})
        bcs = [DirichletBC(np.array([n * 2 for n in x0]), np.zeros(len(x0))),
               DirichletBC(np.array([n * 2 + 1 for n in y0]), np.zeros(len(y0)))]
        solver = NewtonSolver(model, bcs, f_ext)
        _, trace, _, reactions = solver.solve(stationary_schedule(6))
        assert trace.converged_all()
        for k, r in enumerate(reactions):
            factor = (k + 1) / 6
            applied = factor * np.sum(f_ext[0::2])
            assert abs(np.sum(r[0::2]) + applied) <= 1e-8 * abs(applied)


class TestNewtonConvergence:
    def test_linear_problem_single_iteration(self):
        mesh = box_mesh(1, 1, 1, 2, 2, 2, etype="hex8")
        model = FEModel(mesh, {0: LinearElastic(ELASTIC)}, Regime.SMALL_STRAIN)
        top = mesh.select_nodes({"z": 1.0})
        bot = mesh.select_nodes({"z": 0.0})
        bcs = [
            DirichletBC(np.array([n * 3 + 2 for n in top]),
                        np.full(len(top), 0.01)),
            DirichletBC(np.concatenate([[n * 3, n * 3 + 1, n * 3 + 2] for n in bot]),
                        np.zeros(3 * len(bot))),
        ]
        solver = NewtonSolver(model, bcs, np.zeros(model.ndof))
        _, trace, _, _ = solver.solve(stationary_schedule(3))
        assert all(t.n_iterations == 1 for t in trace.increments)

    def test_neo_hookean_quadratic_tail(self):
        # single hex8 stretched 20% in one increment: fitted order >= 1.8
        mesh = box_mesh(1, 1, 1, 1, 1, 1, etype="hex8")
        model = FEModel(mesh, {0: NeoHookean(IsotropicElastic(1e6, 0.3))},
                        Regime.FINITE_STRAIN)
        grab = lambda where, comp, val: DirichletBC(
            np.array([n * 3 + comp for n in mesh.select_nodes(where)]),
            np.full(len(mesh.select_nodes(where)), val))
        bcs = [grab({"z": 0.0}, 2, 0.0), grab({"x": 0.0}, 0, 0.0),
               grab({"y": 0.0}, 1, 0.0), grab({"z": 1.0}, 2, 0.2)]
        solver = NewtonSolver(model, bcs, np.zeros(model.ndof), tol=1e-10)
        _, trace, _, _ = solver.solve([(1.0, 1.0, 1.0)])
        errs = np.array([it.norm_comsol for it in trace.increments[-1].iterations])
        errs = errs[errs > 1e-14]
        assert len(errs) >= 3
        # fit log(e_{k+1}) = p log(e_k) + c on the final iterations
        x = np.log(errs[:-1])
        y = np.log(errs[1:])
        p = np.polyfit(x[-3:], y[-3:], 1)[0]
        assert p >= 1.8

    def test_nonconvergence_raises_with_trace(self):
        mesh = box_mesh(1, 1, 1, 1, 1, 1, etype="hex8")
        model = FEModel(mesh, {0: NeoHookean(IsotropicElastic(1e6, 0.3))},
                        Regime.FINITE_STRAIN)
        grab = lambda where, comp, val: DirichletBC(
            np.array([n * 3 + comp for n in mesh.select_nodes(where)]),
            np.full(len(mesh.select_nodes(where)), val))
        # absurd one-shot compression with a tiny iteration budget and no cuts
        bcs = [grab({"z": 0.0}, 2, 0.0), grab({"x": 0.0}, 0, 0.0),
               grab({"y": 0.0}, 1, 0.0), grab({"z": 1.0}, 2, -0.95)]
        solver = NewtonSolver(model, bcs, np.zeros(model.ndof),
                              tol=1e-12, max_iter=1, max_cuts=0)
        with pytest.raises(IncrementFailureError) as exc:
            solver.solve([(1.0, 1.0, 1.0)])
        assert exc.value.trace is not None
