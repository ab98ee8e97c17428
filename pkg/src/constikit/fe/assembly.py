"""Residual/tangent assembly around the convention bridge.

Small strain uses engineering-shear B-matrices in host component order, so
the host 6x6 tangent (work-conjugate to engineering shears) drops straight
into B^T D B. Plane stress condenses the through-thickness strain per Gauss
point by sub-iterating the material call until the normal stress vanishes.

Finite strain is total Lagrangian: with P = F S and the host's K = dS/dF,
the element tangent contracts A_ijkl = d_ik S_jl + F_iq K_qjkl with the
reference shape-function gradients, which carries the geometric stiffness by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..bridge import eval_material
from ..errors import MaterialError
from ..material_api import HostRequest, Regime
from ..voigt import host_strain, matrix99_to_tensor4, voigt_to_tensor
from .elements import boundary_element
from .mesh import Mesh

_I3 = np.eye(3)


@dataclass
class GaussState:
    """Committed (converged) Gauss-point data for one mesh."""

    states: list            # [element][gauss] -> state vector
    f_old: list | None      # [element][gauss] -> 3x3, finite strain only
    eps_zz: np.ndarray | None  # (n_el, n_gauss), plane stress only

    def copy(self):
        return GaussState(
            states=[[s.copy() for s in el] for el in self.states],
            f_old=None if self.f_old is None else
            [[f.copy() for f in el] for el in self.f_old],
            eps_zz=None if self.eps_zz is None else self.eps_zz.copy(),
        )


class FEModel:
    """Mesh + material assignment + model kind, with assembly operations."""

    def __init__(self, mesh: Mesh, materials: dict, regime: Regime,
                 model: str = "3d", thickness: float = 1.0):
        if model not in ("plane_stress", "plane_strain", "3d"):
            raise ValueError(f"unknown model kind '{model}'")
        if mesh.dim == 2 and model == "3d":
            raise ValueError("2D mesh needs plane_stress or plane_strain")
        if mesh.dim == 3 and model != "3d":
            raise ValueError("3D mesh uses model '3d'")
        if regime is Regime.FINITE_STRAIN and mesh.dim != 3:
            raise ValueError("finite strain assembly is 3D only")
        self.mesh = mesh
        self.materials = materials
        self.regime = regime
        self.model = model
        self.thickness = thickness
        for tag in np.unique(mesh.tags):
            if tag not in materials:
                raise ValueError(f"no material assigned to domain tag {tag}")
            if materials[tag].regime is not regime:
                raise ValueError(
                    f"material '{materials[tag].name}' regime does not match case")

    @property
    def ndof(self) -> int:
        return self.mesh.n_nodes * self.mesh.dim

    def initial_gauss_state(self, initial_user: dict | None = None) -> GaussState:
        """Fresh committed state; ``initial_user`` overrides user slots per tag."""
        from ..material_api import pack_state
        from ..voigt import umat_strain, umat_stress

        states = []
        for tag in self.mesh.tags:
            mat = self.materials[tag]
            if initial_user and tag in initial_user:
                user = np.asarray(initial_user[tag], dtype=float)
                stran = (umat_strain(np.zeros(6))
                         if mat.regime is Regime.SMALL_STRAIN else None)
                state = pack_state(0.0, umat_stress(np.zeros(6)), stran, user)
            else:
                state = mat.initial_state()
            states.append([state.copy() for _ in range(self.mesh.etype.n_gauss)])
        f_old = None
        if self.regime is Regime.FINITE_STRAIN:
            f_old = [[_I3.copy() for _ in range(self.mesh.etype.n_gauss)]
                     for _ in range(self.mesh.n_elements)]
        eps_zz = None
        if self.model == "plane_stress":
            eps_zz = np.zeros((self.mesh.n_elements, self.mesh.etype.n_gauss))
        return GaussState(states, f_old, eps_zz)

    # -- external load ------------------------------------------------------

    def neumann_force(self, sides, traction) -> np.ndarray:
        """Consistent nodal force of a constant traction on boundary sides."""
        dim = self.mesh.dim
        traction = np.asarray(traction, dtype=float)
        f = np.zeros(self.ndof)
        for _, _, nodes in sides:
            belem = boundary_element(dim, len(nodes))
            coords = self.mesh.nodes[list(nodes)]
            for (n, dn), w in zip(belem.shape_values, belem.gauss_weights):
                jac = coords.T @ dn      # dim x (dim-1)
                if dim == 2:
                    measure = np.linalg.norm(jac[:, 0]) * self.thickness
                else:
                    measure = np.linalg.norm(np.cross(jac[:, 0], jac[:, 1]))
                for a, node in enumerate(nodes):
                    f[node * dim:node * dim + dim] += w * measure * n[a] * traction
        return f

    # -- assembly -----------------------------------------------------------

    def assemble(self, u: np.ndarray, committed: GaussState, dtime: float,
                 time: float = 0.0, need_matrix: bool = True):
        """Internal force, tangent, and trial Gauss states at displacement u."""
        if self.regime is Regime.SMALL_STRAIN:
            return self._assemble_small(u, committed, dtime, need_matrix)
        return self._assemble_finite(u, committed, dtime, need_matrix)

    def _element_dofs(self, conn):
        dim = self.mesh.dim
        return (np.asarray(conn)[:, None] * dim + np.arange(dim)).ravel()

    def _assemble_small(self, u, committed, dtime, need_matrix):
        mesh = self.mesh
        dim = mesh.dim
        etype = mesh.etype
        f_int = np.zeros(self.ndof)
        trial = committed.copy()
        rows, cols, vals = [], [], []

        for e, conn in enumerate(mesh.elements):
            mat = self.materials[mesh.tags[e]]
            coords = mesh.nodes[conn]
            dofs = self._element_dofs(conn)
            ue = u[dofs]
            n_eldof = len(dofs)
            ke = np.zeros((n_eldof, n_eldof))
            fe = np.zeros(n_eldof)

            for g, ((nvals, dn), w) in enumerate(zip(etype.shape_values,
                                                     etype.gauss_weights)):
                jac = coords.T @ dn
                detj = np.linalg.det(jac)
                dndx = dn @ np.linalg.inv(jac)
                state = committed.states[e][g]
                try:
                    if dim == 2:
                        b = self._b_matrix_2d(dndx)
                        eps_in = b @ ue    # [exx, eyy, gxy]
                        if self.model == "plane_stress":
                            # thickness condensation needs the tangent even
                            # on stress-only passes
                            ezz0 = committed.eps_zz[e][g]
                            resp, ezz = self._plane_stress_update(
                                mat, state, eps_in, ezz0, dtime)
                            trial.eps_zz[e][g] = ezz
                        else:
                            strain6 = np.array([eps_in[0], eps_in[1], 0.0,
                                                0.0, 0.0, 0.5 * eps_in[2]])
                            resp = eval_material(
                                HostRequest(regime=Regime.SMALL_STRAIN, par=[],
                                            delta=dtime, state_in=state,
                                            strain_total=host_strain(strain6)),
                                mat, stress_only=not need_matrix)
                        sig = resp.s.components[[0, 1, 5]]
                        scale = w * detj * self.thickness
                        fe += scale * (b.T @ sig)
                        if need_matrix:
                            d3 = self._condense_2d(resp.tangent)
                            ke += scale * (b.T @ d3 @ b)
                    else:
                        b = self._b_matrix_3d(dndx)
                        eps = b @ ue       # host order, engineering shears
                        strain6 = eps.copy()
                        strain6[3:] *= 0.5
                        resp = eval_material(
                            HostRequest(regime=Regime.SMALL_STRAIN, par=[],
                                        delta=dtime, state_in=state,
                                        strain_total=host_strain(strain6)),
                            mat, stress_only=not need_matrix)
                        scale = w * detj
                        fe += scale * (b.T @ resp.s.components)
                        if need_matrix:
                            ke += scale * (b.T @ resp.tangent @ b)
                except MaterialError as err:
                    err.context.update(element=e, gauss_point=g)
                    raise
                trial.states[e][g] = resp.state_out

            f_int[dofs] += fe
            if need_matrix:
                rows.append(np.repeat(dofs, n_eldof))
                cols.append(np.tile(dofs, n_eldof))
                vals.append(ke.ravel())

        k = None
        if need_matrix:
            k = sp.coo_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(self.ndof, self.ndof)).tocsc()
        return f_int, k, trial

    def _plane_stress_update(self, mat, state, eps_in, ezz, dtime):
        """Condense eps_zz until the through-thickness stress vanishes."""
        resp = None
        for _ in range(40):
            strain6 = np.array([eps_in[0], eps_in[1], ezz,
                                0.0, 0.0, 0.5 * eps_in[2]])
            resp = eval_material(
                HostRequest(regime=Regime.SMALL_STRAIN, par=[], delta=dtime,
                            state_in=state, strain_total=host_strain(strain6)),
                mat)
            sig = resp.s.components
            tol = 1e-8 * max(np.max(np.abs(sig)), 1.0)
            if abs(sig[2]) <= tol:
                return resp, ezz
            ezz -= sig[2] / resp.tangent[2, 2]
        raise MaterialError("plane-stress thickness condensation did not converge",
                            context={"residual": float(sig[2])})

    def _condense_2d(self, d_host):
        idx = [0, 1, 5]
        dpp = d_host[np.ix_(idx, idx)]
        if self.model == "plane_strain":
            return dpp
        dpz = d_host[np.ix_(idx, [2])]
        dzp = d_host[np.ix_([2], idx)]
        return dpp - dpz @ dzp / d_host[2, 2]

    @staticmethod
    def _b_matrix_2d(dndx):
        n = dndx.shape[0]
        b = np.zeros((3, 2 * n))
        b[0, 0::2] = dndx[:, 0]
        b[1, 1::2] = dndx[:, 1]
        b[2, 0::2] = dndx[:, 1]
        b[2, 1::2] = dndx[:, 0]
        return b

    @staticmethod
    def _b_matrix_3d(dndx):
        # rows: exx, eyy, ezz, g_yz, g_xz, g_xy (host order, engineering)
        n = dndx.shape[0]
        b = np.zeros((6, 3 * n))
        b[0, 0::3] = dndx[:, 0]
        b[1, 1::3] = dndx[:, 1]
        b[2, 2::3] = dndx[:, 2]
        b[3, 1::3] = dndx[:, 2]
        b[3, 2::3] = dndx[:, 1]
        b[4, 0::3] = dndx[:, 2]
        b[4, 2::3] = dndx[:, 0]
        b[5, 0::3] = dndx[:, 1]
        b[5, 1::3] = dndx[:, 0]
        return b

    def _assemble_finite(self, u, committed, dtime, need_matrix):
        mesh = self.mesh
        etype = mesh.etype
        f_int = np.zeros(self.ndof)
        trial = committed.copy()
        rows, cols, vals = [], [], []

        for e, conn in enumerate(mesh.elements):
            mat = self.materials[mesh.tags[e]]
            coords = mesh.nodes[conn]
            dofs = self._element_dofs(conn)
            ue = u[dofs].reshape(-1, 3)
            n_eldof = len(dofs)
            ke = np.zeros((n_eldof, n_eldof))
            fe = np.zeros(n_eldof)

            for g, ((nvals, dn), w) in enumerate(zip(etype.shape_values,
                                                     etype.gauss_weights)):
                jac = coords.T @ dn
                detj = np.linalg.det(jac)
                dndx = dn @ np.linalg.inv(jac)     # reference gradients
                f_def = _I3 + ue.T @ dndx
                state = committed.states[e][g]
                try:
                    resp = eval_material(
                        HostRequest(regime=Regime.FINITE_STRAIN, par=[],
                                    delta=dtime, state_in=state,
                                    f_old=committed.f_old[e][g], f_new=f_def),
                        mat, stress_only=not need_matrix)
                except MaterialError as err:
                    err.context.update(element=e, gauss_point=g)
                    raise
                s2 = voigt_to_tensor(resp.s)
                p = f_def @ s2
                scale = w * detj
                fe += scale * (dndx @ p.T).ravel()
                if need_matrix:
                    k4 = matrix99_to_tensor4(resp.tangent)
                    a4 = (np.einsum('ik,jl->ijkl', _I3, s2)
                          + np.einsum('iq,qjkl->ijkl', f_def, k4))
                    ke += scale * np.einsum('aj,ijkl,bl->aibk', dndx, a4, dndx,
                                            optimize=True).reshape(n_eldof, n_eldof)
                trial.states[e][g] = resp.state_out
                trial.f_old[e][g] = f_def

            f_int[dofs] += fe
            if need_matrix:
                rows.append(np.repeat(dofs, n_eldof))
                cols.append(np.tile(dofs, n_eldof))
                vals.append(ke.ravel())

        k = None
        if need_matrix:
            k = sp.coo_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(self.ndof, self.ndof)).tocsc()
        return f_int, k, trial
