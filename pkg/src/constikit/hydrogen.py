"""Hydrogen transport with equilibrium trapping and stress-gradient drift.

Lattice hydrogen C_L obeys

    (dC_L/dt) + (dC_T/dt)
        + div( -D_L grad C_L + (D_L V_H / R T) C_L grad sigma_h ) = 0

with the trapped population C_T in local equilibrium with C_L:

    C_T = N_T * theta / (1 + theta),   theta = (C_L / N_L) exp(W_B / (R T))

and a dislocation trap density that grows with equivalent plastic strain
(traps per unit volume, converted to mol/m^3):

    log10(N_T * N_A) = 23.26 - 2.33 exp(-5.5 eps_p)

Time discretisation is backward Euler. The capacity part of the trap rate is
integrated exactly (C_T(C) - C_T(C_n) enters the residual, so lattice +
trapped mass is conserved to solver tolerance with frozen traps); the
trap-evolution part (occupancy times the N_T increment from the mechanics
pass) is treated explicitly. No-flux boundaries are natural; fixed
concentration nodes are eliminated.

The staggered coupling driver alternates a mechanics increment with
transport passes until the lattice concentration stops changing between
passes, then advances to the next step (mechanics here does not depend on
the concentration, so the multi-pass loop settles on the second pass).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NonConvergenceError
from .fe.mesh import Mesh

R_GAS = 8.314             # J/(mol K), as fixed by the transport parameter set
AVOGADRO = 6.02214076e23  # 1/mol


@dataclass(frozen=True)
class TransportParams:
    d_l: float            # lattice diffusion coefficient, m^2/s
    n_l: float            # lattice site density, mol/m^3
    v_h: float            # partial molar volume, m^3/mol
    w_b: float            # trap binding energy, J/mol
    temperature: float    # K
    c0: float             # boundary/initial lattice concentration, mol/m^3

    def __post_init__(self):
        for name in ("d_l", "n_l", "v_h", "w_b", "temperature", "c0"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"transport parameter {name} must be positive")

    @property
    def binding_factor(self) -> float:
        return float(np.exp(self.w_b / (R_GAS * self.temperature)))

    @property
    def drift_mobility(self) -> float:
        # multiplies C_L grad sigma_h in the flux
        return self.d_l * self.v_h / (R_GAS * self.temperature)


def trap_density(eps_p):
    """Dislocation trap density in mol/m^3 from equivalent plastic strain."""
    eps_p = np.asarray(eps_p, dtype=float)
    if np.any(eps_p < 0.0):
        raise ValueError("plastic strain must be non-negative")
    exponent = 23.26 - 2.33 * np.exp(-5.5 * eps_p)
    return 10.0 ** exponent / AVOGADRO


def oriani_trapped(c_l, n_t, params: TransportParams):
    """Trapped concentration in equilibrium with the lattice population."""
    c_l = np.asarray(c_l, dtype=float)
    theta = (c_l / params.n_l) * params.binding_factor
    return np.asarray(n_t, dtype=float) * theta / (1.0 + theta)


def occupancy(c_l, params: TransportParams):
    """theta/(1+theta): fraction of traps filled (= dC_T/dN_T)."""
    theta = (np.asarray(c_l, dtype=float) / params.n_l) * params.binding_factor
    return theta / (1.0 + theta)


def capacity(c_l, n_t, params: TransportParams):
    """dC_T/dC_L = N_T (K/N_L) / (1 + theta)^2 with K the binding factor."""
    c_l = np.asarray(c_l, dtype=float)
    k = params.binding_factor
    theta = (c_l / params.n_l) * k
    return np.asarray(n_t, dtype=float) * (k / params.n_l) / (1.0 + theta) ** 2


# ---------------------------------------------------------------------------
# Finite element transport on a (1D/2D) mesh
# ---------------------------------------------------------------------------

@dataclass
class TransportState:
    c_l: np.ndarray                    # per node
    sigma_h: np.ndarray                # per node, supplied by mechanics
    eps_p: np.ndarray                  # per node, supplied by mechanics
    n_t: np.ndarray = field(init=False)
    c_t: np.ndarray = field(init=False)

    def __post_init__(self):
        self.refresh_derived_fields(None)

    def refresh_derived_fields(self, params: TransportParams | None):
        self.n_t = trap_density(self.eps_p)
        if params is None:
            self.c_t = np.zeros_like(self.c_l)
        else:
            self.c_t = oriani_trapped(self.c_l, self.n_t, params)


class TransportModel:
    """Backward-Euler FE discretisation of the drift-diffusion-trapping PDE."""

    def __init__(self, mesh: Mesh, params: TransportParams,
                 fixed_nodes=(), max_newton: int = 30, newton_tol: float = 1e-12):
        self.mesh = mesh
        self.params = params
        self.fixed = np.zeros(mesh.n_nodes, dtype=bool)
        self.fixed[list(fixed_nodes)] = True
        self.max_newton = max_newton
        self.newton_tol = newton_tol

    def _assemble(self, c, c_n, sigma_h, n_t, source, dt):
        """Residual and Jacobian of the backward-Euler step."""
        mesh = self.mesh
        p = self.params
        n = mesh.n_nodes
        r = np.zeros(n)
        rows, cols, vals = [], [], []
        mob = p.drift_mobility
        for e, conn in enumerate(mesh.elements):
            coords = mesh.nodes[conn]
            ce, cne = c[conn], c_n[conn]
            sig = sigma_h[conn]
            nte = n_t[conn]
            src = source[conn]
            for (nv, dn), w in zip(mesh.etype.shape_values, mesh.etype.gauss_weights):
                jac = coords.T @ dn
                detj = abs(np.linalg.det(jac))
                dndx = dn @ np.linalg.inv(jac)
                c_gp = nv @ ce
                cn_gp = nv @ cne
                nt_gp = nv @ nte
                grad_c = dndx.T @ ce
                grad_sig = dndx.T @ sig
                ct = oriani_trapped(c_gp, nt_gp, p)
                ct_n = oriani_trapped(cn_gp, nt_gp, p)
                cap = capacity(c_gp, nt_gp, p)
                rate = (c_gp - cn_gp + ct - ct_n) / dt + nv @ src
                flux = p.d_l * grad_c - mob * c_gp * grad_sig
                scale = w * detj
                re = scale * (nv * rate + dndx @ flux)
                ke = scale * (np.outer(nv, nv) * (1.0 + cap) / dt
                              + p.d_l * dndx @ dndx.T
                              - mob * np.outer(dndx @ grad_sig, nv))
                r[conn] += re
                rows.append(np.repeat(conn, len(conn)))
                cols.append(np.tile(conn, len(conn)))
                vals.append(ke.ravel())
        k = sp.coo_matrix((np.concatenate(vals),
                           (np.concatenate(rows), np.concatenate(cols))),
                          shape=(n, n)).tocsc()
        return r, k

    def step(self, c_n, sigma_h, n_t, dt, n_t_old=None):
        """Advance one time step; returns the new lattice concentration.

        ``n_t`` is the trap density at the end of the step; its increase
        relative to ``n_t_old`` enters as an explicit sink through the
        current occupancy.
        """
        p = self.params
        if n_t_old is None:
            n_t_old = n_t
        source = occupancy(c_n, p) * (np.asarray(n_t) - np.asarray(n_t_old)) / dt
        c = c_n.copy()
        c[self.fixed] = p.c0
        free = ~self.fixed
        scale = max(float(np.max(np.abs(c_n))), p.c0)
        res_ref = None
        for _ in range(self.max_newton):
            r, k = self._assemble(c, c_n, sigma_h, n_t, source, dt)
            rf = r[free]
            res = float(np.max(np.abs(rf))) if rf.size else 0.0
            if res_ref is None:
                res_ref = max(res, 1e-300)
            if res <= self.newton_tol * res_ref:
                return c
            dc = spla.spsolve(k[free][:, free], -rf)
            c[free] += dc
            if np.max(np.abs(dc)) <= 1e-14 * scale:
                return c
        raise NonConvergenceError("transport step did not converge",
                                  residual=res)

    def total_content(self, c, eps_p):
        """Integral of C_L + C_T over the mesh (mass bookkeeping)."""
        mesh = self.mesh
        n_t = trap_density(eps_p)
        total = 0.0
        for conn in mesh.elements:
            coords = mesh.nodes[conn]
            for (nv, dn), w in zip(mesh.etype.shape_values, mesh.etype.gauss_weights):
                detj = abs(np.linalg.det(coords.T @ dn))
                c_gp = nv @ c[conn]
                nt_gp = nv @ n_t[conn]
                total += w * detj * (c_gp + float(oriani_trapped(c_gp, nt_gp,
                                                                 self.params)))
        return total


def transport_step(state: TransportState, sigma_h, eps_p, dt,
                   params: TransportParams, mesh: Mesh, fixed_nodes=()):
    """One backward-Euler step; returns the advanced state."""
    model = TransportModel(mesh, params, fixed_nodes)
    n_t_old = trap_density(state.eps_p)
    n_t_new = trap_density(eps_p)
    c_new = model.step(state.c_l, np.asarray(sigma_h, dtype=float), n_t_new, dt,
                       n_t_old=n_t_old)
    out = TransportState(c_l=c_new, sigma_h=np.asarray(sigma_h, dtype=float),
                         eps_p=np.asarray(eps_p, dtype=float))
    out.refresh_derived_fields(params)
    return out


# ---------------------------------------------------------------------------
# Staggered mechanics / transport coupling
# ---------------------------------------------------------------------------

def project_gauss_to_nodes(mesh: Mesh, element_values) -> np.ndarray:
    """Average per-element Gauss data onto nodes (flat projection)."""
    acc = np.zeros(mesh.n_nodes)
    cnt = np.zeros(mesh.n_nodes)
    for e, conn in enumerate(mesh.elements):
        val = float(np.mean(element_values[e]))
        acc[conn] += val
        cnt[conn] += 1.0
    return acc / np.maximum(cnt, 1.0)


@dataclass
class CoupledResults:
    times: list
    c_l: list              # nodal lattice concentration per step
    sigma_h: list
    eps_p: list
    mech_trace: object


def staggered_couple(mech_case, params: TransportParams, fixed_where: dict,
                     n_passes_max: int = 5, pass_tol: float = 1e-4):
    """Alternate mechanics increments and transport steps on a shared mesh.

    ``mech_case`` is a small-strain CaseDefinition with transient stepping;
    hydrostatic stress and equivalent plastic strain are projected to nodes
    after each mechanics pass and drive the transport step. Passes repeat
    until the staggered change in C_L drops below ``pass_tol`` (relative).
    """
    from .fe.newton import NewtonSolver
    from .fe.runner import build_model, make_schedule

    model, dirichlet, f_ext = build_model(mech_case)
    solver = NewtonSolver(model, dirichlet, f_ext,
                          tol_kind=mech_case.tolerance.norm,
                          tol=mech_case.tolerance.value,
                          max_iter=mech_case.max_iterations)
    mesh = mech_case.mesh
    fixed_nodes = mesh.select_nodes(fixed_where) if fixed_where else []
    tmodel = TransportModel(mesh, params, fixed_nodes)

    schedule = make_schedule(mech_case)
    u = np.zeros(model.ndof)
    committed = model.initial_gauss_state(getattr(model, "initial_user", None))
    c = np.full(mesh.n_nodes, params.c0)
    eps_p_old = np.zeros(mesh.n_nodes)

    from .fe.newton import SolverTrace
    trace = SolverTrace()
    force_history = []
    results = CoupledResults([], [], [], [], trace)

    prev_factor, prev_time = 0.0, 0.0
    for index, (factor, t_end, dtime) in enumerate(schedule):
        u_start = u.copy()
        u, committed = solver._increment_with_cuts(
            index, u, committed, prev_factor, factor, prev_time, t_end, dtime,
            trace, force_history, cuts=0)
        solver._du_prev = u - u_start
        f_int, _, _ = model.assemble(u, committed, dtime, need_matrix=False)
        force_history.append(float(np.mean(np.abs(f_int))))
        prev_factor, prev_time = factor, t_end

        sigma_h = project_gauss_to_nodes(
            mesh, [[np.mean(st[1:4]) for st in el] for el in committed.states])
        eps_p = project_gauss_to_nodes(
            mesh, [[_eps_p_slot(st) for st in el] for el in committed.states])

        n_t_old = trap_density(eps_p_old)
        n_t_new = trap_density(eps_p)
        c_prev_step = c
        c_pass = c_prev_step
        for _ in range(n_passes_max):
            c_new = tmodel.step(c_prev_step, sigma_h, n_t_new, dtime,
                                n_t_old=n_t_old)
            change = (np.max(np.abs(c_new - c_pass))
                      / max(np.max(np.abs(c_new)), params.c0))
            c_pass = c_new
            if change < pass_tol:
                break
        c = c_pass
        eps_p_old = eps_p

        results.times.append(t_end)
        results.c_l.append(c.copy())
        results.sigma_h.append(sigma_h.copy())
        results.eps_p.append(eps_p.copy())
    return results


def _eps_p_slot(state_vec):
    # small-strain J2 layout: header 13 + [eps_p tensor (6), eps_p (1)]
    if state_vec.size >= 20:
        return float(state_vec[19])
    return 0.0
