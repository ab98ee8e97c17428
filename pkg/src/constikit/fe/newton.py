"""Quasi-static nonlinear driver: full Newton with increment bisection.

Every iteration records both convergence norms. The solution-style error
estimate is the *next* Newton step evaluated at the updated iterate (one
extra triangular solve on the already-factorized tangent), so a linear
problem converges in exactly one iteration under either norm. Gauss-point
states are committed only when an increment converges.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from ..errors import IncrementFailureError, MaterialError
from .assembly import FEModel
from .norms import norm_abaqus_style, norm_comsol_style, spatial_force_average


@dataclass
class IterationRecord:
    norm_abaqus: float
    norm_comsol: float


@dataclass
class IncrementTrace:
    index: int
    factor: float
    time: float
    iterations: list = field(default_factory=list)
    converged: bool = False
    wall_time: float = 0.0

    @property
    def n_iterations(self):
        return len(self.iterations)


@dataclass
class SolverTrace:
    increments: list = field(default_factory=list)

    def converged_all(self) -> bool:
        return all(t.converged for t in self.increments)


@dataclass
class DirichletBC:
    dofs: np.ndarray      # constrained dof indices
    values: np.ndarray    # target values at full load
    ramp: bool = True
    path: object = None   # optional callable factor -> values (nonlinear ramps)

    def apply(self, u, factor):
        if self.path is not None:
            u[self.dofs] = self.path(factor)
        else:
            u[self.dofs] = self.values * (factor if self.ramp else 1.0)


class NewtonSolver:
    """Drives one FEModel through a stepping schedule."""

    def __init__(self, model: FEModel, dirichlet: list, f_ext_unit: np.ndarray,
                 tol_kind: str = "comsol", tol: float = 1e-3,
                 max_iter: int = 25, max_cuts: int = 4):
        self.model = model
        self.dirichlet = dirichlet
        self.f_ext_unit = f_ext_unit
        self.tol_kind = tol_kind
        self.tol = tol
        self.max_iter = max_iter
        self.max_cuts = max_cuts
        self._du_prev = None
        fixed = np.zeros(model.ndof, dtype=bool)
        for bc in dirichlet:
            fixed[bc.dofs] = True
        self.free = ~fixed

    def solve(self, schedule):
        """schedule: list of (factor, time, dtime) targets in order.

        Returns (u_history, trace, committed_states, reactions_history).
        """
        model = self.model
        u = np.zeros(model.ndof)
        committed = model.initial_gauss_state(getattr(model, "initial_user", None))
        trace = SolverTrace()
        force_history = []
        u_history = []
        reactions = []
        prev_factor, prev_time = 0.0, 0.0
        self._du_prev = None

        for index, (factor, t_end, dtime) in enumerate(schedule):
            u_start = u.copy()
            u, committed = self._increment_with_cuts(
                index, u, committed, prev_factor, factor, prev_time, t_end,
                dtime, trace, force_history, cuts=0)
            self._du_prev = u - u_start
            prev_factor, prev_time = factor, t_end
            f_int, _, _ = model.assemble(u, committed, dtime, need_matrix=False)
            force_history.append(spatial_force_average(f_int))
            u_history.append(u.copy())
            reactions.append(f_int - factor * self.f_ext_unit)
        return u_history, trace, committed, reactions

    # -- internals ----------------------------------------------------------

    def _increment_with_cuts(self, index, u, committed, f0, f1, t0, t1, dtime,
                             trace, force_history, cuts):
        try:
            return self._newton_increment(index, u, committed, f1, t1 - t0,
                                          trace, force_history)
        except (IncrementFailureError, MaterialError) as err:
            if cuts >= self.max_cuts:
                raise IncrementFailureError(
                    f"increment {index} failed after {cuts} bisections: {err}",
                    increment=index, trace=trace) from err
            f_mid, t_mid = 0.5 * (f0 + f1), 0.5 * (t0 + t1)
            u, committed = self._increment_with_cuts(
                index, u, committed, f0, f_mid, t0, t_mid, 0.5 * dtime,
                trace, force_history, cuts + 1)
            return self._increment_with_cuts(
                index, u, committed, f_mid, f1, t_mid, t1, 0.5 * dtime,
                trace, force_history, cuts + 1)

    def _newton_increment(self, index, u_in, committed, factor, dtime, trace,
                          force_history):
        model = self.model
        rec = IncrementTrace(index=index, factor=factor, time=dtime)
        trace.increments.append(rec)
        started = _time.perf_counter()

        u = u_in.copy()
        for bc in self.dirichlet:
            bc.apply(u, factor)
        # secant predictor from the last converged increment (free DOFs only)
        if self._du_prev is not None:
            u[self.free] += self._du_prev[self.free]
        f_ext = factor * self.f_ext_unit

        f_int, k, trial = model.assemble(u, committed, dtime)
        lu = spla.splu(k[self.free][:, self.free].tocsc())
        residual = (f_ext - f_int)[self.free]
        pending = None
        res0 = float(residual @ residual)

        for _ in range(self.max_iter):
            du = lu.solve(residual) if pending is None else pending
            res_norm2 = float(residual @ residual)
            u[self.free] += du
            f_int, k, trial = model.assemble(u, committed, dtime)
            residual = (f_ext - f_int)[self.free]

            # backtracking line search with quadratic interpolation; the
            # full step (already assembled) is kept whenever it decreases
            # the residual, preserving the quadratic tail. Skipped once the
            # residual has collapsed to roundoff relative to its start.
            phi = float(residual @ residual)
            if phi > (1.0 - 1e-4) * res_norm2 and phi > 1e-20 * res0:
                alpha_hi, phi_hi = 1.0, phi
                alpha = 1.0
                for _ in range(8):
                    denom = phi_hi - res_norm2 + 2.0 * res_norm2 * alpha_hi
                    quad = (res_norm2 * alpha_hi * alpha_hi / denom
                            if denom > 0.0 else 0.5 * alpha_hi)
                    alpha = min(max(quad, 0.1 * alpha_hi), 0.5 * alpha_hi)
                    u[self.free] += (alpha - alpha_hi) * du
                    f_try, _, _ = model.assemble(u, committed, dtime,
                                                 need_matrix=False)
                    r_try = (f_ext - f_try)[self.free]
                    phi_try = float(r_try @ r_try)
                    if phi_try <= (1.0 - 1e-4 * alpha) * res_norm2:
                        break
                    alpha_hi, phi_hi = alpha, phi_try
                f_int, k, trial = model.assemble(u, committed, dtime)
                residual = (f_ext - f_int)[self.free]

            lu = spla.splu(k[self.free][:, self.free].tocsc())
            error = lu.solve(residual)
            pending = error

            q_hist = force_history + [spatial_force_average(f_int)]
            na = norm_abaqus_style(residual, q_hist)
            nc = norm_comsol_style(error, u[self.free])
            rec.iterations.append(IterationRecord(na, nc))

            active = na if self.tol_kind == "abaqus" else nc
            if active < self.tol:
                rec.converged = True
                rec.wall_time = _time.perf_counter() - started
                return u, trial

        rec.wall_time = _time.perf_counter() - started
        raise IncrementFailureError(
            f"increment {index} did not converge in {self.max_iter} iterations",
            increment=index, trace=trace)


def stationary_schedule(n_increments: int):
    """Equal load-factor increments; pseudo-time marches with the factor."""
    return [((i + 1) / n_increments, (i + 1) / n_increments, 1.0 / n_increments)
            for i in range(n_increments)]


def transient_schedule(dt_list):
    """Time increments with the load factor ramping linearly to 1 at the end."""
    total = float(sum(dt_list))
    out = []
    t = 0.0
    for dt in dt_list:
        t += dt
        out.append((t / total, t, dt))
    return out
