"""Rate-dependent FCC crystal plasticity at finite strain.

Multiplicative split F = Fe Fp with the plastic velocity gradient built from
the 12 octahedral slip systems:

    Fp_dot = (sum_a gamma_dot_a s_a x n_a) Fp

Slip follows the viscoplastic power law

    gamma_dot_a = gamma_dot_0 |tau_a / tau_c_a|^n sign(tau_a)

with the resolved shear tau_a taken on the Mandel stress M = Ce Se of a
St. Venant-Kirchhoff elastic law (cubic stiffness) on the elastic
Green-Lagrange strain. Critical resolved shear stresses harden with the
saturating self/latent rule

    tau_c_dot_a = sum_b q_ab h0 sech^2(h0 Gamma / (tau_s - tau_0)) |gamma_dot_b|

where Gamma accumulates sum_b integral |gamma_dot_b| dt. A
``hardening_secant_variant`` switch keeps the unbounded trigonometric-secant
reading available for comparison.

Integration is backward Euler on the 12 slip increments with an
exponential-map update of Fp (det Fp preserved to machine precision). The
consistent Jaumann-rate tangent is obtained by central differencing the
converged update with respect to the deformation gradient and mapping the
resulting dtau/dF back to the corotational modulus.

User state layout (34 slots): Fp row-major (9), tau_c (12), Gamma (1),
accumulated slip per system (12). All-zero Fp slots are treated as an
uninitialised state and bootstrapped to Fp = I, tau_c = tau_0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    ContractViolationError,
    InvalidConfigurationError,
    MaterialError,
    SingularMatrixError,
)
from ..material_api import Material, Regime, UmatCall, UmatResult
from ..voigt import Convention, Kind, det3, inv3, tensor4_to_voigt66, tensor_to_voigt
from .elastic import CubicElastic, cubic_stiffness_tensor

_I3 = np.eye(3)
N_SLIP = 12


@dataclass(frozen=True)
class SlipSystem:
    """Unit slip direction and slip-plane normal, mutually orthogonal."""

    s: np.ndarray
    n: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        n = np.asarray(self.n, dtype=float)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "n", n)
        if abs(np.linalg.norm(s) - 1.0) > 1e-12 or abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ContractViolationError("slip system vectors must be unit length")
        if abs(float(s @ n)) > 1e-12:
            raise ContractViolationError("slip direction must lie in the slip plane")


# {111}<110> family: plane normal followed by the three in-plane directions.
_FCC_TABLE = (
    ((1, 1, 1), ((0, 1, -1), (1, 0, -1), (1, -1, 0))),
    ((-1, 1, 1), ((0, 1, -1), (1, 0, 1), (1, 1, 0))),
    ((1, -1, 1), ((0, 1, 1), (1, 0, -1), (1, 1, 0))),
    ((1, 1, -1), ((0, 1, 1), (1, 0, 1), (1, -1, 0))),
)


def fcc_slip_systems() -> list[SlipSystem]:
    """The 12 octahedral slip systems of an FCC lattice, normalized."""
    systems = []
    for plane, dirs in _FCC_TABLE:
        n = np.asarray(plane, dtype=float) / np.sqrt(3.0)
        for d in dirs:
            s = np.asarray(d, dtype=float) / np.sqrt(2.0)
            systems.append(SlipSystem(s=s, n=n))
    return systems


def resolved_shear(stress: np.ndarray, system: SlipSystem) -> float:
    """Schmid resolved shear tau = s . (stress . n)."""
    return float(system.s @ np.asarray(stress, dtype=float) @ system.n)


@dataclass(frozen=True)
class CrystalParams:
    elastic: CubicElastic
    gamma_dot_0: float
    n: float
    h0: float
    tau_s: float
    tau_0: float
    q_ab: float
    orientation: np.ndarray = field(default_factory=lambda: _I3.copy())
    hardening_secant_variant: bool = False

    def __post_init__(self):
        q = np.asarray(self.orientation, dtype=float)
        object.__setattr__(self, "orientation", q)
        if not self.tau_s > self.tau_0 > 0.0:
            raise ContractViolationError(
                f"need tau_s > tau_0 > 0, got tau_s={self.tau_s:g}, tau_0={self.tau_0:g}")
        if self.n < 1.0:
            raise ContractViolationError(f"rate exponent must be >= 1, got {self.n:g}")
        if np.max(np.abs(q.T @ q - _I3)) > 1e-10:
            raise ContractViolationError("orientation must be orthogonal within 1e-10")


def slip_rate(tau: float, tau_c: float, params: CrystalParams) -> float:
    """Power-law slip rate with the sign of the resolved shear restored."""
    if tau_c <= 0.0:
        raise ContractViolationError(f"critical resolved shear must be positive, got {tau_c:g}")
    r = tau / tau_c
    return params.gamma_dot_0 * abs(r) ** params.n * np.sign(r)

def _hardening_modulus(gamma_acc: float, params: CrystalParams) -> float:
    x = params.h0 * gamma_acc / (params.tau_s - params.tau_0)
    if params.hardening_secant_variant:
        return params.h0 / np.cos(abs(x)) ** 2
    # overflow-safe sech^2
    e = np.exp(-abs(x))
    sech = 2.0 * e / (1.0 + e * e)
    return params.h0 * sech * sech


def hardening_rate(gamma_acc: float, slip_rates: np.ndarray,
                   params: CrystalParams) -> np.ndarray:
    """Rate of the 12 critical resolved shear stresses.

    Self terms weigh 1, latent terms weigh q_ab; slip rates enter through
    their magnitudes so tau_c never softens.
    """
    if gamma_acc < 0.0:
        raise ContractViolationError("accumulated slip must be non-negative")
    rates = np.abs(np.asarray(slip_rates, dtype=float))
    h = _hardening_modulus(gamma_acc, params)
    q = params.q_ab * np.ones((N_SLIP, N_SLIP)) + (1.0 - params.q_ab) * np.eye(N_SLIP)
    return h * (q @ rates)


def _expm3(a: np.ndarray) -> np.ndarray:
    """exp of a 3x3 matrix by scaling-and-squaring with a Taylor tail."""
    nrm = np.max(np.abs(a))
    squarings = 0
    while nrm > 0.125:
        a = 0.5 * a
        nrm *= 0.5
        squarings += 1
    out = _I3 + a
    term = a
    for i in range(2, 24):
        term = term @ a / i
        out = out + term
        if np.max(np.abs(term)) < 1e-18 * max(1.0, np.max(np.abs(out))):
            break
    for _ in range(squarings):
        out = out @ out
    return out


class CrystalPlasticity(Material):
    """Implicit single-crystal viscoplasticity; see module docstring.

    Props layout (18): C11, C12, C44, gamma_dot_0, n, h0, tau_s, tau_0,
    q_ab, orientation rotation row-major (9).
    """

    name = "crystal_plasticity"
    nprops = 18
    nstatv_user = 9 + N_SLIP + 1 + N_SLIP
    regime = Regime.FINITE_STRAIN

    _newton_tol = 1e-12
    _max_newton = 50
    _max_bisections = 4
    _max_step = 0.2
    _fd_step = 1e-7

    def __init__(self, params: CrystalParams):
        self.params = params
        q = params.orientation
        systems = fcc_slip_systems()
        self.slip_dirs = np.array([q @ sys.s for sys in systems])
        self.slip_normals = np.array([q @ sys.n for sys in systems])
        # Schmid tensors s x n in the global frame
        self.schmid = np.einsum('ai,aj->aij', self.slip_dirs, self.slip_normals)
        self._c4 = cubic_stiffness_tensor(params.elastic, q)
        self._c66 = tensor4_to_voigt66(self._c4, Convention.UMAT)
        self._qmat = (params.q_ab * np.ones((N_SLIP, N_SLIP))
                      + (1.0 - params.q_ab) * np.eye(N_SLIP))

    @classmethod
    def from_props(cls, props) -> "CrystalPlasticity":
        props = np.asarray(props, dtype=float)
        if props.size != cls.nprops:
            raise ContractViolationError(
                f"{cls.name} expects 18 props "
                "[C11, C12, C44, gdot0, n, h0, tau_s, tau_0, q_ab, R(9)], "
                f"got {props.size} entries")
        return cls(CrystalParams(
            elastic=CubicElastic(props[0], props[1], props[2]),
            gamma_dot_0=props[3], n=props[4], h0=props[5],
            tau_s=props[6], tau_0=props[7], q_ab=props[8],
            orientation=props[9:18].reshape(3, 3),
        ))

    def initial_user_state(self) -> np.ndarray:
        state = np.zeros(self.nstatv_user)
        state[:9] = _I3.reshape(9)
        state[9:21] = self.params.tau_0
        return state

    # -- state helpers ------------------------------------------------------

    def _split_state(self, statev: np.ndarray):
        fp = statev[:9].reshape(3, 3)
        if np.all(statev[:9] == 0.0):
            fp = _I3.copy()
            tau_c = np.full(N_SLIP, self.params.tau_0)
            return fp, tau_c, 0.0, np.zeros(N_SLIP)
        return (fp.copy(), statev[9:21].copy(), float(statev[21]),
                statev[22:34].copy())

    # -- core update --------------------------------------------------------

    def _stress_given(self, f: np.ndarray, fp: np.ndarray):
        """Elastic law for a given plastic configuration."""
        fe = f @ inv3(fp)
        ce = fe.T @ fe
        ee = 0.5 * (ce - _I3)
        ee_v = np.array([ee[0, 0], ee[1, 1], ee[2, 2],
                         2.0 * ee[0, 1], 2.0 * ee[0, 2], 2.0 * ee[1, 2]])
        se_v = self._c66 @ ee_v
        se = np.array([[se_v[0], se_v[3], se_v[4]],
                       [se_v[3], se_v[1], se_v[5]],
                       [se_v[4], se_v[5], se_v[2]]])
        return fe, ce, se

    def _residual(self, dg, f_new, fp_n, tau_c_n, gamma_n, dt):
        p = self.params
        a = np.einsum('a,aij->ij', dg, self.schmid)
        fp = _expm3(a) @ fp_n
        fe, ce, se = self._stress_given(f_new, fp)
        mandel = ce @ se
        tau = np.einsum('aij,ij->a', self.schmid, mandel)
        abs_dg = np.abs(dg)
        gamma = gamma_n + float(np.sum(abs_dg))
        tau_c = tau_c_n + _hardening_modulus(gamma, p) * (self._qmat @ abs_dg)
        r = tau / tau_c
        g = p.gamma_dot_0 * np.abs(r) ** p.n * np.sign(r)
        res = dg - dt * g
        return res, (fp, fe, ce, se, mandel, tau, tau_c, gamma, r, g)

    def _jacobian(self, dg, aux, f_new, dt):
        """Quasi-Newton Jacobian: exponential map linearised to first order."""
        p = self.params
        fp, fe, ce, se, mandel, tau, tau_c, gamma, r, g = aux
        # d(Ce)/d(dg_b) ~= -(P_b^T Ce + Ce P_b)
        dce = -(np.einsum('bji,jk->bik', self.schmid, ce)
                + np.einsum('ij,bjk->bik', ce, self.schmid))
        dee = 0.5 * dce
        dee_v = np.stack([dee[:, 0, 0], dee[:, 1, 1], dee[:, 2, 2],
                          2.0 * dee[:, 0, 1], 2.0 * dee[:, 0, 2],
                          2.0 * dee[:, 1, 2]], axis=1)
        dse_v = dee_v @ self._c66.T
        dse = np.empty((N_SLIP, 3, 3))
        dse[:, 0, 0] = dse_v[:, 0]
        dse[:, 1, 1] = dse_v[:, 1]
        dse[:, 2, 2] = dse_v[:, 2]
        dse[:, 0, 1] = dse[:, 1, 0] = dse_v[:, 3]
        dse[:, 0, 2] = dse[:, 2, 0] = dse_v[:, 4]
        dse[:, 1, 2] = dse[:, 2, 1] = dse_v[:, 5]
        dmandel = np.einsum('bij,jk->bik', dce, se) + np.einsum('ij,bjk->bik', ce, dse)
        dtau = np.einsum('aij,bij->ab', self.schmid, dmandel)

        sign_dg = np.sign(dg)
        h = _hardening_modulus(gamma, p)
        x = p.h0 * gamma / (p.tau_s - p.tau_0)
        if p.hardening_secant_variant:
            dh = 2.0 * p.h0 ** 2 * np.tan(abs(x)) / (np.cos(abs(x)) ** 2
                                                     * (p.tau_s - p.tau_0)) * np.sign(x)
        else:
            # overflow-safe sech^2 * tanh
            e = np.exp(-abs(x))
            sech2 = (2.0 * e / (1.0 + e * e)) ** 2
            dh = -2.0 * p.h0 ** 2 * np.tanh(x) * sech2 / (p.tau_s - p.tau_0)
        qd = self._qmat @ np.abs(dg)
        dtau_c = (h * self._qmat * sign_dg[None, :]
                  + np.outer(qd, dh * sign_dg))

        dg_dtau = p.gamma_dot_0 * p.n * np.abs(r) ** (p.n - 1.0) / tau_c
        dg_dtau_c = -p.gamma_dot_0 * p.n * np.abs(r) ** p.n * np.sign(r) / tau_c
        return (np.eye(N_SLIP)
                - dt * (dg_dtau[:, None] * dtau + dg_dtau_c[:, None] * dtau_c))

    def _solve_increment(self, f_old, f_new, fp_n, tau_c_n, gamma_n, gacc_n, dt,
                         depth=0, dg0=None):
        """Backward-Euler update; bisects the increment internally on failure."""
        dg = np.zeros(N_SLIP) if dg0 is None else dg0.copy()
        res, aux = self._residual(dg, f_new, fp_n, tau_c_n, gamma_n, dt)
        norm = np.max(np.abs(res))
        converged = norm <= self._newton_tol
        for _ in range(self._max_newton):
            if converged:
                break
            jac = self._jacobian(dg, aux, f_new, dt)
            try:
                step = np.linalg.solve(jac, -res)
            except np.linalg.LinAlgError:
                break
            # cap the step: keeps the exponential map in a sane range even
            # when the power-law stiffness makes early Jacobians poor
            biggest = np.max(np.abs(step))
            if biggest > self._max_step:
                step *= self._max_step / biggest
            scale = 1.0
            for _ in range(12):
                trial = dg + scale * step
                try:
                    res_t, aux_t = self._residual(trial, f_new, fp_n, tau_c_n,
                                                  gamma_n, dt)
                    norm_t = np.max(np.abs(res_t))
                except (SingularMatrixError, FloatingPointError):
                    norm_t = np.inf
                if np.isfinite(norm_t) and (norm_t < norm
                                            or norm_t <= self._newton_tol):
                    dg, res, aux, norm = trial, res_t, aux_t, norm_t
                    break
                scale *= 0.5
            else:
                break
            converged = norm <= self._newton_tol

        if not converged:
            if depth >= self._max_bisections:
                raise MaterialError(
                    "crystal plasticity local Newton did not converge "
                    f"(residual {norm:.3e} after {self._max_newton} iterations)",
                    context={"residual": norm})
            f_mid = 0.5 * (f_old + f_new)
            fp_m, tau_c_m, gamma_m, gacc_m = self._solve_increment(
                f_old, f_mid, fp_n, tau_c_n, gamma_n, gacc_n, 0.5 * dt,
                depth + 1)[1]
            return self._solve_increment(f_mid, f_new, fp_m, tau_c_m, gamma_m,
                                         gacc_m, 0.5 * dt, depth + 1)

        fp, fe, ce, se, mandel, tau, tau_c, gamma, r, g = aux
        gacc = gacc_n + np.abs(dg)
        sigma = fe @ se @ fe.T / det3(fe)
        sigma = 0.5 * (sigma + sigma.T)
        return (sigma, (fp, tau_c, gamma, gacc), dg)

    def _run(self, f_old, f_new, statev, dt, dg0=None):
        fp_n, tau_c_n, gamma_n, gacc_n = self._split_state(statev)
        if det3(fp_n) <= 0.0:
            raise InvalidConfigurationError("stored plastic deformation has det <= 0")
        sigma, (fp, tau_c, gamma, gacc), dg = self._solve_increment(
            f_old, f_new, fp_n, tau_c_n, gamma_n, gacc_n, dt, dg0=dg0)
        out = np.concatenate((fp.reshape(9), tau_c, [gamma], gacc))
        return sigma, out, dg

    def _check_call(self, call: UmatCall) -> None:
        if call.statev_in.size != self.nstatv_user:
            raise ContractViolationError(
                f"{self.name} needs {self.nstatv_user} user state slots, "
                f"got {call.statev_in.size}")
        if call.dtime <= 0.0:
            raise ContractViolationError("crystal plasticity needs dtime > 0")

    def evaluate_stress(self, call: UmatCall) -> UmatResult:
        """Stress/state update without the costly consistent modulus.

        The returned ddsdde is the elastic stiffness (finite placeholder);
        hosts use this path only where the tangent is discarded.
        """
        self._check_call(call)
        sigma, statev_out, _ = self._run(call.dfgrd0, call.dfgrd1,
                                         call.statev_in, call.dtime)
        return UmatResult(
            stress_out=tensor_to_voigt(sigma, Convention.UMAT, Kind.STRESS),
            statev_out=statev_out,
            ddsdde=self._c66.copy(),
        )

    def evaluate(self, call: UmatCall) -> UmatResult:
        self._check_call(call)
        f_old, f_new = call.dfgrd0, call.dfgrd1
        sigma, statev_out, dg = self._run(f_old, f_new, call.statev_in, call.dtime)

        # consistent Jaumann modulus: central differences of the converged
        # update, pulled back through the corotational-rate relation
        j = det3(f_new)
        tau = j * sigma
        finv = inv3(f_new)
        ftau = finv @ tau
        dtau_dF = np.empty((3, 3, 3, 3))
        h = self._fd_step
        for k in range(3):
            for l in range(3):
                fp = f_new.copy()
                fp[k, l] += h
                fm = f_new.copy()
                fm[k, l] -= h
                sp = self._run(f_old, fp, call.statev_in, call.dtime, dg0=dg)[0]
                sm = self._run(f_old, fm, call.statev_in, call.dtime, dg0=dg)[0]
                dtau_dF[:, :, k, l] = (det3(fp) * sp - det3(fm) * sm) / (2.0 * h)

        corr = (0.5 * np.einsum('ik,lp->ipkl', _I3, ftau)
                - 0.5 * np.einsum('li,kp->ipkl', finv, tau)
                + 0.5 * np.einsum('pk,il->ipkl', _I3, ftau.T)
                - 0.5 * np.einsum('lp,ik->ipkl', finv, tau))
        c4 = np.einsum('ipkl,ql->ipkq', dtau_dF - corr, f_new) / j
        # numerical noise: enforce the minor symmetries expected of the modulus
        c4 = 0.25 * (c4 + c4.transpose(1, 0, 2, 3)
                     + c4.transpose(0, 1, 3, 2) + c4.transpose(1, 0, 3, 2))

        return UmatResult(
            stress_out=tensor_to_voigt(sigma, Convention.UMAT, Kind.STRESS),
            statev_out=statev_out,
            ddsdde=tensor4_to_voigt66(c4, Convention.UMAT),
        )
