"""Von Mises (J2) elastoplasticity with linear isotropic hardening.

Small-strain radial return. The yield condition is

    f(sigma) = sqrt(3/2 s:s) - (sigma_y + h * eps_p)

with deviatoric stress s and equivalent plastic strain eps_p. For linear
hardening the return map is closed form: the plastic multiplier increment is
f_trial / (3 mu + h), so the local solve cannot fail (guarded anyway).

User state layout (7 slots): plastic strain tensor in umat order with
*tensorial* shear components (6), then eps_p (1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolationError, NonConvergenceError
from ..material_api import Material, Regime, UmatCall, UmatResult
from ..voigt import tensor4_to_voigt66, umat_stress
from .elastic import IsotropicElastic, isotropic_stiffness66

_I3 = np.eye(3)
_IDEV4 = (0.5 * (np.einsum('ik,jl->ijkl', _I3, _I3) + np.einsum('il,jk->ijkl', _I3, _I3))
          - np.einsum('ij,kl->ijkl', _I3, _I3) / 3.0)


@dataclass(frozen=True)
class J2Params:
    elastic: IsotropicElastic
    sigma_y: float
    h: float

    def __post_init__(self):
        if self.sigma_y <= 0.0:
            raise ContractViolationError(f"yield stress must be positive, got {self.sigma_y:g}")
        if self.h < 0.0:
            raise ContractViolationError(f"hardening modulus must be >= 0, got {self.h:g}")


def _dev(sig: np.ndarray) -> np.ndarray:
    """Deviatoric part of a stress-like umat Voigt vector."""
    p = (sig[0] + sig[1] + sig[2]) / 3.0
    s = sig.copy()
    s[:3] -= p
    return s


def _mises(s: np.ndarray) -> float:
    """sqrt(3/2 s:s) for a deviatoric stress-like umat Voigt vector."""
    return float(np.sqrt(1.5 * (s[0] ** 2 + s[1] ** 2 + s[2] ** 2
                                + 2.0 * (s[3] ** 2 + s[4] ** 2 + s[5] ** 2))))


def _voigt_to_tensor_stresslike(v: np.ndarray) -> np.ndarray:
    return np.array([[v[0], v[3], v[4]],
                     [v[3], v[1], v[5]],
                     [v[4], v[5], v[2]]])


class J2Plasticity(Material):
    name = "j2"
    nprops = 4
    nstatv_user = 7
    regime = Regime.SMALL_STRAIN

    def __init__(self, params: J2Params):
        self.params = params
        self._d = isotropic_stiffness66(params.elastic)

    @classmethod
    def from_props(cls, props) -> "J2Plasticity":
        props = np.asarray(props, dtype=float)
        if props.size != cls.nprops:
            raise ContractViolationError(
                f"{cls.name} expects props [E, nu, sigma_y, h], got {props.size} entries")
        return cls(J2Params(IsotropicElastic(props[0], props[1]), props[2], props[3]))

    def evaluate(self, call: UmatCall) -> UmatResult:
        if call.statev_in.size != self.nstatv_user:
            raise ContractViolationError(
                f"{self.name} needs {self.nstatv_user} user state slots, "
                f"got {call.statev_in.size}")
        p = self.params
        mu, h = p.elastic.mu, p.h
        eps_p_old = call.statev_in[:6]
        ep_old = call.statev_in[6]

        sig_tr = call.stress_in.components + self._d @ call.dstran.components
        s_tr = _dev(sig_tr)
        q_tr = _mises(s_tr)
        f_tr = q_tr - (p.sigma_y + h * ep_old)

        if f_tr <= 0.0:
            return UmatResult(umat_stress(sig_tr), call.statev_in.copy(), self._d.copy())

        # radial return, closed form for linear hardening
        dlam = f_tr / (3.0 * mu + h)
        if not np.isfinite(dlam) or dlam < 0.0:
            raise NonConvergenceError("radial return produced an invalid multiplier",
                                      residual=f_tr)
        factor = 3.0 * mu * dlam / q_tr
        sig = sig_tr - factor * s_tr

        # flow direction N = (3/2) s/q (N:N = 3/2) and tensorial plastic strain
        n_voigt = 1.5 * s_tr / q_tr
        eps_p = eps_p_old + dlam * n_voigt
        statev = np.concatenate((eps_p, [ep_old + dlam]))

        # algorithmic tangent of the discrete return map:
        # C_ep = C_e - (6 mu^2 dlam / q_tr) I_dev
        #        - 4 mu^2 (1/(3 mu + h) - dlam/q_tr) N x N
        n_t = _voigt_to_tensor_stresslike(n_voigt)
        c4_corr = (-(6.0 * mu ** 2 * dlam / q_tr) * _IDEV4
                   - 4.0 * mu ** 2 * (1.0 / (3.0 * mu + h) - dlam / q_tr)
                   * np.einsum('ij,kl->ijkl', n_t, n_t))
        ddsdde = self._d + tensor4_to_voigt66(c4_corr)

        return UmatResult(umat_stress(sig), statev, ddsdde)
