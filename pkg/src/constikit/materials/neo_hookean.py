"""Compressible neo-Hookean hyperelasticity with a closed-form Jaumann-rate
tangent.

Cauchy stress:

    sigma = (mu/J) dev(B) + K (J - 1) I,   B = F F^T,  J = det F

with mu = E/(2(1+nu)) and K = E/(3(1-2nu)).

The Jaumann-rate Kirchhoff modulus follows from linearising
tau = mu dev(B) + K J(J-1) I along delta B = L B + B L^T and removing the
spin terms, which are exactly mu (w B - B w):

    J C_ijkl = mu/2 (d_ik B_jl + d_il B_jk + B_ik d_jl + B_il d_jk)
               - (2 mu / 3) d_ij B_kl + K J (2J - 1) d_ij d_kl

(d = Kronecker delta). The test suite validates this closed form against
finite differences of the Kirchhoff stress with the spin-rate correction.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractViolationError, InvalidConfigurationError
from ..material_api import Material, Regime, UmatCall, UmatResult
from ..voigt import Convention, Kind, det3, tensor4_to_voigt66, tensor_to_voigt
from .elastic import IsotropicElastic

_I3 = np.eye(3)


def neo_hookean_stress(f: np.ndarray, params: IsotropicElastic) -> np.ndarray:
    """Cauchy stress of the compressible neo-Hookean model."""
    f = np.asarray(f, dtype=float)
    j = det3(f)
    if j <= 0.0:
        raise InvalidConfigurationError(f"neo-Hookean stress needs det F > 0, got {j:g}")
    b = f @ f.T
    dev_b = b - (np.trace(b) / 3.0) * _I3
    return (params.mu / j) * dev_b + params.bulk * (j - 1.0) * _I3


def neo_hookean_jaumann_modulus(f: np.ndarray, params: IsotropicElastic) -> np.ndarray:
    """Closed-form Jaumann-rate Kirchhoff modulus (fourth-order, divided by J)."""
    f = np.asarray(f, dtype=float)
    j = det3(f)
    if j <= 0.0:
        raise InvalidConfigurationError(f"neo-Hookean tangent needs det F > 0, got {j:g}")
    mu, bulk = params.mu, params.bulk
    b = f @ f.T
    c = 0.5 * mu * (np.einsum('ik,jl->ijkl', _I3, b) + np.einsum('il,jk->ijkl', _I3, b)
                    + np.einsum('ik,jl->ijkl', b, _I3) + np.einsum('il,jk->ijkl', b, _I3))
    c -= (2.0 * mu / 3.0) * np.einsum('ij,kl->ijkl', _I3, b)
    c += bulk * j * (2.0 * j - 1.0) * np.einsum('ij,kl->ijkl', _I3, _I3)
    return c / j


class NeoHookean(Material):
    name = "neo_hookean"
    nprops = 2
    nstatv_user = 0
    regime = Regime.FINITE_STRAIN

    def __init__(self, params: IsotropicElastic):
        self.params = params

    @classmethod
    def from_props(cls, props) -> "NeoHookean":
        props = np.asarray(props, dtype=float)
        if props.size != cls.nprops:
            raise ContractViolationError(
                f"{cls.name} expects props [E, nu], got {props.size} entries")
        return cls(IsotropicElastic(props[0], props[1]))

    def evaluate(self, call: UmatCall) -> UmatResult:
        sigma = neo_hookean_stress(call.dfgrd1, self.params)
        c4 = neo_hookean_jaumann_modulus(call.dfgrd1, self.params)
        return UmatResult(
            stress_out=tensor_to_voigt(sigma, Convention.UMAT, Kind.STRESS),
            statev_out=call.statev_in.copy(),
            ddsdde=tensor4_to_voigt66(c4, Convention.UMAT),
        )
