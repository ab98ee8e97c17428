"""Elastic parameter records, stiffness builders, and the linear-elastic
reference models (small-strain and hypoelastic finite-strain variants)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolationError
from ..material_api import Material, Regime, UmatCall, UmatResult
from ..voigt import umat_stress

_I3 = np.eye(3)


@dataclass(frozen=True)
class IsotropicElastic:
    """Young's modulus / Poisson ratio pair."""

    e: float
    nu: float

    def __post_init__(self):
        if self.e <= 0.0:
            raise ContractViolationError(f"Young's modulus must be positive, got {self.e:g}")
        if not -1.0 < self.nu < 0.5:
            raise ContractViolationError(f"Poisson ratio must lie in (-1, 0.5), got {self.nu:g}")

    @property
    def lam(self) -> float:
        return self.e * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))

    @property
    def mu(self) -> float:
        return self.e / (2.0 * (1.0 + self.nu))

    @property
    def bulk(self) -> float:
        return self.e / (3.0 * (1.0 - 2.0 * self.nu))


@dataclass(frozen=True)
class CubicElastic:
    """Cubic stiffness triple in the crystal frame."""

    c11: float
    c12: float
    c44: float

    def __post_init__(self):
        # positive definiteness of the cubic stiffness
        if self.c44 <= 0.0 or self.c11 <= abs(self.c12) or self.c11 + 2.0 * self.c12 <= 0.0:
            raise ContractViolationError(
                f"cubic stiffness (C11={self.c11:g}, C12={self.c12:g}, C44={self.c44:g}) "
                "is not positive definite")


def isotropic_stiffness66(params: IsotropicElastic) -> np.ndarray:
    """Isotropic 6x6 stiffness in umat order with engineering-shear columns."""
    lam, mu = params.lam, params.mu
    d = np.zeros((6, 6))
    d[:3, :3] = lam
    d[np.arange(3), np.arange(3)] += 2.0 * mu
    d[np.arange(3, 6), np.arange(3, 6)] = mu
    return d


def cubic_stiffness_tensor(params: CubicElastic, orientation: np.ndarray | None = None
                           ) -> np.ndarray:
    """Cubic fourth-order stiffness, optionally rotated crystal -> global."""
    c11, c12, c44 = params.c11, params.c12, params.c44
    c = c12 * np.einsum('ij,kl->ijkl', _I3, _I3)
    c += c44 * (np.einsum('ik,jl->ijkl', _I3, _I3) + np.einsum('il,jk->ijkl', _I3, _I3))
    aniso = c11 - c12 - 2.0 * c44
    for m in range(3):
        e = np.zeros(3)
        e[m] = 1.0
        c += aniso * np.einsum('i,j,k,l->ijkl', e, e, e, e)
    if orientation is not None:
        q = np.asarray(orientation, dtype=float)
        c = np.einsum('ia,jb,kc,ld,abcd->ijkl', q, q, q, q, c, optimize=True)
    return c


class LinearElastic(Material):
    """Isotropic hypoelastic baseline: stress += D : dstran, constant tangent."""

    name = "linear_elastic"
    nprops = 2
    nstatv_user = 0
    regime = Regime.SMALL_STRAIN

    def __init__(self, params: IsotropicElastic):
        self.params = params
        self._d = isotropic_stiffness66(params)

    @classmethod
    def from_props(cls, props) -> "LinearElastic":
        props = np.asarray(props, dtype=float)
        if props.size != cls.nprops:
            raise ContractViolationError(
                f"{cls.name} expects props [E, nu], got {props.size} entries")
        return cls(IsotropicElastic(props[0], props[1]))

    def evaluate(self, call: UmatCall) -> UmatResult:
        stress = call.stress_in.components + self._d @ call.dstran.components
        return UmatResult(
            stress_out=umat_stress(stress),
            statev_out=call.statev_in.copy(),
            ddsdde=self._d.copy(),
        )


class LinearElasticFinite(LinearElastic):
    """Corotational hypoelastic variant driven by finite-strain kinematics.

    The stored stress is rotated by the incremental rotation before the
    elastic increment is added, and the reported modulus carries the
    sigma x I term so it is the exact Jaumann-rate Kirchhoff modulus of the
    update at a converged (zero pending increment) state. This makes the
    model the smooth baseline for the finite-strain tangent conversion
    checks.
    """

    name = "linear_elastic_finite"
    regime = Regime.FINITE_STRAIN

    def evaluate(self, call: UmatCall) -> UmatResult:
        sig_old = call.stress_in.components
        t = np.array([[sig_old[0], sig_old[3], sig_old[4]],
                      [sig_old[3], sig_old[1], sig_old[5]],
                      [sig_old[4], sig_old[5], sig_old[2]]])
        rot = call.drot @ t @ call.drot.T
        rotated = np.array([rot[0, 0], rot[1, 1], rot[2, 2],
                            rot[0, 1], rot[0, 2], rot[1, 2]])
        stress = rotated + self._d @ call.dstran.components
        ddsdde = self._d + np.outer(stress, [1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
        return UmatResult(
            stress_out=umat_stress(stress),
            statev_out=call.statev_in.copy(),
            ddsdde=ddsdde,
        )
