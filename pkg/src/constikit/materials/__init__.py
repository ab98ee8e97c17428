"""Reference umat-style material models and the name registry.

Property-vector layouts (SI units):

==================== ======================================================
linear_elastic        [E, nu]
linear_elastic_finite [E, nu]
j2                    [E, nu, sigma_y, h]
neo_hookean           [E, nu]
crystal_plasticity    [C11, C12, C44, gamma_dot_0, n, h0, tau_s, tau_0,
                       q_ab, R11, R12, R13, R21, R22, R23, R31, R32, R33]
==================== ======================================================
"""

from __future__ import annotations

from ..errors import ContractViolationError
from ..material_api import Material, Regime
from .crystal import (
    CrystalParams,
    CrystalPlasticity,
    SlipSystem,
    fcc_slip_systems,
    hardening_rate,
    resolved_shear,
    slip_rate,
)
from .elastic import (
    CubicElastic,
    IsotropicElastic,
    LinearElastic,
    LinearElasticFinite,
    cubic_stiffness_tensor,
    isotropic_stiffness66,
)
from .j2 import J2Params, J2Plasticity
from .neo_hookean import NeoHookean, neo_hookean_jaumann_modulus, neo_hookean_stress

_REGISTRY = {cls.name: cls for cls in (
    LinearElastic,
    LinearElasticFinite,
    J2Plasticity,
    NeoHookean,
    CrystalPlasticity,
)}


def available() -> list[str]:
    return sorted(_REGISTRY)


def material_class(name: str):
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ContractViolationError(
            f"unknown material '{name}'; available: {', '.join(available())}") from None


def create(name: str, props) -> Material:
    """Instantiate a registered material from its property vector."""
    return material_class(name).from_props(props)


def info(name: str) -> dict:
    cls = material_class(name)
    return {
        "name": cls.name,
        "nprops": cls.nprops,
        "nstatv_user": cls.nstatv_user,
        "regime": cls.regime.value,
    }
