"""The two material-evaluation contracts and the bridge's state-vector layout.

A *umat-style* material is an incremental call: it receives the stress and
state at the start of the increment plus trial strain/deformation increments,
and returns the updated Cauchy stress, updated state, and the 6x6 consistent
tangent in umat order. A *host-style* evaluation is total-quantity: total
strain (small strain) or deformation gradients (finite strain) in, second
Piola-Kirchhoff stress and a dS/dF tangent out.

The bridge persists what the umat convention needs between increments inside
the host's state vector:

==============  =============================================================
slot 0          accumulated pseudo-time at increment start
small strain    slots 1-6 stress (umat order), 7-12 total strain (umat
                order), 13+ user state
finite strain   slots 1-6 Cauchy stress at increment start (umat order),
                7+ user state
==============  =============================================================
"""

from __future__ import annotations

import abc
import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError, MaterialError
from .voigt import Convention, Kind, VoigtVector, umat_strain, umat_stress

_I3 = np.eye(3)


class Regime(enum.Enum):
    SMALL_STRAIN = "small_strain"
    FINITE_STRAIN = "finite_strain"


# ---------------------------------------------------------------------------
# Call records
# ---------------------------------------------------------------------------

@dataclass
class UmatCall:
    """Input record set of a umat-style material evaluation."""

    stress_in: VoigtVector
    statev_in: np.ndarray
    stran: VoigtVector
    dstran: VoigtVector
    time: float
    dtime: float
    props: np.ndarray
    dfgrd0: np.ndarray = field(default_factory=lambda: _I3.copy())
    dfgrd1: np.ndarray = field(default_factory=lambda: _I3.copy())
    drot: np.ndarray = field(default_factory=lambda: _I3.copy())

    def __post_init__(self):
        self.stress_in.require(Convention.UMAT, Kind.STRESS)
        self.stran.require(Convention.UMAT, Kind.STRAIN)
        self.dstran.require(Convention.UMAT, Kind.STRAIN)
        self.statev_in = np.asarray(self.statev_in, dtype=float)
        self.props = np.asarray(self.props, dtype=float)
        self.dfgrd0 = np.asarray(self.dfgrd0, dtype=float)
        self.dfgrd1 = np.asarray(self.dfgrd1, dtype=float)
        self.drot = np.asarray(self.drot, dtype=float)
        if np.max(np.abs(self.drot.T @ self.drot - _I3)) > 1e-10:
            raise ContractViolationError("drot must be orthogonal within 1e-10")


@dataclass
class UmatResult:
    """Output record set of a umat-style material evaluation."""

    stress_out: VoigtVector
    statev_out: np.ndarray
    ddsdde: np.ndarray

    def __post_init__(self):
        self.stress_out.require(Convention.UMAT, Kind.STRESS)
        self.statev_out = np.asarray(self.statev_out, dtype=float)
        self.ddsdde = np.asarray(self.ddsdde, dtype=float)
        if self.ddsdde.shape != (6, 6):
            raise ContractViolationError(f"ddsdde must be 6x6, got {self.ddsdde.shape}")
        if not (np.all(np.isfinite(self.stress_out.components))
                and np.all(np.isfinite(self.ddsdde))
                and np.all(np.isfinite(self.statev_out))):
            raise MaterialError("umat result contains non-finite entries")


@dataclass
class HostRequest:
    """Host-style evaluation request (exactly one kinematic field per regime)."""

    regime: Regime
    par: np.ndarray
    delta: float
    state_in: np.ndarray
    strain_total: VoigtVector | None = None
    f_old: np.ndarray | None = None
    f_new: np.ndarray | None = None

    def __post_init__(self):
        self.par = np.asarray(self.par, dtype=float)
        self.state_in = np.asarray(self.state_in, dtype=float)
        if self.regime is Regime.SMALL_STRAIN:
            if self.strain_total is None or self.f_old is not None or self.f_new is not None:
                raise ContractViolationError(
                    "small-strain request takes strain_total only")
            self.strain_total.require(Convention.HOST, Kind.STRAIN)
        else:
            if self.strain_total is not None or self.f_old is None or self.f_new is None:
                raise ContractViolationError(
                    "finite-strain request takes f_old and f_new only")
            self.f_old = np.asarray(self.f_old, dtype=float)
            self.f_new = np.asarray(self.f_new, dtype=float)


@dataclass
class HostResponse:
    """Host-style evaluation response.

    ``s`` is second Piola-Kirchhoff stress for finite strain and the ordinary
    small-strain stress otherwise, in host order. ``tangent`` is 6x6 for
    small strain and the 9x9 dS/dF matrix (row-major index pairs
    11,12,13,21,22,23,31,32,33) for finite strain.
    """

    s: VoigtVector
    tangent: np.ndarray
    state_out: np.ndarray

    def __post_init__(self):
        self.s.require(Convention.HOST, Kind.STRESS)
        self.tangent = np.asarray(self.tangent, dtype=float)
        self.state_out = np.asarray(self.state_out, dtype=float)
        if not (np.all(np.isfinite(self.s.components))
                and np.all(np.isfinite(self.tangent))
                and np.all(np.isfinite(self.state_out))):
            raise ContractViolationError("host response contains non-finite entries")


# ---------------------------------------------------------------------------
# Bridge state layout
# ---------------------------------------------------------------------------

SMALL_STRAIN_HEADER = 13   # time + stress(6) + stran(6)
FINITE_STRAIN_HEADER = 7   # time + stress(6)


def header_length(regime: Regime) -> int:
    return SMALL_STRAIN_HEADER if regime is Regime.SMALL_STRAIN else FINITE_STRAIN_HEADER


def state_length(regime: Regime, nstatv_user: int) -> int:
    return header_length(regime) + nstatv_user


def pack_state(time: float, stress: VoigtVector, stran: VoigtVector | None,
               user: np.ndarray) -> np.ndarray:
    """Assemble a bridge state vector. ``stran=None`` selects the finite-strain
    layout."""
    stress.require(Convention.UMAT, Kind.STRESS)
    user = np.asarray(user, dtype=float)
    if stran is None:
        return np.concatenate(([float(time)], stress.components, user))
    stran.require(Convention.UMAT, Kind.STRAIN)
    return np.concatenate(([float(time)], stress.components, stran.components, user))


def unpack_state(state: np.ndarray, regime: Regime
                 ) -> tuple[float, VoigtVector, VoigtVector | None, np.ndarray]:
    """Inverse of :func:`pack_state`; bit-exact roundtrip."""
    state = np.asarray(state, dtype=float)
    header = header_length(regime)
    if state.ndim != 1 or state.size < header:
        raise ContractViolationError(
            f"state vector needs at least {header} slots for {regime.value}, "
            f"got shape {state.shape}")
    time = float(state[0])
    stress = umat_stress(state[1:7].copy())
    if regime is Regime.SMALL_STRAIN:
        stran = umat_strain(state[7:13].copy())
        return time, stress, stran, state[13:].copy()
    return time, stress, None, state[7:].copy()


# ---------------------------------------------------------------------------
# Material interface
# ---------------------------------------------------------------------------

class Material(abc.ABC):
    """A umat-style material model.

    Concrete models publish ``name``, ``nprops``, ``nstatv_user`` and
    ``regime`` for registry/case-file lookup and must be pure functions of
    the call record: repeated evaluation with identical inputs is
    bit-identical, and ``call`` is never mutated.
    """

    name: str = ""
    nprops: int = 0
    nstatv_user: int = 0
    regime: Regime = Regime.SMALL_STRAIN

    @abc.abstractmethod
    def evaluate(self, call: UmatCall) -> UmatResult:
        ...

    def evaluate_stress(self, call: UmatCall) -> UmatResult:
        """Stress/state update only; the tangent may be approximate.

        Hosts that split stress and tangent calls use this on paths where
        the modulus is discarded. Default: the full evaluation.
        """
        return self.evaluate(call)

    def initial_user_state(self) -> np.ndarray:
        """Default initialization of the user state slots (zeros)."""
        return np.zeros(self.nstatv_user)

    def initial_state(self) -> np.ndarray:
        """Full bridge state vector at time zero."""
        zero6 = np.zeros(6)
        stran = umat_strain(zero6) if self.regime is Regime.SMALL_STRAIN else None
        return pack_state(0.0, umat_stress(zero6), stran, self.initial_user_state())
