"""Dense small-tensor kernels: Voigt conventions, reorderings, determinants,
inverses, polar decomposition, and fourth-order/matrix packing.

Two length-6 component orderings coexist in this package:

* host order:  xx, yy, zz, yz, xz, xy  -- strain shear slots are tensorial
* umat order:  xx, yy, zz, xy, xz, yz  -- strain shear slots are engineering
  shears (gamma = 2*epsilon)

Stress vectors carry no engineering factor in either order; reordering stress
is a pure permutation. Conventions are carried as explicit tags on the data
(:class:`VoigtVector`) so mismatches surface as contract violations instead
of silent component swaps.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, InvalidConfigurationError, SingularMatrixError


class Convention(enum.Enum):
    HOST = "host"
    UMAT = "umat"


class Kind(enum.Enum):
    STRESS = "stress"
    STRAIN = "strain"


# Index pairs behind each Voigt slot, per convention.
UMAT_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
HOST_PAIRS = ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))

# Slot permutation between the two orders (self-inverse: only the shear block
# is reversed).
_PERM = np.array([0, 1, 2, 5, 4, 3])

# Row-major index-pair order used to flatten a fourth-order tensor to 9x9
# (and a second-order tensor to length 9) at the host tangent boundary.
PAIRS9 = tuple((i, j) for i in range(3) for j in range(3))


@dataclass(frozen=True)
class VoigtVector:
    """Length-6 stress or strain vector with explicit convention/kind tags."""

    components: np.ndarray
    convention: Convention
    kind: Kind

    def __post_init__(self):
        arr = np.asarray(self.components, dtype=float)
        if arr.shape != (6,):
            raise ContractViolationError(
                f"VoigtVector needs 6 components, got shape {arr.shape}")
        object.__setattr__(self, "components", arr)

    def require(self, convention: Convention, kind: Kind) -> None:
        if self.convention is not convention or self.kind is not kind:
            raise ContractViolationError(
                f"expected {convention.value}/{kind.value} vector, got "
                f"{self.convention.value}/{self.kind.value}")


def host_strain(components) -> VoigtVector:
    return VoigtVector(components, Convention.HOST, Kind.STRAIN)


def umat_strain(components) -> VoigtVector:
    return VoigtVector(components, Convention.UMAT, Kind.STRAIN)


def host_stress(components) -> VoigtVector:
    return VoigtVector(components, Convention.HOST, Kind.STRESS)


def umat_stress(components) -> VoigtVector:
    return VoigtVector(components, Convention.UMAT, Kind.STRESS)


# ---------------------------------------------------------------------------
# Reorderings between the two conventions
# ---------------------------------------------------------------------------

def reorder_strain_host_to_umat(v: VoigtVector) -> VoigtVector:
    """Host-order tensorial strain -> umat-order engineering strain.

    Normal components are copied; umat shear slots receive twice the host
    tensorial shears, reordered (yz,xz,xy) -> (xy,xz,yz).
    """
    v.require(Convention.HOST, Kind.STRAIN)
    e = v.components
    out = np.array([e[0], e[1], e[2], 2.0 * e[5], 2.0 * e[4], 2.0 * e[3]])
    return umat_strain(out)


def reorder_strain_umat_to_host(v: VoigtVector) -> VoigtVector:
    """Inverse of :func:`reorder_strain_host_to_umat` (bit-exact roundtrip)."""
    v.require(Convention.UMAT, Kind.STRAIN)
    g = v.components
    out = np.array([g[0], g[1], g[2], 0.5 * g[5], 0.5 * g[4], 0.5 * g[3]])
    return host_strain(out)


def reorder_stress_umat_to_host(v: VoigtVector) -> VoigtVector:
    """Umat-order stress -> host-order stress. Pure permutation, no scaling."""
    v.require(Convention.UMAT, Kind.STRESS)
    return host_stress(v.components[_PERM])


def reorder_stress_host_to_umat(v: VoigtVector) -> VoigtVector:
    """Host-order stress -> umat-order stress. Pure permutation, no scaling."""
    v.require(Convention.HOST, Kind.STRESS)
    return umat_stress(v.components[_PERM])


def reorder_tangent_umat_to_host(m: np.ndarray) -> np.ndarray:
    """Permute a umat-order 6x6 tangent to host-order rows and columns.

    The in-memory result keeps explicit index semantics; the extra transpose
    needed for flat Fortran-order serialization is applied only at the
    plugin/host byte boundary (see plugins module).
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (6, 6):
        raise ContractViolationError(f"tangent must be 6x6, got {m.shape}")
    return m[np.ix_(_PERM, _PERM)]


# ---------------------------------------------------------------------------
# Tensor <-> Voigt packing
# ---------------------------------------------------------------------------

def voigt_to_tensor(v: VoigtVector) -> np.ndarray:
    """Expand a tagged Voigt vector to a symmetric 3x3 tensor.

    Umat-order strain shear slots are halved (engineering -> tensorial);
    all other combinations place components verbatim.
    """
    pairs = UMAT_PAIRS if v.convention is Convention.UMAT else HOST_PAIRS
    half_shear = v.convention is Convention.UMAT and v.kind is Kind.STRAIN
    t = np.zeros((3, 3))
    for slot, (i, j) in enumerate(pairs):
        val = v.components[slot]
        if i != j and half_shear:
            val = 0.5 * val
        t[i, j] = val
        t[j, i] = val
    return t


def tensor_to_voigt(t: np.ndarray, convention: Convention, kind: Kind) -> VoigtVector:
    """Pack a symmetric 3x3 tensor into a tagged Voigt vector."""
    t = np.asarray(t, dtype=float)
    pairs = UMAT_PAIRS if convention is Convention.UMAT else HOST_PAIRS
    double_shear = convention is Convention.UMAT and kind is Kind.STRAIN
    out = np.empty(6)
    for slot, (i, j) in enumerate(pairs):
        val = 0.5 * (t[i, j] + t[j, i])
        if i != j and double_shear:
            val = 2.0 * val
        out[slot] = val
    return VoigtVector(out, convention, kind)


def tensor4_to_voigt66(c: np.ndarray, convention: Convention = Convention.UMAT) -> np.ndarray:
    """Pack a minor-symmetric 3x3x3x3 modulus into a 6x6 matrix.

    Columns are work-conjugate to engineering shear strains, so entries are
    copied without factors: sigma_I = M[I,J] * eps_eng_J reproduces
    sigma = C : eps for minor-symmetric C.
    """
    pairs = UMAT_PAIRS if convention is Convention.UMAT else HOST_PAIRS
    m = np.empty((6, 6))
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            m[a, b] = c[i, j, k, l]
    return m


def voigt66_to_tensor4(m: np.ndarray, convention: Convention = Convention.UMAT) -> np.ndarray:
    """Expand a 6x6 modulus (engineering-shear columns) to 3x3x3x3.

    Minor symmetries are imposed by construction.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (6, 6):
        raise ContractViolationError(f"modulus must be 6x6, got {m.shape}")
    pairs = UMAT_PAIRS if convention is Convention.UMAT else HOST_PAIRS
    c = np.zeros((3, 3, 3, 3))
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            val = m[a, b]
            c[i, j, k, l] = val
            c[j, i, k, l] = val
            c[i, j, l, k] = val
            c[j, i, l, k] = val
    return c


def tensor4_to_matrix99(t: np.ndarray) -> np.ndarray:
    """Flatten T[i,j,k,l] -> M[3i+j, 3k+l] (row-major pair order)."""
    return np.asarray(t, dtype=float).reshape(9, 9)


def matrix99_to_tensor4(m: np.ndarray) -> np.ndarray:
    """Inverse of :func:`tensor4_to_matrix99`."""
    m = np.asarray(m, dtype=float)
    if m.shape != (9, 9):
        raise ContractViolationError(f"matrix must be 9x9, got {m.shape}")
    return m.reshape(3, 3, 3, 3)


def tensor2_to_vector9(t: np.ndarray) -> np.ndarray:
    """Flatten T[i,j] -> v[3i+j], matching the 9x9 pair order."""
    return np.asarray(t, dtype=float).reshape(9)


# ---------------------------------------------------------------------------
# 3x3 linear algebra
# ---------------------------------------------------------------------------

def det3(f: np.ndarray) -> float:
    return float(np.linalg.det(np.asarray(f, dtype=float)))


def inv3(f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if abs(np.linalg.det(f)) <= 1e-14:
        raise SingularMatrixError("3x3 matrix is singular to working precision")
    return np.linalg.inv(f)


def polar_decompose(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Polar decomposition F = R U, R orthogonal (det +1), U symmetric PD.

    Production path: Newton iteration with determinantal scaling, quadratic
    near the fixed point and robust for the mildly distorted deformation
    gradients of quasi-static solids. The spectral route
    (:func:`polar_decompose_spectral`) serves as the independent oracle.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (3, 3):
        raise ContractViolationError(f"expected 3x3 matrix, got {f.shape}")
    d = np.linalg.det(f)
    if d <= 0.0:
        raise InvalidConfigurationError(f"polar decomposition requires det F > 0, got {d:g}")
    x = f.copy()
    for _ in range(100):
        mu = abs(np.linalg.det(x)) ** (-1.0 / 3.0)
        x_new = 0.5 * (mu * x + np.linalg.inv(x).T / mu)
        if np.max(np.abs(x_new - x)) <= 1e-15 * max(1.0, np.max(np.abs(x_new))):
            x = x_new
            break
        x = x_new
    r = x
    u = r.T @ f
    u = 0.5 * (u + u.T)
    return r, u


def polar_decompose_spectral(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Oracle path: U from the eigendecomposition of F^T F, then R = F U^-1."""
    f = np.asarray(f, dtype=float)
    if np.linalg.det(f) <= 0.0:
        raise InvalidConfigurationError("polar decomposition requires det F > 0")
    c = f.T @ f
    w, v = np.linalg.eigh(c)
    u = v @ np.diag(np.sqrt(w)) @ v.T
    r = f @ np.linalg.inv(u)
    return r, 0.5 * (u + u.T)
