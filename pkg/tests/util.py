"""Shared helpers for the test suite: random kinematics and FD oracles."""

import numpy as np

from constikit.bridge import eval_material
from constikit.material_api import HostRequest, Regime
from constikit.voigt import voigt_to_tensor


def random_f(rng, det_lo=0.5, det_hi=2.0, spread=0.6):
    """Random deformation gradient with determinant inside [det_lo, det_hi]."""
    while True:
        f = np.eye(3) + spread * (rng.random((3, 3)) - 0.5)
        d = np.linalg.det(f)
        if det_lo <= d <= det_hi:
            return f


def random_rotation(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def finite_request(material, f_old, f_new, state, delta=1.0):
    return HostRequest(
        regime=Regime.FINITE_STRAIN,
        par=np.array([]),
        delta=delta,
        state_in=state,
        f_old=f_old,
        f_new=f_new,
    )


def second_pk(material, f_old, f_new, state, delta=1.0):
    """Second Piola-Kirchhoff stress tensor via the bridge's stress-only call."""
    resp = eval_material(finite_request(material, f_old, f_new, state, delta),
                         material, stress_only=True)
    return voigt_to_tensor(resp.s)


def fd_dSdF(material, f_old, f_new, state, delta=1.0, step=1e-6):
    """Central finite differences of S(F) in each of the 9 directions.

    Re-runs the constitutive update from the same initial state for every
    perturbation, which is the correct linearisation of the discrete update
    map even for path-dependent materials.
    """
    k = np.empty((9, 9))
    for col, (a, b) in enumerate(((i, j) for i in range(3) for j in range(3))):
        fp = f_new.copy()
        fp[a, b] += step
        fm = f_new.copy()
        fm[a, b] -= step
        sp = second_pk(material, f_old, fp, state, delta)
        sm = second_pk(material, f_old, fm, state, delta)
        k[:, col] = ((sp - sm) / (2.0 * step)).reshape(9)
    return k


def rel_frobenius(a, b):
    denom = np.linalg.norm(b)
    if denom == 0.0:
        return np.linalg.norm(a - b)
    return np.linalg.norm(a - b) / denom


def uniaxial_stress_march(material, axial_stretches, delta, tol=1.0):
    """Finite-strain uniaxial *stress* path along the z axis at a single point.

    Prescribes F = diag(lat, lat, ax) per step and iterates the lateral
    stretch until the mean lateral Cauchy stress is below ``tol`` (Pa).
    Returns per-step (axial engineering strain, axial Cauchy stress, state).
    """
    state = material.initial_state()
    lat = 1.0
    f_old = np.eye(3)
    out = []
    for ax in axial_stretches:
        for _ in range(80):
            f_new = np.diag([lat, lat, ax])
            resp = eval_material(finite_request(material, f_old, f_new, state, delta),
                                 material)
            sig = resp.state_out[1:7]  # Cauchy stress at increment end
            r = 0.5 * (sig[0] + sig[1])
            if abs(r) <= tol:
                break
            h = 1e-8
            resp_p = eval_material(
                finite_request(material, f_old, np.diag([lat + h, lat + h, ax]),
                               state, delta), material)
            sig_p = resp_p.state_out[1:7]
            drdl = (0.5 * (sig_p[0] + sig_p[1]) - r) / h
            lat -= r / drdl
        f_old = np.diag([lat, lat, ax])
        state = resp.state_out
        out.append((ax - 1.0, sig[2], state.copy()))
    return out
