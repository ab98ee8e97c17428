"""Wrapper between the host-style and umat-style conventions.

Transforms a :class:`HostRequest` into a :class:`UmatCall`, invokes a
material, and transforms the :class:`UmatResult` back into a
:class:`HostResponse`. The finite-strain leg converts the Cauchy stress to
second Piola-Kirchhoff and the Jaumann-rate Kirchhoff modulus to the full
dS/dF tangent.

Evaluation never mutates the incoming state vector; the caller commits
``state_out`` on increment convergence. This makes the host's
stress-call/tangent-call double invocation within one iteration safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, InvalidConfigurationError
from .material_api import (
    HostRequest,
    HostResponse,
    Material,
    Regime,
    UmatCall,
    pack_state,
    state_length,
    unpack_state,
)
from .voigt import (
    Convention,
    Kind,
    VoigtVector,
    det3,
    inv3,
    polar_decompose,
    reorder_strain_host_to_umat,
    reorder_stress_umat_to_host,
    reorder_tangent_umat_to_host,
    tensor4_to_matrix99,
    tensor_to_voigt,
    umat_strain,
    voigt66_to_tensor4,
    voigt_to_tensor,
)

_I3 = np.eye(3)


@dataclass
class KinematicIncrement:
    """Incremental kinematics handed to a umat-style material at finite strain."""

    dstran: VoigtVector
    drot: np.ndarray
    f_incr: np.ndarray
    j_new: float


def finite_strain_increment(f_old: np.ndarray, f_new: np.ndarray) -> KinematicIncrement:
    """Strain increment and incremental rotation between two deformation states.

    dstran is the symmetrized contraction of dF = f_new - f_old with the
    end-of-increment inverse, vectorized to umat order (engineering shears);
    drot is the rotation factor of the incremental deformation
    f_new * f_old^-1.
    """
    f_old = np.asarray(f_old, dtype=float)
    f_new = np.asarray(f_new, dtype=float)
    j_old, j_new = det3(f_old), det3(f_new)
    if j_old <= 0.0 or j_new <= 0.0:
        raise InvalidConfigurationError(
            f"deformation gradients must have positive determinant "
            f"(det f_old={j_old:g}, det f_new={j_new:g})")
    df = f_new - f_old
    a = df @ inv3(f_new)
    deps = 0.5 * (a + a.T)
    f_incr = f_new @ inv3(f_old)
    drot, _ = polar_decompose(f_incr)
    return KinematicIncrement(
        dstran=tensor_to_voigt(deps, Convention.UMAT, Kind.STRAIN),
        drot=drot,
        f_incr=f_incr,
        j_new=j_new,
    )


def cauchy_to_second_pk(sigma: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Pull the Cauchy stress back to second Piola-Kirchhoff: S = J F^-1 sigma F^-T."""
    sigma = np.asarray(sigma, dtype=float)
    f = np.asarray(f, dtype=float)
    scale = max(1.0, np.max(np.abs(sigma)))
    if np.max(np.abs(sigma - sigma.T)) > 1e-10 * scale:
        raise ContractViolationError("Cauchy stress must be symmetric")
    j = det3(f)
    if j <= 0.0:
        raise InvalidConfigurationError(f"det F must be positive, got {j:g}")
    finv = inv3(f)
    s = j * finv @ sigma @ finv.T
    return 0.5 * (s + s.T)


def dtau_dF(c_abaqus: np.ndarray, tau: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Derivative of the Kirchhoff stress with respect to the deformation
    gradient, reconstructed from the Jaumann-rate modulus.

    Five-term expression: the modulus term plus four Kirchhoff-stress terms
    that restore the convected/spin contributions removed by the corotational
    rate.
    """
    tau = np.asarray(tau, dtype=float)
    f = np.asarray(f, dtype=float)
    scale = max(1.0, np.max(np.abs(tau)))
    if np.max(np.abs(tau - tau.T)) > 1e-8 * scale:
        raise ContractViolationError("Kirchhoff stress must be symmetric within 1e-8")
    j = det3(f)
    if j <= 0.0:
        raise InvalidConfigurationError(f"det F must be positive, got {j:g}")
    finv = inv3(f)
    ftau = finv @ tau            # (F^-1 tau)_lp
    out = j * np.einsum('ipkm,lm->ipkl', c_abaqus, finv)
    out += 0.5 * np.einsum('ik,lp->ipkl', _I3, ftau)
    out -= 0.5 * np.einsum('li,kp->ipkl', finv, tau)
    out += 0.5 * np.einsum('pk,il->ipkl', _I3, ftau.T)
    out -= 0.5 * np.einsum('lp,ik->ipkl', finv, tau)
    return out


def tangent_jaumann_to_dSdF(c_abaqus: np.ndarray, tau: np.ndarray,
                            f: np.ndarray) -> np.ndarray:
    """Convert a Jaumann-rate Kirchhoff modulus into the 9x9 dS/dF matrix.

    K_ijkl assembles the product-rule expansion of S = F^-1 tau F^-T using
    dtau/dF and the inverse-derivative identity
    dF^-1_jp/dF_kl = -F^-1_lp F^-1_jk, flattened to row-major index pairs.
    """
    f = np.asarray(f, dtype=float)
    finv = inv3(f)
    dtau = dtau_dF(c_abaqus, tau, f)
    pulled = finv @ np.asarray(tau, dtype=float) @ finv.T   # (F^-1 tau F^-T)
    k = -np.einsum('ik,lj->ijkl', finv, pulled)
    k += np.einsum('iq,qpkl,jp->ijkl', finv, dtau, finv, optimize=True)
    k -= np.einsum('il,jk->ijkl', pulled, finv)
    return tensor4_to_matrix99(k)


def small_strain_inputs(req: HostRequest, material: Material) -> UmatCall:
    """Assemble the umat call for a small-strain host request."""
    if req.regime is not Regime.SMALL_STRAIN:
        raise ContractViolationError("small_strain_inputs needs a small-strain request")
    _check_state(req, material)
    time, stress_prev, stran_prev, user = unpack_state(req.state_in, Regime.SMALL_STRAIN)
    e_umat = reorder_strain_host_to_umat(req.strain_total)
    dstran = umat_strain(e_umat.components - stran_prev.components)
    return UmatCall(
        stress_in=stress_prev,
        statev_in=user,
        stran=stran_prev,
        dstran=dstran,
        time=time,
        dtime=req.delta,
        props=req.par,
    )


def finite_strain_inputs(req: HostRequest, material: Material) -> UmatCall:
    """Assemble the umat call for a finite-strain host request."""
    if req.regime is not Regime.FINITE_STRAIN:
        raise ContractViolationError("finite_strain_inputs needs a finite-strain request")
    _check_state(req, material)
    time, stress_prev, _, user = unpack_state(req.state_in, Regime.FINITE_STRAIN)
    kin = finite_strain_increment(req.f_old, req.f_new)
    return UmatCall(
        stress_in=stress_prev,
        statev_in=user,
        stran=umat_strain(np.zeros(6)),
        dstran=kin.dstran,
        time=time,
        dtime=req.delta,
        props=req.par,
        dfgrd0=req.f_old,
        dfgrd1=req.f_new,
        drot=kin.drot,
    )


def _check_state(req: HostRequest, material: Material) -> None:
    expected = state_length(material.regime, material.nstatv_user)
    if req.state_in.size != expected:
        raise ContractViolationError(
            f"state vector length {req.state_in.size} does not match the "
            f"registered layout ({expected}) of material '{material.name}'")
    if material.regime is not req.regime:
        raise ContractViolationError(
            f"material '{material.name}' is registered for "
            f"{material.regime.value}, request is {req.regime.value}")


def eval_material(req: HostRequest, material: Material,
                  stress_only: bool = False) -> HostResponse:
    """Full input transfer -> material call -> output transfer pipeline.

    Pure in its inputs: ``req.state_in`` is left untouched and two calls with
    identical arguments return bit-identical responses. ``stress_only``
    mirrors the host's split stress-call/tangent-call pattern: the response
    carries an empty tangent and materials may skip consistent-modulus work.
    """
    if req.regime is Regime.SMALL_STRAIN:
        call = small_strain_inputs(req, material)
        result = (material.evaluate_stress(call) if stress_only
                  else material.evaluate(call))
        stran_new = umat_strain(call.stran.components + call.dstran.components)
        state_out = pack_state(call.time + req.delta, result.stress_out,
                               stran_new, result.statev_out)
        return HostResponse(
            s=reorder_stress_umat_to_host(result.stress_out),
            tangent=np.zeros((0, 0)) if stress_only
            else reorder_tangent_umat_to_host(result.ddsdde),
            state_out=state_out,
        )

    call = finite_strain_inputs(req, material)
    result = (material.evaluate_stress(call) if stress_only
              else material.evaluate(call))
    sigma = voigt_to_tensor(result.stress_out)
    j = det3(req.f_new)
    s = cauchy_to_second_pk(sigma, req.f_new)
    if stress_only:
        k99 = np.zeros((0, 0))
    else:
        c4 = voigt66_to_tensor4(result.ddsdde, Convention.UMAT)
        k99 = tangent_jaumann_to_dSdF(c4, j * sigma, req.f_new)
    state_out = pack_state(call.time + req.delta, result.stress_out, None,
                           result.statev_out)
    return HostResponse(
        s=tensor_to_voigt(s, Convention.HOST, Kind.STRESS),
        tangent=k99,
        state_out=state_out,
    )
