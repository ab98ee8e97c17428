"""Shared-library material plugins.

A plugin is a shared library exporting ``umat_entry`` with this exact
signature (all floating-point data 64-bit, all integers 32-bit)::

    void umat_entry(
        double*       stress,   /* [6]  in/out, umat component order      */
        double*       statev,   /* [nstatv] in/out                        */
        double*       ddsdde,   /* [36] out, column-major (Fortran order) */
        const double* stran,    /* [6]                                    */
        const double* dstran,   /* [6]                                    */
        const double* time,     /* [2]  step time, total time             */
        double        dtime,
        const double* props,    /* [nprops]                               */
        int32_t       nprops,
        int32_t       nstatv,
        const double* dfgrd0,   /* [9] column-major                       */
        const double* dfgrd1,   /* [9] column-major                       */
        const double* drot,     /* [9] column-major                       */
        int32_t       ntens,    /* always 6                               */
        int32_t*      status);  /* out, 0 = ok, nonzero = material failure */

All quantities are SI; no unit negotiation happens across the boundary.
Matrices cross the boundary in Fortran order, which is where the transpose
mentioned by the tangent-reordering contract is applied.

Each library ships with a metadata sidecar ``<libstem>.meta.yaml`` holding
``name``, ``nprops``, ``nstatv_user`` and ``regime``. Libraries given by
bare name are searched on the ``CONSTIKIT_PLUGIN_PATH`` list.

Plugins must be reentrant: the host may invoke them concurrently from
several evaluation threads (the conformance suite hammers this).
"""

from __future__ import annotations

import ctypes
import dataclasses
import os
from dataclasses import dataclass

import numpy as np
import yaml

from .errors import (
    ContractViolationError,
    MaterialError,
    PluginLoadError,
    PluginSymbolError,
)
from .material_api import Material, Regime, UmatCall, UmatResult
from .voigt import umat_stress

ENTRY_SYMBOL = "umat_entry"
SEARCH_PATH_ENV = "CONSTIKIT_PLUGIN_PATH"

_DP = ctypes.POINTER(ctypes.c_double)
_ARGTYPES = [
    _DP, _DP, _DP, _DP, _DP, _DP,
    ctypes.c_double,
    _DP, ctypes.c_int32, ctypes.c_int32,
    _DP, _DP, _DP,
    ctypes.c_int32, ctypes.POINTER(ctypes.c_int32),
]


def _resolve_path(path: str) -> str:
    if os.path.exists(path):
        return os.path.abspath(path)
    if not os.path.isabs(path) and os.sep not in path:
        for root in os.environ.get(SEARCH_PATH_ENV, "").split(os.pathsep):
            if root and os.path.exists(os.path.join(root, path)):
                return os.path.abspath(os.path.join(root, path))
    raise PluginLoadError(f"plugin library not found: {path}")


def _sidecar_path(libpath: str) -> str:
    stem, _ = os.path.splitext(libpath)
    return stem + ".meta.yaml"


def read_metadata(libpath: str) -> dict:
    sidecar = _sidecar_path(libpath)
    if not os.path.exists(sidecar):
        raise PluginLoadError(
            f"metadata sidecar not found next to the library: {sidecar}")
    with open(sidecar) as fh:
        meta = yaml.safe_load(fh)
    for key in ("name", "nprops", "nstatv_user", "regime"):
        if key not in meta:
            raise ContractViolationError(
                f"plugin metadata {sidecar} is missing '{key}'")
    return meta


@dataclass
class PluginHandle:
    path: str
    entry: object
    name: str
    nprops: int
    nstatv_user: int
    regime: Regime


def open_plugin(path: str, metadata: dict | None = None) -> PluginHandle:
    """dlopen the library, resolve the entry symbol, validate metadata."""
    libpath = _resolve_path(path)
    meta = metadata if metadata is not None else read_metadata(libpath)
    try:
        regime = Regime(meta["regime"])
    except ValueError:
        raise ContractViolationError(
            f"plugin metadata regime must be small_strain or finite_strain, "
            f"got {meta['regime']!r}")
    try:
        lib = ctypes.CDLL(libpath)
    except OSError as err:
        raise PluginLoadError(f"cannot load plugin {libpath}: {err}") from err
    try:
        entry = getattr(lib, ENTRY_SYMBOL)
    except AttributeError:
        raise PluginSymbolError(
            f"plugin {libpath} does not export '{ENTRY_SYMBOL}'") from None
    entry.argtypes = _ARGTYPES
    entry.restype = None
    return PluginHandle(
        path=libpath, entry=entry, name=str(meta["name"]),
        nprops=int(meta["nprops"]), nstatv_user=int(meta["nstatv_user"]),
        regime=regime)


class PluginMaterial(Material):
    """A loaded plugin behaving exactly like a built-in material."""

    def __init__(self, handle: PluginHandle, props):
        props = np.ascontiguousarray(props, dtype=float)
        if props.size != handle.nprops:
            raise ContractViolationError(
                f"plugin '{handle.name}' declares nprops={handle.nprops}, "
                f"got {props.size} properties")
        self.handle = handle
        self.props = props
        self.name = handle.name
        self.nprops = handle.nprops
        self.nstatv_user = handle.nstatv_user
        self.regime = handle.regime

    def evaluate(self, call: UmatCall) -> UmatResult:
        if call.props.size == 0 and self.props.size:
            call = dataclasses.replace(call, props=self.props)
        return call_plugin(self.handle, call)


def load_plugin(path: str, props, metadata: dict | None = None) -> PluginMaterial:
    """Open a library and wrap it as a material with the given properties."""
    return PluginMaterial(open_plugin(path, metadata), props)


def call_plugin(handle: PluginHandle, call: UmatCall) -> UmatResult:
    """Marshal one umat-style evaluation across the binary boundary."""
    if call.statev_in.size != handle.nstatv_user:
        raise ContractViolationError(
            f"plugin '{handle.name}' declares nstatv_user={handle.nstatv_user}, "
            f"call carries {call.statev_in.size}")
    stress = np.ascontiguousarray(call.stress_in.components, dtype=float).copy()
    statev = np.ascontiguousarray(call.statev_in, dtype=float).copy()
    ddsdde = np.zeros(36)
    stran = np.ascontiguousarray(call.stran.components, dtype=float)
    dstran = np.ascontiguousarray(call.dstran.components, dtype=float)
    time2 = np.array([call.time, call.time])
    props = np.ascontiguousarray(call.props, dtype=float)
    dfgrd0 = np.asfortranarray(call.dfgrd0, dtype=float).ravel(order="F").copy()
    dfgrd1 = np.asfortranarray(call.dfgrd1, dtype=float).ravel(order="F").copy()
    drot = np.asfortranarray(call.drot, dtype=float).ravel(order="F").copy()
    status = ctypes.c_int32(0)

    def ptr(a):
        return a.ctypes.data_as(_DP)

    handle.entry(ptr(stress), ptr(statev), ptr(ddsdde), ptr(stran), ptr(dstran),
                 ptr(time2), float(call.dtime), ptr(props),
                 np.int32(props.size), np.int32(statev.size),
                 ptr(dfgrd0), ptr(dfgrd1), ptr(drot), np.int32(6),
                 ctypes.byref(status))

    if status.value != 0:
        raise MaterialError(
            f"plugin '{handle.name}' signalled failure (status {status.value})",
            context={"status": status.value})
    if not (np.all(np.isfinite(stress)) and np.all(np.isfinite(ddsdde))
            and np.all(np.isfinite(statev))):
        raise MaterialError(
            f"plugin '{handle.name}' returned non-finite values")
    return UmatResult(
        stress_out=umat_stress(stress),
        statev_out=statev,
        ddsdde=ddsdde.reshape((6, 6), order="F"),
    )
