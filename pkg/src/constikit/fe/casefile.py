"""Case-file schema: a YAML document describing mesh, materials, boundary
conditions, stepping, and tolerance.

Top-level keys::

    name:        string (optional)
    regime:      small_strain | finite_strain
    model:       plane_stress | plane_strain | 3d
    thickness:   number (2D only, default 1.0)
    mesh:        {generator: name, params: {...}}
                 | {file: mesh.txt}
                 | {inline: {type: tri3, nodes: [...], elements: [...],
                             tags: [...]}}
    materials:   list of {name: registered-name | plugin: lib-path,
                          props: [...], tags: all | [ints],
                          initial_user_state: [...] (optional)}
    bcs:
      dirichlet: list of {where: {x: v, ...}, comp: x|y|z|all, value: num,
                          ramp: bool (default true)}
                 | {kind: rotation, where: ..., axis: [..], center: [..],
                    angle_deg: num}
      neumann:   list of {where: {...}, traction: [tx, ty(, tz)]}
    stepping:    {kind: stationary, increments: N}
                 | {kind: transient, dt: [..]}
    tolerance:   {norm: abaqus | comsol, value: num}   (defaults 5e-3 / 1e-3)
    max_iterations: int (default 25)
    monitor:     {where: {...}, comp: x|y|z,
                  area: num (optional), length: num (optional)}
    transport:   hydrogen-transport block, see the hydrogen module

Scientific-notation wrinkle: YAML 1.1 requires ``1.0e-3`` (with the decimal
point); bare ``1e-3`` parses as a string and is rejected with its key name.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from ..errors import CaseFileError
from ..material_api import Regime
from .mesh import Mesh, read_mesh_file
from .elements import element_type
from . import meshgen

_COMP = {"x": 0, "y": 1, "z": 2}


@dataclass
class MaterialSpec:
    props: np.ndarray
    tags: list | str = "all"
    name: str | None = None
    plugin: str | None = None
    initial_user_state: np.ndarray | None = None


@dataclass
class DirichletSpec:
    where: dict
    comp: str = "all"
    value: float = 0.0
    ramp: bool = True
    kind: str = "fixed"            # fixed | rotation
    axis: np.ndarray | None = None
    center: np.ndarray | None = None
    angle_deg: float = 0.0


@dataclass
class NeumannSpec:
    where: dict
    traction: np.ndarray


@dataclass
class SteppingSpec:
    kind: str = "stationary"
    increments: int = 1
    dt: list = field(default_factory=list)


@dataclass
class ToleranceSpec:
    norm: str = "comsol"
    value: float = 1e-3


@dataclass
class MonitorSpec:
    where: dict
    comp: str = "x"
    area: float | None = None
    length: float | None = None


@dataclass
class CaseDefinition:
    name: str
    regime: Regime
    model: str
    mesh: Mesh
    materials: list
    dirichlet: list
    neumann: list
    stepping: SteppingSpec
    tolerance: ToleranceSpec
    max_iterations: int = 25
    thickness: float = 1.0
    monitor: MonitorSpec | None = None
    transport: dict | None = None


def _require(mapping, key, kind=None, default=..., context=""):
    if key not in mapping:
        if default is not ...:
            return default
        raise CaseFileError(f"missing required key '{context}{key}'", key=key)
    val = mapping[key]
    if kind is not None and not isinstance(val, kind):
        raise CaseFileError(
            f"key '{context}{key}' has wrong type {type(val).__name__}", key=key)
    return val


def _number(mapping, key, default=..., context=""):
    val = _require(mapping, key, default=default, context=context)
    if val is default and default is not ...:
        return val
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise CaseFileError(
            f"key '{context}{key}' must be a number, got {val!r}", key=key)
    return float(val)


def _number_list(mapping, key, default=..., context=""):
    val = _require(mapping, key, default=default, context=context)
    if val is default and default is not ...:
        return val
    if not isinstance(val, list) or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in val):
        raise CaseFileError(
            f"key '{context}{key}' must be a list of numbers", key=key)
    return [float(v) for v in val]


def load_case(path) -> CaseDefinition:
    """Parse and validate a case file; errors carry line/column or key name."""
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise CaseFileError(f"case file not found: {path}")
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        raise CaseFileError(
            f"case file does not parse: {err}",
            line=None if mark is None else mark.line + 1,
            column=None if mark is None else mark.column + 1)
    if not isinstance(doc, dict):
        raise CaseFileError("case file must be a mapping at top level")
    return case_from_dict(doc, base_dir=os.path.dirname(os.path.abspath(path)))


def case_from_dict(doc: dict, base_dir: str = ".") -> CaseDefinition:
    regime_name = _require(doc, "regime", str)
    try:
        regime = Regime(regime_name)
    except ValueError:
        raise CaseFileError(
            f"regime must be small_strain or finite_strain, got '{regime_name}'",
            key="regime")
    model = _require(doc, "model", str)
    if model not in ("plane_stress", "plane_strain", "3d"):
        raise CaseFileError(f"model must be plane_stress/plane_strain/3d, "
                            f"got '{model}'", key="model")

    mesh = _parse_mesh(_require(doc, "mesh", dict), base_dir)
    mesh.validate_jacobians()

    mats = _require(doc, "materials", list)
    materials = []
    for i, m in enumerate(mats):
        if not isinstance(m, dict):
            raise CaseFileError(f"materials[{i}] must be a mapping", key="materials")
        ctx = f"materials[{i}]."
        name = _require(m, "name", str, default=None, context=ctx)
        plugin = _require(m, "plugin", str, default=None, context=ctx)
        if (name is None) == (plugin is None):
            raise CaseFileError(
                f"materials[{i}] needs exactly one of 'name' or 'plugin'",
                key="materials")
        tags = m.get("tags", "all")
        if tags != "all" and not isinstance(tags, list):
            raise CaseFileError(f"key '{ctx}tags' must be 'all' or a list",
                                key="tags")
        init = m.get("initial_user_state")
        materials.append(MaterialSpec(
            props=np.array(_number_list(m, "props", context=ctx)),
            tags=tags, name=name,
            plugin=None if plugin is None else os.path.join(base_dir, plugin)
            if not os.path.isabs(plugin) else plugin,
            initial_user_state=None if init is None else np.array(init, dtype=float),
        ))

    bcs = _require(doc, "bcs", dict, default={})
    dirichlet = []
    for i, b in enumerate(bcs.get("dirichlet", []) or []):
        ctx = f"bcs.dirichlet[{i}]."
        kind = b.get("kind", "fixed")
        if kind == "rotation":
            dirichlet.append(DirichletSpec(
                where=_require(b, "where", dict, context=ctx),
                kind="rotation",
                axis=np.array(_number_list(b, "axis", context=ctx)),
                center=np.array(_number_list(b, "center", context=ctx)),
                angle_deg=_number(b, "angle_deg", context=ctx),
            ))
            continue
        comp = b.get("comp", "all")
        if comp not in ("x", "y", "z", "all"):
            raise CaseFileError(f"key '{ctx}comp' must be x/y/z/all", key="comp")
        dirichlet.append(DirichletSpec(
            where=_require(b, "where", dict, context=ctx),
            comp=comp,
            value=_number(b, "value", default=0.0, context=ctx),
            ramp=bool(b.get("ramp", True)),
        ))
    neumann = []
    for i, b in enumerate(bcs.get("neumann", []) or []):
        ctx = f"bcs.neumann[{i}]."
        neumann.append(NeumannSpec(
            where=_require(b, "where", dict, context=ctx),
            traction=np.array(_number_list(b, "traction", context=ctx)),
        ))

    step_doc = _require(doc, "stepping", dict)
    kind = _require(step_doc, "kind", str, context="stepping.")
    if kind == "stationary":
        n = _require(step_doc, "increments", int, context="stepping.")
        if n < 1:
            raise CaseFileError("stepping.increments must be >= 1", key="increments")
        stepping = SteppingSpec(kind="stationary", increments=n)
    elif kind == "transient":
        dt = _number_list(step_doc, "dt", context="stepping.")
        if not dt or any(d <= 0 for d in dt):
            raise CaseFileError("stepping.dt must be positive time increments",
                                key="dt")
        stepping = SteppingSpec(kind="transient", dt=dt)
    else:
        raise CaseFileError(f"stepping.kind must be stationary or transient, "
                            f"got '{kind}'", key="kind")

    tol_doc = _require(doc, "tolerance", dict, default={})
    tol_norm = tol_doc.get("norm", "comsol")
    if tol_norm not in ("abaqus", "comsol"):
        raise CaseFileError("tolerance.norm must be 'abaqus' or 'comsol'",
                            key="norm")
    tol_value = _number(tol_doc, "value",
                        default=5e-3 if tol_norm == "abaqus" else 1e-3,
                        context="tolerance.")
    if tol_value <= 0:
        raise CaseFileError("tolerance.value must be positive", key="value")

    monitor = None
    if "monitor" in doc:
        mdoc = _require(doc, "monitor", dict)
        monitor = MonitorSpec(
            where=_require(mdoc, "where", dict, context="monitor."),
            comp=mdoc.get("comp", "x"),
            area=_number(mdoc, "area", default=None, context="monitor."),
            length=_number(mdoc, "length", default=None, context="monitor."),
        )

    return CaseDefinition(
        name=str(doc.get("name", "case")),
        regime=regime,
        model=model,
        mesh=mesh,
        materials=materials,
        dirichlet=dirichlet,
        neumann=neumann,
        stepping=stepping,
        tolerance=ToleranceSpec(tol_norm, tol_value),
        max_iterations=int(doc.get("max_iterations", 25)),
        thickness=_number(doc, "thickness", default=1.0),
        monitor=monitor,
        transport=doc.get("transport"),
    )


def _parse_mesh(mdoc: dict, base_dir: str) -> Mesh:
    sources = [k for k in ("generator", "file", "inline") if k in mdoc]
    if len(sources) != 1:
        raise CaseFileError(
            "mesh needs exactly one of 'generator', 'file', 'inline'", key="mesh")
    if "generator" in mdoc:
        params = mdoc.get("params", {}) or {}
        if not isinstance(params, dict):
            raise CaseFileError("mesh.params must be a mapping", key="params")
        return meshgen.generate(mdoc["generator"], params)
    if "file" in mdoc:
        path = mdoc["file"]
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        return read_mesh_file(path)
    inline = mdoc["inline"]
    etype = element_type(_require(inline, "type", str, context="mesh.inline."))
    return Mesh(np.array(_require(inline, "nodes", list, context="mesh.inline.")),
                np.array(_require(inline, "elements", list, context="mesh.inline.")),
                etype,
                np.array(inline["tags"]) if "tags" in inline else None)


def component_index(comp: str) -> int:
    return _COMP[comp]
