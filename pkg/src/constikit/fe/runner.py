"""Case orchestration: build the model from a case definition, run the
Newton driver, and serialize results.

Outputs written to the results directory:

* ``trace.csv``        increment, factor, iteration, both norms
* ``reactions.csv``    per-increment reaction sums per component
* ``fields.txt``       final nodal table: node, coords, displacement
* ``force-displacement.csv`` / ``stress-strain.csv``  when a monitor block
  is present (stress/strain variant when area/length normalisations are
  given)
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ..errors import CaseFileError
from .assembly import FEModel
from .casefile import CaseDefinition, component_index
from .newton import DirichletBC, NewtonSolver, SolverTrace, stationary_schedule, transient_schedule


def _axis_rotation(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    k = np.array([[0, -axis[2], axis[1]],
                  [axis[2], 0, -axis[0]],
                  [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


@dataclass
class RunResult:
    case: CaseDefinition
    u_history: list
    trace: SolverTrace
    reactions: list
    schedule: list
    curve: list          # (factor, time, displacement, force) per increment
    committed: object


def resolve_materials(case: CaseDefinition):
    """(tag -> material instance, tag -> initial user state overrides)."""
    from .. import materials as registry
    from ..plugins import load_plugin

    all_tags = sorted(np.unique(case.mesh.tags))
    out = {}
    init_user = {}
    for spec in case.materials:
        if spec.name is not None:
            mat = registry.create(spec.name, spec.props)
        else:
            mat = load_plugin(spec.plugin, props=spec.props)
        tags = all_tags if spec.tags == "all" else spec.tags
        for tag in tags:
            if tag in out:
                raise CaseFileError(f"domain tag {tag} assigned twice",
                                    key="materials")
            out[tag] = mat
            if spec.initial_user_state is not None:
                init_user[tag] = spec.initial_user_state
    missing = [t for t in all_tags if t not in out]
    if missing:
        raise CaseFileError(f"domain tags without material: {missing}",
                            key="materials")
    return out, init_user


def build_dirichlet(case: CaseDefinition) -> list:
    mesh = case.mesh
    dim = mesh.dim
    out = []
    for spec in case.dirichlet:
        nodes = mesh.select_nodes(spec.where)
        if len(nodes) == 0:
            raise CaseFileError(f"dirichlet selector {spec.where} matches no nodes",
                                key="where")
        if spec.kind == "rotation":
            if dim != 3:
                raise CaseFileError("rotation boundary conditions need a 3D mesh",
                                    key="kind")
            dofs = np.concatenate([[n * dim, n * dim + 1, n * dim + 2]
                                   for n in nodes])
            coords = mesh.nodes[nodes]
            angle = np.deg2rad(spec.angle_deg)
            center = spec.center

            def path(factor, coords=coords, angle=angle, center=center,
                     axis=spec.axis):
                r = _axis_rotation(axis, factor * angle)
                disp = (coords - center) @ r.T + center - coords
                return disp.ravel()

            out.append(DirichletBC(dofs, np.zeros(len(dofs)), path=path))
        else:
            comps = range(dim) if spec.comp == "all" else (component_index(spec.comp),)
            for c in comps:
                if c >= dim:
                    raise CaseFileError(f"component '{spec.comp}' invalid in {dim}D",
                                        key="comp")
                dofs = np.array([n * dim + c for n in nodes])
                out.append(DirichletBC(dofs, np.full(len(dofs), spec.value),
                                       ramp=spec.ramp))
    return out


def build_model(case: CaseDefinition):
    mats, init_user = resolve_materials(case)
    model = FEModel(case.mesh, mats, case.regime, model=case.model,
                    thickness=case.thickness)
    model.initial_user = init_user or None
    f_ext = np.zeros(model.ndof)
    for spec in case.neumann:
        sides = case.mesh.select_sides(spec.where)
        if not sides:
            raise CaseFileError(f"neumann selector {spec.where} matches no "
                                "boundary sides", key="where")
        f_ext += model.neumann_force(sides, spec.traction)
    return model, build_dirichlet(case), f_ext


def make_schedule(case: CaseDefinition):
    if case.stepping.kind == "stationary":
        return stationary_schedule(case.stepping.increments)
    return transient_schedule(case.stepping.dt)


def run_case(case: CaseDefinition, out_dir: str | None = None) -> RunResult:
    model, dirichlet, f_ext = build_model(case)
    solver = NewtonSolver(model, dirichlet, f_ext,
                          tol_kind=case.tolerance.norm,
                          tol=case.tolerance.value,
                          max_iter=case.max_iterations)
    schedule = make_schedule(case)
    u_history, trace, committed, reactions = solver.solve(schedule)

    curve = []
    if case.monitor is not None:
        nodes = case.mesh.select_nodes(case.monitor.where)
        if len(nodes) == 0:
            raise CaseFileError(f"monitor selector {case.monitor.where} matches "
                                "no nodes", key="monitor")
        c = component_index(case.monitor.comp)
        dofs = np.array([n * case.mesh.dim + c for n in nodes])
        for (factor, t, _), u, r in zip(schedule, u_history, reactions):
            disp = float(np.mean(u[dofs]))
            force = float(np.sum(factor * f_ext[dofs] + r[dofs]))
            curve.append((factor, t, disp, force))

    result = RunResult(case, u_history, trace, reactions, schedule, curve,
                       committed)
    if out_dir is not None:
        write_outputs(result, out_dir)
    return result


def _fmt(v):
    return f"{v:.17g}"


def write_outputs(result: RunResult, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    case = result.case
    dim = case.mesh.dim

    with open(os.path.join(out_dir, "trace.csv"), "w") as fh:
        fh.write("increment,factor,iteration,norm_abaqus,norm_comsol,converged\n")
        for rec in result.trace.increments:
            for i, it in enumerate(rec.iterations, start=1):
                fh.write(f"{rec.index},{_fmt(rec.factor)},{i},"
                         f"{_fmt(it.norm_abaqus)},{_fmt(it.norm_comsol)},"
                         f"{int(rec.converged)}\n")

    comps = "xyz"[:dim]
    with open(os.path.join(out_dir, "reactions.csv"), "w") as fh:
        fh.write("increment,factor,time,"
                 + ",".join(f"r{c}_total" for c in comps) + "\n")
        constrained = np.zeros(dim * case.mesh.n_nodes, dtype=bool)
        model_dofs = [bc for bc in build_dirichlet(case)]
        for bc in model_dofs:
            constrained[bc.dofs] = True
        for k, ((factor, t, _), r) in enumerate(zip(result.schedule,
                                                    result.reactions), start=1):
            sums = [np.sum(r[c::dim][constrained[c::dim]]) for c in range(dim)]
            fh.write(f"{k},{_fmt(factor)},{_fmt(t)},"
                     + ",".join(_fmt(s) for s in sums) + "\n")

    with open(os.path.join(out_dir, "fields.txt"), "w") as fh:
        fh.write("# node " + " ".join(comps) + " "
                 + " ".join(f"u{c}" for c in comps) + "\n")
        u = result.u_history[-1].reshape(-1, dim)
        for n, (xyz, disp) in enumerate(zip(case.mesh.nodes, u)):
            fh.write(f"{n} " + " ".join(_fmt(v) for v in xyz) + " "
                     + " ".join(_fmt(v) for v in disp) + "\n")

    if result.curve:
        if case.monitor.area is not None and case.monitor.length is not None:
            path = os.path.join(out_dir, "stress-strain.csv")
            with open(path, "w") as fh:
                fh.write("increment,time,strain,stress\n")
                for k, (factor, t, disp, force) in enumerate(result.curve, start=1):
                    fh.write(f"{k},{_fmt(t)},{_fmt(disp / case.monitor.length)},"
                             f"{_fmt(force / case.monitor.area)}\n")
        else:
            path = os.path.join(out_dir, "force-displacement.csv")
            with open(path, "w") as fh:
                fh.write("increment,factor,displacement,force\n")
                for k, (factor, t, disp, force) in enumerate(result.curve, start=1):
                    fh.write(f"{k},{_fmt(factor)},{_fmt(disp)},{_fmt(force)}\n")
