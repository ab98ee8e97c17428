"""Minimal quasi-static nonlinear FE driver built around the bridge."""

from .assembly import FEModel, GaussState
from .casefile import CaseDefinition, case_from_dict, load_case
from .elements import ELEMENTS, element_type
from .mesh import Mesh, read_mesh_file, write_mesh_file
from .meshgen import box_mesh, plate_with_hole, rect_mesh
from .newton import (
    DirichletBC,
    IncrementTrace,
    IterationRecord,
    NewtonSolver,
    SolverTrace,
    stationary_schedule,
    transient_schedule,
)
from .norms import (
    DEFAULT_TOL_ABAQUS,
    DEFAULT_TOL_COMSOL,
    norm_abaqus_style,
    norm_comsol_style,
    spatial_force_average,
)
from .runner import RunResult, build_model, run_case
