"""Mesh container, boundary extraction, node/side selection, block-format IO.

The sidecar mesh file format is plain text with node/element blocks::

    # comment
    nodes
    0.0 0.0
    1.0 0.0
    ...
    end
    elements tri3 [tag]
    1 2 3
    ...
    end

Node and element indices are implicit (0-based, in file order); every
``elements`` block may declare a domain tag (default 0). All element blocks
must share one element type.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CaseFileError, ContractViolationError
from .elements import ElementType, element_type


@dataclass
class Mesh:
    nodes: np.ndarray          # (n_nodes, dim)
    elements: np.ndarray       # (n_el, nodes_per_el)
    etype: ElementType
    tags: np.ndarray = None    # (n_el,) domain tags

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.elements = np.asarray(self.elements, dtype=int)
        if self.tags is None:
            self.tags = np.zeros(len(self.elements), dtype=int)
        self.tags = np.asarray(self.tags, dtype=int)
        if self.nodes.ndim != 2 or self.nodes.shape[1] != self.etype.dim:
            raise ContractViolationError(
                f"nodes must be (n, {self.etype.dim}) for {self.etype.name}")
        if self.elements.shape[1] != self.etype.n_nodes:
            raise ContractViolationError(
                f"{self.etype.name} expects {self.etype.n_nodes} nodes per element, "
                f"got {self.elements.shape[1]}")
        if self.elements.min(initial=0) < 0 or \
                self.elements.max(initial=-1) >= len(self.nodes):
            raise ContractViolationError("element connectivity index out of range")
        if len(self.tags) != len(self.elements):
            raise ContractViolationError("one domain tag per element required")

    @property
    def dim(self) -> int:
        return self.etype.dim

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def validate_jacobians(self) -> None:
        """Positive Jacobian at every quadrature point of every element."""
        for e, conn in enumerate(self.elements):
            coords = self.nodes[conn]
            for _, dn in self.etype.shape_values:
                j = coords.T @ dn
                if np.linalg.det(j) <= 0.0:
                    raise ContractViolationError(
                        f"non-positive Jacobian in element {e}")

    def boundary_sides(self):
        """(element, local side, node tuple) for every side on the boundary."""
        seen = {}
        for e, conn in enumerate(self.elements):
            for s, side in enumerate(self.etype.sides):
                nodes = tuple(conn[i] for i in side)
                key = tuple(sorted(nodes[:self._n_side_corners()]))
                if key in seen:
                    seen[key] = None
                else:
                    seen[key] = (e, s, nodes)
        return [v for v in seen.values() if v is not None]

    def _n_side_corners(self):
        # corner count identifies a side uniquely (midside nodes excluded)
        return 2 if self.dim == 2 else (4 if self.etype.name == "hex8" else 3)

    # -- selection ----------------------------------------------------------

    def select_nodes(self, where: dict, tol: float = 1e-9) -> np.ndarray:
        """Node ids matching coordinate predicates like {"x": 0.0}.

        The key "r" selects by distance from the origin (e.g. a hole arc).
        """
        mask = np.ones(self.n_nodes, dtype=bool)
        scale = max(1.0, float(np.max(np.abs(self.nodes))))
        for key, val in where.items():
            if key == "r":
                dist = np.linalg.norm(self.nodes, axis=1)
                mask &= np.abs(dist - float(val)) <= max(tol * scale, 1e-6 * float(val))
                continue
            axis = {"x": 0, "y": 1, "z": 2}.get(key)
            if axis is None or axis >= self.dim:
                raise ContractViolationError(
                    f"selector key '{key}' invalid for a {self.dim}D mesh")
            mask &= np.abs(self.nodes[:, axis] - float(val)) <= tol * scale
        return np.nonzero(mask)[0]

    def select_sides(self, where: dict, tol: float = 1e-9):
        """Boundary sides whose nodes all match the coordinate predicates."""
        chosen = set(self.select_nodes(where, tol))
        return [(e, s, nodes) for e, s, nodes in self.boundary_sides()
                if all(n in chosen for n in nodes)]


# ---------------------------------------------------------------------------
# Block-format file IO
# ---------------------------------------------------------------------------

def read_mesh_file(path) -> Mesh:
    nodes = []
    elements = []
    tags = []
    etype_name = None
    mode = None
    tag = 0
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            words = line.split()
            if words[0] == "nodes":
                mode = "nodes"
                continue
            if words[0] == "elements":
                if len(words) < 2:
                    raise CaseFileError("elements block needs an element type",
                                        line=ln, key="elements")
                if etype_name is not None and words[1] != etype_name:
                    raise CaseFileError("all element blocks must share one type",
                                        line=ln, key="elements")
                etype_name = words[1]
                tag = int(words[2]) if len(words) > 2 else 0
                mode = "elements"
                continue
            if words[0] == "end":
                mode = None
                continue
            if mode == "nodes":
                nodes.append([float(w) for w in words])
            elif mode == "elements":
                elements.append([int(w) for w in words])
                tags.append(tag)
            else:
                raise CaseFileError(f"unexpected content outside a block: {line!r}",
                                    line=ln)
    if etype_name is None or not nodes:
        raise CaseFileError(f"mesh file {path} has no nodes/elements blocks")
    return Mesh(np.array(nodes), np.array(elements), element_type(etype_name),
                np.array(tags))


def write_mesh_file(mesh: Mesh, path) -> None:
    with open(path, "w") as fh:
        fh.write("nodes\n")
        for row in mesh.nodes:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
        fh.write("end\n")
        for tag in np.unique(mesh.tags):
            fh.write(f"elements {mesh.etype.name} {tag}\n")
            for conn in mesh.elements[mesh.tags == tag]:
                fh.write(" ".join(str(i) for i in conn) + "\n")
            fh.write("end\n")
