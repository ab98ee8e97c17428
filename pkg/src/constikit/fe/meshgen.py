"""Parametric desk-scale mesh generators.

All generators return :class:`Mesh` objects; case files refer to them by
name through the ``mesh: {generator: ..., params: {...}}`` block.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractViolationError
from .elements import element_type
from .mesh import Mesh

# Kuhn subdivision of a hexahedron into 6 tetrahedra sharing diagonal 0-6
_KUHN = ((0, 1, 2, 6), (0, 2, 3, 6), (0, 3, 7, 6),
         (0, 7, 4, 6), (0, 4, 5, 6), (0, 5, 1, 6))
# five-tet subdivision (four corner tets + centre); mirrored for odd parity
_FIVE = ((0, 1, 3, 4), (1, 2, 3, 6), (1, 5, 6, 4), (3, 6, 7, 4), (1, 3, 6, 4))
_MIRROR_X = (1, 0, 3, 2, 5, 4, 7, 6)

_TET10_EDGES = ((0, 1), (1, 2), (2, 0), (0, 3), (1, 3), (2, 3))
_TRI6_EDGES = ((0, 1), (1, 2), (2, 0))


def _fix_orientation(nodes, tets):
    out = []
    for t in tets:
        p = nodes[list(t)]
        vol = np.linalg.det(p[1:] - p[0])
        out.append(t if vol > 0 else (t[0], t[2], t[1], t[3]))
    return out


def _add_midside(nodes, elements, edges):
    """Insert shared midside nodes; returns (new nodes, quadratic connectivity)."""
    nodes = list(map(np.asarray, nodes))
    cache = {}
    out = []
    for conn in elements:
        quad = list(conn)
        for a, b in edges:
            key = tuple(sorted((conn[a], conn[b])))
            if key not in cache:
                cache[key] = len(nodes)
                nodes.append(0.5 * (nodes[conn[a]] + nodes[conn[b]]))
            quad.append(cache[key])
        out.append(quad)
    return np.array(nodes), np.array(out, dtype=int), cache


def rect_mesh(lx, ly, nx, ny, etype="quad4", distort=0.0):
    """Structured rectangle [0,lx]x[0,ly]; optional interior distortion."""
    xs = np.linspace(0.0, lx, nx + 1)
    ys = np.linspace(0.0, ly, ny + 1)
    nodes = np.array([[x, y] for y in ys for x in xs])
    if distort:
        rng = np.random.default_rng(1234)
        interior = ((nodes[:, 0] > 1e-12) & (nodes[:, 0] < lx - 1e-12)
                    & (nodes[:, 1] > 1e-12) & (nodes[:, 1] < ly - 1e-12))
        nodes[interior] += distort * min(lx / nx, ly / ny) \
            * (rng.random((interior.sum(), 2)) - 0.5)

    def nid(i, j):
        return j * (nx + 1) + i

    quads = [(nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1))
             for j in range(ny) for i in range(nx)]
    if etype == "quad4":
        return Mesh(nodes, np.array(quads), element_type("quad4"))
    tris = []
    for a, b, c, d in quads:
        tris += [(a, b, c), (a, c, d)]
    if etype == "tri3":
        return Mesh(nodes, np.array(tris), element_type("tri3"))
    if etype == "tri6":
        nodes2, conn, _ = _add_midside(nodes, tris, _TRI6_EDGES)
        return Mesh(nodes2, conn, element_type("tri6"))
    raise ContractViolationError(f"rect_mesh cannot build '{etype}'")


def box_mesh(lx, ly, lz, nx, ny, nz, etype="hex8", split="kuhn", distort=0.0,
             tag_mode="single"):
    """Structured box; hexes, or tets by Kuhn/five-tet subdivision.

    ``tag_mode="per_element"`` gives every element its own domain tag
    (used by the small-polycrystal case, one grain per element).
    """
    xs = np.linspace(0.0, lx, nx + 1)
    ys = np.linspace(0.0, ly, ny + 1)
    zs = np.linspace(0.0, lz, nz + 1)
    nodes = np.array([[x, y, z] for z in zs for y in ys for x in xs])
    if distort:
        rng = np.random.default_rng(4321)
        h = min(lx / nx, ly / ny, lz / nz)
        interior = np.all((nodes > 1e-12) & (nodes < [lx - 1e-12, ly - 1e-12,
                                                      lz - 1e-12]), axis=1)
        nodes[interior] += distort * h * (rng.random((interior.sum(), 3)) - 0.5)

    def nid(i, j, k):
        return (k * (ny + 1) + j) * (nx + 1) + i

    hexes = []
    parity = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                hexes.append((nid(i, j, k), nid(i + 1, j, k),
                              nid(i + 1, j + 1, k), nid(i, j + 1, k),
                              nid(i, j, k + 1), nid(i + 1, j, k + 1),
                              nid(i + 1, j + 1, k + 1), nid(i, j + 1, k + 1)))
                parity.append((i + j + k) % 2)

    def tags_for(n_el):
        return np.arange(n_el) if tag_mode == "per_element" else None

    if etype == "hex8":
        return Mesh(nodes, np.array(hexes), element_type("hex8"),
                    tags_for(len(hexes)))

    tets = []
    for h, par in zip(hexes, parity):
        if split == "kuhn":
            local = _KUHN
            verts = h
        elif split == "five":
            local = _FIVE
            verts = h if par == 0 else tuple(h[m] for m in _MIRROR_X)
        else:
            raise ContractViolationError(f"unknown tet split '{split}'")
        tets += [tuple(verts[a] for a in t) for t in local]
    tets = _fix_orientation(nodes, tets)
    if etype == "tet4":
        return Mesh(nodes, np.array(tets), element_type("tet4"),
                    tags_for(len(tets)))
    if etype == "tet10":
        nodes2, conn, _ = _add_midside(nodes, tets, _TET10_EDGES)
        return Mesh(nodes2, conn, element_type("tet10"), tags_for(len(conn)))
    raise ContractViolationError(f"box_mesh cannot build '{etype}'")


def plate_with_hole(width=18.0e-3, height=18.0e-3, radius=5.0e-3,
                    n_hoop=12, n_radial=12, bias=1.15, etype="tri6"):
    """Quarter plate with a central circular hole (hole centred at the origin).

    Rays fan from the hole arc to the outer rectangle boundary; ring spacing
    is geometrically biased towards the hole to resolve the stress
    concentration. Midside nodes of hole-arc edges are projected back onto
    the circle.
    """
    if radius >= min(width, height):
        raise ContractViolationError("hole radius must be smaller than the plate")
    thetas = np.linspace(0.0, np.pi / 2.0, n_hoop + 1)
    # geometric ring fractions in [0, 1], finer near the hole
    weights = np.cumsum(bias ** np.arange(n_radial))
    fractions = np.concatenate(([0.0], weights / weights[-1]))

    def outer_point(theta):
        # ray from the origin hits the rectangle boundary
        c, s = np.cos(theta), np.sin(theta)
        if s * width <= c * height:    # hits x = width first
            return np.array([width, width * s / max(c, 1e-15)])
        return np.array([height * c / max(s, 1e-15), height])

    nodes = []
    for theta in thetas:
        hole = radius * np.array([np.cos(theta), np.sin(theta)])
        outer = outer_point(theta)
        for frac in fractions:
            nodes.append(hole + frac * (outer - hole))
    nodes = np.array(nodes)
    nr = n_radial + 1

    def nid(it, ir):
        return it * nr + ir

    tris = []
    for it in range(n_hoop):
        for ir in range(n_radial):
            a, b = nid(it, ir), nid(it, ir + 1)
            c, d = nid(it + 1, ir + 1), nid(it + 1, ir)
            # alternate the quad diagonal for better shaped triangles
            if (it + ir) % 2 == 0:
                tris += [(a, b, c), (a, c, d)]
            else:
                tris += [(a, b, d), (b, c, d)]
    if etype == "tri3":
        mesh = Mesh(nodes, np.array(tris), element_type("tri3"))
        mesh.validate_jacobians()
        return mesh
    if etype != "tri6":
        raise ContractViolationError(f"plate_with_hole cannot build '{etype}'")

    nodes2, conn, cache = _add_midside(nodes, tris, _TRI6_EDGES)
    # project hole-arc midside nodes onto the circle
    on_hole = {nid(it, 0) for it in range(n_hoop + 1)}
    for (a, b), mid in cache.items():
        if a in on_hole and b in on_hole:
            p = nodes2[mid]
            nodes2[mid] = radius * p / np.linalg.norm(p)
    mesh = Mesh(nodes2, conn, element_type("tri6"))
    mesh.validate_jacobians()
    return mesh


def interval_mesh(length=1.0, n_elements=199):
    """1D bar of 2-node elements (transport problems)."""
    nodes = np.linspace(0.0, length, n_elements + 1)[:, None]
    elems = np.column_stack([np.arange(n_elements), np.arange(1, n_elements + 1)])
    return Mesh(nodes, elems, element_type("line2"))


GENERATORS = {
    "rect": rect_mesh,
    "box": box_mesh,
    "plate_with_hole": plate_with_hole,
    "interval": interval_mesh,
}


def generate(name: str, params: dict) -> Mesh:
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise ContractViolationError(
            f"unknown mesh generator '{name}'; available: "
            f"{', '.join(sorted(GENERATORS))}") from None
    return gen(**params)
