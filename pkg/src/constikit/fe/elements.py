"""Low-order element library: shape functions and quadrature rules.

Supported volume/plane elements: tri3, tri6, quad4, tet4, tet10, hex8.
Quadratic simplices use reduced rules (3-point triangles, 4-point
tetrahedra); bilinear/trilinear elements use full Gauss rules. Boundary
integration reuses the matching line/surface shape functions.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractViolationError

_G = 1.0 / np.sqrt(3.0)
_TA, _TB = 0.5854101966249685, 0.13819660112501053  # 4-pt tet rule


def _tri3():
    pts = np.array([[1.0 / 3.0, 1.0 / 3.0]])
    wts = np.array([0.5])

    def shape(xi):
        x, y = xi
        n = np.array([1.0 - x - y, x, y])
        dn = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        return n, dn

    return pts, wts, shape


def _tri6():
    pts = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
    wts = np.full(3, 1.0 / 6.0)

    def shape(xi):
        x, y = xi
        l1, l2, l3 = 1.0 - x - y, x, y
        n = np.array([l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), l3 * (2 * l3 - 1),
                      4 * l1 * l2, 4 * l2 * l3, 4 * l3 * l1])
        dl = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        dn = np.zeros((6, 2))
        dn[0] = (4 * l1 - 1) * dl[0]
        dn[1] = (4 * l2 - 1) * dl[1]
        dn[2] = (4 * l3 - 1) * dl[2]
        dn[3] = 4 * (l2 * dl[0] + l1 * dl[1])
        dn[4] = 4 * (l3 * dl[1] + l2 * dl[2])
        dn[5] = 4 * (l1 * dl[2] + l3 * dl[0])
        return n, dn

    return pts, wts, shape


def _quad4():
    pts = np.array([[sx * _G, sy * _G] for sx in (-1, 1) for sy in (-1, 1)])
    wts = np.ones(4)

    def shape(xi):
        x, y = xi
        n = 0.25 * np.array([(1 - x) * (1 - y), (1 + x) * (1 - y),
                             (1 + x) * (1 + y), (1 - x) * (1 + y)])
        dn = 0.25 * np.array([[-(1 - y), -(1 - x)],
                              [(1 - y), -(1 + x)],
                              [(1 + y), (1 + x)],
                              [-(1 + y), (1 - x)]])
        return n, dn

    return pts, wts, shape


def _tet4():
    pts = np.array([[0.25, 0.25, 0.25]])
    wts = np.array([1.0 / 6.0])

    def shape(xi):
        x, y, z = xi
        n = np.array([1.0 - x - y - z, x, y, z])
        dn = np.array([[-1.0, -1.0, -1.0], [1, 0, 0], [0, 1, 0], [0, 0, 1]],
                      dtype=float)
        return n, dn

    return pts, wts, shape


def _tet10():
    pts = np.array([[_TA, _TB, _TB], [_TB, _TA, _TB], [_TB, _TB, _TA],
                    [_TB, _TB, _TB]])
    wts = np.full(4, 1.0 / 24.0)

    def shape(xi):
        x, y, z = xi
        l1, l2, l3, l4 = 1.0 - x - y - z, x, y, z
        n = np.array([l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), l3 * (2 * l3 - 1),
                      l4 * (2 * l4 - 1),
                      4 * l1 * l2, 4 * l2 * l3, 4 * l3 * l1,
                      4 * l1 * l4, 4 * l2 * l4, 4 * l3 * l4])
        dl = np.array([[-1.0, -1.0, -1.0], [1, 0, 0], [0, 1, 0], [0, 0, 1]],
                      dtype=float)
        dn = np.zeros((10, 3))
        for a, la in enumerate((l1, l2, l3, l4)):
            dn[a] = (4 * la - 1) * dl[a]
        dn[4] = 4 * (l2 * dl[0] + l1 * dl[1])
        dn[5] = 4 * (l3 * dl[1] + l2 * dl[2])
        dn[6] = 4 * (l1 * dl[2] + l3 * dl[0])
        dn[7] = 4 * (l4 * dl[0] + l1 * dl[3])
        dn[8] = 4 * (l4 * dl[1] + l2 * dl[3])
        dn[9] = 4 * (l4 * dl[2] + l3 * dl[3])
        return n, dn

    return pts, wts, shape


def _hex8():
    pts = np.array([[sx * _G, sy * _G, sz * _G]
                    for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)])
    wts = np.ones(8)
    corners = np.array([[-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1],
                        [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1]],
                       dtype=float)

    def shape(xi):
        x, y, z = xi
        n = 0.125 * (1 + corners[:, 0] * x) * (1 + corners[:, 1] * y) \
            * (1 + corners[:, 2] * z)
        dn = np.empty((8, 3))
        dn[:, 0] = 0.125 * corners[:, 0] * (1 + corners[:, 1] * y) * (1 + corners[:, 2] * z)
        dn[:, 1] = 0.125 * corners[:, 1] * (1 + corners[:, 0] * x) * (1 + corners[:, 2] * z)
        dn[:, 2] = 0.125 * corners[:, 2] * (1 + corners[:, 0] * x) * (1 + corners[:, 1] * y)
        return n, dn

    return pts, wts, shape


class ElementType:
    """Shape-function bundle with precomputed values at the quadrature points."""

    def __init__(self, name, dim, n_nodes, rule, edges=None, faces=None):
        self.name = name
        self.dim = dim
        self.n_nodes = n_nodes
        pts, wts, shape = rule()
        self.gauss_points = pts
        self.gauss_weights = wts
        self.shape = shape
        self.n_gauss = len(wts)
        self.shape_values = [shape(p) for p in pts]
        # local connectivity of boundary entities (edges in 2D, faces in 3D)
        self.edges = edges or ()
        self.faces = faces or ()

    @property
    def sides(self):
        return self.edges if self.dim == 2 else self.faces


def _line2_volume():
    pts = np.array([[-_G], [_G]])
    wts = np.ones(2)

    def shape(xi):
        x = xi[0]
        n = np.array([0.5 * (1 - x), 0.5 * (1 + x)])
        dn = np.array([[-0.5], [0.5]])
        return n, dn

    return pts, wts, shape


ELEMENTS = {
    "line2": ElementType("line2", 1, 2, _line2_volume),
    "tri3": ElementType("tri3", 2, 3, _tri3,
                        edges=((0, 1), (1, 2), (2, 0))),
    "tri6": ElementType("tri6", 2, 6, _tri6,
                        edges=((0, 1, 3), (1, 2, 4), (2, 0, 5))),
    "quad4": ElementType("quad4", 2, 4, _quad4,
                         edges=((0, 1), (1, 2), (2, 3), (3, 0))),
    "tet4": ElementType("tet4", 3, 4, _tet4,
                        faces=((0, 2, 1), (0, 1, 3), (1, 2, 3), (0, 3, 2))),
    "tet10": ElementType("tet10", 3, 10, _tet10,
                         faces=((0, 2, 1, 6, 5, 4), (0, 1, 3, 4, 8, 7),
                                (1, 2, 3, 5, 9, 8), (0, 3, 2, 7, 9, 6))),
    "hex8": ElementType("hex8", 3, 8, _hex8,
                        faces=((0, 3, 2, 1), (4, 5, 6, 7), (0, 1, 5, 4),
                               (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7))),
}


def element_type(name: str) -> ElementType:
    try:
        return ELEMENTS[name]
    except KeyError:
        raise ContractViolationError(
            f"unknown element type '{name}'; supported: {', '.join(sorted(ELEMENTS))}"
        ) from None


# ---------------------------------------------------------------------------
# Boundary (line / surface) integration elements
# ---------------------------------------------------------------------------

def _line2():
    pts = np.array([[-_G], [_G]])
    wts = np.ones(2)

    def shape(xi):
        x = xi[0]
        n = np.array([0.5 * (1 - x), 0.5 * (1 + x)])
        dn = np.array([[-0.5], [0.5]])
        return n, dn

    return pts, wts, shape


def _line3():
    # nodes: end, end, middle  (matching tri6 edge ordering)
    g = np.sqrt(0.6)
    pts = np.array([[-g], [0.0], [g]])
    wts = np.array([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])

    def shape(xi):
        x = xi[0]
        n = np.array([0.5 * x * (x - 1), 0.5 * x * (x + 1), 1 - x * x])
        dn = np.array([[x - 0.5], [x + 0.5], [-2 * x]])
        return n, dn

    return pts, wts, shape


BOUNDARY_BY_NODES = {
    (2, 2): ElementType("line2", 1, 2, _line2),
    (2, 3): ElementType("line3", 1, 3, _line3),
    (3, 3): ElementType("tri3_face", 2, 3, _tri3),
    (3, 6): ElementType("tri6_face", 2, 6, _tri6),
    (3, 4): ElementType("quad4_face", 2, 4, _quad4),
}


def boundary_element(mesh_dim: int, n_side_nodes: int) -> ElementType:
    try:
        return BOUNDARY_BY_NODES[(mesh_dim, n_side_nodes)]
    except KeyError:
        raise ContractViolationError(
            f"no boundary integration rule for {n_side_nodes}-node sides in "
            f"{mesh_dim}D") from None
