"""Structured hexahedral box meshes and trilinear-mapping cell geometry.

Every cell is described by eight corner positions following a fixed
numbering: corners 1-2-3-4 run counterclockwise around the bottom of the
reference cube (zeta = 0) and corners 5-6-7-8 sit directly above them
(zeta = 1).  All closed-form geometry in this package (volumes, face area
vectors, face flux integrals) is written against that numbering, so it is
centralised here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "REF_CORNERS",
    "FACE_LOOPS",
    "FACE_NAMES",
    "FACE_FAMILY",
    "HexMesh",
    "CellGeometry",
    "build_box_mesh",
    "cell_geometry",
    "hex_volume",
    "face_area_vectors",
    "corner_jacobians",
    "detect_degenerate",
]

# Reference-cube corner coordinates (xi, eta, zeta) in corner-number order.
REF_CORNERS = np.array(
    [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 1.0],
        [1.0, 1.0, 1.0],
        [0.0, 1.0, 1.0],
    ]
)

# The six cell faces as ordered corner loops (0-based).  Each loop is oriented
# so its right-hand normal points out of the cell.
FACE_LOOPS = np.array(
    [
        [3, 2, 1, 0],  # bottom  (-z)
        [4, 5, 6, 7],  # top     (+z)
        [2, 3, 7, 6],  # north   (+y)
        [0, 1, 5, 4],  # south   (-y)
        [3, 0, 4, 7],  # west    (-x)
        [1, 2, 6, 5],  # east    (+x)
    ]
)

FACE_NAMES = ("-z", "+z", "+y", "-y", "-x", "+x")

# Face slots grouped by the Cartesian axis of their reference normal.
FACE_FAMILY = {"x": (4, 5), "y": (2, 3), "z": (0, 1)}

# d/d(xi,eta,zeta) of the eight trilinear shape functions, tabulated at the
# eight reference corners: DN[c, n, d] = dN_n/dd at corner c.
def _shape_gradients() -> np.ndarray:
    grads = np.empty((8, 8, 3))
    for c, (xi, eta, zeta) in enumerate(REF_CORNERS):
        grads[c] = [
            [-(1 - eta) * (1 - zeta), -(1 - xi) * (1 - zeta), -(1 - xi) * (1 - eta)],
            [(1 - eta) * (1 - zeta), -xi * (1 - zeta), -xi * (1 - eta)],
            [eta * (1 - zeta), xi * (1 - zeta), -xi * eta],
            [-eta * (1 - zeta), (1 - xi) * (1 - zeta), -(1 - xi) * eta],
            [-(1 - eta) * zeta, -(1 - xi) * zeta, (1 - xi) * (1 - eta)],
            [(1 - eta) * zeta, -xi * zeta, xi * (1 - eta)],
            [eta * zeta, xi * zeta, xi * eta],
            [-eta * zeta, (1 - xi) * zeta, (1 - xi) * eta],
        ]
    return grads


_CORNER_SHAPE_GRADIENTS = _shape_gradients()


def _face_corner_views(corners: np.ndarray):
    """Gather the four corner positions of all six face loops."""
    quads = corners[..., FACE_LOOPS, :]  # (..., 6, 4, 3)
    return (
        quads[..., 0, :],
        quads[..., 1, :],
        quads[..., 2, :],
        quads[..., 3, :],
    )


def hex_volume(corners: np.ndarray) -> np.ndarray:
    """Signed volume of hexahedra from their eight corner positions.

    Parameters
    ----------
    corners : ndarray, shape (..., 8, 3)
        Corner positions in the canonical numbering.

    Returns
    -------
    ndarray, shape (...)
        The exact integral of the trilinear-mapping Jacobian determinant,
        evaluated in closed form as a sum of six face contributions.
        Negative values signal an inverted cell; degenerate (zero-thickness)
        hexahedra return 0.
    """
    ri, rj, rk, rl = _face_corner_views(np.asarray(corners, dtype=float))
    contrib = np.einsum("...i,...i->...", rj + rk, np.cross(ri + rl, ri + rj))
    return contrib.sum(axis=-1) / 12.0


def face_area_vectors(corners: np.ndarray) -> np.ndarray:
    """Outward area vectors of the six bilinear faces of each cell.

    Each vector is the exact surface integral of the outward unit normal,
    which for a bilinear quad is half the cross product of its diagonals.
    The six vectors of a closed cell sum to zero.
    """
    quads = np.asarray(corners, dtype=float)[..., FACE_LOOPS, :]
    d1 = quads[..., 2, :] - quads[..., 0, :]
    d2 = quads[..., 3, :] - quads[..., 1, :]
    return 0.5 * np.cross(d1, d2)


def corner_jacobians(corners: np.ndarray) -> np.ndarray:
    """Jacobian determinant of the trilinear map at the 8 reference corners.

    Returns an array of shape (..., 8).  Strict positivity at all corners is
    a cheap necessary condition for the map to be invertible on the cell.
    """
    corners = np.asarray(corners, dtype=float)
    jac = np.einsum("cnd,...nv->...cvd", _CORNER_SHAPE_GRADIENTS, corners)
    return np.linalg.det(jac)


@dataclass(frozen=True)
class CellGeometry:
    """Volume, outward face area vectors and corner Jacobian signs of a cell."""

    volume: float
    face_area_vectors: np.ndarray  # (6, 3)
    jacobian_signs: np.ndarray  # (8,)


def cell_geometry(corners: np.ndarray) -> CellGeometry:
    """Evaluate the geometry record of a single cell."""
    corners = np.asarray(corners, dtype=float)
    return CellGeometry(
        volume=float(hex_volume(corners)),
        face_area_vectors=face_area_vectors(corners),
        jacobian_signs=np.sign(corner_jacobians(corners)),
    )


def detect_degenerate(corners: np.ndarray) -> np.ndarray:
    """Indices of cells with nonpositive volume or a nonpositive corner Jacobian.

    Parameters
    ----------
    corners : ndarray, shape (n_cells, 8, 3)
        Deformed corner positions of every cell at one instant.

    Returns
    -------
    ndarray of int
        Sorted ids of offending cells; empty when the configuration is
        admissible.
    """
    corners = np.asarray(corners, dtype=float)
    bad = (hex_volume(corners) <= 0.0) | (corner_jacobians(corners).min(axis=-1) <= 0.0)
    return np.flatnonzero(bad)


@dataclass(frozen=True)
class HexMesh:
    """Uniform structured hexahedral mesh of a box [0,Lx]x[0,Ly]x[0,Lz].

    Vertices are ordered x-fastest; cell ``(ci, cj, ck)`` has id
    ``ci + nx*(cj + ny*ck)`` and lists its eight vertices in the canonical
    corner numbering.
    """

    nx: int
    ny: int
    nz: int
    lx: float
    ly: float
    lz: float
    vertices: np.ndarray = field(repr=False)  # (n_vertices, 3)
    cell_vertex_ids: np.ndarray = field(repr=False)  # (n_cells, 8)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cell_vertex_ids.shape[0]

    @property
    def lengths(self) -> np.ndarray:
        return np.array([self.lx, self.ly, self.lz])

    @property
    def counts(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    def cell_corners(self, positions: np.ndarray | None = None) -> np.ndarray:
        """Corner positions of all cells, shape (..., n_cells, 8, 3).

        ``positions`` defaults to the undeformed vertices; any array of shape
        (..., n_vertices, 3) (e.g. one entry per time instance) is accepted.
        """
        if positions is None:
            positions = self.vertices
        return np.asarray(positions)[..., self.cell_vertex_ids, :]

    def boundary_vertex_mask(self) -> np.ndarray:
        """Boolean mask of vertices lying on the box surface."""
        v = self.vertices
        eps = 1e-12 * max(self.lx, self.ly, self.lz)
        on = np.zeros(self.n_vertices, dtype=bool)
        for axis, length in enumerate((self.lx, self.ly, self.lz)):
            on |= np.abs(v[:, axis]) <= eps
            on |= np.abs(v[:, axis] - length) <= eps
        return on

    def boundary_vertex_ids(self) -> np.ndarray:
        return np.flatnonzero(self.boundary_vertex_mask())

    def interior_vertex_ids(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_vertex_mask())


def build_box_mesh(
    nx: int, ny: int, nz: int, lx: float, ly: float, lz: float
) -> HexMesh:
    """Build the uniform Cartesian box mesh.

    Raises
    ------
    ValueError
        If any cell count is < 1 or any edge length is <= 0.
    """
    counts = (nx, ny, nz)
    lengths = (lx, ly, lz)
    if any(int(n) != n or n < 1 for n in counts):
        raise ValueError(f"cell counts must be positive integers, got {counts}")
    if any(not (length > 0.0) for length in lengths):
        raise ValueError(f"edge lengths must be positive, got {lengths}")
    nx, ny, nz = int(nx), int(ny), int(nz)

    xs = np.linspace(0.0, lx, nx + 1)
    ys = np.linspace(0.0, ly, ny + 1)
    zs = np.linspace(0.0, lz, nz + 1)
    gx, gy, gz = np.meshgrid(xs, ys, zs, indexing="ij")
    # vertex id = i + (nx+1)*(j + (ny+1)*k)  -> x-fastest flattening
    vertices = np.stack(
        [gx.transpose(2, 1, 0).ravel(), gy.transpose(2, 1, 0).ravel(), gz.transpose(2, 1, 0).ravel()],
        axis=-1,
    )

    def vid(i, j, k):
        return i + (nx + 1) * (j + (ny + 1) * k)

    ci, cj, ck = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
    ci = ci.transpose(2, 1, 0).ravel()
    cj = cj.transpose(2, 1, 0).ravel()
    ck = ck.transpose(2, 1, 0).ravel()
    cell_vertex_ids = np.stack(
        [
            vid(ci, cj, ck),
            vid(ci + 1, cj, ck),
            vid(ci + 1, cj + 1, ck),
            vid(ci, cj + 1, ck),
            vid(ci, cj, ck + 1),
            vid(ci + 1, cj, ck + 1),
            vid(ci + 1, cj + 1, ck + 1),
            vid(ci, cj + 1, ck + 1),
        ],
        axis=-1,
    )
    return HexMesh(nx, ny, nz, float(lx), float(ly), float(lz), vertices, cell_vertex_ids)
