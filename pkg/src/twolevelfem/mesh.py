"""Structured triangulations of the unit square.

The unit square (0,1)^2 is cut into an M-by-M grid of cells of side 1/M and
every cell is split into two triangles along a diagonal.  The default
orientation is the slope -1 diagonal ("down"); the slope +1 alternative
("up") is available through the `diagonal` argument.  Meshes built here are
plain immutable containers; a refined mesh never mutates the mesh it came
from, so meshes can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_SUBDIVISIONS = 4096


class MeshSizeError(ValueError):
    """Requested subdivision count is outside the supported range."""


class MeshGeometryError(ValueError):
    """A triangle with non-positive signed area was encountered."""


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangulation of the unit square into 2*M^2 right triangles.

    Vertices are numbered row by row (lexicographically by (y, x)), so the
    vertex with index j*(M+1)+i sits at (i/M, j/M).  Each cell contributes
    two counterclockwise triangles, with cells enumerated row by row.  With
    the default "down" diagonal (slope -1) triangle 2*c is the lower-left
    one of cell c and 2*c+1 the upper-right one; with the "up" diagonal
    (slope +1) they are the lower-right and upper-left ones.
    """

    M: int
    vertices: np.ndarray             # (n_vertices, 2) float
    triangles: np.ndarray            # (n_triangles, 3) int, counterclockwise
    boundary_vertex_flags: np.ndarray  # (n_vertices,) bool
    edges: np.ndarray                # (n_edges, 2) int, each pair sorted
    boundary_edge_flags: np.ndarray  # (n_edges,) bool
    diagonal: str = "down"           # "down" (slope -1) or "up" (slope +1)

    @property
    def H(self) -> float:
        """Mesh size, the side length 1/M of the grid cells."""
        return 1.0 / self.M

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]


def build_structured_mesh(
    M: int, diagonal: str = "down", max_subdivisions: int = MAX_SUBDIVISIONS
) -> Mesh:
    """Build the structured triangulation with M subdivisions per axis.

    `diagonal` picks the cell split: "down" cuts along the slope -1
    diagonal, "up" along the slope +1 diagonal.
    """
    if not isinstance(M, (int, np.integer)):
        raise MeshSizeError(f"subdivision count must be an integer, got {M!r}")
    if M < 1 or M > max_subdivisions:
        raise MeshSizeError(
            f"subdivision count must be in [1, {max_subdivisions}], got {M}"
        )
    if diagonal not in ("down", "up"):
        raise ValueError(f"diagonal must be 'down' or 'up', got {diagonal!r}")
    M = int(M)

    side = np.arange(M + 1, dtype=float) / M
    xg, yg = np.meshgrid(side, side)  # row index is y
    vertices = np.column_stack([xg.ravel(), yg.ravel()])

    idx = np.arange((M + 1) * (M + 1), dtype=np.int64).reshape(M + 1, M + 1)
    ll = idx[:-1, :-1].ravel()
    lr = idx[:-1, 1:].ravel()
    ul = idx[1:, :-1].ravel()
    ur = idx[1:, 1:].ravel()

    triangles = np.empty((2 * M * M, 3), dtype=np.int64)
    if diagonal == "down":
        triangles[0::2] = np.column_stack([ll, lr, ul])  # lower-left triangle
        triangles[1::2] = np.column_stack([lr, ur, ul])  # upper-right triangle
    else:
        triangles[0::2] = np.column_stack([ll, lr, ur])  # lower-right triangle
        triangles[1::2] = np.column_stack([ll, ur, ul])  # upper-left triangle

    on_edge = np.zeros((M + 1, M + 1), dtype=bool)
    on_edge[0, :] = on_edge[-1, :] = on_edge[:, 0] = on_edge[:, -1] = True
    boundary_vertex_flags = on_edge.ravel()

    pairs = np.concatenate(
        [triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]]
    )
    pairs.sort(axis=1)
    edges, counts = np.unique(pairs, axis=0, return_counts=True)
    boundary_edge_flags = counts == 1

    return Mesh(
        M=M,
        vertices=vertices,
        triangles=triangles,
        boundary_vertex_flags=boundary_vertex_flags,
        edges=edges,
        boundary_edge_flags=boundary_edge_flags,
        diagonal=diagonal,
    )


def refine_nested(coarse: Mesh, r: int, max_subdivisions: int = MAX_SUBDIVISIONS) -> Mesh:
    """Refine each cell r times per axis, giving a mesh nested in `coarse`.

    Because both meshes split their cells along the same diagonal, every
    coarse triangle is the union of exactly r^2 fine triangles.
    """
    if not isinstance(r, (int, np.integer)) or r < 1:
        raise ValueError(f"refinement factor must be a positive integer, got {r!r}")
    return build_structured_mesh(
        coarse.M * int(r), diagonal=coarse.diagonal, max_subdivisions=max_subdivisions
    )


def triangle_areas(mesh: Mesh) -> np.ndarray:
    """Signed areas of all triangles (positive for counterclockwise ones)."""
    v = mesh.vertices[mesh.triangles]
    d1 = v[:, 1] - v[:, 0]
    d2 = v[:, 2] - v[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def dump_mesh(mesh: Mesh, path=None) -> str:
    """Serialize a mesh to the plain-text dump format.

    The format lists vertex coordinates then triangle vertex indices::

        vertices:
        x y
        ...
        triangles:
        i j k
        ...

    Debug aid only; nothing else consumes it.  If `path` is given the text is
    also written to that file.
    """
    lines = ["vertices:"]
    lines.extend(f"{x:.17g} {y:.17g}" for x, y in mesh.vertices)
    lines.append("triangles:")
    lines.extend(f"{i} {j} {k}" for i, j, k in mesh.triangles)
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)
    return text
