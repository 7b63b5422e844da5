"""Assembly of the discrete operators for the model problem.

The problem is -div(alpha grad u) + beta . grad u + gamma u = f on the unit
square with a homogeneous Dirichlet condition.  The symmetric principal part
and the lower-order part are assembled (and kept) separately: the correction
iteration needs the stiffness matrix A and the non-symmetric remainder Npart
individually, and their sum A + Npart is the full operator of the straight
Galerkin discretization.

Coefficients are callables of physical coordinates, evaluated on numpy arrays
of quadrature points.  alpha may return a scalar field or a full 2x2 matrix
field; beta returns a 2-vector field; gamma and f return scalar fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .element import QuadratureRule, build_quadrature, tabulate_basis
from .mesh import Mesh, MeshGeometryError
from .space import FeSpace

# Elements per vectorized assembly block; bounds the size of the per-block
# gradient tables regardless of mesh size.
_BLOCK = 4096


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Coefficients, right-hand side and (optionally) the exact solution."""

    alpha: Callable      # (x, y) -> scalar field or (..., 2, 2) matrix field
    beta: Callable       # (x, y) -> (..., 2) vector field
    gamma: Callable      # (x, y) -> scalar field
    f: Callable          # (x, y) -> scalar field
    exact_u: Optional[Callable] = None       # (x, y) -> scalar field
    exact_grad_u: Optional[Callable] = None  # (x, y) -> (..., 2) vector field
    name: str = ""


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    """Operators of one space: stiffness A, lower-order Npart, load F."""

    A: sp.csr_matrix
    Npart: sp.csr_matrix
    F: np.ndarray
    space: FeSpace
    interior_dofs: np.ndarray


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    """The same operators restricted to interior DOFs."""

    A: sp.csr_matrix
    Npart: sp.csr_matrix
    F: np.ndarray
    interior_dofs: np.ndarray
    n_total: int

    def expand(self, x: np.ndarray) -> np.ndarray:
        """Re-insert the zero boundary values into an interior vector."""
        full = np.zeros(self.n_total)
        full[self.interior_dofs] = x
        return full


def default_assembly_quadrature(degree: int) -> QuadratureRule:
    """Rule used for operator and load assembly on a degree-`degree` space."""
    return build_quadrature(2 * degree + 3)


def element_geometry(mesh: Mesh):
    """First vertices, Jacobians, determinants and inverse Jacobians.

    Raises MeshGeometryError if any triangle is degenerate or negatively
    oriented.
    """
    v = mesh.vertices[mesh.triangles]
    d1 = v[:, 1] - v[:, 0]
    d2 = v[:, 2] - v[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    if np.any(det <= 0.0):
        bad = int(np.argmax(det <= 0.0))
        raise MeshGeometryError(
            f"triangle {bad} has non-positive Jacobian determinant {det[bad]:.3e}"
        )
    jac = np.stack([d1, d2], axis=-1)
    inv = np.empty_like(jac)
    inv[:, 0, 0] = jac[:, 1, 1] / det
    inv[:, 0, 1] = -jac[:, 0, 1] / det
    inv[:, 1, 0] = -jac[:, 1, 0] / det
    inv[:, 1, 1] = jac[:, 0, 0] / det
    return v[:, 0], jac, det, inv


def _blocks(n: int, size: int = _BLOCK):
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


def _scalar_field(raw, shape, what: str) -> np.ndarray:
    field = np.asarray(raw, dtype=float)
    try:
        return np.broadcast_to(field, shape)
    except ValueError:
        raise ValueError(f"{what} returned shape {field.shape}, expected {shape}") from None


def _physical_points(v0, jac, ref_points):
    return v0[:, None, :] + np.einsum("eab,qb->eqa", jac, ref_points)


def _physical_gradients(inv, ref_grads):
    # grad_x phi = J^{-T} grad_ref phi
    return np.einsum("eca,qic->eqia", inv, ref_grads)


def _scatter(space: FeSpace, block: slice, local: np.ndarray, rows, cols, data):
    dofs = space.cell_to_dofs[block]
    nb = dofs.shape[1]
    rows.append(np.repeat(dofs, nb, axis=1).ravel())
    cols.append(np.tile(dofs, (1, nb)).ravel())
    data.append(local.ravel())


def _to_csr(rows, cols, data, n: int) -> sp.csr_matrix:
    matrix = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()
    matrix.sort_indices()
    return matrix


def assemble_stiffness(space: FeSpace, spec: ProblemSpec,
                       quad: Optional[QuadratureRule] = None) -> sp.csr_matrix:
    """Assemble A[i, j] = integral of (alpha grad phi_j) . grad phi_i."""
    if quad is None:
        quad = default_assembly_quadrature(space.degree)
    _, ref_grads = tabulate_basis(space.element, quad.points)
    v0, jac, det, inv = element_geometry(space.mesh)
    nb = space.element.n_basis
    nq = quad.n_points

    rows, cols, data = [], [], []
    for block in _blocks(space.mesh.n_triangles):
        grads = _physical_gradients(inv[block], ref_grads)       # (e, q, i, 2)
        pts = _physical_points(v0[block], jac[block], quad.points)
        wdet = det[block][:, None] * quad.weights[None, :]        # (e, q)
        ne = grads.shape[0]

        raw = np.asarray(spec.alpha(pts[..., 0], pts[..., 1]), dtype=float)
        if raw.ndim >= 2 and raw.shape[-2:] == (2, 2):
            amat = np.broadcast_to(raw, (ne, nq, 2, 2))
            weighted = np.einsum("eqab,eqjb->eqja", amat, grads) * wdet[..., None, None]
        else:
            avals = _scalar_field(raw, wdet.shape, "alpha")
            weighted = grads * (avals * wdet)[..., None, None]

        left = grads.transpose(0, 2, 1, 3).reshape(ne, nb, nq * 2)
        right = weighted.transpose(0, 2, 1, 3).reshape(ne, nb, nq * 2)
        local = left @ right.transpose(0, 2, 1)
        _scatter(space, block, local, rows, cols, data)

    return _to_csr(rows, cols, data, space.n_dofs_total)


def assemble_nonsym(space: FeSpace, spec: ProblemSpec,
                    quad: Optional[QuadratureRule] = None) -> sp.csr_matrix:
    """Assemble Npart[i, j] = integral of (beta . grad phi_j + gamma phi_j) phi_i."""
    if quad is None:
        quad = default_assembly_quadrature(space.degree)
    vals, ref_grads = tabulate_basis(space.element, quad.points)
    v0, jac, det, inv = element_geometry(space.mesh)
    nq = quad.n_points

    rows, cols, data = [], [], []
    for block in _blocks(space.mesh.n_triangles):
        grads = _physical_gradients(inv[block], ref_grads)
        pts = _physical_points(v0[block], jac[block], quad.points)
        wdet = det[block][:, None] * quad.weights[None, :]
        ne = grads.shape[0]

        bvals = np.broadcast_to(
            np.asarray(spec.beta(pts[..., 0], pts[..., 1]), dtype=float), (ne, nq, 2)
        )
        gvals = _scalar_field(spec.gamma(pts[..., 0], pts[..., 1]), wdet.shape, "gamma")

        trial = np.einsum("eqa,eqja->eqj", bvals, grads)
        trial += gvals[..., None] * vals[None, :, :]
        local = np.matmul(vals.T[None, :, :], trial * wdet[..., None])
        _scatter(space, block, local, rows, cols, data)

    return _to_csr(rows, cols, data, space.n_dofs_total)


def assemble_load(space: FeSpace, g,
                  quad: Optional[QuadratureRule] = None) -> np.ndarray:
    """Assemble F[i] = integral of g phi_i."""
    if quad is None:
        quad = default_assembly_quadrature(space.degree)
    vals, _ = tabulate_basis(space.element, quad.points)
    v0, jac, det, _ = element_geometry(space.mesh)

    load = np.zeros(space.n_dofs_total)
    for block in _blocks(space.mesh.n_triangles):
        pts = _physical_points(v0[block], jac[block], quad.points)
        wdet = det[block][:, None] * quad.weights[None, :]
        gvals = _scalar_field(g(pts[..., 0], pts[..., 1]), wdet.shape, "load integrand")
        local = (gvals * wdet) @ vals                      # (e, n_local)
        load += np.bincount(
            space.cell_to_dofs[block].ravel(),
            weights=local.ravel(),
            minlength=space.n_dofs_total,
        )
    return load


def assemble_system(space: FeSpace, spec: ProblemSpec,
                    quad: Optional[QuadratureRule] = None) -> AssembledSystem:
    """Assemble stiffness, lower-order part and load of one space."""
    return AssembledSystem(
        A=assemble_stiffness(space, spec, quad),
        Npart=assemble_nonsym(space, spec, quad),
        F=assemble_load(space, spec.f, quad),
        space=space,
        interior_dofs=space.interior_dofs,
    )


def apply_dirichlet(system: AssembledSystem) -> ReducedSystem:
    """Remove boundary rows and columns (symmetric elimination).

    With a homogeneous Dirichlet condition the eliminated columns multiply
    zero boundary values, so the right-hand side only needs restricting.
    Solutions of the reduced system are re-expanded with `ReducedSystem.expand`.
    """
    interior = system.interior_dofs
    return ReducedSystem(
        A=system.A[interior, :][:, interior].tocsr(),
        Npart=system.Npart[interior, :][:, interior].tocsr(),
        F=system.F[interior],
        interior_dofs=interior,
        n_total=system.space.n_dofs_total,
    )


def validate_ellipticity(spec: ProblemSpec, lower: float, upper: float,
                         samples_per_axis: int = 8) -> None:
    """Check eigenvalues of alpha on a sample grid against [lower, upper]."""
    t = (np.arange(samples_per_axis) + 0.5) / samples_per_axis
    x, y = np.meshgrid(t, t)
    raw = np.asarray(spec.alpha(x.ravel(), y.ravel()), dtype=float)
    if raw.ndim >= 2 and raw.shape[-2:] == (2, 2):
        mats = np.broadcast_to(raw, (x.size, 2, 2))
        eigs = np.linalg.eigvalsh(0.5 * (mats + mats.transpose(0, 2, 1)))
    else:
        eigs = np.broadcast_to(raw, (x.size,))
    if eigs.min() < lower or eigs.max() > upper:
        raise ValueError(
            f"alpha eigenvalues span [{eigs.min():.6g}, {eigs.max():.6g}], "
            f"outside the configured ellipticity bounds [{lower}, {upper}]"
        )


def export_operator(matrix: sp.spmatrix, path) -> None:
    """Write an assembled operator in Matrix Market format (debug aid)."""
    from scipy.io import mmwrite

    mmwrite(path, matrix)
