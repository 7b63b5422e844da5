"""Error norms, convergence orders and timing for the experiment tables."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .assembly import (
    ProblemSpec,
    _blocks,
    assemble_nonsym,
    assemble_stiffness,
    element_geometry,
    _physical_gradients,
    _physical_points,
)
from .element import QuadratureRule, build_quadrature, tabulate_basis
from .space import FeSpace


@dataclass(frozen=True)
class ExperimentRow:
    """One line of a convergence table."""

    M: int
    H: float
    l: int
    s_or_r: int
    k: int
    dofs_coarse: int
    dofs_fine: int
    h1_error: float
    scaled_error: float
    cpu_seconds: Optional[float]
    failed: bool = False


def error_quadrature(degree: int) -> QuadratureRule:
    """Rule used for error integration: well beyond assembly exactness."""
    return build_quadrature(2 * degree + 6)


def h1_error(space: FeSpace, coefficients: np.ndarray, exact_u: Callable,
             exact_grad_u: Callable, quad: Optional[QuadratureRule] = None) -> float:
    """Full H1-norm error of a finite element function against an exact one.

    Integrates (u_h - u)^2 + |grad u_h - grad u|^2 elementwise and returns
    the square root.  `exact_grad_u(x, y)` must return the gradient with the
    component axis last.
    """
    if quad is None:
        quad = error_quadrature(space.degree)
    coefficients = np.asarray(coefficients, dtype=float)
    vals, ref_grads = tabulate_basis(space.element, quad.points)
    v0, jac, det, inv = element_geometry(space.mesh)

    total = 0.0
    for block in _blocks(space.mesh.n_triangles):
        local = coefficients[space.cell_to_dofs[block]]           # (e, n_local)
        grads = _physical_gradients(inv[block], ref_grads)        # (e, q, i, 2)
        pts = _physical_points(v0[block], jac[block], quad.points)
        wdet = det[block][:, None] * quad.weights[None, :]

        uh = local @ vals.T                                       # (e, q)
        guh = np.einsum("eqia,ei->eqa", grads, local)
        ue = np.asarray(exact_u(pts[..., 0], pts[..., 1]), dtype=float)
        gue = np.asarray(exact_grad_u(pts[..., 0], pts[..., 1]), dtype=float)
        diff2 = (uh - ue) ** 2 + np.sum((guh - gue) ** 2, axis=-1)
        total += float(np.sum(wdet * diff2))
    return float(np.sqrt(total))


# Unit-coefficient forms whose stiffness and lower-order matrices add up to
# the H1 energy matrix.
_H1_FORM = ProblemSpec(
    alpha=lambda x, y: np.ones_like(x),
    beta=lambda x, y: np.zeros(np.shape(x) + (2,)),
    gamma=lambda x, y: np.ones_like(x),
    f=lambda x, y: np.zeros_like(x),
    name="h1-energy",
)


def h1_norm_discrete(space: FeSpace, coefficients) -> float:
    """H1 norm of a member of the space, from its coefficient vector.

    Computes sqrt(c^T (K + Mass) c) with the unit-coefficient stiffness and
    mass matrices.  The assembly quadrature integrates products of basis
    functions exactly, so up to roundoff this is the exact H1 norm of the
    piecewise polynomial, with no quadrature-of-the-exact-solution error.
    """
    c = np.asarray(coefficients, dtype=float)
    if c.shape != (space.n_dofs_total,):
        raise ValueError(
            f"expected {space.n_dofs_total} coefficients, got shape {c.shape}"
        )
    stiff = assemble_stiffness(space, _H1_FORM)
    mass = assemble_nonsym(space, _H1_FORM)
    return float(np.sqrt(abs(c @ (stiff @ c) + c @ (mass @ c))))


def h1_distance(space: FeSpace, coefficients_a, coefficients_b) -> float:
    """H1 distance between two members of the same space."""
    a = np.asarray(coefficients_a, dtype=float)
    b = np.asarray(coefficients_b, dtype=float)
    return h1_norm_discrete(space, a - b)


def estimate_orders(rows: list[ExperimentRow]) -> tuple[list[float], float]:
    """Pairwise convergence orders and the least-squares slope in log H.

    Rows with non-finite or non-positive errors are excluded with a warning
    (they carry no order information).  Needs at least two usable rows with
    distinct mesh sizes.
    """
    usable = [r for r in rows if np.isfinite(r.h1_error) and r.h1_error > 0.0]
    if len(usable) < len(rows):
        warnings.warn(
            f"excluded {len(rows) - len(usable)} rows with non-positive or "
            "non-finite errors from the order estimate",
            stacklevel=2,
        )
    usable = sorted(usable, key=lambda r: -r.H)
    H = np.array([r.H for r in usable])
    e = np.array([r.h1_error for r in usable])
    if len(usable) < 2 or np.unique(H).size < 2:
        raise ValueError("order estimation needs at least two rows with distinct H")
    pairwise = [
        float(np.log(e[i] / e[i + 1]) / np.log(H[i] / H[i + 1]))
        for i in range(len(usable) - 1)
        if H[i] != H[i + 1]
    ]
    slope = float(np.polyfit(np.log(H), np.log(e), 1)[0])
    return pairwise, slope


def time_run(procedure: Callable[[], object]) -> tuple[object, float]:
    """Run `procedure` once, returning (its result, wall-clock seconds)."""
    t0 = time.perf_counter()
    result = procedure()
    return result, time.perf_counter() - t0
