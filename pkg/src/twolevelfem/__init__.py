"""Two-level and two-grid finite element solvers on the unit square.

The package discretizes -div(alpha grad u) + beta . grad u + gamma u = f with
homogeneous Dirichlet data on (0,1)^2 using continuous Lagrange elements on
structured triangulations, and accelerates the nonsymmetric/indefinite solve
with correction iterations that only ever factor a small full operator and a
symmetric positive definite fine one.
"""

from .algorithms import (
    IterateState,
    IterationOperators,
    TwoLevelConfig,
    build_two_grid_spaces,
    galerkin_solve,
    run_correction_iteration,
    two_grid_iterate,
    two_level_iterate,
)
from .analysis import (
    ExperimentRow,
    estimate_orders,
    h1_distance,
    h1_error,
    h1_norm_discrete,
    time_run,
)
from .assembly import (
    AssembledSystem,
    ProblemSpec,
    ReducedSystem,
    apply_dirichlet,
    assemble_load,
    assemble_nonsym,
    assemble_stiffness,
    assemble_system,
    export_operator,
    validate_ellipticity,
)
from .element import (
    QuadratureRule,
    ReferenceElement,
    build_quadrature,
    build_reference_element,
    eval_basis,
    tabulate_basis,
)
from .mesh import (
    Mesh,
    MeshGeometryError,
    MeshSizeError,
    build_structured_mesh,
    dump_mesh,
    refine_nested,
    triangle_areas,
)
from .problems import example_1, example_2, get_problem, load_problem_file
from .solver import SolveReport, SolverError, solve_general, solve_spd
from .space import (
    FeSpace,
    Prolongation,
    build_prolongation,
    build_space,
    dof_count,
    evaluate,
    interpolate,
)

__version__ = "0.1.0"

__all__ = [
    "AssembledSystem",
    "ExperimentRow",
    "FeSpace",
    "IterateState",
    "IterationOperators",
    "Mesh",
    "MeshGeometryError",
    "MeshSizeError",
    "ProblemSpec",
    "Prolongation",
    "QuadratureRule",
    "ReducedSystem",
    "ReferenceElement",
    "SolveReport",
    "SolverError",
    "TwoLevelConfig",
    "apply_dirichlet",
    "assemble_load",
    "assemble_nonsym",
    "assemble_stiffness",
    "assemble_system",
    "build_prolongation",
    "build_quadrature",
    "build_reference_element",
    "build_space",
    "build_structured_mesh",
    "build_two_grid_spaces",
    "dof_count",
    "dump_mesh",
    "estimate_orders",
    "eval_basis",
    "evaluate",
    "example_1",
    "example_2",
    "export_operator",
    "galerkin_solve",
    "get_problem",
    "h1_distance",
    "h1_error",
    "h1_norm_discrete",
    "interpolate",
    "load_problem_file",
    "refine_nested",
    "run_correction_iteration",
    "solve_general",
    "solve_spd",
    "tabulate_basis",
    "time_run",
    "triangle_areas",
    "two_grid_iterate",
    "two_level_iterate",
    "validate_ellipticity",
]
