"""Built-in model problems: coefficients, manufactured right-hand sides."""

import numpy as np
import pytest

from twolevelfem.assembly import ProblemSpec
from twolevelfem.problems import example_1, example_2, get_problem, load_problem_file


def finite_difference_gradient(u, x, y, h=1e-6):
    gx = (u(x + h, y) - u(x - h, y)) / (2 * h)
    gy = (u(x, y + h) - u(x, y - h)) / (2 * h)
    return np.stack([gx, gy], axis=-1)


def finite_difference_laplacian(u, x, y, h=1e-4):
    return (
        u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4 * u(x, y)
    ) / h**2


def sample_points(n=20, seed=7):
    rng = np.random.default_rng(seed)
    pts = 0.05 + 0.9 * rng.random((n, 2))
    return pts[:, 0], pts[:, 1]


@pytest.mark.parametrize("make", [example_1, example_2])
def test_coefficients_are_the_indefinite_preset(make):
    problem = make()
    x, y = sample_points()
    assert np.all(problem.alpha(x, y) == 1.0)
    assert np.all(problem.beta(x, y) == 0.0)
    assert problem.beta(x, y).shape == x.shape + (2,)
    assert np.all(problem.gamma(x, y) == -10.0)


@pytest.mark.parametrize("make", [example_1, example_2])
def test_solution_vanishes_on_the_boundary(make):
    problem = make()
    t = np.linspace(0.0, 1.0, 17)
    for xe, ye in [(t, 0 * t), (t, 0 * t + 1), (0 * t, t), (0 * t + 1, t)]:
        assert np.max(np.abs(problem.exact_u(xe, ye))) <= 1e-15


@pytest.mark.parametrize("make", [example_1, example_2])
def test_gradient_matches_finite_differences(make):
    problem = make()
    x, y = sample_points()
    fd = finite_difference_gradient(problem.exact_u, x, y)
    assert np.max(np.abs(problem.exact_grad_u(x, y) - fd)) <= 1e-6


@pytest.mark.parametrize("make", [example_1, example_2])
def test_source_matches_operator_applied_to_solution(make):
    """f must equal -Lap(u) + gamma u for the manufactured solution (beta is
    zero and alpha constant, so no other terms appear)."""
    problem = make()
    x, y = sample_points()
    residual = problem.f(x, y) - (
        -finite_difference_laplacian(problem.exact_u, x, y)
        - 10.0 * problem.exact_u(x, y)
    )
    assert np.max(np.abs(residual)) <= 1e-6


def test_trig_source_is_a_multiple_of_the_solution():
    problem = example_1()
    x, y = sample_points()
    ratio = problem.f(x, y) / problem.exact_u(x, y)
    assert np.max(np.abs(ratio - (2 * np.pi**2 - 10.0))) <= 1e-12


def test_polynomial_solution_value():
    problem = example_2()
    assert problem.exact_u(0.5, 0.5) == pytest.approx(0.125**2, abs=1e-15)


def test_get_problem_resolves_presets():
    assert get_problem("1").name == "example-1"
    assert get_problem(2).name == "example-2"


def test_get_problem_loads_a_file(tmp_path):
    source = """
import numpy as np
from twolevelfem.assembly import ProblemSpec

PROBLEM = ProblemSpec(
    alpha=lambda x, y: np.ones_like(x),
    beta=lambda x, y: np.zeros(np.shape(x) + (2,)),
    gamma=lambda x, y: np.zeros_like(x),
    f=lambda x, y: np.ones_like(x),
    name="custom",
)
"""
    path = tmp_path / "my_problem.py"
    path.write_text(source)
    problem = get_problem(str(path))
    assert isinstance(problem, ProblemSpec)
    assert problem.name == "custom"
    assert problem.exact_u is None


def test_problem_file_must_define_the_right_name(tmp_path):
    path = tmp_path / "empty_problem.py"
    path.write_text("X = 3\n")
    with pytest.raises(ValueError, match="PROBLEM"):
        load_problem_file(path)


def test_missing_problem_file_is_an_error(tmp_path):
    with pytest.raises(ValueError, match="not found"):
        load_problem_file(tmp_path / "nope.py")
