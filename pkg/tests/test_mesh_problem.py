import numpy as np
import pytest

from config import resolve_path
from errors import InvalidArgumentError, UnsupportedProblemError, UsageError
from problems.mesh import make_uniform_mesh
from problems.problem import (
    GridFunction,
    Problem,
    interpolate_exact,
    source_bounds,
    source_l2_norm,
    test_problem_f2x,
    test_problem_zero,
)
from problems.registry import get_problem, list_problems, load_tabulated_problems


def _problems_file():
    return resolve_path("data/problems.yaml")


def _derivatives(u, x, delta):
    """Fourth-order central differences for u' and u''."""
    up1, um1 = u(x + delta), u(x - delta)
    up2, um2 = u(x + 2 * delta), u(x - 2 * delta)
    first = (-up2 + 8 * up1 - 8 * um1 + um2) / (12 * delta)
    second = (-up2 + 16 * up1 - 30 * u(x) + 16 * um1 - um2) / (12 * delta**2)
    return first, second


# ── Mesh ─────────────────────────────────────────────────────────────────────

def test_uniform_mesh_nodes():
    mesh = make_uniform_mesh(4)
    assert mesh.h == 0.25
    assert mesh.size == 3
    np.testing.assert_array_equal(mesh.nodes, [0.0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_array_equal(mesh.interior, [0.25, 0.5, 0.75])


def test_mesh_last_node_is_exactly_one():
    assert make_uniform_mesh(3).nodes[-1] == 1.0


@pytest.mark.parametrize("n", [1, 0, -3, 2.5, True, "8"])
def test_mesh_rejects_bad_sizes(n):
    with pytest.raises(InvalidArgumentError):
        make_uniform_mesh(n)


def test_mesh_nodes_are_read_only():
    mesh = make_uniform_mesh(4)
    with pytest.raises(ValueError):
        mesh.nodes[1] = 0.3


# ── Problem ──────────────────────────────────────────────────────────────────

@pytest.mark.parametrize("epsilon", [0.0, -1e-3])
def test_problem_rejects_non_positive_epsilon(epsilon):
    with pytest.raises(InvalidArgumentError):
        Problem(epsilon=epsilon, source=lambda x: x)


def test_problem_rejects_other_convection_coefficients():
    with pytest.raises(UnsupportedProblemError):
        Problem(epsilon=0.1, source=lambda x: x, kappa=2.0)


@pytest.mark.parametrize("epsilon", [1.0, 0.1, 1e-3, 1e-8])
def test_f2x_exact_solution_meets_boundary_conditions(epsilon):
    problem = test_problem_f2x(epsilon)
    values = problem.exact(np.array([0.0, 1.0]))
    assert np.all(np.isfinite(values))
    assert abs(values[0]) < 1e-15
    assert abs(values[1]) < 1e-14


def test_f2x_exact_solution_satisfies_the_equation():
    epsilon = 0.1
    problem = test_problem_f2x(epsilon)
    x = np.linspace(0.1, 0.9, 9)
    first, second = _derivatives(problem.exact, x, 5e-4)
    residual = -epsilon * second + first - problem.source(x)
    assert np.max(np.abs(residual)) < 1e-9


def test_f2x_carries_analytic_bounds():
    assert test_problem_f2x(0.5).source_deriv_bounds == (2.0, 0.0)


def test_interpolate_exact_values():
    mesh = make_uniform_mesh(4)
    problem = test_problem_f2x(0.25)
    u = interpolate_exact(problem, mesh)
    np.testing.assert_array_equal(u.values, problem.exact(mesh.interior))
    assert np.all(interpolate_exact(test_problem_zero(0.1), mesh).values == 0.0)


def test_interpolate_exact_needs_closed_form():
    problem = Problem(epsilon=0.1, source=lambda x: x)
    with pytest.raises(UnsupportedProblemError):
        interpolate_exact(problem, make_uniform_mesh(4))


# ── GridFunction ─────────────────────────────────────────────────────────────

def test_grid_function_shape_is_checked():
    with pytest.raises(InvalidArgumentError):
        GridFunction(make_uniform_mesh(4), np.zeros(4))


def test_grid_function_boundary_and_interpolation():
    mesh = make_uniform_mesh(4)
    u = GridFunction(mesh, [1.0, 2.0, 1.0])
    np.testing.assert_array_equal(u.with_boundary(), [0.0, 1.0, 2.0, 1.0, 0.0])
    assert u(np.array([0.375]))[0] == pytest.approx(1.5)


def test_grid_function_arithmetic_needs_same_mesh():
    a = GridFunction.zeros(make_uniform_mesh(4))
    b = GridFunction.zeros(make_uniform_mesh(8))
    with pytest.raises(InvalidArgumentError):
        a - b
    c = GridFunction(make_uniform_mesh(4), [1.0, 1.0, 1.0])
    np.testing.assert_array_equal((c + c - c).values, c.values)


# ── Source functionals ───────────────────────────────────────────────────────

def test_source_bounds_prefers_analytic_values():
    assert source_bounds(test_problem_f2x(0.1), make_uniform_mesh(8)) == (2.0, 0.0)


def test_source_bounds_sampled_for_linear_source():
    problem = Problem(epsilon=0.1, source=lambda x: 1.0 - np.asarray(x))
    d1, d2 = source_bounds(problem, make_uniform_mesh(8), factor=10)
    assert d1 == pytest.approx(1.0, rel=1e-9)
    assert d2 == pytest.approx(0.0, abs=1e-6)


def test_source_l2_norm():
    assert source_l2_norm(test_problem_f2x(0.1)) == pytest.approx(np.sqrt(4.0 / 3.0), rel=1e-12)


# ── Registry ─────────────────────────────────────────────────────────────────

def test_registry_builtins_and_tabulated():
    ids = [problem_id for problem_id, _ in list_problems(_problems_file())]
    assert ids[:2] == ["f2x", "fzero"]
    assert {"const1", "ramp", "bump"} <= set(ids)

    ramp = get_problem("ramp", 0.1, problems_file=_problems_file())
    np.testing.assert_allclose(ramp.source(np.array([0.0, 0.25, 1.0])), [1.0, 0.75, 0.0])
    assert not ramp.has_exact


def test_registry_unknown_problem_is_a_usage_error():
    with pytest.raises(UsageError):
        get_problem("nope", 0.1, problems_file=_problems_file())


def test_registry_missing_file_leaves_builtins(tmp_path):
    assert load_tabulated_problems(tmp_path / "absent.yaml") == {}
    assert get_problem("f2x", 0.1, problems_file=tmp_path / "absent.yaml").name == "f2x"


@pytest.mark.parametrize(
    "body",
    [
        "problems:\n  - id: short\n    values: [1.0]\n",
        "problems:\n  - id: f2x\n    values: [1.0, 2.0]\n",
        "problems:\n  - id: a\n    values: [1.0, 2.0]\n  - id: a\n    values: [0.0, 0.0]\n",
    ],
)
def test_registry_rejects_bad_entries(tmp_path, body):
    path = tmp_path / "problems.yaml"
    path.write_text(body)
    with pytest.raises(InvalidArgumentError):
        load_tabulated_problems(path)

