import numpy as np
import pytest

from config import resolve_path
from discretization.bubbles import exponential_bubble, peclet_coefficients, quadratic_bubble
from discretization.schemes import (
    DiffusionRule,
    RhsRule,
    SchemeConfig,
    artificial_diffusion,
    assemble_rhs_bubble,
    assemble_rhs_oracle,
    assemble_rhs_pointwise,
    assemble_system_matrix,
    convection_matrix,
    cs_closed_form_rhs,
    exponential_config,
    exponential_pg_matrix,
    reference_interpolant,
    solve_scheme,
    stiffness_matrix,
    underflow_limit_solution,
)
from errors import InvalidArgumentError, InvalidDiffusionError
from numerics.quadrature import CAVALIERI_SIMPSON, GAUSS3, TRAPEZOID
from problems.mesh import make_uniform_mesh
from problems.problem import Problem, interpolate_exact, test_problem_f2x, test_problem_zero
from problems.registry import get_problem


def _problems_file():
    return resolve_path("data/problems.yaml")


def _smooth_problem(epsilon=0.1):
    return Problem(epsilon=epsilon, source=lambda x: np.sin(3.0 * x) + x * x, name="smooth")


def _max_relative_gap(a, b):
    scale = max(np.max(np.abs(a.to_dense())), np.max(np.abs(b.to_dense())))
    return np.max(np.abs(a.to_dense() - b.to_dense())) / scale


# ── Artificial diffusion ─────────────────────────────────────────────────────

def test_artificial_diffusion_builtin_rules():
    assert artificial_diffusion(1e-3, 0.1, DiffusionRule.central()) == 1e-3
    assert artificial_diffusion(1e-3, 0.1, DiffusionRule.standard_upwind()) == pytest.approx(1e-3 + 0.05)
    assert artificial_diffusion(0.05, 0.1, DiffusionRule.ias_sg()) == pytest.approx(0.0656518, rel=1e-6)


def test_ias_diffusion_matches_phi_route():
    epsilon, h = 0.05, 0.1
    rule = DiffusionRule.ias_sg()
    pe = h / (2 * epsilon)
    assert artificial_diffusion(epsilon, h, rule) == pytest.approx(epsilon * (1 + rule.phi_value(pe)), rel=1e-13)


@pytest.mark.parametrize("pe", [1e-9, 1e-5, 1e-2, 0.1])
def test_ias_phi_at_small_peclet(pe):
    # pe coth(pe) - 1 = pe^2/3 - pe^4/45 + 2 pe^6/945 - pe^8/4725 + ...
    expected = pe**2 / 3 - pe**4 / 45 + 2 * pe**6 / 945 - pe**8 / 4725
    value = DiffusionRule.ias_sg().phi_value(pe)
    assert value > 0
    assert value == pytest.approx(expected, rel=1e-11)


def test_from_bubble_diffusion_is_the_bubble_integral():
    spec = quadratic_bubble(0.6, 0.125)
    d = artificial_diffusion(1e-2, 0.125, DiffusionRule.from_bubble(spec))
    assert d - 1e-2 == pytest.approx(spec.integral, rel=1e-12)


def test_from_bubble_rejects_mismatched_width():
    rule = DiffusionRule.from_bubble(quadratic_bubble(0.75, 0.1))
    with pytest.raises(InvalidArgumentError):
        artificial_diffusion(0.1, 0.2, rule)


def test_custom_phi_negative_is_invalid():
    with pytest.raises(InvalidDiffusionError):
        artificial_diffusion(0.1, 0.1, DiffusionRule.custom(lambda pe: -0.5))
    assert artificial_diffusion(0.1, 0.1, DiffusionRule.custom(lambda pe: 1.0)) == pytest.approx(0.2)


# ── Matrices ─────────────────────────────────────────────────────────────────

def test_system_matrix_is_scaled_stiffness_plus_convection():
    mesh = make_uniform_mesh(8)
    np.testing.assert_allclose(
        assemble_system_matrix(mesh.h, mesh).to_dense(),
        (stiffness_matrix(mesh) + convection_matrix(mesh)).to_dense(),
        rtol=0,
        atol=1e-15,
    )


@pytest.mark.parametrize("d", [1e-6, 0.01, 0.3])
def test_system_matrix_interior_rows_sum_to_zero(d):
    dense = assemble_system_matrix(d, make_uniform_mesh(10)).to_dense()
    assert np.max(np.abs(dense[1:-1].sum(axis=1))) <= 1e-15 * max(1.0, d * 10)


def test_system_matrix_for_upwind_quadratic_bubble_is_exact():
    epsilon, mesh = 2.0**-10, make_uniform_mesh(16)
    spec = quadratic_bubble(0.75, mesh.h)
    matrix = assemble_system_matrix(artificial_diffusion(epsilon, mesh.h, DiffusionRule.from_bubble(spec)), mesh)
    r = epsilon / mesh.h
    assert np.all(matrix.lower == -r - 1.0)
    assert np.all(matrix.main == 2.0 * r + 1.0)
    assert np.all(matrix.upper == -r)


def test_system_matrix_needs_positive_diffusion():
    with pytest.raises(InvalidArgumentError):
        assemble_system_matrix(0.0, make_uniform_mesh(4))


def test_exponential_matrix_moderate_peclet():
    mesh = make_uniform_mesh(10)
    c = peclet_coefficients(0.05, mesh.h)
    matrix = exponential_pg_matrix(0.05, mesh)
    assert c.g0 == pytest.approx(np.tanh(1.0), rel=1e-15)
    np.testing.assert_allclose(matrix.main, 1.0 / c.g0, rtol=1e-15)
    np.testing.assert_allclose(matrix.lower, -c.l_d / c.g0, rtol=1e-15)
    np.testing.assert_allclose(matrix.upper, -c.u_d / c.g0, rtol=1e-15)
    dense = matrix.to_dense()
    assert np.max(np.abs(dense[1:-1].sum(axis=1))) < 1e-14


@pytest.mark.parametrize("epsilon,n", [(0.5, 8), (0.05, 10), (0.01, 16), (1e-3, 32)])
def test_exponential_matrix_equals_general_assembly(epsilon, n):
    mesh = make_uniform_mesh(n)
    g0 = peclet_coefficients(epsilon, mesh.h).g0
    general = assemble_system_matrix(mesh.h / (2.0 * g0), mesh)
    assert _max_relative_gap(exponential_pg_matrix(epsilon, mesh), general) <= 1e-13


def test_exponential_matrix_underflow_limit_is_exact():
    matrix = exponential_pg_matrix(1.0 / 400.0, make_uniform_mesh(10))
    assert np.all(matrix.lower == -1.0)
    assert np.all(matrix.main == 1.0)
    assert np.all(matrix.upper == 0.0)


# ── Right-hand sides ─────────────────────────────────────────────────────────

def test_pointwise_rhs():
    np.testing.assert_allclose(
        assemble_rhs_pointwise(test_problem_f2x(0.1), make_uniform_mesh(4)),
        [0.125, 0.25, 0.375],
        rtol=1e-15,
    )
    assert np.all(assemble_rhs_pointwise(test_problem_zero(0.1), make_uniform_mesh(4)) == 0.0)


@pytest.mark.parametrize("kind", ["quadratic", "exponential"])
def test_oracle_rhs_of_constant_source_is_h(kind, constant_problem):
    mesh = make_uniform_mesh(8)
    problem = constant_problem(0.05)
    spec = quadratic_bubble(0.9, mesh.h) if kind == "quadratic" else exponential_bubble(0.05, mesh.h)
    np.testing.assert_allclose(assemble_rhs_oracle(problem, mesh, spec), mesh.h, rtol=0, atol=1e-12)


@pytest.mark.parametrize("kind", ["quadratic", "exponential"])
def test_cs_closed_form_matches_generic_assembly(kind):
    epsilon = 0.02
    mesh = make_uniform_mesh(16)
    problem = _smooth_problem(epsilon)
    spec = quadratic_bubble(0.75, mesh.h) if kind == "quadratic" else exponential_bubble(epsilon, mesh.h)
    np.testing.assert_allclose(
        cs_closed_form_rhs(problem, mesh, spec),
        assemble_rhs_bubble(problem, mesh, spec, CAVALIERI_SIMPSON),
        rtol=0,
        atol=1e-14,
    )


def test_bubble_rhs_rejects_mismatched_width():
    with pytest.raises(InvalidArgumentError):
        assemble_rhs_bubble(_smooth_problem(), make_uniform_mesh(8), quadratic_bubble(0.75, 0.25), GAUSS3)


def test_gauss3_rhs_is_close_to_oracle():
    mesh = make_uniform_mesh(16)
    problem = _smooth_problem(0.1)
    spec = exponential_bubble(0.1, mesh.h)
    np.testing.assert_allclose(
        assemble_rhs_bubble(problem, mesh, spec, GAUSS3),
        assemble_rhs_oracle(problem, mesh, spec),
        rtol=0,
        atol=1e-8,
    )


# ── Solve ────────────────────────────────────────────────────────────────────

@pytest.mark.parametrize(
    "config_factory",
    [
        lambda h, eps: SchemeConfig(DiffusionRule.central(), RhsRule.pointwise()),
        lambda h, eps: SchemeConfig(DiffusionRule.standard_upwind(), RhsRule.pointwise()),
        lambda h, eps: SchemeConfig(DiffusionRule.ias_sg(), RhsRule.pointwise()),
        lambda h, eps: SchemeConfig(
            DiffusionRule.from_bubble(quadratic_bubble(0.75, h)),
            RhsRule.bubble_quadrature(quadratic_bubble(0.75, h), TRAPEZOID),
        ),
        lambda h, eps: SchemeConfig(
            DiffusionRule.from_bubble(exponential_bubble(eps, h)),
            RhsRule.bubble_oracle(exponential_bubble(eps, h)),
        ),
    ],
)
def test_zero_source_gives_zero_solution(config_factory):
    mesh = make_uniform_mesh(8)
    u = solve_scheme(config_factory(mesh.h, 0.1), test_problem_zero(0.1), mesh)
    assert np.all(u.values == 0.0)


def test_exponential_scheme_is_nodally_exact():
    mesh = make_uniform_mesh(10)
    problem = test_problem_f2x(0.05)
    u = solve_scheme(exponential_config(0.05, mesh), problem, mesh)
    np.testing.assert_allclose(u.values, interpolate_exact(problem, mesh).values, rtol=0, atol=1e-9)


def test_exponential_bubble_must_match_epsilon():
    mesh = make_uniform_mesh(8)
    spec = exponential_bubble(0.2, mesh.h)
    config = SchemeConfig(DiffusionRule.from_bubble(spec), RhsRule.bubble_oracle(spec))
    with pytest.raises(InvalidArgumentError):
        solve_scheme(config, test_problem_f2x(0.1), mesh)


def test_ias_pointwise_uses_the_exponential_matrix():
    mesh = make_uniform_mesh(8)
    problem = test_problem_f2x(1e-9)
    u = solve_scheme(SchemeConfig(DiffusionRule.ias_sg(), RhsRule.pointwise()), problem, mesh)
    # underflow limit: u_j - u_{j-1} = h f(x_j)
    np.testing.assert_allclose(u.values, np.cumsum(mesh.h * 2.0 * mesh.interior), rtol=1e-14)


def test_reference_interpolant_without_closed_form(const_one_exact):
    epsilon = 0.1
    mesh = make_uniform_mesh(16)
    problem = get_problem("const1", epsilon, problems_file=_problems_file())
    u = reference_interpolant(problem, mesh)
    np.testing.assert_allclose(u.values, const_one_exact(mesh.interior, epsilon), rtol=0, atol=1e-9)


def test_reference_interpolant_prefers_closed_form():
    mesh = make_uniform_mesh(8)
    problem = test_problem_f2x(0.1)
    np.testing.assert_array_equal(reference_interpolant(problem, mesh).values, interpolate_exact(problem, mesh).values)


def test_underflow_limit_solution_is_the_running_integral():
    mesh = make_uniform_mesh(10)
    w = underflow_limit_solution(test_problem_f2x(1e-8), mesh)
    np.testing.assert_allclose(w.values, mesh.interior**2, rtol=0, atol=1e-14)

