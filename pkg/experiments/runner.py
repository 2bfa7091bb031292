"""Experiment drivers: convergence sweeps, pairwise scheme comparison, plateau check.

Each (variant, n) cell is independent; with experiments.max_workers > 1 the
cells run in a thread pool. Rows are sorted by (scheme, quadrature, n)
before orders are computed, so output does not depend on scheduling.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np
from loguru import logger

from config import Config, get_config, resolve_path
from discretization.norms import (
    bubble_functional_dual_norm,
    discrete_inf_distance,
    dual_norm,
    optimal_trial_norm,
    trapezoid_functional_dual_norm,
)
from discretization.schemes import (
    artificial_diffusion,
    assemble_scheme,
    reference_interpolant,
    solve_scheme,
    underflow_limit_solution,
)
from errors import IncomparableConfigsError, InvalidArgumentError, UsageError
from experiments.configs import SchemeVariant, preset_variant
from experiments.report import (
    ComparisonReport,
    ComparisonRow,
    ExperimentReport,
    ExperimentRow,
    PlateauReport,
    PlateauRow,
    ReportMetadata,
)
from numerics.tridiag import TridiagonalSystem, solve
from problems.mesh import Mesh, make_uniform_mesh
from problems.problem import GridFunction, Problem, source_bounds, source_l2_norm
from problems.registry import get_problem

T = TypeVar("T")
R = TypeVar("R")

# Matrices of two configs count as the same system within this relative gap
_MATRIX_MATCH_RTOL = 1e-13


# ── Helpers ──────────────────────────────────────────────────────────────────

def load_problem(problem_id: str, epsilon: float, cfg: Config) -> Problem:
    return get_problem(problem_id, epsilon, problems_file=resolve_path(cfg.experiments.problems_file))


def check_underflow(epsilon: float, h: float, threshold: float = 36.05, recommended: float = 30.0) -> bool:
    """Warn when h/eps is past the point where e^{-h/eps} drops below roundoff."""
    ratio = h / epsilon
    if ratio > threshold:
        logger.warning(
            f"h/eps = {ratio:.3g} exceeds {threshold:g}: the exponential scheme collapses to "
            f"its underflow limit. Choose h <= {recommended:g}*eps (n >= {math.ceil(1.0 / (recommended * epsilon))})"
        )
        return True
    return False


def _validate_n_list(n_list: Sequence[int]) -> list[int]:
    n_list = list(n_list)
    if not n_list:
        raise InvalidArgumentError("n_list is empty")
    if any(n < 2 for n in n_list) or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InvalidArgumentError(f"n_list must be strictly increasing with every n >= 2, got {n_list!r}")
    return n_list


def _observed_order(e_coarse: float, e_fine: float, n_coarse: int, n_fine: int) -> Optional[float]:
    """log(e(n)/e(n')) / log(n'/n); log2(e(n)/e(2n)) under doubling."""
    if not (e_coarse > 0 and e_fine > 0):
        return None
    return math.log(e_coarse / e_fine) / math.log(n_fine / n_coarse)


def _map_cells(fn: Callable[[T], R], cells: Iterable[T], max_workers: int) -> list[R]:
    cells = list(cells)
    if max_workers > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(fn, cells))
    return [fn(cell) for cell in cells]


def _with_orders(rows: list[ExperimentRow]) -> list[ExperimentRow]:
    rows = sorted(rows, key=lambda r: (r.scheme, r.quadrature, r.n))
    for prev, row in zip(rows, rows[1:]):
        if (prev.scheme, prev.quadrature) != (row.scheme, row.quadrature):
            continue
        row.observed_order = _observed_order(prev.error_star, row.error_star, prev.n, row.n)
        row.observed_order_inf = _observed_order(prev.error_inf, row.error_inf, prev.n, row.n)
    return rows


def _error_columns(
    problem: Problem,
    variant: SchemeVariant,
    mesh: Mesh,
    reference: GridFunction,
    cfg: Config,
    layer_nodes: int,
) -> tuple[GridFunction, float, float, float]:
    config = variant.build(problem, mesh)
    u_h = solve_scheme(
        config,
        problem,
        mesh,
        pivot_threshold=cfg.solver.pivot_threshold,
        residual_rtol=cfg.solver.residual_rtol,
    )
    d = artificial_diffusion(problem.epsilon, mesh.h, config.diffusion)
    error_inf = discrete_inf_distance(u_h, reference, layer_nodes=layer_nodes)
    error_star = optimal_trial_norm(reference - u_h, d)
    return u_h, d, error_inf, error_star


# ── Convergence ──────────────────────────────────────────────────────────────

def run_convergence(
    problem_id: str,
    variants: Sequence[SchemeVariant],
    n_list: Sequence[int],
    epsilon: float,
    cfg: Optional[Config] = None,
    layer_nodes: Optional[int] = None,
    command: str = "convergence",
) -> ExperimentReport:
    """Solve every variant on every mesh and tabulate errors against I_h(u)."""
    cfg = cfg or get_config()
    if not variants:
        raise UsageError("No scheme variant given")
    n_list = _validate_n_list(n_list)
    layer_nodes = cfg.experiments.layer_nodes if layer_nodes is None else layer_nodes
    problem = load_problem(problem_id, epsilon, cfg)

    meshes = {n: make_uniform_mesh(n) for n in n_list}
    references = {
        n: reference_interpolant(problem, mesh, tol=cfg.experiments.reference_tol)
        for n, mesh in meshes.items()
    }

    def run_cell(cell: tuple[SchemeVariant, int]) -> ExperimentRow:
        variant, n = cell
        mesh = meshes[n]
        _, _, error_inf, error_star = _error_columns(
            problem, variant, mesh, references[n], cfg, layer_nodes
        )
        logger.debug(f"{variant.scheme_label}/{variant.rhs_label} n={n}: inf={error_inf:.3e} star={error_star:.3e}")
        return ExperimentRow(
            scheme=variant.scheme_label,
            quadrature=variant.rhs_label,
            epsilon=epsilon,
            n=n,
            h=mesh.h,
            error_inf=error_inf,
            error_star=error_star,
        )

    cells = [(variant, n) for variant in variants for n in n_list]
    rows = _with_orders(_map_cells(run_cell, cells, cfg.experiments.max_workers))
    logger.info(f"{command}: {len(rows)} rows for {problem_id!r} at eps={epsilon:g}")
    return ExperimentReport(
        metadata=ReportMetadata.now(problem_id, command, cfg.app.version),
        rows=rows,
    )


def run_solve(
    problem_id: str,
    variant: SchemeVariant,
    n: int,
    epsilon: float,
    cfg: Optional[Config] = None,
    layer_nodes: Optional[int] = None,
) -> tuple[ExperimentReport, GridFunction]:
    """One solve; returns the single-row report and the discrete solution."""
    cfg = cfg or get_config()
    layer_nodes = cfg.experiments.layer_nodes if layer_nodes is None else layer_nodes
    problem = load_problem(problem_id, epsilon, cfg)
    mesh = make_uniform_mesh(n)
    reference = reference_interpolant(problem, mesh, tol=cfg.experiments.reference_tol)
    u_h, _, error_inf, error_star = _error_columns(problem, variant, mesh, reference, cfg, layer_nodes)
    row = ExperimentRow(
        scheme=variant.scheme_label,
        quadrature=variant.rhs_label,
        epsilon=epsilon,
        n=n,
        h=mesh.h,
        error_inf=error_inf,
        error_star=error_star,
    )
    report = ExperimentReport(metadata=ReportMetadata.now(problem_id, "solve", cfg.app.version), rows=[row])
    return report, u_h


# ── Comparison ───────────────────────────────────────────────────────────────

def _same_system(a: TridiagonalSystem, b: TridiagonalSystem) -> bool:
    scale = max(np.max(np.abs(a.main)), np.max(np.abs(b.main)))
    atol = _MATRIX_MATCH_RTOL * scale
    return all(
        np.allclose(x, y, rtol=0.0, atol=atol)
        for x, y in ((a.lower, b.lower), (a.main, b.main), (a.upper, b.upper))
    )


def compare_solutions(
    problem_id: str,
    n: int,
    variant_a: SchemeVariant,
    variant_b: SchemeVariant,
    epsilon: float,
    cfg: Optional[Config] = None,
) -> ComparisonReport:
    """Distance between two schemes that share a matrix, and its a priori bound.

    With the same matrix, ||u_B - u_A||_{*,h} equals the dual norm of F_B - F_A.
    The bound h^2 (sup|f''|/12 + sup|f'|/6) + M h ||f||_{L^2} uses M = sup|B|
    of the bubble the pair involves and is reported when the source carries
    derivative bounds.
    """
    cfg = cfg or get_config()
    problem = load_problem(problem_id, epsilon, cfg)
    mesh = make_uniform_mesh(n)
    tol = cfg.quadrature.oracle_tol

    config_a = variant_a.build(problem, mesh)
    config_b = variant_b.build(problem, mesh)
    system_a = assemble_scheme(config_a, problem, mesh)
    system_b = assemble_scheme(config_b, problem, mesh)
    if not _same_system(system_a.matrix, system_b.matrix):
        raise IncomparableConfigsError(
            f"{variant_a.scheme_label} (d={system_a.d:.6g}) and {variant_b.scheme_label} "
            f"(d={system_b.d:.6g}) do not share a system matrix"
        )

    u_a = solve(system_a.matrix, system_a.rhs, pivot_threshold=cfg.solver.pivot_threshold)
    u_b = solve(system_a.matrix, system_b.rhs, pivot_threshold=cfg.solver.pivot_threshold)
    difference = GridFunction(mesh, u_b - u_a)
    difference_norm = optimal_trial_norm(difference, system_a.d)
    functional = dual_norm(system_b.rhs - system_a.rhs, mesh)

    bubbles = [c.rhs.bubble for c in (config_a, config_b) if c.rhs.bubble is not None]
    bubble = max(bubbles, key=lambda b: b.sup_norm) if bubbles else None

    trapezoid_part = bubble_part = bound = bound_holds = None
    if bubble is not None:
        trapezoid_part = trapezoid_functional_dual_norm(problem, mesh, tol=tol)
        bubble_part = bubble_functional_dual_norm(problem, mesh, bubble, tol=tol)
    if problem.source_deriv_bounds is not None:
        d1, d2 = source_bounds(problem, mesh, factor=cfg.experiments.sampling_factor)
        sup_b = bubble.sup_norm if bubble is not None else 0.0
        h = mesh.h
        bound = h * h * (d2 / 12.0 + d1 / 6.0) + sup_b * h * source_l2_norm(problem, tol=tol)
        bound_holds = difference_norm <= bound

    row = ComparisonRow(
        scheme_a=variant_a.scheme_label,
        quadrature_a=variant_a.rhs_label,
        scheme_b=variant_b.scheme_label,
        quadrature_b=variant_b.rhs_label,
        epsilon=epsilon,
        n=n,
        h=mesh.h,
        d=system_a.d,
        difference_norm=difference_norm,
        functional_dual_norm=functional,
        equality_gap=abs(difference_norm - functional),
        trapezoid_part=trapezoid_part,
        bubble_part=bubble_part,
        bound=bound,
        bound_holds=bound_holds,
    )
    if bound_holds is False:
        logger.warning(f"Closeness bound violated at n={n}: {difference_norm:.3e} > {bound:.3e}")
    return ComparisonReport(
        metadata=ReportMetadata.now(problem_id, "compare", cfg.app.version),
        rows=[row],
    )


# ── Plateau ──────────────────────────────────────────────────────────────────

def run_plateau(
    problem_id: str,
    n_list: Sequence[int],
    epsilon: float,
    variant: Optional[SchemeVariant] = None,
    cfg: Optional[Config] = None,
    layer_nodes: Optional[int] = None,
) -> PlateauReport:
    """Measured error next to the underflow-limit prediction ||I_h(u) - I_h(w)||_inf."""
    cfg = cfg or get_config()
    n_list = _validate_n_list(n_list)
    layer_nodes = cfg.experiments.layer_nodes if layer_nodes is None else layer_nodes
    variant = variant or preset_variant("EXP-G3", oracle_tol=cfg.quadrature.oracle_tol)
    problem = load_problem(problem_id, epsilon, cfg)

    rows = []
    for n in n_list:
        mesh = make_uniform_mesh(n)
        ratio = mesh.h / epsilon
        if ratio <= cfg.experiments.underflow_ratio:
            logger.info(f"n={n}: h/eps = {ratio:.3g} is below the underflow ratio; the prediction is not sharp")
        reference = reference_interpolant(problem, mesh, tol=cfg.experiments.reference_tol)
        _, _, error_inf, error_star = _error_columns(problem, variant, mesh, reference, cfg, layer_nodes)
        limit = underflow_limit_solution(problem, mesh, tol=cfg.quadrature.oracle_tol)
        rows.append(
            PlateauRow(
                scheme=variant.scheme_label,
                quadrature=variant.rhs_label,
                epsilon=epsilon,
                n=n,
                h=mesh.h,
                error_inf=error_inf,
                error_star=error_star,
                ratio=ratio,
                predicted_plateau=discrete_inf_distance(limit, reference, layer_nodes=layer_nodes),
            )
        )

    rows = _with_orders(rows)
    logger.info(f"plateau: {len(rows)} rows for {problem_id!r} at eps={epsilon:g}")
    return PlateauReport(
        metadata=ReportMetadata.now(problem_id, "plateau", cfg.app.version),
        rows=rows,
    )
