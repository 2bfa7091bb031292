import math

import pytest

from errors import IncomparableConfigsError, InvalidArgumentError, UsageError
from experiments.configs import parse_variant, preset_variant
from experiments.runner import (
    check_underflow,
    compare_solutions,
    run_convergence,
    run_plateau,
    run_solve,
)


def test_zero_problem_has_zero_errors(cfg):
    variants = [preset_variant("T-FD"), preset_variant("EXP-G3")]
    report = run_convergence("fzero", variants, [8, 16, 32], 0.1, cfg=cfg)
    assert len(report.rows) == 6
    for row in report.rows:
        assert row.error_inf == 0.0
        assert row.error_star == 0.0
        assert row.observed_order is None


def test_rows_are_sorted_and_orders_follow_consecutive_meshes(cfg):
    variants = [preset_variant("EXP-T"), preset_variant("CS-FD")]
    report = run_convergence("f2x", variants, [8, 16, 32], 0.1, cfg=cfg)
    keys = [(r.scheme, r.quadrature, r.n) for r in report.rows]
    assert keys == sorted(keys)

    by_variant = {}
    for row in report.rows:
        by_variant.setdefault((row.scheme, row.quadrature), []).append(row)
    for rows in by_variant.values():
        assert rows[0].observed_order is None
        for prev, row in zip(rows, rows[1:]):
            assert row.observed_order == pytest.approx(math.log2(prev.error_star / row.error_star))


def test_threaded_sweep_matches_serial(cfg):
    variants = [preset_variant("T-FD"), preset_variant("EXP-CS")]
    serial = run_convergence("f2x", variants, [8, 16], 0.05, cfg=cfg)
    threaded_cfg = cfg.model_copy(update={"experiments": cfg.experiments.model_copy(update={"max_workers": 4})})
    threaded = run_convergence("f2x", variants, [8, 16], 0.05, cfg=threaded_cfg)
    assert threaded.rows == serial.rows


@pytest.mark.parametrize("n_list", [[], [1, 2], [16, 8], [8, 8]])
def test_bad_mesh_sequences(cfg, n_list):
    with pytest.raises(InvalidArgumentError):
        run_convergence("f2x", [preset_variant("T-FD")], n_list, 0.1, cfg=cfg)


def test_unknown_problem_and_empty_variants(cfg):
    with pytest.raises(UsageError):
        run_convergence("nope", [preset_variant("T-FD")], [8], 0.1, cfg=cfg)
    with pytest.raises(UsageError):
        run_convergence("f2x", [], [8], 0.1, cfg=cfg)


def test_tabulated_problem_uses_the_nodally_exact_reference(cfg):
    report = run_convergence("ramp", [preset_variant("EXP-oracle")], [8, 16], 0.1, cfg=cfg)
    for row in report.rows:
        assert row.error_inf < 1e-9


def test_solve_returns_the_solution(cfg):
    report, u_h = run_solve("f2x", preset_variant("T-FD"), 16, 0.1, cfg=cfg)
    assert report.rows[0].n == 16
    assert u_h.mesh.n == 16
    assert report.rows[0].error_inf > 0


# ── Comparison ───────────────────────────────────────────────────────────────

def test_identical_configs_compare_to_zero(cfg):
    variant = preset_variant("CS-FD")
    row = compare_solutions("f2x", 16, variant, variant, 0.1, cfg=cfg).rows[0]
    assert row.difference_norm == 0.0
    assert row.functional_dual_norm == 0.0
    assert row.bound_holds is True


def test_configs_with_different_matrices_are_incomparable(cfg):
    with pytest.raises(IncomparableConfigsError):
        compare_solutions("f2x", 16, parse_variant("upwind", "pointwise"), parse_variant("central", "pointwise"), 0.1,
                          cfg=cfg)


def test_ias_and_exponential_bubble_share_a_matrix(cfg):
    row = compare_solutions(
        "f2x", 16, parse_variant("ias", "pointwise"), parse_variant("exp-bubble", "oracle"), 0.1, cfg=cfg
    ).rows[0]
    assert row.equality_gap <= 1e-10 * row.difference_norm


def test_pg_oracle_against_trapezoid_fd(cfg):
    row = compare_solutions("f2x", 16, preset_variant("T-FD"), preset_variant("PG-oracle"), 0.1, cfg=cfg).rows[0]
    assert row.equality_gap <= 1e-10 * row.difference_norm
    assert row.bound_holds is True
    assert row.difference_norm <= row.bound
    # the trapezoid error functional vanishes for linear f; only the bubble part remains
    assert row.trapezoid_part < 1e-12
    assert row.bubble_part == pytest.approx(row.functional_dual_norm, rel=1e-8)


def test_tabulated_problem_without_bounds_reports_no_bound(cfg):
    row = compare_solutions("bump", 8, preset_variant("T-FD"), preset_variant("PG-oracle"), 0.1, cfg=cfg).rows[0]
    assert row.bound is None
    assert row.bound_holds is None


# ── Plateau ──────────────────────────────────────────────────────────────────

def test_plateau_matches_prediction(cfg):
    report = run_plateau("f2x", [100, 200], 1e-6, cfg=cfg)
    for row in report.rows:
        assert row.ratio > cfg.experiments.underflow_ratio
        assert row.error_inf == pytest.approx(row.predicted_plateau, rel=0.05)


def test_check_underflow():
    assert check_underflow(1e-6, 0.01)
    assert not check_underflow(0.01, 0.1)
