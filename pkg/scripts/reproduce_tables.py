"""Regenerate the reference tables for f(x) = 2x in one run.

Usage:
    python scripts/reproduce_tables.py [--out-dir results]

What it does:
  1. eps = 1e-6, n = 800: discrete infinity error of T-FD (all interior
     nodes) and CS-FD (outflow node left out)
  2. eps = 1e-6, n = 100..1600: exponential bubble with gauss3 load vector,
     measured plateau next to the underflow-limit prediction
  3. eps = 0.1, n = 8..128: exponential bubble with trapezoid and
     Cavalieri-Simpson load vectors, observed orders in the optimal trial norm

Each table is written as CSV to the output directory.
"""

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT))

from dotenv import load_dotenv

load_dotenv()

from loguru import logger

from config import get_config
from experiments.configs import preset_variant
from experiments.run_log import log_run
from experiments.runner import run_convergence, run_plateau


def main(out_dir: Path) -> None:
    cfg = get_config()
    tol = cfg.quadrature.oracle_tol
    digits = cfg.output.significant_digits
    out_dir = out_dir if out_dir.is_absolute() else ROOT / out_dir

    # ── Finite difference table ───────────────────────────────────────────────
    tfd = run_convergence("f2x", [preset_variant("T-FD", tol)], [800], 1e-6, cfg=cfg, layer_nodes=0)
    csfd = run_convergence("f2x", [preset_variant("CS-FD", tol)], [800], 1e-6, cfg=cfg, layer_nodes=1)
    logger.info(f"T-FD  error_inf = {tfd.rows[0].error_inf:.3e}")
    logger.info(f"CS-FD error_inf = {csfd.rows[0].error_inf:.3e} (outflow node excluded)")
    tfd.rows.extend(csfd.rows)
    tfd.write(out_dir / "fd_table.csv", significant_digits=digits)

    # ── Plateau ───────────────────────────────────────────────────────────────
    plateau = run_plateau("f2x", [100, 200, 400, 800, 1600], 1e-6, cfg=cfg)
    for row in plateau.rows:
        logger.info(f"n={row.n:5d}  measured {row.error_inf:.3e}  predicted {row.predicted_plateau:.3e}")
    plateau.write(out_dir / "plateau.csv", significant_digits=digits)

    # ── Orders ────────────────────────────────────────────────────────────────
    orders = run_convergence(
        "f2x",
        [preset_variant("EXP-T", tol), preset_variant("EXP-CS", tol)],
        [8, 16, 32, 64, 128],
        0.1,
        cfg=cfg,
    )
    for row in orders.rows:
        if row.observed_order is not None:
            logger.info(f"{row.quadrature:<10} n={row.n:4d}  order {row.observed_order:.2f}")
    orders.write(out_dir / "orders.csv", significant_digits=digits)

    log_run(
        "reproduce_tables",
        "f2x",
        {"out_dir": str(out_dir)},
        len(tfd.rows) + len(plateau.rows) + len(orders.rows),
        "ok",
        cfg=cfg,
    )


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Regenerate the f(x)=2x reference tables")
    parser.add_argument("--out-dir", type=Path, default=Path(get_config().output.results_dir))
    args = parser.parse_args()
    main(args.out_dir)
