"""Command-line driver for the convection-diffusion laboratory.

Usage:
    python scripts/lab.py solve --problem f2x --eps 1e-6 --n 800 --scheme upwind --rhs pointwise
    python scripts/lab.py convergence --n-list 100,200,400,800,1600 --scheme exp-bubble --rhs gauss3
    python scripts/lab.py convergence --preset T-FD --preset CS-FD --eps 1e-6
    python scripts/lab.py compare --eps 0.1 --n 16 --scheme-a upwind --rhs-a pointwise \\
                                  --scheme-b quadratic-bubble --beta-b 0.75 --rhs-b oracle
    python scripts/lab.py plateau --eps 1e-6
    python scripts/lab.py problems

Reports go to stdout unless --out is given; --format picks csv or json.

Exit codes:
  0  success
  2  usage error (unknown ids, invalid arguments, incomparable configs)
  3  numerical failure (singular system, no convergence)
"""

import argparse
import sys
from pathlib import Path
from typing import Optional

ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT))

from dotenv import load_dotenv

load_dotenv()

import pandas as pd
from loguru import logger

from config import Config, get_config, resolve_path
from errors import LabError, NumericalFailure
from experiments.configs import PRESETS, RHS_RULES, SCHEME_IDS, parse_variant, preset_variant
from experiments.report import ExperimentReport
from experiments.run_log import log_run
from experiments.runner import check_underflow, compare_solutions, run_convergence, run_plateau, run_solve
from problems.registry import list_problems

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _n_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--problem", default="f2x", help="Problem id (see `problems`)")
    parser.add_argument("--eps", type=float, default=None, help="Diffusion coefficient epsilon")
    parser.add_argument("--format", choices=["csv", "json"], default=None, help="Report format")
    parser.add_argument("--out", type=Path, default=None, help="Write the report here instead of stdout")
    parser.add_argument("--warn-underflow", action="store_true", help="Warn when h/eps is past the underflow ratio")
    parser.add_argument("--layer-nodes", type=int, default=None,
                        help="Interior nodes next to x=1 left out of the infinity error")


def _add_scheme(parser: argparse.ArgumentParser, suffix: str = "", scheme: Optional[str] = None,
                rhs: Optional[str] = None) -> None:
    parser.add_argument(f"--scheme{suffix}", choices=SCHEME_IDS, default=scheme, required=scheme is None)
    parser.add_argument(f"--rhs{suffix}", choices=list(RHS_RULES), default=rhs or "pointwise")
    parser.add_argument(f"--beta{suffix}", type=float, default=None, help="Quadratic bubble parameter")


def build_parser(title: str = "Convection-diffusion FD/FE laboratory") -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=title)
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="Solve one scheme on one mesh")
    _add_common(solve)
    _add_scheme(solve)
    solve.add_argument("--n", type=int, required=True, help="Number of subintervals")
    solve.add_argument("--values", type=Path, default=None, help="Also write nodal values (x, u_h) as CSV")

    convergence = sub.add_parser("convergence", help="Errors and observed orders over a mesh sequence")
    _add_common(convergence)
    convergence.add_argument("--scheme", choices=SCHEME_IDS, default=None)
    convergence.add_argument("--rhs", choices=list(RHS_RULES), default="pointwise")
    convergence.add_argument("--beta", type=float, default=None)
    convergence.add_argument("--preset", action="append", choices=list(PRESETS), default=[],
                             help="Named method; repeatable")
    convergence.add_argument("--n-list", type=_n_list, default=None)

    compare = sub.add_parser("compare", help="Distance between two schemes sharing a matrix")
    _add_common(compare)
    _add_scheme(compare, "-a")
    _add_scheme(compare, "-b")
    compare.add_argument("--n", type=int, required=True)

    plateau = sub.add_parser("plateau", help="Measured error against the underflow-limit prediction")
    _add_common(plateau)
    _add_scheme(plateau, scheme="exp-bubble", rhs="gauss3")
    plateau.add_argument("--n-list", type=_n_list, default=None)

    sub.add_parser("problems", help="List registered problems")
    return parser


def _emit(report: ExperimentReport, args: argparse.Namespace, cfg: Config) -> None:
    fmt = args.format or cfg.output.format
    if args.out is not None:
        report.write(args.out, fmt=fmt, significant_digits=cfg.output.significant_digits)
    else:
        print(report.render(fmt, significant_digits=cfg.output.significant_digits), end="")


def _warn_underflow(args: argparse.Namespace, epsilon: float, n_values: list[int], cfg: Config) -> None:
    if not args.warn_underflow:
        return
    for n in n_values:
        check_underflow(epsilon, 1.0 / n, cfg.experiments.underflow_ratio, cfg.experiments.recommended_ratio)


def run_command(args: argparse.Namespace, cfg: Config) -> int:
    """Dispatch one parsed command; returns the number of report rows."""
    if args.command == "problems":
        for problem_id, description in list_problems(resolve_path(cfg.experiments.problems_file)):
            print(f"{problem_id:<10} {description}")
        return 0

    epsilon = args.eps if args.eps is not None else cfg.experiments.default_epsilon
    tol = cfg.quadrature.oracle_tol

    if args.command == "solve":
        variant = parse_variant(args.scheme, args.rhs, args.beta, oracle_tol=tol)
        _warn_underflow(args, epsilon, [args.n], cfg)
        report, u_h = run_solve(args.problem, variant, args.n, epsilon, cfg=cfg, layer_nodes=args.layer_nodes)
        if args.values is not None:
            args.values.parent.mkdir(parents=True, exist_ok=True)
            frame = pd.DataFrame({"x": u_h.mesh.nodes, "u_h": u_h.with_boundary()})
            frame.to_csv(args.values, index=False, float_format=f"%.{cfg.output.significant_digits}g")
            logger.info(f"Nodal values written to {args.values}")

    elif args.command == "convergence":
        variants = [preset_variant(name, oracle_tol=tol) for name in args.preset]
        if args.scheme is not None:
            variants.append(parse_variant(args.scheme, args.rhs, args.beta, oracle_tol=tol))
        n_list = args.n_list or cfg.experiments.default_n_list
        _warn_underflow(args, epsilon, n_list, cfg)
        report = run_convergence(args.problem, variants, n_list, epsilon, cfg=cfg, layer_nodes=args.layer_nodes)

    elif args.command == "compare":
        variant_a = parse_variant(args.scheme_a, args.rhs_a, args.beta_a, oracle_tol=tol)
        variant_b = parse_variant(args.scheme_b, args.rhs_b, args.beta_b, oracle_tol=tol)
        _warn_underflow(args, epsilon, [args.n], cfg)
        report = compare_solutions(args.problem, args.n, variant_a, variant_b, epsilon, cfg=cfg)

    else:
        variant = parse_variant(args.scheme, args.rhs, args.beta, oracle_tol=tol)
        n_list = args.n_list or cfg.experiments.default_n_list
        _warn_underflow(args, epsilon, n_list, cfg)
        report = run_plateau(args.problem, n_list, epsilon, variant=variant, cfg=cfg, layer_nodes=args.layer_nodes)

    _emit(report, args, cfg)
    return len(report.rows)


def main(argv: Optional[list[str]] = None, cfg: Optional[Config] = None) -> int:
    cfg = cfg or get_config()
    logger.remove()
    logger.add(sys.stderr, level=cfg.logging.level)

    args = build_parser(cfg.app.title).parse_args(argv)
    parameters = {k: v for k, v in vars(args).items() if k != "command"}
    problem = getattr(args, "problem", None)

    try:
        rows = run_command(args, cfg)
    except NumericalFailure as e:
        logger.error(f"Numerical failure: {e}")
        log_run(args.command, problem, parameters, 0, "numerical_failure", cfg=cfg)
        return EXIT_NUMERICAL
    except LabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        log_run(args.command, problem, parameters, 0, "usage_error", cfg=cfg)
        return EXIT_USAGE

    log_run(args.command, problem, parameters, rows, "ok", cfg=cfg)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
