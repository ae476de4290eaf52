"""
Subcommands of the tasepcheck CLI.

Each command takes a validated RunConfig and returns a CommandOutput: rows in grid
order, the column list, and whether a verification failed.
"""
import argparse
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

from tasepcheck.cli.output import Row
from tasepcheck.core.config import Settings
from tasepcheck.models.particles import ParticleConfig
from tasepcheck.models.results import ExactResult, OutputFormat, RunConfig
from tasepcheck.services.exact import event_probability, step_initial_probability
from tasepcheck.services.identities import run_suite
from tasepcheck.services.simulator import (
    event_mass,
    master_equation_distribution,
    mc_event_probability,
    oracle_params,
)

logger = logging.getLogger(__name__)

EXACT_COLUMNS = ("N", "k", "x", "t", "value", "method")
SIMULATE_COLUMNS = ("N", "k", "x", "t", "p_hat", "stderr", "n_samples")
ORACLE_COLUMNS = ("N", "k", "x", "t", "oracle", "jump_cap")
COMPARE_COLUMNS = ("N", "k", "x", "t", "exact", "oracle", "mc_phat", "mc_stderr", "abs_err", "z")
IDENTITY_COLUMNS = ("name", "N", "k", "trials", "max_rel_err", "pass")

Z_LIMIT = 5.0


class CommandOutput(NamedTuple):
    rows: List[Row]
    columns: Tuple[str, ...]
    failed: bool = False


def grid(config: RunConfig) -> List[Tuple[int, float, int]]:
    """(k, t, x) tuples in output order."""
    return [(k, t, x) for k in config.k_values() for t in config.t for x in config.x_values(t)]


def exact_value(config: RunConfig, k: int, x: int, t: float) -> ExactResult:
    """Step data goes through the Hankel formulas, explicit Y through the determinant."""
    if config.step:
        return step_initial_probability(config.N, k, x, t)
    return event_probability(config.y, k, x, t)


def cmd_exact(config: RunConfig, workers: Optional[int] = None) -> CommandOutput:
    points = grid(config)
    logger.info(f"exact: N={config.N}, {len(points)} grid points")

    def evaluate(point):
        k, t, x = point
        result = exact_value(config, k, x, t)
        return {"N": config.N, "k": k, "x": x, "t": t, "value": result.probability, "method": result.method}

    with ThreadPoolExecutor(max_workers=workers) as executor:
        rows = list(executor.map(evaluate, points))
    return CommandOutput(rows, EXACT_COLUMNS)


def cmd_simulate(config: RunConfig, workers: Optional[int] = None) -> CommandOutput:
    points = grid(config)
    logger.info(f"simulate: N={config.N}, {len(points)} grid points, n={config.n_samples}, seed={config.seed}")
    rows = []
    for k, t, x in points:
        initial = ParticleConfig.with_nu(config.y, k)
        estimate = mc_event_probability(initial, k, x, t, config.n_samples, config.seed, workers=workers)
        rows.append({"N": config.N, "k": k, "x": x, "t": t, "p_hat": estimate.p_hat,
                     "stderr": estimate.stderr, "n_samples": estimate.n_samples})
    return CommandOutput(rows, SIMULATE_COLUMNS)


def _oracle_values(config: RunConfig, k: int, t: float) -> Tuple[Dict[int, float], int]:
    """Oracle event probabilities for every x of the sweep, from one propagated law."""
    initial = ParticleConfig.with_nu(config.y, k)
    params = oracle_params(config.N, t, config.tol)
    law = master_equation_distribution(initial, t, params)
    return {x: event_mass(law, k, x) for x in config.x_values(t)}, params.jump_cap


def cmd_oracle(config: RunConfig, workers: Optional[int] = None) -> CommandOutput:
    blocks = [(k, t) for k in config.k_values() for t in config.t]
    logger.info(f"oracle: N={config.N}, {len(blocks)} (k, t) blocks, tol={config.tol:g}")

    def evaluate(block):
        k, t = block
        values, jump_cap = _oracle_values(config, k, t)
        return [{"N": config.N, "k": k, "x": x, "t": t, "oracle": value, "jump_cap": jump_cap}
                for x, value in values.items()]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        rows = [row for block_rows in executor.map(evaluate, blocks) for row in block_rows]
    return CommandOutput(rows, ORACLE_COLUMNS)


def z_score(p_hat: float, exact: float, n: int) -> float:
    """(p_hat - p0) / sqrt(p0 (1 - p0) / n) with p0 the exact value clipped to [0, 1].

    The null standard error is floored at 1 / n so a degenerate p0 gives a finite score.
    """
    p0 = min(1.0, max(0.0, exact))
    stderr = max(math.sqrt(p0 * (1.0 - p0) / n), 1.0 / n)
    return (p_hat - p0) / stderr


def cmd_compare(config: RunConfig, workers: Optional[int] = None) -> CommandOutput:
    blocks = [(k, t) for k in config.k_values() for t in config.t]
    logger.info(f"compare: N={config.N}, {len(blocks)} (k, t) blocks, n={config.n_samples}, "
                f"max_abs_err={config.max_abs_err:g}")
    rows = []
    failed = False
    for k, t in blocks:
        oracle_values, _ = _oracle_values(config, k, t)
        initial = ParticleConfig.with_nu(config.y, k)
        for x, oracle in oracle_values.items():
            exact = exact_value(config, k, x, t).probability
            estimate = mc_event_probability(initial, k, x, t, config.n_samples, config.seed, workers=workers)
            abs_err = abs(exact - oracle)
            z = z_score(estimate.p_hat, exact, config.n_samples)
            if abs_err > config.max_abs_err or abs(z) > Z_LIMIT:
                logger.warning(f"compare mismatch at k={k} x={x} t={t}: exact={exact!r}, "
                               f"oracle={oracle!r}, mc={estimate.p_hat!r}, z={z:.2f}")
                failed = True
            rows.append({"N": config.N, "k": k, "x": x, "t": t, "exact": exact, "oracle": oracle,
                         "mc_phat": estimate.p_hat, "mc_stderr": estimate.stderr,
                         "abs_err": abs_err, "z": z})
    return CommandOutput(rows, COMPARE_COLUMNS, failed)


def cmd_identities(config: RunConfig, workers: Optional[int] = None) -> CommandOutput:
    reports = run_suite(seed=config.seed, trials=config.trials, threshold=config.threshold, workers=workers)
    return CommandOutput([report.to_row() for report in reports], IDENTITY_COLUMNS,
                         failed=not all(report.passed for report in reports))


COMMANDS: Dict[str, Callable[..., CommandOutput]] = {
    "exact": cmd_exact,
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "identities": cmd_identities,
}


def int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def position_list(text: str) -> List[int]:
    """A comma list or an inclusive range lo:hi."""
    if ":" in text:
        lo, _, hi = text.partition(":")
        try:
            lo, hi = int(lo), int(hi)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return int_list(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="env-format file with settings overrides")
    common.add_argument("--workers", type=int, help="worker threads (default: WORKER_THREADS or CPU count)")
    common.add_argument("--format", dest="output_format", choices=[f.value for f in OutputFormat],
                        help="output format (default: csv, json for identities)")
    common.add_argument("-o", "--output", dest="output_path", help="write rows to a file instead of stdout")
    common.add_argument("--seed", type=int, help="random seed (default 0)")

    grid_args = argparse.ArgumentParser(add_help=False)
    initial = grid_args.add_mutually_exclusive_group()
    initial.add_argument("--step", action="store_true", help="step initial condition Y = (1, ..., N)")
    initial.add_argument("-Y", dest="y", type=int_list, help="explicit initial positions, e.g. 1,3,4")
    grid_args.add_argument("-N", dest="N", type=int, help="number of particles")
    grid_args.add_argument("-k", dest="k", type=int_list, help="first class counts (default 0..N)")
    grid_args.add_argument("-x", "--position", dest="x", type=position_list,
                           help="block starts: list or lo:hi; negative ranges as --position=-1:3")
    grid_args.add_argument("-t", dest="t", type=float_list, help="times (default 0.5,1)")

    parser = argparse.ArgumentParser(
        prog="tasepcheck",
        description="Exact formulas, simulation and identity checks for the TASEP with second class particles",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    subparsers.add_parser("exact", parents=[common, grid_args], help="evaluate the exact formulas")

    simulate = subparsers.add_parser("simulate", parents=[common, grid_args], help="Monte Carlo estimates")
    simulate.add_argument("-n", dest="n_samples", type=int, help="paths per grid point (default 10000)")

    oracle = subparsers.add_parser("oracle", parents=[common, grid_args], help="master-equation oracle")
    oracle.add_argument("--tol", type=float, help="oracle truncation error (default ORACLE_TOL)")

    compare = subparsers.add_parser("compare", parents=[common, grid_args],
                                    help="exact vs oracle vs Monte Carlo")
    compare.add_argument("-n", dest="n_samples", type=int, help="paths per grid point (default 10000)")
    compare.add_argument("--tol", type=float, help="oracle truncation error (default ORACLE_TOL)")
    compare.add_argument("--max-abs-err", dest="max_abs_err", type=float,
                         help="largest accepted |exact - oracle| (default 1e-7)")

    identities = subparsers.add_parser("identities", parents=[common], help="run the identity suite")
    identities.add_argument("--threshold", type=float, help="pass threshold (default IDENTITY_THRESHOLD)")
    identities.add_argument("--trials", type=int, help="random points per check (default IDENTITY_TRIALS)")
    return parser


def run_config_from_args(args: argparse.Namespace, settings: Settings) -> RunConfig:
    """Flags first, then settings, then RunConfig defaults."""
    values = {name: value for name, value in vars(args).items()
              if name in RunConfig.__fields__ and value is not None}
    values.setdefault("tol", settings.ORACLE_TOL)
    values.setdefault("threshold", settings.IDENTITY_THRESHOLD)
    values.setdefault("trials", settings.IDENTITY_TRIALS)
    if "output_format" not in values:
        values["output_format"] = OutputFormat.JSON if args.command == "identities" else OutputFormat.CSV
    return RunConfig(**values)
