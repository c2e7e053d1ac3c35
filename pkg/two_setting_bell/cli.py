"""
Command-line front end.

Usage:
    python3 app.py violation --state ghz --n 3
    python3 app.py violation --state w --n 4 --seed 0
    python3 app.py sweep-alpha --n 3 --steps 50
    python3 app.py lhv-bound --n 5
    python3 app.py max-eig --n 6
    python3 app.py visibility --n 4
    python3 app.py terms --n 4

Exit codes: 0 success, 2 validation error, 3 capacity error, 1 unexpected.
Reports go to standard output, diagnostics to standard error.
"""

import argparse
import logging
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from two_setting_bell import __version__
from two_setting_bell.analysis import (
    VIOLATION_ATOL,
    LHV_BOUND,
    canonical_gghz_settings,
    canonical_violation_report,
    gghz_violation_closed,
    max_violation_report,
    optimized_violation_report,
    quantum_value,
    standard_escape_bound,
    standard_threshold_comparison,
)
from two_setting_bell.bell_operators import (
    extended_mabk_terms,
    extended_terms,
    load_sign_table,
    standard_mabk_terms,
    term_count,
    term_map_to_dict,
    wwzb_terms,
)
from two_setting_bell.config import MAX_QUBITS, OptimizerConfig, get_log_level, get_thread_count
from two_setting_bell.errors import BellToolkitError, CapacityError, ValidationError
from two_setting_bell.lhv_oracle import verify_bound
from two_setting_bell.serialization import REPORT_FIELDS, dump_csv, dump_json
from two_setting_bell.states import STATE_NAMES, generalized_ghz, named_state

logger = logging.getLogger(__name__)

COMMANDS = ("violation", "sweep-alpha", "lhv-bound", "max-eig", "visibility", "terms")
SWEEP_COLUMNS = ("alpha", "closed_form", "matrix_value", "violates", "escape_region")


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int
    state: str = "ghz"
    alpha: Optional[float] = None
    visibility: Optional[float] = None
    sign_function: str = "mabk"
    operator: str = "extended"
    output_format: str = "json"
    seed: int = 0
    starts: int = 32
    max_iterations: int = 2000
    tolerance: float = 1e-8
    optimize: bool = False
    steps: int = 50
    sharded: bool = False
    n_jobs: int = 1

    def optimizer_config(self):
        return OptimizerConfig(
            starts=self.starts,
            max_iterations=self.max_iterations,
            tolerance=self.tolerance,
            seed=self.seed,
            n_jobs=self.n_jobs,
        )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="two-setting-bell",
        description="Two-setting Bell inequalities for many qubits",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_common(sub, default_format="json"):
        sub.add_argument("--n", type=int, required=True, help="number of qubits / parties")
        sub.add_argument("--format", dest="output_format", choices=("json", "csv"), default=default_format)
        sub.add_argument(
            "--sign-file",
            dest="sign_function",
            default="mabk",
            help="file of 2^M whitespace-separated +/-1 entries (default: MABK)",
        )
        sub.add_argument("--operator", choices=("extended", "standard"), default="extended")

    violation = subparsers.add_parser("violation", help="quantum value for a named state")
    add_common(violation)
    violation.add_argument("--state", choices=STATE_NAMES, default="ghz")
    violation.add_argument("--alpha", type=float)
    violation.add_argument("--visibility", type=float)
    violation.add_argument("--optimize", action="store_true", help="search settings instead of canonical ones")
    violation.add_argument("--seed", type=int, default=0)
    violation.add_argument("--starts", type=int, default=32)
    violation.add_argument("--max-iterations", type=int, default=2000)
    violation.add_argument("--tolerance", type=float, default=1e-8)

    sweep = subparsers.add_parser("sweep-alpha", help="generalized GHZ violation over alpha")
    add_common(sweep, default_format="csv")
    sweep.add_argument("--steps", type=int, default=50)

    lhv = subparsers.add_parser("lhv-bound", help="exhaustive local-hidden-variable bound")
    add_common(lhv)
    lhv.add_argument("--sharded", action="store_true", help="allow 9..12 parties")

    max_eig = subparsers.add_parser("max-eig", help="largest |eigenvalue| at canonical settings")
    add_common(max_eig)

    visibility = subparsers.add_parser("visibility", help="noise threshold formulas")
    add_common(visibility)

    terms = subparsers.add_parser("terms", help="correlation-term expansion")
    add_common(terms)
    return parser


def parse_args(argv):
    """
    Parse and validate flags into a RunConfig.
    """
    args = build_parser().parse_args(argv)
    values = {
        "command": args.command,
        "n": args.n,
        "sign_function": args.sign_function,
        "operator": args.operator,
        "output_format": args.output_format,
        "n_jobs": get_thread_count(),
    }
    for name in ("state", "alpha", "visibility", "seed", "starts", "max_iterations",
                 "tolerance", "optimize", "steps", "sharded"):
        if hasattr(args, name):
            values[name] = getattr(args, name)
    config = RunConfig(**values)
    validate_config(config)
    return config


def validate_config(config):
    """Check every downstream precondition before computing anything."""
    if config.command in ("max-eig", "sweep-alpha") and config.operator != "extended":
        raise ValidationError(
            f"{config.command} uses the canonical settings of the extended operator"
        )
    minimum = 2 if config.operator == "standard" and config.command != "visibility" else 3
    if config.n < minimum:
        raise ValidationError(f"--n must be >= {minimum} for {config.command}, got {config.n}")
    if config.n > MAX_QUBITS:
        raise CapacityError(f"--n {config.n} exceeds the cap of {MAX_QUBITS} qubits")
    if config.command == "violation":
        if config.state == "gghz" and config.alpha is None:
            raise ValidationError("--state gghz needs --alpha")
        if config.alpha is not None and not 0 <= config.alpha <= math.pi / 2:
            raise ValidationError(f"--alpha must lie in [0, pi/2], got {config.alpha}")
        if config.state == "noisy-ghz" and config.visibility is None:
            raise ValidationError("--state noisy-ghz needs --visibility")
        if config.visibility is not None and not 0 <= config.visibility <= 1:
            raise ValidationError(f"--visibility must lie in [0, 1], got {config.visibility}")
        if config.state == "cluster4" and config.n != 4:
            raise ValidationError("--state cluster4 needs --n 4")
        config.optimizer_config()
    if config.command == "sweep-alpha" and config.steps < 2:
        raise ValidationError(f"--steps must be >= 2, got {config.steps}")


def select_terms(config):
    """TermMap for the configured sign function and operator kind."""
    if config.sign_function == "mabk":
        if config.operator == "standard":
            return standard_mabk_terms(config.n)
        return extended_mabk_terms(config.n)
    table = load_sign_table(config.sign_function)
    expected = config.n - 1 if config.operator == "extended" else config.n
    if table.num_parties != expected:
        raise ValidationError(
            f"Sign table covers {table.num_parties} parties; the {config.operator} "
            f"operator on {config.n} qubits needs {expected}"
        )
    inner = wwzb_terms(table)
    return extended_terms(inner) if config.operator == "extended" else inner


def _violation(config):
    terms = select_terms(config)
    canonical = (
        config.state in ("ghz", "gghz", "noisy-ghz")
        and config.operator == "extended"
        and not config.optimize
    )
    if canonical:
        report = canonical_violation_report(
            config.state, config.n, alpha=config.alpha, visibility=config.visibility, terms=terms
        )
    else:
        state = named_state(config.state, config.n, alpha=config.alpha, visibility=config.visibility)
        report = optimized_violation_report(state, terms, config.optimizer_config(), alpha=config.alpha)
    return [report.to_dict()], REPORT_FIELDS


def _sweep_alpha(config):
    terms = select_terms(config)
    escape = standard_escape_bound(config.n)
    # The closed form only describes the MABK polynomial.
    builtin = config.sign_function == "mabk"
    rows = []
    for alpha in np.linspace(0.0, math.pi / 2, config.steps):
        alpha = float(alpha)
        value = quantum_value(
            generalized_ghz(config.n, alpha), terms, canonical_gghz_settings(config.n, alpha)
        )
        rows.append(
            {
                "alpha": alpha,
                "closed_form": gghz_violation_closed(config.n, alpha) if builtin else None,
                "matrix_value": value,
                "violates": value > LHV_BOUND + VIOLATION_ATOL,
                "escape_region": math.sin(2 * alpha) <= escape,
            }
        )
    logger.info(f"Swept {len(rows)} alpha values for n={config.n}")
    return rows, SWEEP_COLUMNS


def _lhv_bound(config):
    report = verify_bound(select_terms(config), sharded=config.sharded, n_jobs=config.n_jobs)
    result = report.to_dict(config.n)
    return [result], tuple(result)


def _max_eig(config):
    result = max_violation_report(config.n, select_terms(config))
    return [result], tuple(result)


def _visibility(config):
    result = standard_threshold_comparison(config.n)
    return [result], tuple(result)


def _terms(config):
    terms = select_terms(config)
    result = term_map_to_dict(terms)
    result["term_count"] = term_count(terms)
    if config.sign_function == "mabk":
        result["standard_term_count"] = term_count(standard_mabk_terms(config.n))
    return [result], tuple(result)


HANDLERS = {
    "violation": _violation,
    "sweep-alpha": _sweep_alpha,
    "lhv-bound": _lhv_bound,
    "max-eig": _max_eig,
    "visibility": _visibility,
    "terms": _terms,
}


def render(rows, columns, config):
    if config.output_format == "csv":
        return dump_csv(rows, columns)
    if config.command == "sweep-alpha":
        return dump_json({"n": config.n, "rows": rows}) + "\n"
    return dump_json(rows[0]) + "\n"


def run(config):
    """
    Execute one command.

    Returns:
        {"exit_code": int, "body": report text or "", "error": message or None}
    """
    try:
        logger.info(f"Running {config.command} for n={config.n}")
        rows, columns = HANDLERS[config.command](config)
        return {"exit_code": 0, "body": render(rows, columns, config), "error": None}
    except BellToolkitError as e:
        logger.error(f"{config.command} failed: {str(e)}")
        return {"exit_code": e.exit_code, "body": "", "error": str(e)}
    except Exception as e:
        logger.error(f"Unexpected error in {config.command}: {str(e)}", exc_info=True)
        return {"exit_code": 1, "body": "", "error": str(e)}


def main(argv=None):
    logging.basicConfig(
        level=get_log_level(),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = parse_args(argv)
    except BellToolkitError as e:
        logger.error(f"Invalid configuration: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    result = run(config)
    if result["exit_code"] != 0:
        print(f"error: {result['error']}", file=sys.stderr)
        return result["exit_code"]
    sys.stdout.write(result["body"])
    return 0
