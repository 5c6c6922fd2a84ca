"""Command-line interface.

JSON results go to stdout (or ``--out``); progress and diagnostics go to
stderr through logging. Exit codes: 0 success, 1 invalid input or
failure, 2 budget exhausted (time or iteration limit).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any, NoReturn

import pandas as pd

from deleverage import __version__
from deleverage.core.config import DEFAULT_EPS, DEFAULT_TIME_LIMIT, SolverConfig, create_config
from deleverage.errors import DeleverageError, InvalidModelError
from deleverage.estimation import bucketize, fit, read_events_csv, simulate_events
from deleverage.finance.checks import diagnose, leverage_must_bind, relative_gap, validate
from deleverage.generation import GenSpec, generate
from deleverage.models.market import MarketModel
from deleverage.models.reports import SolveReport
from deleverage.models.schema import SolutionDocument, dump_instance, load_instance
from deleverage.models.types import Algorithm, SolveStatus
from deleverage.reform import reformulate
from deleverage.solvers import (
    BnbNode,
    GridSpec,
    NodeTrace,
    certify,
    grid_search,
    rho_max,
    rho_sweep,
    solve_model,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_BUDGET = 2

_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_VISIBLE_COMMANDS = "{solve,generate,estimate,check,sweep,simulate}"


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the invalid-input code."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True, slots=True)
class CliConfig:
    """Parsed command line, immutable after parsing."""

    command: str
    verbosity: int = 0
    options: MappingProxyType[str, Any] = field(default_factory=lambda: MappingProxyType({}))

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> CliConfig:
        opts = {k: v for k, v in vars(ns).items() if k not in ("command", "verbose")}
        return cls(command=ns.command, verbosity=ns.verbose, options=MappingProxyType(opts))

    def get(self, name: str, default: Any = None) -> Any:
        """Option value by its destination name."""
        return self.options.get(name, default)

    def validate(self) -> None:
        """Reject option values the parser cannot express.

        Raises:
            ValueError: On a non-positive tolerance or budget
        """
        for name in ("eps", "time_limit"):
            value = self.options.get(name)
            if value is not None and not value > 0:
                raise ValueError(f"--{name.replace('_', '-')} must be positive, got {value}")


def build_parser() -> argparse.ArgumentParser:
    """Construct the argument parser."""
    parser = _Parser(prog="deleverage", description="Optimal deleveraging under price impact.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="INFO logging; repeat for DEBUG"
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar=_VISIBLE_COMMANDS)

    def solver_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--eps", type=float, default=DEFAULT_EPS, help="optimality tolerance")
        p.add_argument(
            "--time-limit", type=float, default=DEFAULT_TIME_LIMIT, help="wall-clock budget (s)"
        )
        p.add_argument("--parallel", action="store_true", help="solve sibling nodes concurrently")

    p = sub.add_parser("solve", help="solve an instance")
    p.add_argument("instance", type=Path)
    p.add_argument("--algo", choices=[a.value for a in Algorithm], default=Algorithm.SCOBB.value)
    solver_flags(p)
    p.add_argument("--rho1", type=float, default=None, help="override the leverage bound")
    p.add_argument("--out", type=Path, default=None, help="solution file (stdout if omitted)")
    p.add_argument("--dump-trace", type=Path, default=None, help="write per-node progress CSV")
    p.add_argument("--diagnose", action="store_true", help="attach diagnostics to the solution")

    p = sub.add_parser("generate", help="generate random instances")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--rho1", type=float, default=18.0)
    p.add_argument("--l0-over-e0", type=float, default=25.0)
    p.add_argument("--out-dir", type=Path, default=Path("."))

    p = sub.add_parser("estimate", help="estimate impact matrices from trades")
    p.add_argument("trades", type=Path, help="CSV with timestamp_s,asset,signed_volume,bid_price")
    p.add_argument("--bucket-s", type=float, default=10.0)
    p.add_argument("--horizon-s", type=float, default=1200.0)
    p.add_argument("--scale", type=float, default=1.0, help="divide matrices by this on output")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--panel-out", type=Path, default=None, help="write the bucketed panel CSV")

    p = sub.add_parser("check", help="validate an instance and report its structure")
    p.add_argument("instance", type=Path)
    p.add_argument("--rho-max", action="store_true", help="compute the leverage-free bound")
    p.add_argument("--opt-val", type=float, default=None)
    p.add_argument("--obj-val", type=float, default=None)
    p.add_argument("--dump-reform", action="store_true", help="include the congruence data")
    solver_flags(p)

    p = sub.add_parser("sweep", help="solve an instance for several leverage bounds")
    p.add_argument("instance", type=Path)
    p.add_argument("--rhos", type=float, nargs="+", required=True)
    solver_flags(p)

    p = sub.add_parser("simulate", help="simulate trades from an instance's matrices")
    p.add_argument("instance", type=Path)
    p.add_argument("--horizons", type=int, default=18)
    p.add_argument("--buckets", type=int, default=120, help="buckets per horizon")
    p.add_argument("--bucket-s", type=float, default=10.0)
    p.add_argument("--volume-scale", type=float, default=100.0)
    p.add_argument("--snr", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("oracle")
    p.add_argument("instance", type=Path)
    p.add_argument("--points", type=int, default=101)

    return parser


def configure_logging(verbosity: int) -> None:
    """Route logging to stderr at a level chosen by the verbosity count."""
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(_LOG_FORMAT))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level)


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text + "\n")
    else:
        out.write_text(text + "\n")


def _load(path: Path) -> MarketModel:
    return load_instance(path.read_text(), source=str(path))


def _solver_config(cfg: CliConfig) -> SolverConfig:
    return create_config(
        eps=cfg.get("eps", DEFAULT_EPS),
        time_limit=cfg.get("time_limit", DEFAULT_TIME_LIMIT),
        parallel=cfg.get("parallel", False),
    )


def _exit_code(report: SolveReport) -> int:
    if report.status in (SolveStatus.EPS_OPTIMAL, SolveStatus.CONVERGED):
        return EXIT_OK
    return EXIT_BUDGET


def cmd_solve(cfg: CliConfig) -> int:
    """Solve an instance and write the solution document."""
    model = _load(cfg.get("instance"))
    if cfg.get("rho1") is not None:
        model = model.with_rho1(cfg.get("rho1"))
    algorithm = Algorithm(cfg.get("algo"))

    traces: list[dict[str, Any]] = []
    kwargs: dict[str, Any] = {"config": _solver_config(cfg)}
    if cfg.get("dump_trace") is not None and algorithm is Algorithm.SCOBB:

        def on_trace(trace: NodeTrace) -> None:
            traces.append({"kind": "iteration", **trace.to_dict()})

        def on_node(node: BnbNode) -> None:
            traces.append({"kind": "node", "lower_bound": node.lower_bound, "depth": node.depth})

        kwargs["on_trace"] = on_trace
        kwargs["on_node"] = on_node

    report = solve_model(model, algorithm, **kwargs)
    document = SolutionDocument.model_validate(report.to_dict())
    if cfg.get("diagnose"):
        document.diagnostics = {
            **diagnose(model, report.y_star).to_dict(),
            "certified": certify(report, model),
        }
    _write(document.model_dump_json(indent=2), cfg.get("out"))

    if cfg.get("dump_trace") is not None:
        if algorithm is Algorithm.SCO:
            traces = [
                {"kind": "sco", "iteration": k, "f_hat": v}
                for k, v in enumerate(report.f_hat_trace)
            ]
        pd.DataFrame(traces).to_csv(cfg.get("dump_trace"), index=False)

    logger.info("Solved with status %s, equity %.10g", report.status.value, report.equity)
    return _exit_code(report)


def cmd_generate(cfg: CliConfig) -> int:
    """Write ``inst_<seed>_<k>.json`` instances."""
    spec = GenSpec(
        m=cfg.get("m"),
        s=cfg.get("s"),
        q=cfg.get("q"),
        rho1=cfg.get("rho1"),
        l0_over_e0=cfg.get("l0_over_e0"),
        seed=cfg.get("seed"),
    )
    out_dir: Path = cfg.get("out_dir")
    out_dir.mkdir(parents=True, exist_ok=True)
    for k in range(cfg.get("count")):
        model = generate(spec, index=k)
        name = f"inst_{spec.seed}_{k}"
        (out_dir / f"{name}.json").write_text(dump_instance(model, name=name) + "\n")
        logger.info("Wrote %s", name)
    return EXIT_OK


def cmd_estimate(cfg: CliConfig) -> int:
    """Estimate impact matrices from a trades CSV."""
    panel = bucketize(read_events_csv(cfg.get("trades")), cfg.get("bucket_s"), cfg.get("horizon_s"))
    if cfg.get("panel_out") is not None:
        panel.to_frame().to_csv(cfg.get("panel_out"), index=False)
    estimate = fit(panel)
    document = estimate.to_document(scale=cfg.get("scale"))
    _write(document.model_dump_json(by_alias=True, indent=2), cfg.get("out"))
    return EXIT_OK


def cmd_check(cfg: CliConfig) -> int:
    """Print validation results and reformulation structure."""
    model = _load(cfg.get("instance"))
    outcome = validate(model)
    result: dict[str, Any] = {
        "validation": outcome.to_dict(),
        "leverage_must_bind": leverage_must_bind(model),
    }
    reform = reformulate(model)
    result.update({"s": reform.s, "q": reform.q, "r": reform.r, "cond_d": reform.cond})
    if cfg.get("dump_reform"):
        result["reform"] = reform.summary()
    if cfg.get("rho_max") and outcome.ok:
        result["rho_max"] = rho_max(model, config=_solver_config(cfg))
    if cfg.get("opt_val") is not None and cfg.get("obj_val") is not None:
        result["relative_gap"] = relative_gap(cfg.get("opt_val"), cfg.get("obj_val"))
    _write(json.dumps(result, indent=2), None)
    return EXIT_OK if outcome.ok else EXIT_INVALID


def cmd_sweep(cfg: CliConfig) -> int:
    """Solve for every requested leverage bound, one JSON line each."""
    model = _load(cfg.get("instance"))
    code = EXIT_OK
    for rho, report in rho_sweep(model, cfg.get("rhos"), config=_solver_config(cfg)):
        row = {"rho1": rho, **report.to_dict()}
        _write(json.dumps(row), None)
        code = max(code, _exit_code(report))
    return code


def cmd_simulate(cfg: CliConfig) -> int:
    """Simulate a trades CSV from an instance's impact matrices."""
    model = _load(cfg.get("instance"))
    events = simulate_events(
        model.temp_impact,
        model.perm_impact,
        horizons=cfg.get("horizons"),
        buckets_per_horizon=cfg.get("buckets"),
        bucket_seconds=cfg.get("bucket_s"),
        start_prices=model.p0,
        volume_scale=cfg.get("volume_scale"),
        snr=cfg.get("snr"),
        seed=cfg.get("seed"),
    )
    out = cfg.get("out")
    events.to_csv(sys.stdout if out is None else out, index=False)
    return EXIT_OK


def cmd_oracle(cfg: CliConfig) -> int:
    """Grid-search an instance (debugging aid)."""
    model = _load(cfg.get("instance"))
    y, value = grid_search(model, GridSpec(points_per_dim=cfg.get("points")))
    _write(json.dumps({"y": y.to_list(), "equity": value}), None)
    return EXIT_OK


COMMANDS: dict[str, Callable[[CliConfig], int]] = {
    "solve": cmd_solve,
    "generate": cmd_generate,
    "estimate": cmd_estimate,
    "check": cmd_check,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the ``deleverage`` console script."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = CliConfig.from_namespace(ns)
    configure_logging(cfg.verbosity)

    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except InvalidModelError as e:
        logger.error("Invalid instance: %s", e)
    except DeleverageError as e:
        logger.error("%s: %s", type(e).__name__, e)
    except (OSError, ValueError) as e:
        logger.error("%s", e)
    return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
