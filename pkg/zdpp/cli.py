# Copyright (c) 2025, HUMMBL, LLC
#
# Licensed under the Business Source License 1.1 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://github.com/hummbl-dev/engine-ops/blob/main/LICENSE
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
# Change Date: 2029-01-01
# Change License: Apache License, Version 2.0

"""
zdpp command line

Usage:
    zdpp eval kernel_k --z 1.2 --zp 1.8 --grid 0.05:0.95:10
    zdpp eval rho1 --z 0.3,0.4 --x 0.1
    zdpp eval fb --a 0.2,0.3 --b 0.5,0.65 --c 1.7 --y=-0.3,-0.4 --method mellin_barnes
    zdpp verify characters --nmax 8
    zdpp verify all --z 1.2 --zp 1.8 --audit run.json
    zdpp info --z 0.3,0.4
    zdpp info --z=-0.5,2

Values starting with '-' must be attached with '=', as in --z=-0.5,2 or
--y=-0.3,-0.4; otherwise argparse reads them as options.

Exit codes: 0 success, 1 a verification check failed, 2 bad configuration,
3 numeric failure.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence
import argparse
import sys
import uuid

from joblib import Parallel, delayed
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from .config import CliConfig, GridSpec, OutputFormat, Settings, load_settings, resolve_workers
from .correlation import rho_1, rho_n_fb, rho_n_integral
from .errors import ConfigError, ZdppError
from .lauricella import ROUTES, fb_evaluate
from .lifted_kernel import (
    asympt_kernel_k,
    kernel_m,
    lifted_rho_1_by_lifting,
    lifted_rho_n,
    whittaker_kernel,
)
from .monitoring import get_metrics
from .params import CorrelationQuery, EvalResult, FBParams, KernelPoint, Method, ZParams
from .telemetry import EventType, TelemetryCollector
from .utils import report_rows, write_audit, write_rows
from .verify_harness import SUITES, VerificationHarness

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2

KINDS = ("rho1", "rho_n", "kernel_k", "kernel_m", "lifted_rho", "asympt_k", "fb")

KIND_METHODS: Dict[str, Sequence[str]] = {
    "rho1": ("auto", "fb", "integral"),
    "rho_n": ("auto", "fb", "integral"),
    "kernel_k": ("auto", "integral", "kummer"),
    "kernel_m": ("auto",),
    "lifted_rho": ("auto", "lift"),
    "asympt_k": ("auto",),
    "fb": ("auto",) + ROUTES,
}

# Tolerance keys each suite reads; --tol overrides all of them.
SUITE_TOLERANCES: Dict[str, Sequence[str]] = {
    "characters": ("characters",),
    "normalization": ("normalization",),
    "moments": ("moments",),
    "fb_routes": ("fb_routes",),
    "kernel_routes": ("kernel_routes",),
    "lifting": ("lifting", "lifting_pd"),
    "asymptotics": ("asymptotics_slope", "k_at_one"),
    "convergence": ("convergence",),
}

Row = Dict[str, Any]


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zdpp", description="Correlation functions and kernels of z-measure point processes"
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML file overriding the numeric defaults")
    common.add_argument("--verbose", action="store_true", help="Echo structured logs to stderr")
    common.add_argument("--metrics", action="store_true", help="Print Prometheus metrics to stderr")
    common.add_argument("--audit", type=Path, help="Write the run's audit report as JSON")
    common.add_argument(
        "--z",
        default="1.2",
        help="z as 're,im' or a real number; write --z=-0.5,2 when it starts with '-'",
    )
    common.add_argument(
        "--zp",
        default=None,
        help="z' as 're,im', default conj(z); write --zp=-0.5,-2 when it starts with '-'",
    )
    common.add_argument(
        "--unchecked", action="store_true", help="Accept parameters outside the admissible set"
    )
    common.add_argument("--workers", type=int, default=None, help="Parallel workers")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default="csv")
    common.add_argument("--output", type=Path, help="Output file (default stdout)")
    common.add_argument("--seed", type=int, default=0)

    sub = parser.add_subparsers(dest="subcommand", required=True)

    ev = sub.add_parser("eval", parents=[common], help="Evaluate a quantity on a grid")
    ev.add_argument("kind", choices=KINDS)
    grid = ev.add_mutually_exclusive_group()
    grid.add_argument("--grid", help="Linear grid start:stop:count")
    grid.add_argument("--grid-log", help="Logarithmic grid start:stop:count")
    ev.add_argument(
        "--x",
        type=_float_list,
        default=[],
        help="Points, comma-separated; write --x=-0.5,0.2 when negative",
    )
    ev.add_argument(
        "--y",
        type=_float_list,
        default=[],
        help="Second coordinates or F_B arguments; write --y=-0.3,-0.4 when negative",
    )
    ev.add_argument(
        "--a",
        type=_float_list,
        default=[],
        help="F_B parameters a; write --a=-0.2,0.3 when negative",
    )
    ev.add_argument(
        "--b",
        type=_float_list,
        default=[],
        help="F_B parameters b; write --b=-0.2,0.3 when negative",
    )
    ev.add_argument("--c", type=float, default=None, help="F_B parameter c")
    ev.add_argument("--method", default="auto", help="Force an evaluation route")

    ver = sub.add_parser("verify", parents=[common], help="Run verification suites")
    ver.add_argument("suite", choices=list(SUITES) + ["all"])
    ver.add_argument("--nmax", type=int, help="Largest n for the character suite")
    ver.add_argument("--n", type=int, help="Largest n for the normalization suite")
    ver.add_argument("--tol", type=float, help="Override the suite tolerance")

    sub.add_parser("info", parents=[common], help="Show parameters and resolved settings")
    return parser


def _settings_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if args.subcommand != "verify":
        return overrides
    harness: Dict[str, Any] = {}
    if args.nmax is not None:
        harness["nmax_characters"] = args.nmax
    if args.n is not None:
        harness["n_normalization"] = args.n
    if harness:
        overrides["harness"] = harness
    if args.tol is not None:
        suites = list(SUITES) if args.suite == "all" else [args.suite]
        overrides["tolerances"] = {
            key: args.tol for suite in suites for key in SUITE_TOLERANCES[suite]
        }
    return overrides


def build_config(args: argparse.Namespace) -> CliConfig:
    """Merge defaults, the --config file and flags into one validated config."""
    settings = load_settings(args.config, _settings_overrides(args))
    fields: Dict[str, Any] = {
        "subcommand": args.subcommand,
        "z": args.z,
        "zprime": args.zp,
        "output_format": args.format,
        "output": args.output,
        "audit": args.audit,
        "seed": args.seed,
        "workers": resolve_workers(args.workers),
        "unchecked": args.unchecked,
        "settings": settings,
    }
    if args.subcommand == "eval":
        if args.method not in KIND_METHODS[args.kind]:
            raise ConfigError(
                f"method {args.method!r} not available for {args.kind}; "
                f"choose from {', '.join(KIND_METHODS[args.kind])}"
            )
        grid = None
        if args.grid:
            grid = GridSpec.parse(args.grid)
        elif args.grid_log:
            grid = GridSpec.parse(args.grid_log, log=True)
        fields.update(
            kind=args.kind,
            grid=grid,
            x=args.x,
            y=args.y,
            fb_a=args.a,
            fb_b=args.b,
            fb_c=args.c,
            method=args.method,
        )
    elif args.subcommand == "verify":
        fields.update(suite=args.suite, n=args.n, nmax=args.nmax, tol=args.tol)
    try:
        return CliConfig(**fields)
    except ValidationError as e:
        raise ConfigError(f"invalid arguments: {e}") from e


def make_params(cfg: CliConfig) -> ZParams:
    return ZParams.create(cfg.z_complex, cfg.zprime_complex, unchecked=cfg.unchecked)


# Row evaluators. Module level so joblib can ship them to worker processes.


def _result_row(coords: Row, result: EvalResult, with_imag: bool = False) -> Row:
    row = dict(coords)
    row["value"] = result.value.real
    if with_imag:
        row["value_im"] = result.value.imag
    row["abs_err"] = result.abs_err
    row["method"] = result.detail or result.method.value
    return row


def _plain_row(coords: Row, value: float, method: str) -> Row:
    return {**coords, "value": value, "abs_err": 0.0, "method": method}


def _rho_row(params: ZParams, x: Sequence[float], method: str, settings: Settings) -> Row:
    coords = {"x": x[0]} if len(x) == 1 else {f"x{i + 1}": v for i, v in enumerate(x)}
    if method == "integral":
        result = rho_n_integral(CorrelationQuery(params, tuple(x)), settings.quadrature)
    elif method == "fb" or len(x) > 1:
        result = rho_n_fb(
            CorrelationQuery(params, tuple(x)),
            series=settings.series,
            quad=settings.quadrature,
            contour=settings.contour,
        )
    else:
        result = rho_1(params, x[0], settings.series, settings.quadrature, settings.contour)
    return _result_row(coords, result)


def _kernel_k_row(params: ZParams, x: float, y: float, method: str) -> Row:
    value = whittaker_kernel(params, KernelPoint(x, y), route=method)
    return _plain_row({"x": x, "y": y}, value, Method.CLOSED_FORM.value)


def _kernel_m_row(params: ZParams, x: float, y: float, settings: Settings) -> Row:
    result = kernel_m(params, KernelPoint(x, y), settings.quadrature)
    return _result_row({"x": x, "y": y}, result, with_imag=True)


def _lifted_row(params: ZParams, x: float, method: str, settings: Settings) -> Row:
    if method == "lift":
        return _result_row({"x": x}, lifted_rho_1_by_lifting(params, x, settings.quadrature))
    return _plain_row({"x": x}, lifted_rho_n(params, [x]), Method.DETERMINANT.value)


def _asympt_row(params: ZParams, ratio: float) -> Row:
    return _plain_row({"x": ratio}, asympt_kernel_k(params, ratio), Method.CLOSED_FORM.value)


def _points(cfg: CliConfig) -> List[float]:
    if cfg.x:
        return list(cfg.x)
    if cfg.grid is not None:
        return cfg.grid.points()
    raise ConfigError(f"eval {cfg.kind} needs --grid, --grid-log or --x")


def _tasks(cfg: CliConfig, params: ZParams) -> List[Any]:
    """One deferred call per output row, in output order."""
    settings = cfg.settings
    kind, method = cfg.kind, cfg.method

    if kind == "fb":
        if cfg.fb_c is None or not cfg.fb_a or not cfg.y:
            raise ConfigError("eval fb needs --a, --b, --c and --y")
        p = FBParams(tuple(cfg.fb_a), tuple(cfg.fb_b), cfg.fb_c)
        return [delayed(_fb_row)(p, tuple(cfg.y), method, settings)]

    if kind == "rho_n":
        if not cfg.x:
            raise ConfigError("eval rho_n needs the points in --x")
        return [delayed(_rho_row)(params, list(cfg.x), method, settings)]

    if kind == "lifted_rho" and len(cfg.x) > 1:
        return [delayed(_lifted_n_row)(params, list(cfg.x))]

    xs = _points(cfg)
    if kind in ("kernel_k", "kernel_m"):
        ys = list(cfg.y) if cfg.y else xs
        if kind == "kernel_k":
            return [delayed(_kernel_k_row)(params, x, y, method) for x in xs for y in ys]
        return [delayed(_kernel_m_row)(params, x, y, settings) for x in xs for y in ys]
    if kind == "rho1":
        return [delayed(_rho_row)(params, [x], method, settings) for x in xs]
    if kind == "lifted_rho":
        return [delayed(_lifted_row)(params, x, method, settings) for x in xs]
    return [delayed(_asympt_row)(params, x) for x in xs]


def _fb_row(p: FBParams, y: Sequence[float], route: str, settings: Settings) -> Row:
    result = fb_evaluate(
        p,
        y,
        route=route,
        series=settings.series,
        quad=settings.quadrature,
        contour=settings.contour,
    )
    coords = {f"y{i + 1}": v for i, v in enumerate(y)}
    return _result_row(coords, result, with_imag=True)


def _lifted_n_row(params: ZParams, x: Sequence[float]) -> Row:
    coords = {f"x{i + 1}": v for i, v in enumerate(x)}
    return _plain_row(coords, lifted_rho_n(params, x), Method.DETERMINANT.value)


# Commands


def cmd_eval(
    cfg: CliConfig, params: ZParams, telemetry: TelemetryCollector, trace_id: str
) -> int:
    """Evaluate one quantity on the requested points and write the table."""
    tasks = _tasks(cfg, params)
    telemetry.record_event(
        EventType.ROUTE_START,
        trace_id,
        operation=cfg.kind,
        method=cfg.method,
        rows=len(tasks),
        params=params.describe(),
    )
    rows = Parallel(n_jobs=min(cfg.workers, len(tasks)))(tasks)
    telemetry.record_event(EventType.ROUTE_COMPLETE, trace_id, operation=cfg.kind, rows=len(rows))
    write_rows(rows, cfg.output_format, cfg.output, sys.stdout)
    return EXIT_OK


def cmd_verify(
    cfg: CliConfig, params: ZParams, telemetry: TelemetryCollector, trace_id: str
) -> int:
    """Run a verification suite; exit 1 when any check fails."""
    harness = VerificationHarness(params, cfg.settings, trace_id, telemetry, cfg.workers)
    reports = harness.run(cfg.suite or "all")
    write_rows(report_rows(reports), cfg.output_format, cfg.output, sys.stdout)
    failed = [r for r in reports if not r.passed]
    if failed:
        telemetry.error(
            f"{len(failed)} of {len(reports)} checks failed",
            trace_id=trace_id,
            operation="verify",
            failed=[f"{r.check}:{r.name}" for r in failed],
        )
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_info(
    cfg: CliConfig, params: ZParams, telemetry: TelemetryCollector, trace_id: str
) -> int:
    """Print the parameter classification and resolved settings."""
    table = Table(title="zdpp configuration")
    table.add_column("Key", style="cyan")
    table.add_column("Value")
    for key, value in params.describe().items():
        table.add_row(key, str(value))
    table.add_row("workers", str(cfg.workers))
    table.add_row("seed", str(cfg.seed))
    for section, values in cfg.settings.model_dump().items():
        for key, value in values.items():
            table.add_row(f"{section}.{key}", str(value))
    Console().print(table)
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "info": cmd_info}


def _report_error(e: Exception) -> None:
    Console(stderr=True).print(f"[bold red]Error:[/bold red] {e}", highlight=False)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    telemetry = TelemetryCollector(enable_console_output=args.verbose)
    trace_id = str(uuid.uuid4())

    try:
        cfg = build_config(args)
        params = make_params(cfg)
    except ZdppError as e:
        _report_error(e)
        return EXIT_CONFIG

    telemetry.info(
        f"zdpp {cfg.subcommand}",
        trace_id=trace_id,
        operation=cfg.subcommand,
        kind=cfg.kind,
        suite=cfg.suite,
        seed=cfg.seed,
        workers=cfg.workers,
    )
    try:
        code = COMMANDS[cfg.subcommand](cfg, params, telemetry, trace_id)
    except ZdppError as e:
        telemetry.error(str(e), trace_id=trace_id, operation=e.operation or cfg.subcommand)
        _report_error(e)
        code = e.exit_code
    finally:
        if args.audit is not None:
            telemetry.record_event(EventType.AUDIT, trace_id, path=str(args.audit))
            write_audit(telemetry.generate_audit_report(trace_id), args.audit)
        if args.metrics:
            sys.stderr.write(get_metrics())
    return code


if __name__ == "__main__":
    sys.exit(main())
