"""Benchmark and demonstrator CLI.

Subcommands:

* ``stress-bench`` - time the scripted stress laws against the native law
  across transfer strategies and field sizes, with correctness norms per row;
* ``heat`` - run the steady heat solve with the native and the scripted
  step, dumping fields, residual histories and the centre-line profile;
* ``bc-demo`` - evaluate the scripted boundary profile on a patch and
  compare it pointwise against the host-side reference expression.

Timing uses a monotonic clock and the median of ``--repeats`` runs after
``--warmup`` discarded runs. Session open and script load are excluded from
every timed region and reported separately as startup cost. A failed or
timed-out row is recorded and the remaining rows still run.

Exit codes: 0 success, 2 non-convergence, 3 guest error, 4 invalid config.
"""

from __future__ import annotations

import argparse
import csv
import statistics
import sys
import time
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import numpy as np

from . import bridge, heat, hooke, snippets
from .bridge import GuestError, TransferStrategy
from .fields import PATCH_NAMES, error_norms, make_grid, write_field_csv
from .hooke import LawKind

EXIT_OK = 0
EXIT_NONCONVERGED = 2
EXIT_GUEST_ERROR = 3
EXIT_INVALID_CONFIG = 4

REPORT_COLUMNS = ("case", "law", "strategy", "size", "time_s", "ratio", "l2_mean", "linf", "status")

DEFAULT_SIZES = (1000, 400000)

# Defaults for the heat case: 20x20 cells over 0.1 m x 0.1 m, diffusivity
# 4e-5 m^2/s; dt = 0.15 s puts gamma at 0.24, just inside the stability bound.
HEAT_DEFAULTS = dict(nx=20, ny=20, lx=0.1, ly=0.1, diffusivity=4e-5, dt=0.15,
                     tol=1e-8, max_iters=1_000_000)
HEAT_BC_DEFAULTS = {"left": 273.0, "bottom": 273.0, "right": 273.0, "top": 373.0}

# Material for the stress case: E = 200 GPa, nu = 0.3.
DEFAULT_MATERIAL = hooke.lame_from_engineering(200e9, 0.3)


@dataclass
class BenchSpec:
    """Configuration of one stress-bench invocation."""

    strategies: list[TransferStrategy]
    sizes: list[int]
    laws: list[LawKind]
    repeats: int = 5
    warmup: int = 1
    seed: int = 42
    script: Path | None = None        # analytic-law script override
    nn_script: Path | None = None     # NN-law script override
    weights: Path | None = None       # weight bundle JSON; built on the fly if absent
    timeout_s: float = 300.0          # per-row wall-clock budget
    out_dir: Path = Path("bench-out")
    fmt: str = "csv"

    def __post_init__(self) -> None:
        if self.repeats < 3:
            raise ValueError("timing requires repeats >= 3")
        if self.warmup < 1:
            raise ValueError("timing requires warmup >= 1")
        if any(n < 0 for n in self.sizes):
            raise ValueError("sizes must be non-negative")
        if LawKind.NATIVE_HOOKE in self.laws:
            raise ValueError("the native law is always measured as the baseline")


@dataclass
class BenchRow:
    case: str
    law: str
    strategy: str
    size: int
    time_s: float | None
    ratio: float | None
    l2_mean: float | None
    linf: float | None
    status: str = "ok"


@dataclass
class BenchReport:
    rows: list[BenchRow] = dataclass_field(default_factory=list)
    startup_s: dict[str, float] = dataclass_field(default_factory=dict)


def median_time(fn, repeats: int, warmup: int) -> float:
    """Median wall time of ``fn()`` over ``repeats`` runs after ``warmup`` runs."""
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def cmd_stress_bench(spec: BenchSpec) -> BenchReport:
    """Run every (law, strategy, size) row and return the report.

    The native law is timed once per size in the same process and anchors
    the ratio column. Row failures (guest errors, timeouts) are recorded in
    the row status and do not abort the benchmark.
    """
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    report = BenchReport()

    start = time.perf_counter()
    session = bridge.open_session()
    report.startup_s["session"] = time.perf_counter() - start

    try:
        strains = {n: hooke.synth_strain_field(n, seed=spec.seed) for n in spec.sizes}
        native_results = {n: hooke.hooke_native(strains[n], DEFAULT_MATERIAL) for n in spec.sizes}
        native_times = {}
        for n in spec.sizes:
            native_times[n] = median_time(
                lambda n=n: hooke.hooke_native(strains[n], DEFAULT_MATERIAL),
                spec.repeats, spec.warmup,
            )
            report.rows.append(BenchRow(
                case="stress", law="native", strategy="native", size=n,
                time_s=native_times[n], ratio=1.0, l2_mean=0.0, linf=0.0,
            ))

        for law in spec.laws:
            start = time.perf_counter()
            _load_law(session, law, spec)
            report.startup_s[law.value] = time.perf_counter() - start
            for n in spec.sizes:
                for strategy in spec.strategies:
                    report.rows.append(_run_row(
                        session, law, strategy, strains[n],
                        native_results[n], native_times[n], spec,
                    ))
    finally:
        bridge.close_session(session)
    return report


def _load_law(session: bridge.Session, law: LawKind, spec: BenchSpec) -> None:
    """(Re)load one law's guest definitions; called outside every timed region."""
    if law is LawKind.SCRIPTED_ANALYTIC:
        bridge.set_scalar(session, "lame_1", DEFAULT_MATERIAL.lam)
        bridge.set_scalar(session, "lame_2", DEFAULT_MATERIAL.mu)
        bridge.load_script(session, spec.script or snippets.INLINE_ANALYTIC_LAW)
    elif law is LawKind.SCRIPTED_ARRAY_NN:
        weights_path = spec.weights
        if weights_path is None:
            weights_path = spec.out_dir / "nn_weights.json"
            hooke.save_weights(hooke.build_exact_nn_weights(DEFAULT_MATERIAL), weights_path)
        bridge.exec_statement(session, f"weights_path = {str(weights_path)!r}")
        bridge.load_script(session, spec.nn_script or snippets.INLINE_NN_LAW)
    else:
        raise ValueError(f"not a scripted law: {law}")


def _run_row(session, law, strategy, strain, native_result, native_time, spec) -> BenchRow:
    row = BenchRow(case="stress", law=law.value, strategy=strategy.value,
                   size=strain.n_elements, time_s=None, ratio=None,
                   l2_mean=None, linf=None)
    deadline = time.perf_counter() + spec.timeout_s

    def run_once():
        budget = deadline - time.perf_counter()
        if budget <= 0.0:
            raise TimeoutError("row budget exhausted")
        return hooke.scripted_stress(session, strain, strategy, law, budget_s=budget)

    try:
        result = run_once()                      # warmup #1, reused for the norms
        for _ in range(spec.warmup - 1):
            run_once()
        samples = []
        for _ in range(spec.repeats):
            start = time.perf_counter()
            run_once()
            samples.append(time.perf_counter() - start)
    except TimeoutError:
        row.status = "timeout"
        print(f"row {law.value}/{strategy.value}/n={strain.n_elements}: "
              f"timed out after {spec.timeout_s:.3g} s", file=sys.stderr)
        return row
    except GuestError as err:
        row.status = "failed"
        print(f"row {law.value}/{strategy.value}/n={strain.n_elements}: {err}", file=sys.stderr)
        return row

    norms = error_norms(result, native_result)
    row.time_s = statistics.median(samples)
    row.ratio = row.time_s / native_time
    row.l2_mean = norms.l2_mean
    row.linf = norms.linf
    return row


def emit_report(report: BenchReport, fmt: str, path: str | Path) -> Path:
    """Write the report table; returns the written path.

    Columns are always case, law, strategy, size, time_s, ratio, l2_mean,
    linf, status. Numeric cells of failed rows stay empty. Startup costs go
    to a sibling ``*_startup.csv``.
    """
    if not report.rows:
        raise ValueError("refusing to write an empty report")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [_row_cells(row) for row in report.rows]
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(REPORT_COLUMNS)
            writer.writerows(rows)
    elif fmt == "markdown":
        with path.open("w") as fh:
            fh.write("| " + " | ".join(REPORT_COLUMNS) + " |\n")
            fh.write("|" + "|".join(" --- " for _ in REPORT_COLUMNS) + "|\n")
            for cells in rows:
                fh.write("| " + " | ".join(cells) + " |\n")
    else:
        raise ValueError(f"unknown report format {fmt!r}")

    if report.startup_s:
        startup_path = path.with_name(path.stem + "_startup.csv")
        with startup_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["stage", "time_s"])
            for stage, seconds in report.startup_s.items():
                writer.writerow([stage, f"{seconds:.17g}"])
    return path


def _row_cells(row: BenchRow) -> list[str]:
    def num(v):
        return "" if v is None else f"{v:.17g}"

    return [row.case, row.law, row.strategy, str(row.size),
            num(row.time_s), num(row.ratio), num(row.l2_mean), num(row.linf), row.status]


def parse_report_csv(path: str | Path) -> list[BenchRow]:
    rows = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != REPORT_COLUMNS:
            raise ValueError(f"unexpected report header: {header}")
        for cells in reader:
            def num(v):
                return None if v == "" else float(v)

            rows.append(BenchRow(
                case=cells[0], law=cells[1], strategy=cells[2], size=int(cells[3]),
                time_s=num(cells[4]), ratio=num(cells[5]),
                l2_mean=num(cells[6]), linf=num(cells[7]), status=cells[8],
            ))
    return rows


def cmd_heat(args: argparse.Namespace) -> int:
    """Native and scripted heat solves with field/residual/centre-line dumps."""
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = make_grid(args.nx, args.ny, args.lx, args.ly)
    bc = dict(HEAT_BC_DEFAULTS)
    bc.update(_parse_bc(args.bc))

    base = dict(grid=grid, diffusivity=args.diffusivity, dt=args.dt, bc=bc,
                tol=args.tol, max_iters=args.max_iters)
    native_report = heat.solve_steady(heat.HeatConfig(**base))

    strategy = TransferStrategy.from_name(args.strategy)
    script = Path(args.script) if args.script else snippets.INLINE_HEAT_STEP
    try:
        with bridge.open_session() as session:
            scripted_report = heat.solve_steady(
                heat.HeatConfig(**base, step_impl=heat.ScriptedStep(strategy, script)),
                session,
            )
    except GuestError as err:
        print(f"guest error: {err}", file=sys.stderr)
        return EXIT_GUEST_ERROR

    write_field_csv(native_report.T, out_dir / "heat_native_field.csv")
    write_field_csv(scripted_report.T, out_dir / "heat_scripted_field.csv")
    _write_residuals(native_report, out_dir / "heat_native_residuals.csv")
    _write_residuals(scripted_report, out_dir / "heat_scripted_residuals.csv")

    y, native_line = heat.centre_line_profile(native_report.T, grid)
    _, scripted_line = heat.centre_line_profile(scripted_report.T, grid)
    with (out_dir / "heat_centre_line.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y", "T_native", "T_scripted"])
        for yi, tn, ts in zip(y, native_line, scripted_line):
            writer.writerow([f"{yi:.17g}", f"{tn:.17g}", f"{ts:.17g}"])

    norms = error_norms(scripted_report.T, native_report.T)
    with (out_dir / "heat_error_norms.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["l2_mean", "linf"])
        writer.writerow([f"{norms.l2_mean:.17g}", f"{norms.linf:.17g}"])
    print(f"native:   iterations={native_report.iterations} "
          f"converged={native_report.converged} "
          f"centre={heat.centre_cell_value(native_report.T, grid):.4f} K")
    print(f"scripted: iterations={scripted_report.iterations} "
          f"converged={scripted_report.converged} strategy={strategy.value}")
    print(f"scripted vs native: linf={norms.linf:.3e} K, l2_mean={norms.l2_mean:.3e} K")
    if not (native_report.converged and scripted_report.converged):
        return EXIT_NONCONVERGED
    return EXIT_OK


def _write_residuals(report: heat.SolveReport, path: Path) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "residual"])
        for i, r in enumerate(report.residual_history, start=1):
            writer.writerow([i, f"{r:.17g}"])


def cmd_bc_demo(args: argparse.Namespace) -> int:
    """Scripted profile vs host reference on the top patch at each requested time."""
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = make_grid(args.nx, args.nx, args.lx, args.lx)
    faces = grid.patches["top"]
    x = faces.data[:, 0]
    times = args.time if args.time else [0.0, 0.5, 1.0]

    worst = 0.0
    try:
        with bridge.open_session() as session:
            bridge.load_script(session, Path(args.script) if args.script
                               else snippets.INLINE_PROFILE)
            for t in times:
                guest = heat.eval_scripted_profile(session, faces, t)
                host = heat.profile_reference(x, t)
                diff = np.abs(guest.data[:, 0] - host)
                worst = max(worst, float(diff.max()) if diff.size else 0.0)
                with (out_dir / f"bc_profile_t{t:g}.csv").open("w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["x", "u_x_guest", "u_x_host", "abs_diff"])
                    for xi, gi, hi, di in zip(x, guest.data[:, 0], host, diff):
                        writer.writerow([f"{v:.17g}" for v in (xi, gi, hi, di)])
    except GuestError as err:
        print(f"guest error: {err}", file=sys.stderr)
        return EXIT_GUEST_ERROR

    print(f"max |guest - host| over {len(times)} times x {len(x)} faces: {worst:.3e}")
    return EXIT_OK


def _parse_bc(entries: list[str]) -> dict[str, float]:
    bc = {}
    for entry in entries:
        patch, _, value = entry.partition("=")
        if patch not in PATCH_NAMES or not value:
            raise ValueError(f"--bc expects <patch>=<K> with patch in {PATCH_NAMES}, got {entry!r}")
        bc[patch] = float(value)
    return bc


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with the invalid-config code instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID_CONFIG)


def _build_parser() -> _Parser:
    parser = _Parser(prog="fieldbridge", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    stress = sub.add_parser("stress-bench", help="strategy/law timing and equivalence report")
    stress.add_argument("--law", action="append", choices=["analytic", "nn"],
                        help="scripted law to benchmark (repeatable; default both)")
    stress.add_argument("--strategy", action="append",
                        choices=[s.value for s in TransferStrategy],
                        help="transfer strategy (repeatable; default all three)")
    stress.add_argument("--size", action="append", type=int,
                        help=f"field sizes (repeatable; default {list(DEFAULT_SIZES)})")
    stress.add_argument("--repeats", type=int, default=5)
    stress.add_argument("--warmup", type=int, default=1)
    stress.add_argument("--seed", type=int, default=42)
    stress.add_argument("--script", help="analytic-law script path (default: built-in)")
    stress.add_argument("--nn-script", help="NN-law script path (default: built-in)")
    stress.add_argument("--weights", help="weight bundle JSON (default: constructed on the fly)")
    stress.add_argument("--timeout-s", type=float, default=300.0)
    stress.add_argument("--out", default="bench-out")
    stress.add_argument("--format", choices=["csv", "markdown"], default="csv")

    heat_p = sub.add_parser("heat", help="steady heat solve, native vs scripted step")
    heat_p.add_argument("--nx", type=int, default=HEAT_DEFAULTS["nx"])
    heat_p.add_argument("--ny", type=int, default=HEAT_DEFAULTS["ny"])
    heat_p.add_argument("--lx", type=float, default=HEAT_DEFAULTS["lx"])
    heat_p.add_argument("--ly", type=float, default=HEAT_DEFAULTS["ly"])
    heat_p.add_argument("--diffusivity", type=float, default=HEAT_DEFAULTS["diffusivity"],
                        help="m^2/s")
    heat_p.add_argument("--dt", type=float, default=HEAT_DEFAULTS["dt"], help="s")
    heat_p.add_argument("--tol", type=float, default=HEAT_DEFAULTS["tol"], help="K")
    heat_p.add_argument("--max-iters", type=int, default=HEAT_DEFAULTS["max_iters"])
    heat_p.add_argument("--bc", action="append", default=[], metavar="PATCH=K",
                        help=f"Dirichlet value per patch (default {HEAT_BC_DEFAULTS})")
    heat_p.add_argument("--script", help="heat-step script path (default: built-in)")
    heat_p.add_argument("--strategy", choices=[s.value for s in TransferStrategy],
                        default=TransferStrategy.WHOLE_FIELD_COPY.value)
    heat_p.add_argument("--out", default="heat-out")

    bc_p = sub.add_parser("bc-demo", help="scripted boundary profile vs host reference")
    bc_p.add_argument("--script", help="profile script path (default: built-in)")
    bc_p.add_argument("--time", action="append", type=float,
                      help="evaluation times in s (repeatable; default 0, 0.5, 1)")
    bc_p.add_argument("--nx", type=int, default=HEAT_DEFAULTS["nx"])
    bc_p.add_argument("--lx", type=float, default=HEAT_DEFAULTS["lx"])
    bc_p.add_argument("--out", default="bc-out")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "stress-bench":
            spec = BenchSpec(
                strategies=[TransferStrategy.from_name(s)
                            for s in (args.strategy or [s.value for s in TransferStrategy])],
                sizes=args.size or list(DEFAULT_SIZES),
                laws=[LawKind(v) for v in (args.law or ["analytic", "nn"])],
                repeats=args.repeats,
                warmup=args.warmup,
                seed=args.seed,
                script=Path(args.script) if args.script else None,
                nn_script=Path(args.nn_script) if args.nn_script else None,
                weights=Path(args.weights) if args.weights else None,
                timeout_s=args.timeout_s,
                out_dir=Path(args.out),
                fmt=args.format,
            )
            report = cmd_stress_bench(spec)
            suffix = "md" if spec.fmt == "markdown" else "csv"
            path = emit_report(report, spec.fmt, spec.out_dir / f"stress_bench.{suffix}")
            print(f"report written to {path}")
            if any(row.status != "ok" for row in report.rows):
                return EXIT_GUEST_ERROR
            return EXIT_OK
        if args.command == "heat":
            return cmd_heat(args)
        if args.command == "bc-demo":
            return cmd_bc_demo(args)
        raise AssertionError(f"unhandled command {args.command!r}")
    except GuestError as err:
        print(f"guest error: {err}", file=sys.stderr)
        return EXIT_GUEST_ERROR
    except ValueError as err:
        print(f"invalid configuration: {err}", file=sys.stderr)
        return EXIT_INVALID_CONFIG


if __name__ == "__main__":
    sys.exit(main())
