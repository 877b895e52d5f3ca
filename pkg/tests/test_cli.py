"""CLI subcommands, report emission, and exit codes."""

import numpy as np
import pytest

from fieldbridge import TransferStrategy
from fieldbridge.cli import (
    BenchReport,
    BenchRow,
    BenchSpec,
    EXIT_GUEST_ERROR,
    EXIT_INVALID_CONFIG,
    EXIT_NONCONVERGED,
    EXIT_OK,
    cmd_stress_bench,
    emit_report,
    main,
    parse_report_csv,
)
from fieldbridge.hooke import LawKind


def small_spec(out_dir, **overrides) -> BenchSpec:
    params = dict(
        strategies=list(TransferStrategy),
        sizes=[40, 1000],
        laws=[LawKind.SCRIPTED_ANALYTIC, LawKind.SCRIPTED_ARRAY_NN],
        repeats=3,
        warmup=1,
        seed=123,
        out_dir=out_dir,
    )
    params.update(overrides)
    return BenchSpec(**params)


class TestStressBench:
    def test_report_has_all_rows_and_clean_norms(self, tmp_path):
        report = cmd_stress_bench(small_spec(tmp_path))
        # 2 native baselines + 2 laws x 2 sizes x 3 strategies
        assert len(report.rows) == 2 + 12
        assert all(row.status == "ok" for row in report.rows)
        native = [r for r in report.rows if r.law == "native"]
        assert all(r.ratio == 1.0 for r in native)
        for row in report.rows:
            if row.law == "analytic":
                assert row.linf <= 1e-12 * 6e8
            if row.law == "nn":
                assert row.linf <= 1e-9 * 6e8
        assert "session" in report.startup_s
        assert report.startup_s["nn"] > 0.0

    def test_non_timing_fields_deterministic(self, tmp_path):
        spec_a = small_spec(tmp_path / "a", sizes=[60],
                            laws=[LawKind.SCRIPTED_ANALYTIC])
        spec_b = small_spec(tmp_path / "b", sizes=[60],
                            laws=[LawKind.SCRIPTED_ANALYTIC])
        rows_a = cmd_stress_bench(spec_a).rows
        rows_b = cmd_stress_bench(spec_b).rows
        for a, b in zip(rows_a, rows_b):
            assert (a.case, a.law, a.strategy, a.size, a.status) == \
                (b.case, b.law, b.strategy, b.size, b.status)
            assert a.l2_mean == b.l2_mean and a.linf == b.linf

    def test_failed_row_does_not_abort_remaining_rows(self, tmp_path, capsys):
        bad_script = tmp_path / "bad_law.py"
        bad_script.write_text("def predict(strain):\n    raise RuntimeError('law blew up')\n")
        spec = small_spec(tmp_path, sizes=[10], laws=[LawKind.SCRIPTED_ANALYTIC],
                          script=bad_script)
        report = cmd_stress_bench(spec)
        scripted = [r for r in report.rows if r.law == "analytic"]
        assert len(scripted) == 3
        assert all(r.status == "failed" and r.time_s is None for r in scripted)
        assert all(r.status == "ok" for r in report.rows if r.law == "native")

    def test_timed_out_row_recorded_not_fatal(self, tmp_path, capsys):
        spec = small_spec(tmp_path, sizes=[50_000], laws=[LawKind.SCRIPTED_ANALYTIC],
                          strategies=[TransferStrategy.PER_ELEMENT_COPY,
                                      TransferStrategy.WHOLE_FIELD_COPY],
                          timeout_s=0.05)
        report = cmd_stress_bench(spec)
        per_element = [r for r in report.rows if r.strategy == "per-element"]
        assert per_element[0].status == "timeout" and per_element[0].time_s is None
        assert any(r.status == "ok" for r in report.rows if r.law == "native")

    def test_invalid_spec_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            small_spec(tmp_path, repeats=2)
        with pytest.raises(ValueError):
            small_spec(tmp_path, warmup=0)


class TestEmitReport:
    def make_report(self) -> BenchReport:
        rows = [
            BenchRow("stress", "native", "native", 100, 0.5, 1.0, 0.0, 0.0),
            BenchRow("stress", "analytic", "whole-field", 100, 1.25, 2.5, 0.125, 3e-6),
            BenchRow("stress", "nn", "per-element", 100, None, None, None, None, "timeout"),
        ]
        return BenchReport(rows=rows, startup_s={"session": 0.001})

    def test_csv_round_trip(self, tmp_path):
        report = self.make_report()
        path = emit_report(report, "csv", tmp_path / "report.csv")
        assert parse_report_csv(path) == report.rows

    def test_markdown_table_shape(self, tmp_path):
        report = self.make_report()
        path = emit_report(report, "markdown", tmp_path / "report.md")
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 2 + len(report.rows)
        assert lines[0].startswith("| case | law | strategy | size | time_s | ratio |")

    def test_startup_written_alongside(self, tmp_path):
        emit_report(self.make_report(), "csv", tmp_path / "report.csv")
        assert (tmp_path / "report_startup.csv").read_text().startswith("stage,time_s")

    def test_empty_report_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report(BenchReport(), "csv", tmp_path / "x.csv")


class TestMain:
    def test_stress_bench_end_to_end(self, tmp_path, capsys):
        code = main([
            "stress-bench", "--law", "analytic", "--size", "50",
            "--repeats", "3", "--warmup", "1", "--out", str(tmp_path),
        ])
        assert code == EXIT_OK
        rows = parse_report_csv(tmp_path / "stress_bench.csv")
        assert {r.strategy for r in rows} == {"native", "per-element", "whole-field", "by-ref"}

    def test_heat_end_to_end(self, tmp_path):
        code = main([
            "heat", "--nx", "8", "--ny", "8", "--dt", "0.9",
            "--tol", "1e-7", "--out", str(tmp_path),
        ])
        assert code == EXIT_OK
        for name in ("heat_native_field.csv", "heat_scripted_field.csv",
                     "heat_native_residuals.csv", "heat_scripted_residuals.csv",
                     "heat_centre_line.csv"):
            assert (tmp_path / name).exists(), name

    def test_heat_reference_configuration_defaults(self, tmp_path):
        code = main(["heat", "--out", str(tmp_path)])
        assert code == EXIT_OK
        norms = (tmp_path / "heat_error_norms.csv").read_text().splitlines()[1]
        l2_mean, linf = (float(v) for v in norms.split(","))
        assert linf < 1e-9

    def test_heat_non_convergence_exit_code(self, tmp_path):
        code = main([
            "heat", "--nx", "8", "--ny", "8", "--dt", "0.9",
            "--max-iters", "1", "--out", str(tmp_path),
        ])
        assert code == EXIT_NONCONVERGED

    def test_heat_guest_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad_step.py"
        bad.write_text("def calculate(T, gamma):\n    raise RuntimeError('step failed')\n")
        code = main([
            "heat", "--nx", "8", "--ny", "8", "--dt", "0.9",
            "--script", str(bad), "--out", str(tmp_path),
        ])
        assert code == EXIT_GUEST_ERROR

    def test_bc_demo_matches_reference(self, tmp_path, capsys):
        code = main(["bc-demo", "--time", "0.5", "--time", "1.0", "--out", str(tmp_path)])
        assert code == EXIT_OK
        rows = (tmp_path / "bc_profile_t1.csv").read_text().strip().splitlines()[1:]
        u_guest = np.array([float(r.split(",")[1]) for r in rows])
        assert np.max(np.abs(u_guest)) < 1e-12   # sin(pi * 1.0) is zero everywhere
        half = (tmp_path / "bc_profile_t0.5.csv").read_text().strip().splitlines()[1:]
        diffs = np.array([float(r.split(",")[3]) for r in half])
        assert np.max(diffs) < 1e-12

    def test_invalid_flag_exit_code(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exit_info:
            main(["stress-bench", "--strategy", "teleport", "--out", str(tmp_path)])
        assert exit_info.value.code == EXIT_INVALID_CONFIG

    def test_invalid_repeats_exit_code(self, tmp_path, capsys):
        code = main(["stress-bench", "--repeats", "1", "--out", str(tmp_path)])
        assert code == EXIT_INVALID_CONFIG

    def test_heat_bad_bc_exit_code(self, tmp_path, capsys):
        code = main(["heat", "--bc", "ceiling=300", "--out", str(tmp_path)])
        assert code == EXIT_INVALID_CONFIG
