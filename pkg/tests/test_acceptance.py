"""Acceptance suite: one test per release criterion, each printing a PASS line.

Criteria covered:

1. strategy equivalence - scripted analytic stress matches the native law to
   1e-12 x max|sigma| under all three transfer strategies on a seeded
   1000-element field; the exact-weights NN matches to 1e-9 x max|sigma|;
2. performance ordering - on 400 000 elements with the inline analytic law,
   per-element copy is at least 2x slower than whole-field copy and strictly
   slower than by-reference;
3. by-reference overhead - scripted-analytic by-reference stays within 2x of
   the native evaluation on 400 000 elements;
4. bridge properties - copy round-trips are bit-exact, by-reference writes
   are visible element-for-element, lifecycle misuse is rejected, and guest
   exceptions never kill the host;
5. heat oracle - the native in-place solver converges on the reference
   configuration (20x20 cells, 0.1 m square, 273/273/273/373 K) with final
   residual < 1e-8 K and a centre temperature within 5 K of the
   symmetry-exact 298 K; uniform boundaries converge to the boundary value.

Only inline guest snippets are used; the external script library is not
needed here.
"""

import time

import numpy as np
import pytest

import fieldbridge as fb
from fieldbridge import FieldBuffer, GuestError, TransferStrategy
from fieldbridge.cli import BenchSpec, cmd_stress_bench
from fieldbridge.hooke import LawKind
from fieldbridge.snippets import INLINE_ANALYTIC_LAW, INLINE_NN_LAW

MATERIAL = fb.lame_from_engineering(200e9, 0.3)


def report_pass(name: str, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {name}: PASS{suffix}")


@pytest.fixture(scope="module")
def perf_report(tmp_path_factory):
    """One 400 000-element analytic-law benchmark shared by criteria 2 and 3."""
    spec = BenchSpec(
        strategies=list(TransferStrategy),
        sizes=[400_000],
        laws=[LawKind.SCRIPTED_ANALYTIC],
        repeats=3,
        warmup=1,
        seed=42,
        out_dir=tmp_path_factory.mktemp("perf"),
        timeout_s=280.0,
    )
    start = time.perf_counter()
    report = cmd_stress_bench(spec)
    elapsed = time.perf_counter() - start
    medians = {row.strategy: row.time_s for row in report.rows}
    assert all(row.status == "ok" for row in report.rows), report.rows
    return medians, elapsed


def test_criterion_1_strategy_equivalence(tmp_path):
    start = time.perf_counter()
    strain = fb.synth_strain_field(1000, seed=42)
    native = fb.hooke_native(strain, MATERIAL)
    scale = float(np.max(np.abs(native.data)))

    with fb.open_session() as session:
        fb.set_scalar(session, "lame_1", MATERIAL.lam)
        fb.set_scalar(session, "lame_2", MATERIAL.mu)
        fb.load_script(session, INLINE_ANALYTIC_LAW)
        analytic_worst = 0.0
        for strategy in TransferStrategy:
            out = fb.scripted_stress(session, strain, strategy, LawKind.SCRIPTED_ANALYTIC)
            analytic_worst = max(analytic_worst,
                                 float(np.max(np.abs(out.data - native.data))))
        assert analytic_worst <= 1e-12 * scale

        weights = tmp_path / "weights.json"
        fb.save_weights(fb.build_exact_nn_weights(MATERIAL), weights)
        fb.exec_statement(session, f"weights_path = {str(weights)!r}")
        fb.load_script(session, INLINE_NN_LAW)
        nn_worst = 0.0
        for strategy in TransferStrategy:
            out = fb.scripted_stress(session, strain, strategy, LawKind.SCRIPTED_ARRAY_NN)
            nn_worst = max(nn_worst, float(np.max(np.abs(out.data - native.data))))
        assert nn_worst <= 1e-9 * scale

    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    report_pass("strategy equivalence",
                f"analytic linf/max = {analytic_worst / scale:.2e}, "
                f"nn linf/max = {nn_worst / scale:.2e}, {elapsed:.1f} s")


def test_criterion_2_performance_ordering(perf_report):
    medians, elapsed = perf_report
    per_element = medians["per-element"]
    whole_field = medians["whole-field"]
    by_ref = medians["by-ref"]

    assert per_element >= 2.0 * whole_field
    assert per_element > by_ref
    assert whole_field >= 0.8 * by_ref     # monotone ordering with timer-noise slack
    assert elapsed < 300.0
    report_pass("performance ordering",
                f"per-element {per_element:.2f} s, whole-field {whole_field * 1e3:.0f} ms, "
                f"by-ref {by_ref * 1e3:.0f} ms")


def test_criterion_3_by_reference_overhead(perf_report):
    medians, elapsed = perf_report
    ratio = medians["by-ref"] / medians["native"]
    assert ratio <= 2.0
    assert elapsed < 120.0
    report_pass("by-reference overhead", f"by-ref/native = {ratio:.2f}")


def test_criterion_4_bridge_property_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)

    with fb.open_session() as session:
        # round-trip identity on 1000 random buffers
        for _ in range(1000):
            n = int(rng.integers(0, 25))
            c = int(rng.choice([1, 3, 6, 9]))
            f = FieldBuffer(rng.normal(size=(n, c)) * 10.0 ** rng.integers(-9, 9))
            fb.put_field_copy(session, "buf", f)
            back = fb.get_field_copy(session, "buf", (n, c))
            np.testing.assert_array_equal(f.data, back.data)

        # by-reference mutation visibility, 100 random single-element writes
        host = FieldBuffer(rng.normal(size=(40, 6)))
        mirror = host.data.copy()
        lease = fb.publish_field_by_ref(session, "shared", host)
        for _ in range(100):
            i, j = int(rng.integers(0, 40)), int(rng.integers(0, 6))
            value = float(rng.normal())
            fb.exec_statement(session, f"shared[{i}, {j}] = {value!r}")
            mirror[i, j] = value
            np.testing.assert_array_equal(host.data, mirror)
        fb.release_lease(lease)

        # double initialization rejected
        with pytest.raises(GuestError):
            fb.open_session()

        # guest exceptions surface without killing the host
        with pytest.raises(GuestError) as err:
            fb.exec_statement(session, "boom = 1/0")
        assert err.value.message
        fb.set_scalar(session, "alive", 1.0)
        assert fb.get_scalar(session, "alive") == 1.0

    # use after close rejected
    with pytest.raises(GuestError):
        fb.set_scalar(session, "x", 0.0)

    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    report_pass("bridge property suite", f"{elapsed:.1f} s")


def test_criterion_5_heat_oracle():
    start = time.perf_counter()
    grid = fb.make_grid(20, 20, 0.1, 0.1)

    config = fb.HeatConfig(
        grid=grid, diffusivity=4e-5, dt=0.15,
        bc={"left": 273.0, "bottom": 273.0, "right": 273.0, "top": 373.0},
        tol=1e-8,
    )
    report = fb.solve_steady(config)
    assert report.converged
    assert report.residual_history[-1] < 1e-8
    centre = fb.centre_cell_value(report.T, grid)
    assert abs(centre - 298.0) < 5.0

    uniform = fb.HeatConfig(
        grid=grid, diffusivity=4e-5, dt=0.15,
        bc={p: 300.0 for p in ("left", "right", "bottom", "top")},
        tol=1e-8, t_initial=500.0,
    )
    uniform_report = fb.solve_steady(uniform)
    assert uniform_report.converged
    # per-sweep tol of 1e-8 K leaves the field within ~1e-6 K of the fixed point
    assert float(np.max(np.abs(uniform_report.T.data - 300.0))) < 1e-5

    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    report_pass("heat oracle",
                f"centre = {centre:.2f} K after {report.iterations} sweeps, {elapsed:.1f} s")
