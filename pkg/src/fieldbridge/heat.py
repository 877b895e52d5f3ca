"""Explicit finite-difference steady-state heat solver with scripted hooks.

The solver drives a temperature field to steady state with forward
pseudo-time sweeps of the 5-point stencil, Dirichlet values seeded into the
boundary-adjacent cells before every sweep. The per-sweep update runs
*in place* in row-major order (i outer, j inner), so cells later in the
sweep see already-updated earlier neighbours; the guest heat-step script
performs the identical in-place sweep, which makes native/scripted
equivalence meaningful to machine precision. A pure-Jacobi variant is
provided as an independent cross-check only.

The sweep is stable for gamma = DT * dt / dx**2 <= 0.25.

A boundary patch may also take its Dirichlet values from a guest profile
script (the ``calculate(face_centres, time)`` convention): the profile is
evaluated once at a fixed time and its x-component becomes a per-face
temperature offset.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bridge
from .bridge import Session, TransferStrategy
from .fields import FieldBuffer, PATCH_NAMES, ShapeMismatchError, StructuredGrid

GAMMA_MAX = 0.25  # explicit-stencil stability bound


def compute_gamma(diffusivity: float, dt: float, dx: float) -> float:
    """Stencil coefficient gamma = DT * dt / dx**2 (dimensionless)."""
    if diffusivity <= 0.0 or dt <= 0.0 or dx <= 0.0:
        raise ValueError("diffusivity, dt and dx must all be positive")
    return diffusivity * dt / (dx * dx)


def profile_reference(x: np.ndarray | float, time: float) -> np.ndarray | float:
    """Host-side boundary profile: sin(pi*t) * sin(40*pi*x).

    Vanishes at integer times and at x = k/40; used as the independent
    oracle for the scripted profile.
    """
    return np.sin(np.pi * time) * np.sin(40.0 * np.pi * np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class ProfileBC:
    """Dirichlet patch values taken from a guest profile script.

    The script's ``calculate(face_centres, time)`` is evaluated once at
    ``time``; the patch temperature is ``base + scale * u_x`` per face.
    ``script`` may be None when the profile function is already loaded.
    """

    script: str | Path | None
    time: float
    base: float = 0.0     # K
    scale: float = 1.0    # K per unit profile


@dataclass(frozen=True)
class NativeStep:
    """Run the stencil sweep on the host."""


@dataclass(frozen=True)
class ScriptedStep:
    """Run the stencil sweep in the guest via ``calculate(T, gamma)``.

    ``script`` may be None when the function is already loaded in the
    session scope.
    """

    strategy: TransferStrategy
    script: str | Path | None = None


BCValue = "float | np.ndarray | ProfileBC"


@dataclass
class HeatConfig:
    grid: StructuredGrid
    diffusivity: float                       # m^2/s
    dt: float                                # pseudo-time step, s
    bc: dict                                 # patch name -> K, per-face K array, or ProfileBC
    tol: float = 1e-8                        # K, convergence bound on max per-sweep change
    max_iters: int = 1_000_000
    t_initial: float = 273.0                 # K, initial interior guess
    step_impl: NativeStep | ScriptedStep = field(default_factory=NativeStep)

    @property
    def gamma(self) -> float:
        return compute_gamma(self.diffusivity, self.dt, self.grid.dx)

    def __post_init__(self) -> None:
        missing = [p for p in PATCH_NAMES if p not in self.bc]
        if missing:
            raise ValueError(f"boundary values missing for patches: {missing}")
        if self.gamma > GAMMA_MAX:
            warnings.warn(
                f"gamma={self.gamma:.4g} exceeds the stability bound {GAMMA_MAX}; "
                "solve_steady will reject this configuration",
                stacklevel=2,
            )


@dataclass
class SolveReport:
    T: FieldBuffer                  # converged (or last) temperature field, K
    iterations: int
    residual_history: list[float]   # max |dT| per sweep, K
    converged: bool


def seed_boundary_cells(T: FieldBuffer, grid: StructuredGrid, bc: dict) -> None:
    """Write Dirichlet values into the boundary-adjacent cells, in place.

    Patches are written in the fixed order left, bottom, right, top, so a
    corner cell ends up with the value of the later patch. Interior cells
    are untouched. Values are uniform floats or per-face arrays ordered
    like the patch face centres.
    """
    _check_temperature_field(T, grid)
    a = T.as_1d().reshape(grid.nx, grid.ny)
    for patch in ("left", "bottom", "right", "top"):
        value = bc[patch]
        if isinstance(value, ProfileBC):
            raise ValueError(f"patch {patch!r} still holds an unresolved ProfileBC")
        value = np.asarray(value, dtype=np.float64)
        expected = grid.ny if patch in ("left", "right") else grid.nx
        if value.ndim not in (0, 1) or (value.ndim == 1 and value.shape[0] != expected):
            raise ShapeMismatchError(
                f"patch {patch!r} expects a scalar or {expected} per-face values, "
                f"got shape {value.shape}"
            )
        if patch == "left":
            a[0, :] = value
        elif patch == "bottom":
            a[:, 0] = value
        elif patch == "right":
            a[grid.nx - 1, :] = value
        else:
            a[:, grid.ny - 1] = value


def native_fd_step(T: FieldBuffer, gamma: float, grid: StructuredGrid) -> FieldBuffer:
    """One in-place interior sweep of the explicit stencil; returns a new field.

    For interior (i, j), with k = i*ny + j:
    T[k] += gamma * (T[k+1] + T[k-1] + T[k+ny] + T[k-ny] - 4*T[k]),
    evaluated in sweep order on the partially updated array. Boundary cells
    are left unchanged.
    """
    _check_temperature_field(T, grid)
    out = T.copy()
    a = out.as_1d()
    nx, ny = grid.nx, grid.ny
    for i in range(1, nx - 1):
        base = i * ny
        for j in range(1, ny - 1):
            k = base + j
            a[k] = gamma * (a[k + 1] + a[k - 1] + a[k + ny] + a[k - ny] - 4 * a[k]) + a[k]
    return out


def jacobi_fd_step(T: FieldBuffer, gamma: float, grid: StructuredGrid) -> FieldBuffer:
    """Pure-Jacobi variant of the sweep (all reads from the old array).

    Cross-check oracle only: it shares the steady-state fixed point with
    native_fd_step but not the per-sweep trajectory.
    """
    _check_temperature_field(T, grid)
    old = T.as_1d().reshape(grid.nx, grid.ny)
    new = old.copy()
    new[1:-1, 1:-1] = old[1:-1, 1:-1] + gamma * (
        old[1:-1, 2:] + old[1:-1, :-2] + old[2:, 1:-1] + old[:-2, 1:-1] - 4 * old[1:-1, 1:-1]
    )
    return FieldBuffer(new.reshape(-1, 1), units=T.units)


def scripted_fd_step(
    session: Session,
    T: FieldBuffer,
    gamma: float,
    grid: StructuredGrid,
    strategy: TransferStrategy,
) -> FieldBuffer:
    """Run one sweep through the guest's ``calculate(T, gamma)``.

    Same contract as native_fd_step. Under BY_REFERENCE the guest mutates
    the host buffer through a published view and the *same* FieldBuffer is
    returned with no copy back; under the copy strategies the input field is
    untouched and a new field is returned.
    """
    _check_temperature_field(T, grid)
    n = T.n_elements
    bridge.set_scalar(session, "gamma", gamma)

    if strategy is TransferStrategy.WHOLE_FIELD_COPY:
        bridge.put_field_copy(session, "T", T)
        bridge.exec_statement(session, "T = calculate(T, gamma)")
        return bridge.get_field_copy(session, "T", (n, 1))

    if strategy is TransferStrategy.PER_ELEMENT_COPY:
        bridge.exec_statement(session, f"T = _bridge_np.zeros({n})")
        for i in range(n):
            bridge.put_element(session, "_bridge_elem", T, i)
            bridge.exec_statement(session, f"T[{i}] = _bridge_elem")
        bridge.exec_statement(session, "T = calculate(T, gamma)")
        out = np.empty(n)
        for i in range(n):
            bridge.exec_statement(session, f"_bridge_elem = T[{i}]")
            out[i] = bridge.get_element(session, "_bridge_elem")[0]
        return FieldBuffer(out.reshape(n, 1), units=T.units)

    if strategy is TransferStrategy.BY_REFERENCE:
        lease = bridge.publish_field_by_ref(session, "T", T)
        try:
            bridge.exec_statement(session, "T = calculate(T, gamma)")
        finally:
            bridge.release_lease(lease)
        return T

    raise ValueError(f"unknown strategy {strategy!r}")


def solve_steady(config: HeatConfig, session: Session | None = None) -> SolveReport:
    """Iterate boundary seeding + stencil sweeps until max |dT| < tol.

    Non-convergence is reported (``converged`` False, iterations ==
    max_iters), not raised. Scripted steps and profile boundary conditions
    need a live session; profile scripts are loaded and evaluated *before*
    the heat-step script so the two ``calculate`` definitions cannot
    collide.
    """
    gamma = config.gamma
    if gamma > GAMMA_MAX:
        raise ValueError(f"gamma={gamma:.4g} violates the stability bound {GAMMA_MAX}")
    if config.max_iters < 1:
        raise ValueError("max_iters must be >= 1")

    bc = _resolve_bc(config, session)

    scripted = isinstance(config.step_impl, ScriptedStep)
    if scripted:
        if session is None:
            raise ValueError("a live session is required for a scripted step")
        if config.step_impl.script is not None:
            bridge.load_script(session, config.step_impl.script)

    grid = config.grid
    T = FieldBuffer(np.full((grid.n_cells, 1), float(config.t_initial)), units="K")
    residuals: list[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, config.max_iters + 1):
        seed_boundary_cells(T, grid, bc)
        prev = T.data.copy()
        if scripted:
            T = scripted_fd_step(session, T, gamma, grid, config.step_impl.strategy)
        else:
            T = native_fd_step(T, gamma, grid)
        delta = float(np.max(np.abs(T.data - prev)))
        residuals.append(delta)
        if delta < config.tol:
            converged = True
            break
    return SolveReport(T=T, iterations=iterations, residual_history=residuals, converged=converged)


def eval_scripted_profile(session: Session, face_centres: FieldBuffer, time: float) -> FieldBuffer:
    """Evaluate the guest profile ``calculate(face_centres, time)``.

    Sends the (n, 3) face-centre coordinates and the time by copy, runs the
    guest function, and copies the (n, 3) result back.
    """
    if face_centres.n_components != 3:
        raise ShapeMismatchError(
            f"face centres must have c == 3, got c={face_centres.n_components}"
        )
    bridge.put_field_copy(session, "face_centres", face_centres)
    bridge.set_scalar(session, "time", time)
    bridge.exec_statement(session, "velocities = calculate(face_centres, time)")
    return bridge.get_field_copy(session, "velocities", (face_centres.n_elements, 3))


def centre_cell_value(T: FieldBuffer, grid: StructuredGrid) -> float:
    """Temperature at the grid centre: mean over the central cell block.

    Odd cell counts have a single centre cell per axis, even counts two;
    the block is the 1-, 2- or 4-cell set around the geometric centre.
    """
    _check_temperature_field(T, grid)
    a = T.as_1d().reshape(grid.nx, grid.ny)
    ii = _centre_indices(grid.nx)
    jj = _centre_indices(grid.ny)
    return float(np.mean(a[np.ix_(ii, jj)]))


def centre_line_profile(T: FieldBuffer, grid: StructuredGrid) -> tuple[np.ndarray, np.ndarray]:
    """Vertical profile through the grid centre: (y coordinates, temperatures).

    For even nx the two central columns are averaged.
    """
    _check_temperature_field(T, grid)
    a = T.as_1d().reshape(grid.nx, grid.ny)
    cols = a[_centre_indices(grid.nx), :]
    y = (np.arange(grid.ny) + 0.5) * grid.dy
    return y, cols.mean(axis=0)


def _centre_indices(count: int) -> list[int]:
    if count % 2 == 1:
        return [count // 2]
    return [count // 2 - 1, count // 2]


def _resolve_bc(config: HeatConfig, session: Session | None) -> dict:
    resolved = {}
    for patch in PATCH_NAMES:
        value = config.bc[patch]
        if isinstance(value, ProfileBC):
            if session is None:
                raise ValueError(f"patch {patch!r} uses a profile script: a session is required")
            if value.script is not None:
                bridge.load_script(session, value.script)
            profile = eval_scripted_profile(session, config.grid.patches[patch], value.time)
            resolved[patch] = value.base + value.scale * profile.data[:, 0]
        else:
            resolved[patch] = value
    return resolved


def _check_temperature_field(T: FieldBuffer, grid: StructuredGrid) -> None:
    if T.n_components != 1 or T.n_elements != grid.n_cells:
        raise ShapeMismatchError(
            f"temperature field must be ({grid.n_cells}, 1), got {T.shape}"
        )
