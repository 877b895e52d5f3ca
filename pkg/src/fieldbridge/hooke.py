"""Linear-elastic stress from strain: native law, scripted laws, exact NN weights.

Stress follows sigma = 2*mu*eps + lambda*tr(eps)*I per element, with strain
and stress packed in SYMM_COMPONENTS order: slots 0-2 carry the diagonal
(and receive the trace term), slots 3-5 the pure shear.

Scripted laws run in the guest runtime through ``predict(strain) -> stress``
(plus ``predict_into(strain_view, stress_view)`` for by-reference output).
The neural-network law is a 6 -> 20 (ReLU) -> 6 (linear) stack wrapped in
min-max scalers; its weights are *constructed*, not trained: because scaled
inputs lie in [0, 1], an identity block in the first layer makes the ReLU a
pass-through, and the output layer is the exact affine map between scaled
strain and scaled stress. Inside the scaler range the network reproduces
the stress law to float rounding.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bridge
from .bridge import Session, TransferStrategy
from .fields import FieldBuffer, ShapeMismatchError

HIDDEN_WIDTH = 20

# Per-component strain interval used when no explicit range is configured.
DEFAULT_STRAIN_RANGE = (-2e-3, 2e-3)


@dataclass(frozen=True)
class LameParams:
    """Isotropic elastic constants: lam (first parameter) and mu (shear modulus), Pa."""

    lam: float
    mu: float

    def __post_init__(self) -> None:
        if self.mu <= 0.0:
            raise ValueError(f"shear modulus must be positive, got {self.mu}")
        if 3.0 * self.lam + 2.0 * self.mu <= 0.0:
            raise ValueError("3*lam + 2*mu must be positive for a stable material")


def lame_from_engineering(E: float, nu: float) -> LameParams:
    """Convert Young's modulus (Pa) and Poisson's ratio to Lame parameters."""
    if E <= 0.0:
        raise ValueError(f"Young's modulus must be positive, got {E}")
    if not -1.0 < nu < 0.5:
        raise ValueError(f"Poisson's ratio must lie in (-1, 0.5), got {nu}")
    mu = E / (2.0 * (1.0 + nu))
    lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    return LameParams(lam=lam, mu=mu)


class LawKind(enum.Enum):
    NATIVE_HOOKE = "native"
    SCRIPTED_ANALYTIC = "analytic"
    SCRIPTED_ARRAY_NN = "nn"


def hooke_native(strain: FieldBuffer, p: LameParams) -> FieldBuffer:
    """Vectorized host-side stress evaluation (the reference for every scripted law)."""
    if strain.n_components != 6:
        raise ShapeMismatchError(f"strain field must have c == 6, got c={strain.n_components}")
    e = strain.data
    trace = e[:, 0] + e[:, 1] + e[:, 2]
    s = np.empty_like(e)
    s[:, :3] = 2.0 * p.mu * e[:, :3] + (p.lam * trace)[:, None]
    s[:, 3:] = 2.0 * p.mu * e[:, 3:]
    return FieldBuffer(s, units="Pa")


def hooke_matrix(p: LameParams) -> np.ndarray:
    """(6, 6) matrix M with stress_row = strain_row @ M; M[j, k] = d sigma_k / d eps_j."""
    m = 2.0 * p.mu * np.eye(6)
    m[:3, :3] += p.lam
    return m


def scripted_stress(
    session: Session,
    strain: FieldBuffer,
    strategy: TransferStrategy,
    law: LawKind,
    budget_s: float | None = None,
) -> FieldBuffer:
    """Evaluate the loaded guest law on a strain field under one transfer strategy.

    PER_ELEMENT_COPY crosses the boundary once per element (put element,
    call, get element); WHOLE_FIELD_COPY moves the whole field each way
    around a single guest call; BY_REFERENCE publishes the strain and a
    host-preallocated stress buffer as views and the guest writes the result
    in place, so nothing is copied.

    ``budget_s`` is a cooperative wall-clock cap; exceeding it raises
    TimeoutError (checked between elements, so a stuck guest call cannot be
    preempted mid-flight).
    """
    if law is LawKind.NATIVE_HOOKE:
        raise ValueError("scripted_stress requires a scripted law; use hooke_native directly")
    if strain.n_components != 6:
        raise ShapeMismatchError(f"strain field must have c == 6, got c={strain.n_components}")
    if "predict" not in session.scope:
        raise bridge.GuestError(
            bridge.GuestErrorKind.NAME_MISSING,
            f"no guest 'predict' loaded for law {law.value!r}",
        )
    n = strain.n_elements
    deadline = None if budget_s is None else time.perf_counter() + budget_s

    if strategy is TransferStrategy.WHOLE_FIELD_COPY:
        bridge.put_field_copy(session, "strain", strain)
        bridge.exec_statement(session, "stress = predict(strain)")
        return bridge.get_field_copy(session, "stress", (n, 6))

    if strategy is TransferStrategy.PER_ELEMENT_COPY:
        out = np.empty((n, 6))
        for i in range(n):
            if deadline is not None and i % 1024 == 0 and time.perf_counter() > deadline:
                raise TimeoutError(f"per-element evaluation exceeded {budget_s:.3g} s budget")
            bridge.put_element(session, "strain", strain, i)
            bridge.exec_statement(session, "stress = predict(strain.reshape(1, 6))[0]")
            row = bridge.get_element(session, "stress")
            if row.shape != (6,):
                raise bridge.GuestError(
                    bridge.GuestErrorKind.SHAPE_MISMATCH,
                    f"guest stress element has shape {row.shape}, expected (6,)",
                )
            out[i] = row
        return FieldBuffer(out, units="Pa")

    if strategy is TransferStrategy.BY_REFERENCE:
        out = FieldBuffer.zeros(n, 6, units="Pa")
        strain_lease = bridge.publish_field_by_ref(session, "strain", strain)
        try:
            stress_lease = bridge.publish_field_by_ref(session, "stress", out)
            try:
                if "predict_into" in session.scope:
                    bridge.exec_statement(session, "predict_into(strain, stress)")
                else:
                    bridge.exec_statement(session, "stress[...] = predict(strain)")
            finally:
                bridge.release_lease(stress_lease)
        finally:
            bridge.release_lease(strain_lease)
        return out

    raise ValueError(f"unknown strategy {strategy!r}")


@dataclass
class WeightBundle:
    """Dense-layer weights plus input/output min-max scalers for the NN law.

    Layer stack is fixed: w0 (6, 20), b0 (20,), w1 (20, 6), b1 (6,). The
    scalers map each component affinely onto [0, 1] over [min, max].
    """

    w0: np.ndarray
    b0: np.ndarray
    w1: np.ndarray
    b1: np.ndarray
    x_min: np.ndarray
    x_max: np.ndarray
    y_min: np.ndarray
    y_max: np.ndarray

    def __post_init__(self) -> None:
        self.w0 = np.asarray(self.w0, dtype=np.float64)
        self.b0 = np.asarray(self.b0, dtype=np.float64)
        self.w1 = np.asarray(self.w1, dtype=np.float64)
        self.b1 = np.asarray(self.b1, dtype=np.float64)
        shapes = (self.w0.shape, self.b0.shape, self.w1.shape, self.b1.shape)
        expected = ((6, HIDDEN_WIDTH), (HIDDEN_WIDTH,), (HIDDEN_WIDTH, 6), (6,))
        if shapes != expected:
            raise ValueError(f"layer shapes {shapes} do not match {expected}")
        for attr in ("x_min", "x_max", "y_min", "y_max"):
            setattr(self, attr, np.asarray(getattr(self, attr), dtype=np.float64).reshape(6))
        if not np.all(self.x_max > self.x_min) or not np.all(self.y_max > self.y_min):
            raise ValueError("scaler max must exceed min in every component")

    def to_json_dict(self) -> dict:
        return {
            "w0": self.w0.tolist(),
            "b0": self.b0.tolist(),
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "x_scaler": {"min": self.x_min.tolist(), "max": self.x_max.tolist()},
            "y_scaler": {"min": self.y_min.tolist(), "max": self.y_max.tolist()},
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "WeightBundle":
        return cls(
            w0=payload["w0"],
            b0=payload["b0"],
            w1=payload["w1"],
            b1=payload["b1"],
            x_min=payload["x_scaler"]["min"],
            x_max=payload["x_scaler"]["max"],
            y_min=payload["y_scaler"]["min"],
            y_max=payload["y_scaler"]["max"],
        )


def save_weights(bundle: WeightBundle, path: str | Path) -> None:
    Path(path).write_text(json.dumps(bundle.to_json_dict()))


def load_weights(path: str | Path) -> WeightBundle:
    return WeightBundle.from_json_dict(json.loads(Path(path).read_text()))


def nn_predict(bundle: WeightBundle, strain: np.ndarray) -> np.ndarray:
    """Host-side forward pass: scale, dense+ReLU, dense, inverse-scale."""
    x = (np.asarray(strain, dtype=np.float64) - bundle.x_min) / (bundle.x_max - bundle.x_min)
    hidden = np.maximum(0.0, x @ bundle.w0 + bundle.b0)
    y = hidden @ bundle.w1 + bundle.b1
    return y * (bundle.y_max - bundle.y_min) + bundle.y_min


def build_exact_nn_weights(
    p: LameParams,
    strain_range: tuple = DEFAULT_STRAIN_RANGE,
) -> WeightBundle:
    """Construct weights that make the NN reproduce the stress law exactly in range.

    Min-max-scaled strains are non-negative, so w0 = [identity | zeros] with
    b0 = 0 turns the hidden ReLU layer into the identity on the scaled
    input; the output layer is then the exact affine map from scaled strain
    to scaled stress. The stress scaler covers the image of the strain box
    under the law (interval arithmetic per component), which keeps its width
    positive and the inverse transform well defined.

    ``strain_range`` is (min, max), scalars or per-component length-6 arrays.
    """
    lo, hi = strain_range
    x_min = np.broadcast_to(np.asarray(lo, dtype=np.float64), (6,)).copy()
    x_max = np.broadcast_to(np.asarray(hi, dtype=np.float64), (6,)).copy()
    if not np.all(x_max > x_min):
        raise ValueError("strain_range must satisfy min < max per component")

    m = hooke_matrix(p)
    contrib_lo = m * x_min[:, None]
    contrib_hi = m * x_max[:, None]
    y_min = np.minimum(contrib_lo, contrib_hi).sum(axis=0)
    y_max = np.maximum(contrib_lo, contrib_hi).sum(axis=0)

    dx = x_max - x_min
    dy = y_max - y_min

    w0 = np.zeros((6, HIDDEN_WIDTH))
    w0[:, :6] = np.eye(6)
    b0 = np.zeros(HIDDEN_WIDTH)
    w1 = np.zeros((HIDDEN_WIDTH, 6))
    w1[:6, :] = dx[:, None] * m / dy[None, :]
    b1 = (x_min @ m - y_min) / dy

    return WeightBundle(w0=w0, b0=b0, w1=w1, b1=b1,
                        x_min=x_min, x_max=x_max, y_min=y_min, y_max=y_max)


def synth_strain_field(
    n: int,
    seed: int,
    strain_range: tuple = DEFAULT_STRAIN_RANGE,
) -> FieldBuffer:
    """Deterministic pseudo-random strain field, uniform per component in range."""
    if n < 0:
        raise ValueError(f"element count must be >= 0, got {n}")
    lo, hi = strain_range
    rng = np.random.default_rng(seed)
    data = rng.uniform(np.broadcast_to(lo, (6,)), np.broadcast_to(hi, (6,)), size=(n, 6))
    return FieldBuffer(data, units="strain")
