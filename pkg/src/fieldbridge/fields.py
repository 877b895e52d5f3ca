"""Field containers, structured-grid metadata, tensor packing, and error norms.

A field is a flat array of per-element values over a mesh: one row per
element, one column per component. Component counts in use are 1 (scalars
such as temperature), 3 (vectors such as velocity or face centres), 6
(symmetric tensors) and 9 (full second-order tensors).

Symmetric tensors are packed as [xx, yy, zz, xy, yz, zx]; full tensors
row-major as [xx, xy, xz, yx, yy, yz, zx, zy, zz].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Packing order of the 6 independent components of a symmetric tensor.
# Diagonal terms occupy slots 0-2, pure shear terms slots 3-5.
SYMM_COMPONENTS = ("xx", "yy", "zz", "xy", "yz", "zx")

# Row-major component order of a full 3x3 tensor field (c == 9).
FULL_TENSOR_COMPONENTS = ("xx", "xy", "xz", "yx", "yy", "yz", "zx", "zy", "zz")

ALLOWED_COMPONENT_COUNTS = (1, 3, 6, 9)

PATCH_NAMES = ("left", "right", "bottom", "top")


class ShapeMismatchError(ValueError):
    """Raised when a field's (n_elements, n_components) does not fit an operation."""


class FieldBuffer:
    """Contiguous row-major float64 buffer of shape (n_elements, n_components).

    Element i, component j lives at flat offset i * n_components + j. The
    backing array never moves or resizes after construction, which is what
    makes publishing its raw address to the guest runtime safe.
    """

    __slots__ = ("data", "units")

    def __init__(self, data: np.ndarray, units: str = ""):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise ShapeMismatchError(f"field data must be 1-D or 2-D, got ndim={arr.ndim}")
        if arr.shape[1] not in ALLOWED_COMPONENT_COUNTS:
            raise ShapeMismatchError(
                f"n_components must be one of {ALLOWED_COMPONENT_COUNTS}, got {arr.shape[1]}"
            )
        self.data = np.ascontiguousarray(arr)
        self.units = units

    @classmethod
    def zeros(cls, n_elements: int, n_components: int, units: str = "") -> "FieldBuffer":
        return cls(np.zeros((n_elements, n_components)), units=units)

    @property
    def n_elements(self) -> int:
        return self.data.shape[0]

    @property
    def n_components(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape  # type: ignore[return-value]

    def as_1d(self) -> np.ndarray:
        """Flat length-n view (no copy); only valid for single-component fields."""
        if self.n_components != 1:
            raise ShapeMismatchError(f"as_1d requires c == 1, got c={self.n_components}")
        return self.data.reshape(self.n_elements)

    def copy(self) -> "FieldBuffer":
        return FieldBuffer(self.data.copy(), units=self.units)

    def __repr__(self) -> str:
        unit = f", units={self.units!r}" if self.units else ""
        return f"FieldBuffer(shape={self.data.shape}{unit})"


@dataclass(frozen=True)
class ErrorNorms:
    """Difference norms between two same-shaped fields.

    l2_mean is the per-element mean of the component-wise Euclidean norm of
    the difference; linf is the largest absolute component difference. Both
    are zero exactly when the fields are identical.
    """

    l2_mean: float
    linf: float


def error_norms(a: FieldBuffer, b: FieldBuffer) -> ErrorNorms:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = a.data - b.data
    if diff.size == 0:
        return ErrorNorms(l2_mean=0.0, linf=0.0)
    linf = float(np.max(np.abs(diff)))
    l2_mean = float(np.mean(np.sqrt(np.sum(diff * diff, axis=1))))
    return ErrorNorms(l2_mean=l2_mean, linf=linf)


def symmetrize_gradient(grad: FieldBuffer) -> FieldBuffer:
    """Symmetric part of a 9-component gradient field, packed as 6 components.

    Per element: eps_ab = (g_ab + g_ba) / 2, returned in SYMM_COMPONENTS
    order. Input order is FULL_TENSOR_COMPONENTS.
    """
    if grad.n_components != 9:
        raise ShapeMismatchError(f"gradient field must have c == 9, got c={grad.n_components}")
    g = grad.data
    eps = np.empty((grad.n_elements, 6))
    eps[:, 0] = g[:, 0]                      # xx
    eps[:, 1] = g[:, 4]                      # yy
    eps[:, 2] = g[:, 8]                      # zz
    eps[:, 3] = 0.5 * (g[:, 1] + g[:, 3])    # xy
    eps[:, 4] = 0.5 * (g[:, 5] + g[:, 7])    # yz
    eps[:, 5] = 0.5 * (g[:, 2] + g[:, 6])    # zx
    return FieldBuffer(eps, units=grad.units)


def expand_symmetric(symm: FieldBuffer) -> FieldBuffer:
    """Inverse packing: 6-component symmetric field back to 9 components."""
    if symm.n_components != 6:
        raise ShapeMismatchError(f"symmetric field must have c == 6, got c={symm.n_components}")
    s = symm.data
    g = np.empty((symm.n_elements, 9))
    g[:, 0] = s[:, 0]
    g[:, 4] = s[:, 1]
    g[:, 8] = s[:, 2]
    g[:, 1] = g[:, 3] = s[:, 3]
    g[:, 5] = g[:, 7] = s[:, 4]
    g[:, 2] = g[:, 6] = s[:, 5]
    return FieldBuffer(g, units=symm.units)


@dataclass(frozen=True)
class StructuredGrid:
    """Uniform 2-D grid of nx * ny square cells covering lx * ly metres.

    Cell (i, j) has its centre at ((i + 0.5) * dx, (j + 0.5) * dy) and flat
    index i * ny + j. Boundary patches are the four sides; each stores the
    ordered (x, y, z) face-centre coordinates of its faces (z is always 0).
    """

    nx: int
    ny: int
    lx: float          # m
    ly: float          # m
    patches: dict[str, FieldBuffer] = field(repr=False, default_factory=dict)

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    def cell_index(self, i: int, j: int) -> int:
        return i * self.ny + j


def make_grid(nx: int, ny: int, lx: float, ly: float) -> StructuredGrid:
    """Build a uniform square-cell grid with boundary patch face centres.

    Square cells (dx == dy) are required by the 5-point stencil used on
    this grid; rectangular cells are rejected.
    """
    if nx < 1 or ny < 1:
        raise ValueError(f"cell counts must be >= 1, got nx={nx}, ny={ny}")
    if lx <= 0.0 or ly <= 0.0:
        raise ValueError(f"extents must be positive, got lx={lx}, ly={ly}")
    dx = lx / nx
    dy = ly / ny
    if abs(dx - dy) > 1e-12 * max(dx, dy):
        raise ValueError(f"cells must be square: dx={dx} != dy={dy}")

    xc = (np.arange(nx) + 0.5) * dx
    yc = (np.arange(ny) + 0.5) * dy

    def patch(xs, ys) -> FieldBuffer:
        coords = np.zeros((len(xs), 3))
        coords[:, 0] = xs
        coords[:, 1] = ys
        return FieldBuffer(coords, units="m")

    patches = {
        "left": patch(np.zeros(ny), yc),
        "right": patch(np.full(ny, lx), yc),
        "bottom": patch(xc, np.zeros(nx)),
        "top": patch(xc, np.full(nx, ly)),
    }
    return StructuredGrid(nx=nx, ny=ny, lx=lx, ly=ly, patches=patches)


def write_field_csv(fld: FieldBuffer, path: str | Path) -> None:
    """Dump a field as CSV: header index,c0..c{k-1}, 17-significant-digit floats.

    17 significant decimal digits round-trip a float64 exactly, so dumps can
    be compared bit-for-bit across runs.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index"] + [f"c{j}" for j in range(fld.n_components)])
        for i, row in enumerate(fld.data):
            writer.writerow([i] + [f"{v:.17g}" for v in row])


def read_field_csv(path: str | Path) -> FieldBuffer:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n_components = len(header) - 1
        rows = [[float(v) for v in row[1:]] for row in reader]
    data = np.array(rows, dtype=np.float64).reshape(len(rows), n_components)
    return FieldBuffer(data)
