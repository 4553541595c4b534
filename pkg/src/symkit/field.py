"""Grid data model: scalar fields, cell-mask sets, distribution functions, file I/O.

Everything lives on uniform, origin-centered, cell-centered grids in dimension
1, 2 or 3.  The cell with multi-index ``(i_1, ..., i_d)`` has its center at
``((i_k - (n_k - 1)/2) * h)_k``, so the grid straddles the origin symmetrically
(for odd extents a cell center sits exactly at 0).  A field represents a
function supported in its box; every functional treats it as 0 outside.

All objects are immutable after construction and safe to share between
threads; operations in this package are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "GridSet",
    "DistributionFunction",
    "FieldFormatError",
    "measure",
    "distribution_function",
    "layer_cake_reconstruct",
    "save",
    "load",
    "load_field",
    "load_set",
]

_SUPPORTED_DIMS = (1, 2, 3)
_FIELD_TAG = "SYMKIT-FIELD 1"
_SET_TAG = "SYMKIT-SET 1"


class FieldFormatError(ValueError):
    """Structured parse error for field/set files; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid descriptor: per-axis extents and spacing."""

    shape: tuple[int, ...]
    h: float

    def __post_init__(self):
        if len(self.shape) not in _SUPPORTED_DIMS:
            raise ValueError(f"unsupported dimension {len(self.shape)}")
        if any(int(n) <= 0 or int(n) != n for n in self.shape):
            raise ValueError(f"extents must be positive integers, got {self.shape}")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError(f"spacing must be positive and finite, got {self.h}")
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        object.__setattr__(self, "h", float(self.h))

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def ncells(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    @property
    def box_volume(self) -> float:
        return self.ncells * self.cell_volume

    def axis_coords(self, k: int) -> np.ndarray:
        """Cell-center coordinates along axis k."""
        n = self.shape[k]
        return (np.arange(n) - (n - 1) / 2.0) * self.h

    def coords(self) -> list[np.ndarray]:
        """Broadcastable cell-center coordinate arrays, one per axis."""
        return list(np.meshgrid(*[self.axis_coords(k) for k in range(self.dim)], indexing="ij"))

    def radius2(self) -> np.ndarray:
        """Squared Euclidean distance of every cell center to the origin."""
        return _radius2(self.shape, self.h)

    def half_widths(self) -> tuple[float, ...]:
        """Physical half-width of the box per axis (box edge, not last center)."""
        return tuple(n * self.h / 2.0 for n in self.shape)


@lru_cache(maxsize=64)
def _radius2_cached(shape: tuple[int, ...]) -> np.ndarray:
    # integer squared distances in units of (h/2)^2, exact
    axes = [2 * np.arange(n, dtype=np.int64) - (n - 1) for n in shape]
    grids = np.meshgrid(*axes, indexing="ij")
    r2 = sum(g.astype(np.int64) ** 2 for g in grids)
    r2.setflags(write=False)
    return r2


def _radius2(shape: tuple[int, ...], h: float) -> np.ndarray:
    return _radius2_cached(shape) * (h * h / 4.0)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=a.dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ScalarField:
    """Real-valued function sampled at cell centers, extended by 0 outside the box."""

    grid: Grid
    values: np.ndarray
    nonneg: bool = dc_field(default=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", _freeze(v))
        object.__setattr__(self, "nonneg", bool(v.min() >= 0.0) if v.size else True)

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def dim(self) -> int:
        return self.grid.dim

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, values)

    def integral(self) -> float:
        return float(self.values.sum()) * self.grid.cell_volume


@dataclass(frozen=True)
class GridSet:
    """Finite-measure set encoded as a boolean cell mask on a grid."""

    grid: Grid
    mask: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != self.grid.shape:
            raise ValueError(f"mask shape {m.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "mask", _freeze(m))

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def dim(self) -> int:
        return self.grid.dim

    def count(self) -> int:
        return int(self.mask.sum())

    def indicator(self) -> ScalarField:
        return ScalarField(self.grid, self.mask.astype(np.float64))


def measure(A: GridSet) -> float:
    """Measure of a grid set: (number of true cells) * h^d."""
    return A.count() * A.grid.cell_volume


@dataclass(frozen=True)
class DistributionFunction:
    """Superlevel-measure step function tau -> |{|f| > tau}|.

    ``levels`` are the sorted distinct values of |f|; ``measures[i]`` is the
    measure of ``{|f| > levels[i]}``.  Between levels the function is constant;
    below the smallest level it equals the total cell measure.
    """

    levels: np.ndarray
    measures: np.ndarray
    total_measure: float

    def __post_init__(self):
        lv = _freeze(np.asarray(self.levels, dtype=np.float64))
        mu = _freeze(np.asarray(self.measures, dtype=np.float64))
        if lv.ndim != 1 or lv.shape != mu.shape:
            raise ValueError("levels and measures must be 1-d arrays of equal length")
        if lv.size and np.any(np.diff(lv) <= 0):
            raise ValueError("levels must be strictly increasing")
        if mu.size and np.any(np.diff(mu) > 0):
            raise ValueError("measures must be nonincreasing in the level")
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "measures", mu)

    def __call__(self, tau) -> np.ndarray | float:
        tau = np.asarray(tau, dtype=np.float64)
        idx = np.searchsorted(self.levels, tau, side="right") - 1
        out = np.where(idx >= 0, self.measures[np.maximum(idx, 0)], self.total_measure)
        return float(out) if out.ndim == 0 else out

    def __eq__(self, other) -> bool:
        if not isinstance(other, DistributionFunction):
            return NotImplemented
        return (
            self.levels.shape == other.levels.shape
            and bool(np.all(self.levels == other.levels))
            and bool(np.all(self.measures == other.measures))
            and self.total_measure == other.total_measure
        )


def distribution_function(f: ScalarField) -> DistributionFunction:
    """Distribution function of |f| as a step function over its distinct levels."""
    av = np.abs(f.values).ravel()
    srt = np.sort(av)
    levels = np.unique(srt)
    # cells strictly above each level
    counts = av.size - np.searchsorted(srt, levels, side="right")
    vol = f.grid.cell_volume
    return DistributionFunction(levels, counts * vol, av.size * vol)


def layer_cake_reconstruct(f: ScalarField, quadrature_levels: int) -> ScalarField:
    """Rebuild |f| as a finite sum of superlevel-indicator layers.

    When ``quadrature_levels`` is at least the number of distinct positive
    values of |f| the reconstruction is exact: with positive levels
    ``0 = t_0 < t_1 < ... < t_m`` the layer sum is
    ``sum_j (t_j - t_{j-1}) * 1_{|f| >= t_j}``.  With fewer levels a
    subsample of the level set is used and the result underestimates |f|.
    """
    if quadrature_levels <= 0:
        raise ValueError("quadrature_levels must be positive")
    av = np.abs(f.values)
    pos = np.unique(av[av > 0])
    if pos.size == 0:
        return ScalarField(f.grid, np.zeros_like(av))
    if quadrature_levels < pos.size:
        idx = np.unique(np.round(np.linspace(0, pos.size - 1, quadrature_levels)).astype(int))
        pos = pos[idx]
    gaps = np.diff(pos, prepend=0.0)
    cumw = np.concatenate([[0.0], np.cumsum(gaps)])
    rank = np.searchsorted(pos, av, side="right")
    return ScalarField(f.grid, cumw[rank])


# ----------------------------------------------------------------------------
# file format
#
# line 1: tag ("SYMKIT-FIELD 1" or "SYMKIT-SET 1")
# line 2: d
# line 3: n_1 ... n_d
# line 4: h  (shortest round-trip decimal)
# then one value per line, row-major with the last axis fastest.
# ----------------------------------------------------------------------------


def save(obj: ScalarField | GridSet, path) -> None:
    """Write a field or set; the round trip through load() is bit-exact."""
    if isinstance(obj, ScalarField):
        tag, flat = _FIELD_TAG, obj.values.ravel()
        body = "\n".join(repr(float(v)) for v in flat)
    elif isinstance(obj, GridSet):
        tag, flat = _SET_TAG, obj.mask.ravel()
        body = "\n".join("1" if v else "0" for v in flat)
    else:
        raise TypeError(f"cannot save object of type {type(obj).__name__}")
    g = obj.grid
    header = "\n".join([tag, str(g.dim), " ".join(str(n) for n in g.shape), repr(g.h)])
    with open(path, "w") as fh:
        fh.write(header + "\n" + body + "\n")


def _parse_header(lines: list[str]):
    if not lines:
        raise FieldFormatError("empty file", line=1)
    tag = lines[0].strip()
    if tag not in (_FIELD_TAG, _SET_TAG):
        raise FieldFormatError(f"unrecognized format tag {tag!r}", line=1)
    if len(lines) < 4:
        raise FieldFormatError("truncated header (need 4 header lines)", line=len(lines))
    try:
        d = int(lines[1])
    except ValueError:
        raise FieldFormatError(f"dimension is not an integer: {lines[1].strip()!r}", line=2) from None
    if d not in _SUPPORTED_DIMS:
        raise FieldFormatError(f"unsupported dimension {d}", line=2)
    parts = lines[2].split()
    if len(parts) != d:
        raise FieldFormatError(f"expected {d} extents, got {len(parts)}", line=3)
    try:
        shape = tuple(int(p) for p in parts)
    except ValueError:
        raise FieldFormatError(f"extents must be integers: {lines[2].strip()!r}", line=3) from None
    try:
        h = float(lines[3])
    except ValueError:
        raise FieldFormatError(f"spacing is not a number: {lines[3].strip()!r}", line=4) from None
    try:
        grid = Grid(shape, h)
    except ValueError as e:
        raise FieldFormatError(str(e), line=3) from None
    return tag, grid


def _parse_payload(lines: list[str], grid: Grid, as_mask: bool) -> np.ndarray:
    ncells = grid.ncells
    vals = []
    for off, raw in enumerate(lines):
        s = raw.strip()
        if not s:
            continue
        lineno = 5 + off
        try:
            v = float(s)
        except ValueError:
            raise FieldFormatError(f"unparseable value {s!r}", line=lineno) from None
        if not math.isfinite(v):
            raise FieldFormatError(f"non-finite value {s!r}", line=lineno)
        if as_mask and v not in (0.0, 1.0):
            raise FieldFormatError(f"mask value must be 0 or 1, got {s!r}", line=lineno)
        vals.append(v)
        if len(vals) > ncells:
            raise FieldFormatError(
                f"cell-count mismatch: expected {ncells} values, found more", line=lineno
            )
    if len(vals) != ncells:
        raise FieldFormatError(
            f"cell-count mismatch: expected {ncells} values, got {len(vals)}",
            line=4 + len(lines),
        )
    arr = np.array(vals, dtype=np.float64).reshape(grid.shape)
    return arr


def load(path) -> ScalarField | GridSet:
    """Load a field or set file, dispatching on its tag."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    tag, grid = _parse_header(lines)
    if tag == _FIELD_TAG:
        return ScalarField(grid, _parse_payload(lines[4:], grid, as_mask=False))
    return GridSet(grid, _parse_payload(lines[4:], grid, as_mask=True).astype(bool))


def load_field(path) -> ScalarField:
    obj = load(path)
    if not isinstance(obj, ScalarField):
        raise FieldFormatError("expected a SYMKIT-FIELD file, found a set", line=1)
    return obj


def load_set(path) -> GridSet:
    obj = load(path)
    if not isinstance(obj, GridSet):
        raise FieldFormatError("expected a SYMKIT-SET file, found a field", line=1)
    return obj
