"""Fuzzy numbers represented by their alpha-cut families.

A fuzzy number is stored as a finite family of closed intervals: for each
membership level ``alpha`` of a shared grid, the cut ``[lo(alpha),
hi(alpha)]``.  Normality, convexity and compact support translate into
simple array facts -- cuts nest as ``alpha`` grows, every cut is a valid
interval, and all endpoints are finite.  Arithmetic acts level-wise:

* addition / subtraction combine endpoints (subtraction pairs the lower
  endpoint of the left operand with the upper endpoint of the right one);
* multiplication takes the min and max of the four endpoint products;
* scalar multiplication scales endpoints, swapping them for negative
  scalars.

The distance between two fuzzy numbers is the largest endpoint
discrepancy over all levels, which on compact cuts is exactly the
supremum of level-wise Hausdorff distances.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import (
    InvalidParameterError,
    RangeError,
    ShapeFunctionError,
)

__all__ = [
    "NEST_TOL",
    "DEFAULT_LEVELS",
    "GAUSS_ALPHA_MIN",
    "AlphaGrid",
    "default_grid",
    "Interval",
    "ShapeFn",
    "FuzzyNumber",
    "ValidityReport",
    "make_triangular",
    "make_trapezoidal",
    "make_gaussian",
    "make_lr",
    "crisp",
    "alpha_cut",
    "add",
    "sub",
    "mul",
    "scalar_mul",
    "distance",
    "validate",
]

#: Slack allowed when checking that cuts nest monotonically.
NEST_TOL = 1e-9

#: Number of levels in the default alpha grid {0, 0.01, ..., 1}.
DEFAULT_LEVELS = 101

#: Default clamping level that keeps Gaussian supports compact.
GAUSS_ALPHA_MIN = 1e-4


# ---------------------------------------------------------------------------
# grids and intervals
# ---------------------------------------------------------------------------


class AlphaGrid:
    """A strictly increasing grid of membership levels from 0.0 to 1.0."""

    __slots__ = ("levels",)

    def __init__(self, levels: Sequence[float]):
        arr = np.ascontiguousarray(levels, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise InvalidParameterError(
                "an alpha grid needs at least the two levels 0 and 1"
            )
        if not np.all(np.diff(arr) > 0.0):
            raise InvalidParameterError("alpha grid levels must be strictly increasing")
        if arr[0] != 0.0 or arr[-1] != 1.0:
            raise InvalidParameterError(
                f"alpha grid must span [0, 1] exactly, got [{arr[0]}, {arr[-1]}]"
            )
        arr.setflags(write=False)
        self.levels = arr

    @classmethod
    def uniform(cls, n: int = DEFAULT_LEVELS) -> "AlphaGrid":
        """Uniform grid with ``n`` levels (n >= 2)."""
        if int(n) != n or n < 2:
            raise InvalidParameterError(f"grid size must be an integer >= 2, got {n!r}")
        return cls(np.linspace(0.0, 1.0, int(n)))

    def merge(self, other: "AlphaGrid") -> "AlphaGrid":
        """Union of two grids (still a valid grid)."""
        if self == other:
            return self
        return AlphaGrid(np.union1d(self.levels, other.levels))

    def __len__(self) -> int:
        return int(self.levels.size)

    def __iter__(self) -> Iterator[float]:
        return iter(self.levels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlphaGrid):
            return NotImplemented
        return self.levels.shape == other.levels.shape and bool(
            np.all(self.levels == other.levels)
        )

    def __hash__(self) -> int:
        return hash((self.levels.size, self.levels.tobytes()))

    def __repr__(self) -> str:
        return f"AlphaGrid({len(self)} levels)"


def default_grid(n: int = DEFAULT_LEVELS) -> AlphaGrid:
    """The package-wide default grid: ``n`` uniform levels."""
    return AlphaGrid.uniform(n)


def _as_grid(grid) -> AlphaGrid:
    if grid is None:
        return default_grid()
    if isinstance(grid, AlphaGrid):
        return grid
    if isinstance(grid, (int, np.integer)):
        return AlphaGrid.uniform(int(grid))
    return AlphaGrid(grid)


@dataclass(frozen=True)
class Interval:
    """A closed real interval ``[lo, hi]``."""

    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise InvalidParameterError("interval endpoints must be finite")
        if self.lo > self.hi:
            raise InvalidParameterError(
                f"interval lower endpoint {self.lo} exceeds upper endpoint {self.hi}"
            )

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def as_tuple(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def __iter__(self):
        yield self.lo
        yield self.hi


def _ordered_interval(lo: float, hi: float) -> Interval:
    """Interval from a cut pair, absorbing sub-tolerance inversions.

    Cut families are only required to be ordered within ``NEST_TOL``
    (endpoint formulas can cross by a few ulp at degenerate levels), so
    accessors must not hard-fail on a pair the validator accepts.
    """
    if hi < lo <= hi + NEST_TOL:
        lo, hi = hi, lo
    return Interval(lo, hi)


# ---------------------------------------------------------------------------
# shape functions for LR-form numbers
# ---------------------------------------------------------------------------


class ShapeFn:
    """An invertible, non-decreasing map of [0, 1] onto itself.

    Used to describe the flanks of LR-form numbers.  ``value`` evaluates
    the map, ``inverse`` evaluates its inverse; when no inverse callable
    is supplied one is derived numerically by bisection.  Construction
    validates the boundary values and monotonicity on a sample grid and
    raises :class:`ShapeFunctionError` on violation.
    """

    _VALIDATION_SAMPLES = 257
    _BOUNDARY_TOL = 1e-9

    def __init__(self, fn: Callable[[float], float],
                 inverse: Callable[[float], float] | None = None,
                 name: str = "shape"):
        self._fn = fn
        self._inv = inverse
        self.name = name
        self._validate()

    def _validate(self) -> None:
        ts = np.linspace(0.0, 1.0, self._VALIDATION_SAMPLES)
        vals = np.array([float(self._fn(t)) for t in ts])
        if abs(vals[0]) > self._BOUNDARY_TOL or abs(vals[-1] - 1.0) > self._BOUNDARY_TOL:
            raise ShapeFunctionError(
                f"shape function {self.name!r} must map 0 to 0 and 1 to 1, "
                f"got {vals[0]!r} and {vals[-1]!r}"
            )
        if np.any(np.diff(vals) < -self._BOUNDARY_TOL):
            k = int(np.argmin(np.diff(vals)))
            raise ShapeFunctionError(
                f"shape function {self.name!r} decreases between "
                f"t={ts[k]:.6f} and t={ts[k + 1]:.6f}"
            )
        if self._inv is not None:
            back = np.array([float(self._inv(v)) for v in vals])
            if np.max(np.abs(back - ts)) > 1e-6:
                raise ShapeFunctionError(
                    f"supplied inverse of {self.name!r} does not invert it"
                )

    def value(self, t: float) -> float:
        return float(self._fn(t))

    __call__ = value

    def inverse(self, alpha):
        """Inverse image of membership level(s) ``alpha`` (vectorized)."""
        a = np.asarray(alpha, dtype=float)
        if np.any(a < -1e-12) or np.any(a > 1.0 + 1e-12):
            raise RangeError("shape inverse queried outside [0, 1]")
        a = np.clip(a, 0.0, 1.0)
        if self._inv is not None:
            out = np.array([float(self._inv(v)) for v in np.atleast_1d(a)])
        else:
            out = self._bisect_inverse(np.atleast_1d(a))
        return out.reshape(a.shape) if a.ndim else float(out[0])

    def _bisect_inverse(self, alphas: np.ndarray) -> np.ndarray:
        lo = np.zeros_like(alphas)
        hi = np.ones_like(alphas)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            vals = np.array([self.value(t) for t in mid])
            take_hi = vals < alphas
            lo = np.where(take_hi, mid, lo)
            hi = np.where(take_hi, hi, mid)
        return 0.5 * (lo + hi)

    @classmethod
    def identity(cls) -> "ShapeFn":
        return cls(lambda t: t, inverse=lambda a: a, name="identity")

    def __repr__(self) -> str:
        return f"ShapeFn({self.name!r})"


# ---------------------------------------------------------------------------
# the fuzzy number itself
# ---------------------------------------------------------------------------


class FuzzyNumber:
    """A fuzzy number stored as lower/upper cut endpoints over a grid.

    Instances are immutable.  ``tag`` optionally records the parametric
    form the number was built from (triangular, trapezoidal, gaussian,
    lr) so that serialization can round-trip construction parameters.
    """

    __slots__ = ("grid", "lo", "hi", "tag")

    def __init__(self, grid, lo, hi, tag: dict | None = None):
        grid = _as_grid(grid)
        lo = np.ascontiguousarray(lo, dtype=float)
        hi = np.ascontiguousarray(hi, dtype=float)
        if lo.shape != (len(grid),) or hi.shape != (len(grid),):
            raise InvalidParameterError(
                f"cut arrays must have shape ({len(grid)},), "
                f"got {lo.shape} and {hi.shape}"
            )
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "tag", tag)

    def __setattr__(self, name, value):  # pragma: no cover - guard rail
        raise AttributeError("FuzzyNumber is immutable")

    # -- queries ------------------------------------------------------------

    @property
    def levels(self) -> np.ndarray:
        return self.grid.levels

    @property
    def cuts(self) -> np.ndarray:
        """All cuts as an ``(n_levels, 2)`` array."""
        return np.column_stack((self.lo, self.hi))

    @property
    def support(self) -> Interval:
        return _ordered_interval(float(self.lo[0]), float(self.hi[0]))

    @property
    def core(self) -> Interval:
        return _ordered_interval(float(self.lo[-1]), float(self.hi[-1]))

    def alpha_cut(self, alpha: float) -> Interval:
        """Cut at any level in [0, 1], interpolating between grid levels."""
        a = float(alpha)
        if not (0.0 <= a <= 1.0):
            raise RangeError(f"alpha must lie in [0, 1], got {a}")
        lo = float(np.interp(a, self.levels, self.lo))
        hi = float(np.interp(a, self.levels, self.hi))
        return _ordered_interval(lo, hi)

    def resample(self, grid) -> "FuzzyNumber":
        """Linear re-interpolation of the cut family onto another grid."""
        grid = _as_grid(grid)
        if grid == self.grid:
            return self
        lo = np.interp(grid.levels, self.levels, self.lo)
        hi = np.interp(grid.levels, self.levels, self.hi)
        return FuzzyNumber(grid, lo, hi, tag=None)

    def is_crisp(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.hi - self.lo <= tol))

    # -- arithmetic sugar ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, FuzzyNumber):
            return add(self, other)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, FuzzyNumber):
            return sub(self, other)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, FuzzyNumber):
            return mul(self, other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return scalar_mul(float(other), self)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return scalar_mul(float(other), self)
        return NotImplemented

    def __neg__(self):
        return scalar_mul(-1.0, self)

    # -- equality and repr --------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, FuzzyNumber):
            return NotImplemented
        return (
            self.grid == other.grid
            and bool(np.all(self.lo == other.lo))
            and bool(np.all(self.hi == other.hi))
            and self.tag == other.tag
        )

    __hash__ = None  # mutable-array semantics: not hashable

    def __repr__(self) -> str:
        s, c = self.support, self.core
        return (
            f"FuzzyNumber(support=[{s.lo:g}, {s.hi:g}], "
            f"core=[{c.lo:g}, {c.hi:g}], levels={len(self.grid)})"
        )

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "grid": self.levels.tolist(),
            "cuts": self.cuts.tolist(),
            "tag": self.tag,
        }

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "FuzzyNumber":
        try:
            grid = AlphaGrid(data["grid"])
            cuts = np.asarray(data["cuts"], dtype=float)
            tag = data.get("tag")
        except (KeyError, TypeError) as exc:
            raise InvalidParameterError(f"malformed fuzzy-number payload: {exc}")
        if cuts.ndim != 2 or cuts.shape != (len(grid), 2):
            raise InvalidParameterError(
                f"cut payload must have shape ({len(grid)}, 2), got {cuts.shape}"
            )
        return cls(grid, cuts[:, 0], cuts[:, 1], tag=tag)

    @classmethod
    def from_json(cls, text: str) -> "FuzzyNumber":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def make_triangular(left: float, peak: float, right: float,
                    grid=None) -> FuzzyNumber:
    """Triangular number with the given support endpoints and peak.

    The cut at level ``alpha`` is
    ``[left + alpha*(peak - left), right - alpha*(right - peak)]``.
    Degenerate (zero-width) sides are legal; ``left <= peak <= right``
    is required.
    """
    left, peak, right = float(left), float(peak), float(right)
    if not (left <= peak <= right):
        raise InvalidParameterError(
            f"triangular parameters must satisfy left <= peak <= right, "
            f"got ({left}, {peak}, {right})"
        )
    g = _as_grid(grid)
    a = g.levels
    lo = left + a * (peak - left)
    hi = right - a * (right - peak)
    tag = {"kind": "triangular", "left": left, "peak": peak, "right": right}
    return FuzzyNumber(g, lo, hi, tag=tag)


def make_trapezoidal(a: float, b: float, c: float, d: float,
                     grid=None) -> FuzzyNumber:
    """Trapezoidal number with support [a, d] and plateau [b, c]."""
    a, b, c, d = float(a), float(b), float(c), float(d)
    if not (a <= b <= c <= d):
        raise InvalidParameterError(
            f"trapezoidal parameters must be non-decreasing, got ({a}, {b}, {c}, {d})"
        )
    g = _as_grid(grid)
    al = g.levels
    lo = a + al * (b - a)
    hi = d - al * (d - c)
    tag = {"kind": "trapezoidal", "a": a, "b": b, "c": c, "d": d}
    return FuzzyNumber(g, lo, hi, tag=tag)


def make_gaussian(mu: float, sigma: float, alpha_min: float = GAUSS_ALPHA_MIN,
                  grid=None) -> FuzzyNumber:
    """Gaussian-shaped number, compactified by clamping small levels.

    The cut at level ``alpha`` is ``mu -/+ sigma*sqrt(-2*ln(max(alpha,
    alpha_min)))``; clamping at ``alpha_min`` keeps the support bounded.
    """
    mu, sigma, alpha_min = float(mu), float(sigma), float(alpha_min)
    if sigma <= 0.0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    if not (0.0 < alpha_min < 1.0):
        raise InvalidParameterError(
            f"alpha_min must lie strictly between 0 and 1, got {alpha_min}"
        )
    g = _as_grid(grid)
    a = np.maximum(g.levels, alpha_min)
    spread = sigma * np.sqrt(-2.0 * np.log(a))
    tag = {"kind": "gaussian", "mu": mu, "sigma": sigma, "alpha_min": alpha_min}
    return FuzzyNumber(g, mu - spread, mu + spread, tag=tag)


def make_lr(peak_lo: float, peak_hi: float, l: float, r: float,
            left: ShapeFn, right: ShapeFn, grid=None) -> FuzzyNumber:
    """LR-form number from peak interval, spreads and shape functions.

    The cut at level ``alpha`` is
    ``[(peak_lo - l) + l*Linv(alpha), (peak_hi + r) - r*Rinv(alpha)]``
    where ``Linv``/``Rinv`` are the shape-function inverses.
    """
    peak_lo, peak_hi, l, r = float(peak_lo), float(peak_hi), float(l), float(r)
    if peak_lo > peak_hi:
        raise InvalidParameterError(
            f"peak interval is inverted: [{peak_lo}, {peak_hi}]"
        )
    if l < 0.0 or r < 0.0:
        raise InvalidParameterError(f"spreads must be non-negative, got l={l}, r={r}")
    if not isinstance(left, ShapeFn) or not isinstance(right, ShapeFn):
        raise ShapeFunctionError("left/right must be ShapeFn instances")
    g = _as_grid(grid)
    a = g.levels
    lo = (peak_lo - l) + l * np.asarray(left.inverse(a), dtype=float)
    hi = (peak_hi + r) - r * np.asarray(right.inverse(a), dtype=float)
    tag = {"kind": "lr", "peak_lo": peak_lo, "peak_hi": peak_hi, "l": l, "r": r}
    return FuzzyNumber(g, lo, hi, tag=tag)


def crisp(value: float, grid=None) -> FuzzyNumber:
    """Embed a real number as a degenerate fuzzy number."""
    return make_triangular(value, value, value, grid=grid)


# ---------------------------------------------------------------------------
# level-wise arithmetic
# ---------------------------------------------------------------------------


def _aligned(a: FuzzyNumber, b: FuzzyNumber):
    """Common grid plus both cut families resampled onto it."""
    if a.grid == b.grid:
        return a.grid, a.lo, a.hi, b.lo, b.hi
    g = a.grid.merge(b.grid)
    ra, rb = a.resample(g), b.resample(g)
    return g, ra.lo, ra.hi, rb.lo, rb.hi


def add(a: FuzzyNumber, b: FuzzyNumber) -> FuzzyNumber:
    """Level-wise sum ``[a1 + b1, a2 + b2]``."""
    g, alo, ahi, blo, bhi = _aligned(a, b)
    return FuzzyNumber(g, alo + blo, ahi + bhi)


def sub(a: FuzzyNumber, b: FuzzyNumber) -> FuzzyNumber:
    """Level-wise difference ``[a1 - b2, a2 - b1]``.

    This is the extension-principle difference; in general
    ``sub(a, a)`` is not crisp zero.
    """
    g, alo, ahi, blo, bhi = _aligned(a, b)
    return FuzzyNumber(g, alo - bhi, ahi - blo)


def mul(a: FuzzyNumber, b: FuzzyNumber) -> FuzzyNumber:
    """Level-wise product via the four endpoint products."""
    g, alo, ahi, blo, bhi = _aligned(a, b)
    p = np.stack((alo * blo, alo * bhi, ahi * blo, ahi * bhi))
    return FuzzyNumber(g, p.min(axis=0), p.max(axis=0))


def scalar_mul(k: float, a: FuzzyNumber) -> FuzzyNumber:
    """Scale by a real ``k``; negative ``k`` swaps the endpoints."""
    k = float(k)
    if k >= 0.0:
        return FuzzyNumber(a.grid, k * a.lo, k * a.hi)
    return FuzzyNumber(a.grid, k * a.hi, k * a.lo)


def alpha_cut(a: FuzzyNumber, alpha: float) -> Interval:
    """Cut of ``a`` at an arbitrary level (see :meth:`FuzzyNumber.alpha_cut`)."""
    return a.alpha_cut(alpha)


def distance(a: FuzzyNumber, b: FuzzyNumber) -> float:
    """Supremum over levels of the endpoint discrepancies.

    On compact cuts this equals the supremum of the level-wise Hausdorff
    distances, evaluated here at grid resolution.
    """
    _, alo, ahi, blo, bhi = _aligned(a, b)
    return float(
        max(np.max(np.abs(alo - blo)), np.max(np.abs(ahi - bhi)))
    )


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass
class ValidityReport:
    """Outcome of :func:`validate` -- ``ok`` plus structured findings."""

    ok: bool
    issues: list[str] = field(default_factory=list)
    #: worst adjacent-level nesting violation as (index, magnitude), or None
    worst_nesting: tuple[int, float] | None = None
    #: level indices whose interval has lo > hi beyond tolerance
    inverted_levels: list[int] = field(default_factory=list)

    def summary(self) -> str:
        if self.ok:
            return "valid fuzzy number at grid resolution"
        return "; ".join(self.issues)


def validate(a: FuzzyNumber, tol: float = NEST_TOL) -> ValidityReport:
    """Check interval well-formedness, nesting and bounded support.

    Runs at grid resolution: each stored cut must be a valid interval
    (``lo <= hi`` within ``tol``), lower endpoints must not decrease and
    upper endpoints must not increase as the level grows (within
    ``tol``), and every endpoint must be finite.
    """
    report = ValidityReport(ok=True)

    if not (np.all(np.isfinite(a.lo)) and np.all(np.isfinite(a.hi))):
        report.ok = False
        report.issues.append("non-finite cut endpoints (unbounded support)")

    inverted = np.flatnonzero(a.lo - a.hi > tol)
    if inverted.size:
        report.ok = False
        report.inverted_levels = inverted.tolist()
        k = int(inverted[np.argmax((a.lo - a.hi)[inverted])])
        report.issues.append(
            f"invalid interval at alpha={a.levels[k]:.6g}: "
            f"lo={a.lo[k]!r} > hi={a.hi[k]!r}"
        )

    dlo = np.diff(a.lo)
    dhi = np.diff(a.hi)
    viol = np.maximum(-dlo, dhi)  # positive where nesting is broken
    worst = int(np.argmax(viol)) if viol.size else 0
    if viol.size and viol[worst] > tol:
        report.ok = False
        report.worst_nesting = (worst, float(viol[worst]))
        report.issues.append(
            "cuts fail to nest between "
            f"alpha={a.levels[worst]:.6g} and alpha={a.levels[worst + 1]:.6g} "
            f"(violation {viol[worst]:.3g})"
        )
    return report
