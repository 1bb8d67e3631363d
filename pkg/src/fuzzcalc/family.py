"""Fuzzification families: maps from a crisp value to a fuzzy number.

A family describes how a real ``x`` is blurred into a fuzzy number
``x~``.  For the calculus we need, per membership level, the cut
endpoints as functions of ``x`` together with their first and second
``x``-derivatives.  Every built-in family is a *translation* family --
the cut endpoints are ``x`` plus a level-dependent offset -- so the
first derivatives are exactly 1 and the second derivatives exactly 0.

Custom families are supported through :class:`CustomFamily`, but only
when closed-form derivative callbacks are supplied; tabulated endpoint
data with no derivative information is rejected outright because the
calculus would silently degrade.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    GAUSS_ALPHA_MIN,
    FuzzyNumber,
    ShapeFn,
    make_gaussian,
    make_lr,
    make_triangular,
    make_trapezoidal,
)
from .errors import InvalidParameterError, UnsupportedFamilyError

__all__ = [
    "Family",
    "TriangularFamily",
    "TrapezoidalFamily",
    "GaussianFamily",
    "LRFamily",
    "CustomFamily",
    "instantiate",
    "endpoints",
    "endpoint_derivatives",
    "family_from_dict",
    "family_to_dict",
]


class Family(ABC):
    """Abstract fuzzification family."""

    kind: str = "abstract"

    @abstractmethod
    def endpoints(self, x, alpha):
        """Cut endpoints ``(x1, x2)`` at level(s) ``alpha`` around ``x``.

        Broadcasts ``x`` against ``alpha`` with plain numpy rules.
        """

    def endpoint_derivatives(self, x, alpha, order: int = 1):
        """Derivatives of the endpoints with respect to ``x``.

        Returns ``(d_lo, d_hi)`` broadcast like :meth:`endpoints`.  All
        built-in families translate with ``x``, hence order 1 gives ones
        and order 2 gives zeros.
        """
        if order not in (1, 2):
            raise InvalidParameterError(
                f"derivative order must be 1 or 2, got {order}"
            )
        shape = np.broadcast(np.asarray(x, dtype=float),
                             np.asarray(alpha, dtype=float)).shape
        if order == 1:
            return np.ones(shape), np.ones(shape)
        return np.zeros(shape), np.zeros(shape)

    def instantiate(self, x: float, grid=None) -> FuzzyNumber:
        """The fuzzy number this family assigns to the crisp ``x``."""
        from .core import _as_grid

        g = _as_grid(grid)
        lo, hi = self.endpoints(float(x), g.levels)
        return FuzzyNumber(g, lo, hi)

    def to_dict(self) -> dict:
        raise UnsupportedFamilyError(
            f"family kind {self.kind!r} has no JSON descriptor"
        )


@dataclass(frozen=True)
class TriangularFamily(Family):
    """x maps to the triangular number (x - l, x, x + r)."""

    l: float
    r: float
    kind = "triangular_offset"

    def __post_init__(self):
        if self.l < 0 or self.r < 0:
            raise InvalidParameterError(
                f"offsets must be non-negative, got l={self.l}, r={self.r}"
            )

    def endpoints(self, x, alpha):
        x = np.asarray(x, dtype=float)
        a = np.asarray(alpha, dtype=float)
        return x - self.l * (1.0 - a), x + self.r * (1.0 - a)

    def instantiate(self, x: float, grid=None) -> FuzzyNumber:
        return make_triangular(x - self.l, x, x + self.r, grid=grid)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "l": self.l, "r": self.r}


@dataclass(frozen=True)
class TrapezoidalFamily(Family):
    """x maps to the trapezoid (x - l, x - inner_l, x + inner_r, x + r)."""

    l: float
    inner_l: float
    inner_r: float
    r: float
    kind = "trapezoidal_offset"

    def __post_init__(self):
        if not (0 <= self.inner_l <= self.l) or not (0 <= self.inner_r <= self.r):
            raise InvalidParameterError(
                "trapezoidal offsets need 0 <= inner_l <= l and 0 <= inner_r <= r, "
                f"got l={self.l}, inner_l={self.inner_l}, "
                f"inner_r={self.inner_r}, r={self.r}"
            )

    def endpoints(self, x, alpha):
        x = np.asarray(x, dtype=float)
        a = np.asarray(alpha, dtype=float)
        lo = (x - self.l) + a * (self.l - self.inner_l)
        hi = (x + self.r) - a * (self.r - self.inner_r)
        return lo, hi

    def instantiate(self, x: float, grid=None) -> FuzzyNumber:
        return make_trapezoidal(
            x - self.l, x - self.inner_l, x + self.inner_r, x + self.r, grid=grid
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "l": self.l,
            "inner_l": self.inner_l,
            "inner_r": self.inner_r,
            "r": self.r,
        }


@dataclass(frozen=True)
class GaussianFamily(Family):
    """x maps to a Gaussian-shaped number centred at x."""

    sigma: float
    alpha_min: float = GAUSS_ALPHA_MIN
    kind = "gaussian"

    def __post_init__(self):
        if self.sigma <= 0:
            raise InvalidParameterError(f"sigma must be positive, got {self.sigma}")
        if not (0.0 < self.alpha_min < 1.0):
            raise InvalidParameterError(
                f"alpha_min must lie in (0, 1), got {self.alpha_min}"
            )

    def endpoints(self, x, alpha):
        x = np.asarray(x, dtype=float)
        a = np.maximum(np.asarray(alpha, dtype=float), self.alpha_min)
        spread = self.sigma * np.sqrt(-2.0 * np.log(a))
        return x - spread, x + spread

    def instantiate(self, x: float, grid=None) -> FuzzyNumber:
        return make_gaussian(x, self.sigma, alpha_min=self.alpha_min, grid=grid)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sigma": self.sigma, "alpha_min": self.alpha_min}


class LRFamily(Family):
    """x maps to the LR-form number with peak x and the given flanks."""

    kind = "lr"

    def __init__(self, l: float, r: float, left: ShapeFn, right: ShapeFn):
        if l < 0 or r < 0:
            raise InvalidParameterError(
                f"spreads must be non-negative, got l={l}, r={r}"
            )
        self.l = float(l)
        self.r = float(r)
        self.left = left
        self.right = right

    def endpoints(self, x, alpha):
        x = np.asarray(x, dtype=float)
        a = np.asarray(alpha, dtype=float)
        linv = np.asarray(self.left.inverse(np.clip(a, 0.0, 1.0)), dtype=float)
        rinv = np.asarray(self.right.inverse(np.clip(a, 0.0, 1.0)), dtype=float)
        lo = (x - self.l) + self.l * linv
        hi = (x + self.r) - self.r * rinv
        return lo, hi

    def instantiate(self, x: float, grid=None) -> FuzzyNumber:
        return make_lr(x, x, self.l, self.r, self.left, self.right, grid=grid)

    def __repr__(self) -> str:
        return f"LRFamily(l={self.l}, r={self.r}, {self.left!r}, {self.right!r})"


class CustomFamily(Family):
    """User-supplied endpoint functions with mandatory derivative callbacks.

    ``endpoints_fn(x, alpha) -> (lo, hi)`` defines the family;
    ``d1_fn`` and ``d2_fn`` must return the first/second x-derivative
    pairs with the same signature.  Families given as bare tables of
    endpoints cannot be differentiated reliably, so omitting either
    callback raises :class:`UnsupportedFamilyError` at construction.
    """

    kind = "custom"

    def __init__(self, endpoints_fn: Callable, d1_fn: Callable | None = None,
                 d2_fn: Callable | None = None, name: str = "custom"):
        if d1_fn is None or d2_fn is None:
            raise UnsupportedFamilyError(
                "custom families require closed-form first and second "
                "derivative callbacks; tabulated endpoints alone are not "
                "accepted"
            )
        self._endpoints = endpoints_fn
        self._d1 = d1_fn
        self._d2 = d2_fn
        self.name = name

    def endpoints(self, x, alpha):
        lo, hi = self._endpoints(np.asarray(x, dtype=float),
                                 np.asarray(alpha, dtype=float))
        return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)

    def endpoint_derivatives(self, x, alpha, order: int = 1):
        if order not in (1, 2):
            raise InvalidParameterError(
                f"derivative order must be 1 or 2, got {order}"
            )
        fn = self._d1 if order == 1 else self._d2
        lo, hi = fn(np.asarray(x, dtype=float), np.asarray(alpha, dtype=float))
        shape = np.broadcast(np.asarray(x, dtype=float),
                             np.asarray(alpha, dtype=float)).shape
        return (np.broadcast_to(np.asarray(lo, dtype=float), shape),
                np.broadcast_to(np.asarray(hi, dtype=float), shape))

    def __repr__(self) -> str:
        return f"CustomFamily({self.name!r})"


# ---------------------------------------------------------------------------
# module-level op aliases and JSON descriptors
# ---------------------------------------------------------------------------


def instantiate(fam: Family, x: float, grid=None) -> FuzzyNumber:
    return fam.instantiate(x, grid=grid)


def endpoints(fam: Family, x, alpha):
    return fam.endpoints(x, alpha)


def endpoint_derivatives(fam: Family, x, alpha, order: int = 1):
    return fam.endpoint_derivatives(x, alpha, order=order)


_JSON_KINDS = {
    "triangular_offset": (TriangularFamily, {"l", "r"}, set()),
    "trapezoidal_offset": (
        TrapezoidalFamily,
        {"l", "inner_l", "inner_r", "r"},
        set(),
    ),
    "gaussian": (GaussianFamily, {"sigma"}, {"alpha_min"}),
}


def family_to_dict(fam: Family) -> dict:
    return fam.to_dict()


def family_from_dict(data: dict) -> Family:
    """Build a family from its JSON descriptor.

    Only the parametric kinds are serializable; ``lr`` and ``custom``
    families carry callables and exist through the library API alone.
    """
    if not isinstance(data, dict) or "kind" not in data:
        raise InvalidParameterError(
            "family descriptor must be an object with a 'kind' field"
        )
    kind = data["kind"]
    if kind in ("lr", "custom"):
        raise InvalidParameterError(
            f"family kind {kind!r} carries callables and has no JSON form; "
            "construct it through the library API"
        )
    if kind not in _JSON_KINDS:
        known = ", ".join(sorted(_JSON_KINDS))
        raise InvalidParameterError(
            f"unknown family kind {kind!r}; expected one of: {known}"
        )
    cls, required, optional = _JSON_KINDS[kind]
    given = set(data) - {"kind"}
    missing = required - given
    unknown = given - required - optional
    if missing:
        raise InvalidParameterError(
            f"family {kind!r} is missing parameter(s): {sorted(missing)}"
        )
    if unknown:
        raise InvalidParameterError(
            f"family {kind!r} got unknown parameter(s): {sorted(unknown)}"
        )
    params = {k: float(data[k]) for k in given}
    return cls(**params)
