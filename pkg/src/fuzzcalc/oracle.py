"""Brute-force extension-principle reference for binary arithmetic.

This module deliberately shares no machinery with :mod:`fuzzcalc.core`.
It starts from *membership functions*: each operand is sampled on a
uniform grid spanning its own support, the combined membership is the
sup over all sample pairs of the min of the two memberships (computed by
the O(N^2) kernel in :mod:`fuzzcalc._kernels`), and cuts are read back
by scanning the composed membership for the first and last point at or
above the requested level.  Agreement between this route and the
level-wise endpoint arithmetic is what the equivalence tests check.

Resolution: with ``n`` samples per operand the reconstructed cut
endpoints are exact only up to the sample spacings, so every comparison
must use :func:`cut_tolerance`, which bounds the discretization error
for the given operands and operation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels import OP_ADD, OP_MUL, OP_SUB
from .errors import InvalidParameterError

__all__ = [
    "MembershipSamples",
    "sample_triangular",
    "compose",
    "extension_cut",
    "cut_tolerance",
    "OP_ADD",
    "OP_SUB",
    "OP_MUL",
]

DEFAULT_SAMPLES = 2001

_OP_CODES = {"add": OP_ADD, "sub": OP_SUB, "mul": OP_MUL}


@dataclass(frozen=True)
class MembershipSamples:
    """A membership function sampled on points covering its support."""

    points: np.ndarray
    membership: np.ndarray

    def __post_init__(self):
        if self.points.shape != self.membership.shape or self.points.ndim != 1:
            raise InvalidParameterError("points and membership must be equal-length 1-d")

    @property
    def support(self) -> tuple[float, float]:
        return float(self.points[0]), float(self.points[-1])


def sample_triangular(left: float, peak: float, right: float,
                      n: int = DEFAULT_SAMPLES) -> MembershipSamples:
    """Sample the triangular membership with apex ``peak`` on its support.

    The peak is always included in the sample set so that the composed
    membership can actually reach level 1.
    """
    left, peak, right = float(left), float(peak), float(right)
    if not (left <= peak <= right):
        raise InvalidParameterError(
            f"need left <= peak <= right, got ({left}, {peak}, {right})"
        )
    if right == left:
        pts = np.array([left])
        return MembershipSamples(pts, np.array([1.0]))
    pts = np.union1d(np.linspace(left, right, n), [peak])
    mu = np.empty_like(pts)
    rising = pts <= peak
    if peak > left:
        mu[rising] = (pts[rising] - left) / (peak - left)
    else:
        mu[rising] = 1.0
    if right > peak:
        mu[~rising] = (right - pts[~rising]) / (right - peak)
    else:
        mu[~rising] = 1.0
    return MembershipSamples(pts, mu)


def _op_range(a: MembershipSamples, b: MembershipSamples, op: int):
    alo, ahi = a.support
    blo, bhi = b.support
    if op == OP_ADD:
        return alo + blo, ahi + bhi
    if op == OP_SUB:
        return alo - bhi, ahi - blo
    corners = [alo * blo, alo * bhi, ahi * blo, ahi * bhi]
    return min(corners), max(corners)


def compose(a: MembershipSamples, b: MembershipSamples, op,
            nbins: int = DEFAULT_SAMPLES):
    """Sup-min composition of two sampled memberships.

    Returns ``(zs, mu)``: the uniform output grid spanning the exact
    range of the operation on the two supports, and the composed
    membership on it.
    """
    code = _OP_CODES[op] if isinstance(op, str) else int(op)
    if code not in (OP_ADD, OP_SUB, OP_MUL):
        raise InvalidParameterError(f"unsupported op {op!r}")
    zmin, zmax = _op_range(a, b, code)
    mu = _kernels.supmin_compose(
        a.points, a.membership, b.points, b.membership,
        code, zmin, zmax, nbins,
    )
    if zmax <= zmin:
        zs = np.full(nbins, zmin)
    else:
        zs = np.linspace(zmin, zmax, nbins)
    return zs, mu


def extension_cut(a: MembershipSamples, b: MembershipSamples, op,
                  alpha: float, nbins: int = DEFAULT_SAMPLES):
    """Cut of the sup-min composition at level ``alpha``.

    For ``alpha == 0`` the cut is the exact range of the operation on
    the supports (the closure of the positive-membership region); for
    higher levels it is read off the composed membership by a first/last
    threshold scan.  Precomputed ``(zs, mu)`` pairs can be passed through
    :func:`cuts_from_composition` when many levels are needed.
    """
    zs, mu = compose(a, b, op, nbins=nbins)
    return cuts_from_composition(zs, mu, [alpha])[0]


def cuts_from_composition(zs: np.ndarray, mu: np.ndarray, alphas):
    """Read cuts at several levels from one composed membership."""
    out = []
    for alpha in alphas:
        alpha = float(alpha)
        if not (0.0 <= alpha <= 1.0):
            raise InvalidParameterError(f"alpha must lie in [0, 1], got {alpha}")
        if alpha == 0.0:
            out.append((float(zs[0]), float(zs[-1])))
            continue
        # guard against the composed max falling a hair short of the level
        thresh = min(alpha, float(mu.max())) - 1e-12
        idx = np.flatnonzero(mu >= thresh)
        out.append((float(zs[idx[0]]), float(zs[idx[-1]])))
    return out


def cut_tolerance(a: MembershipSamples, b: MembershipSamples, op,
                  nbins: int = DEFAULT_SAMPLES) -> float:
    """Bound on the discretization error of :func:`extension_cut`.

    A cut endpoint reconstructed from sampled memberships can be off by
    roughly one sample spacing per operand (mapped through the
    operation) plus one output bin.  The returned bound scales with the
    operand supports:

    * add/sub: ``da + db + dz``
    * mul:     ``|B|_max * da + |A|_max * db + dz``

    where ``da``/``db`` are the operand sample spacings, ``dz`` the
    output bin width and ``|.|_max`` the largest absolute support bound.
    """
    code = _OP_CODES[op] if isinstance(op, str) else int(op)
    alo, ahi = a.support
    blo, bhi = b.support
    da = (ahi - alo) / max(len(a.points) - 1, 1)
    db = (bhi - blo) / max(len(b.points) - 1, 1)
    zmin, zmax = _op_range(a, b, code)
    dz = (zmax - zmin) / max(nbins - 1, 1)
    if code in (OP_ADD, OP_SUB):
        return da + db + dz
    ma = max(abs(alo), abs(ahi))
    mb = max(abs(blo), abs(bhi))
    return mb * da + ma * db + dz
