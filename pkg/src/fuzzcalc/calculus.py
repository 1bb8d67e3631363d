"""Level-wise calculus of fuzzy-valued expressions in one crisp variable.

An expression over the variable ``X`` together with a fuzzification
family defines, at every membership level alpha, a pair of endpoint
functions of the crisp parameter x: the lower and upper ends of the
output cut.  This module evaluates those endpoint functions and their
first and second derivatives by propagating second-order jets (value,
d/dx, d2/dx2) through the expression tree, interval-style: one jet for
each cut endpoint.

Products are where differentiability can fail: the output endpoints are
the min/max of four candidate products, and when the extreme switches
between candidates with different slopes the endpoint function has a
kink.  The verdict machinery classifies every detected tie:

* ties whose candidate jets agree (degenerate peaks, crisp operands,
  symmetric duplicates) are harmless and silently skipped;
* ties at a nonzero common value with disagreeing slopes are corners —
  the endpoint function is genuinely non-differentiable there;
* ties at a zero product value are corners only when the vanishing
  operand endpoint strictly changes sign across the level family;
  when the zero sits at the boundary of the level family the kink is
  one-sided and the point is flagged as marginal instead, with the
  one-sided finite-difference check standing in for the central one.

Because the switching level need not sit on the alpha grid, every
product operand endpoint is additionally scanned for strict sign
changes between adjacent grid levels; each crossing is located by
bisection in alpha and the tie analysis is repeated at that level.

A finite-difference cross-check of every reported derivative closes the
loop: a disagreement beyond tolerance downgrades the verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import expr as ex
from ._kernels import four_product_jets
from .core import AlphaGrid, FuzzyNumber, _as_grid, validate
from .errors import (
    EvaluationError,
    InvalidParameterError,
    NotDifferentiableError,
    RangeError,
)
from .family import Family

__all__ = [
    "TIE_TOL",
    "JET_GAP_TOL",
    "FD_STEP",
    "FD_RTOL",
    "FD_ONESIDED_RTOL",
    "FD2_RTOL",
    "FD2_ONESIDED_RTOL",
    "PROBE_STEP",
    "DiffStatus",
    "BranchEvent",
    "Verdict",
    "FDReport",
    "DerivativeResult",
    "ContinuityReport",
    "eval_levels",
    "eval_fuzzy",
    "derivative",
    "second_derivative",
    "differentiability_check",
    "screen_verdicts",
    "continuity_probe",
]

# Candidate products within TIE_TOL * (1 + scale) of the extreme count as tied.
TIE_TOL = 1e-9
# Tied candidates whose d1 (or d2) spread exceeds JET_GAP_TOL * (1 + scale)
# carry genuinely different jets.
JET_GAP_TOL = 1e-7
# First-order finite-difference cross-check.
FD_STEP = 1e-5
FD_RTOL = 1e-6
FD_ONESIDED_RTOL = 1e-4
# Second-order cross-check (finite difference of the first derivative).
FD2_RTOL = 1e-5
FD2_ONESIDED_RTOL = 1e-3
# Neighbourhood probe offset used by second_derivative.
PROBE_STEP = 1e-4

_BISECT_ITERS = 80
_BISECT_XTOL = 1e-14


class DiffStatus(str, Enum):
    """Differentiability verdict for an endpoint family."""

    YES = "Yes"
    MARGINAL_TIES = "MarginalTies"
    NO = "No"


@dataclass(frozen=True)
class BranchEvent:
    """One noteworthy min/max branch tie (or check failure) at a product.

    ``kind`` is one of ``corner`` (genuine kink), ``boundary_touch``
    (one-sided kink at the edge of the level family), ``higher_order_tie``
    (first derivatives agree, second derivatives do not), ``fd_mismatch``
    (analytic and finite-difference derivatives disagree) and ``nesting``
    (assembled cuts fail validation).
    """

    kind: str
    node_id: int
    side: str            # "lo" | "hi" endpoint of the product
    alpha: float
    value: float         # tied product value (or residual for fd_mismatch)
    gap: float           # jet spread among tied candidates
    gap_order: int       # 1 or 2: which derivative order the gap concerns
    level_index: int | None = None   # grid index, None for bisected levels
    detail: str = ""


@dataclass(frozen=True)
class Verdict:
    status: DiffStatus
    events: tuple[BranchEvent, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status is not DiffStatus.NO

    def corners(self) -> tuple[BranchEvent, ...]:
        return tuple(ev for ev in self.events if ev.kind == "corner")

    def summary(self) -> str:
        if not self.events:
            return self.status.value
        parts = [
            f"{ev.kind}@alpha={ev.alpha:.6g}(node {ev.node_id},{ev.side})"
            for ev in self.events[:4]
        ]
        more = "" if len(self.events) <= 4 else f" (+{len(self.events) - 4} more)"
        return f"{self.status.value}: " + "; ".join(parts) + more


@dataclass(frozen=True)
class FDReport:
    """Finite-difference cross-check residuals, per (level, endpoint)."""

    step: float
    residuals: np.ndarray      # shape (n_levels, 2), relative
    max_rel: float
    note: str = "central"


@dataclass(frozen=True)
class DerivativeResult:
    order: int
    x: float
    levels: np.ndarray
    cuts_raw: np.ndarray       # (n_levels, 2): raw (lower-endpoint', upper-endpoint')
    verdict: Verdict
    fuzzy: FuzzyNumber | None
    fd: FDReport | None

    @property
    def raw_lo(self) -> np.ndarray:
        return self.cuts_raw[:, 0]

    @property
    def raw_hi(self) -> np.ndarray:
        return self.cuts_raw[:, 1]


# ---------------------------------------------------------------------------
# jet propagation
# ---------------------------------------------------------------------------


@dataclass
class _NodeRec:
    """Per-node propagation record (flat arrays)."""

    jets: tuple          # (lov, lod1, lod2, hiv, hid1, hid2)
    children: tuple = ()
    mul: tuple | None = None   # (a_id, b_id, cv, cd1, cd2, mini, maxi)


def _propagate(e, fam: Family, X, A, record: dict | None = None):
    """Propagate jets through ``e``; X and A must broadcast together.

    Returns ``(jets, shape)`` where jets are six flat arrays
    (lov, lod1, lod2, hiv, hid1, hid2) of the broadcast size.  When
    ``record`` is a dict it is filled with a :class:`_NodeRec` per node,
    keyed by preorder id.
    """
    Xb, Ab = np.broadcast_arrays(np.asarray(X, dtype=float),
                                 np.asarray(A, dtype=float))
    shape = Xb.shape
    Xf = np.ascontiguousarray(Xb, dtype=float).ravel()
    Af = np.ascontiguousarray(Ab, dtype=float).ravel()
    counter = [0]
    jets = _prop_node(e, fam, Xf, Af, counter, record)
    return jets, shape


def _prop_node(e, fam, X, A, counter, record):
    nid = counter[0]
    counter[0] += 1
    zeros = None

    if isinstance(e, ex.Var):
        lo, hi = fam.endpoints(X, A)
        d1lo, d1hi = fam.endpoint_derivatives(X, A, order=1)
        d2lo, d2hi = fam.endpoint_derivatives(X, A, order=2)
        jets = tuple(
            np.ascontiguousarray(np.broadcast_to(a, X.shape), dtype=float)
            for a in (lo, d1lo, d2lo, hi, d1hi, d2hi)
        )
        children = ()
        mul = None

    elif isinstance(e, ex.CrispConst):
        v = np.full(X.shape, float(e.value))
        zeros = np.zeros(X.shape)
        jets = (v, zeros, zeros, v.copy(), zeros, zeros)
        children = ()
        mul = None

    elif isinstance(e, ex.FuzzyConst):
        f = e.value
        lo = np.interp(A, f.levels, f.lo)
        hi = np.interp(A, f.levels, f.hi)
        zeros = np.zeros(X.shape)
        jets = (lo, zeros, zeros, hi, zeros, zeros)
        children = ()
        mul = None

    elif isinstance(e, ex.Add):
        aid = counter[0]
        a = _prop_node(e.left, fam, X, A, counter, record)
        bid = counter[0]
        b = _prop_node(e.right, fam, X, A, counter, record)
        jets = tuple(a[i] + b[i] for i in range(6))
        children = (aid, bid)
        mul = None

    elif isinstance(e, ex.Sub):
        aid = counter[0]
        a = _prop_node(e.left, fam, X, A, counter, record)
        bid = counter[0]
        b = _prop_node(e.right, fam, X, A, counter, record)
        # [a1 - b2, a2 - b1]: the lower endpoint pairs with the other
        # operand's upper endpoint, derivatives follow the same pairing
        jets = (a[0] - b[3], a[1] - b[4], a[2] - b[5],
                a[3] - b[0], a[4] - b[1], a[5] - b[2])
        children = (aid, bid)
        mul = None

    elif isinstance(e, ex.ScalarMul):
        aid = counter[0]
        a = _prop_node(e.operand, fam, X, A, counter, record)
        k = float(e.k)
        if k >= 0.0:
            jets = tuple(k * a[i] for i in range(6))
        else:
            jets = (k * a[3], k * a[4], k * a[5],
                    k * a[0], k * a[1], k * a[2])
        children = (aid,)
        mul = None

    elif isinstance(e, ex.Neg):
        aid = counter[0]
        a = _prop_node(e.operand, fam, X, A, counter, record)
        jets = (-a[3], -a[4], -a[5], -a[0], -a[1], -a[2])
        children = (aid,)
        mul = None

    elif isinstance(e, ex.Exp):
        aid = counter[0]
        a = _prop_node(e.operand, fam, X, A, counter, record)
        with np.errstate(over="ignore"):
            elo = np.exp(a[0])
            ehi = np.exp(a[3])
        if not (np.all(np.isfinite(elo)) and np.all(np.isfinite(ehi))):
            raise EvaluationError("overflow in exp", span=e.span)
        jets = (elo, elo * a[1], elo * (a[1] * a[1] + a[2]),
                ehi, ehi * a[4], ehi * (a[4] * a[4] + a[5]))
        children = (aid,)
        mul = None

    elif isinstance(e, ex.Mul):
        aid = counter[0]
        a = _prop_node(e.left, fam, X, A, counter, record)
        bid = counter[0]
        b = _prop_node(e.right, fam, X, A, counter, record)
        cv, cd1, cd2, mini, maxi = four_product_jets(
            a[0], a[1], a[2], a[3], a[4], a[5],
            b[0], b[1], b[2], b[3], b[4], b[5],
        )
        idx = np.arange(cv.shape[1])
        jets = (cv[mini, idx], cd1[mini, idx], cd2[mini, idx],
                cv[maxi, idx], cd1[maxi, idx], cd2[maxi, idx])
        children = (aid, bid)
        mul = (aid, bid, cv, cd1, cd2, mini, maxi)

    else:
        raise TypeError(f"not an expression node: {e!r}")

    if record is not None:
        record[nid] = _NodeRec(jets=jets, children=children, mul=mul)
    return jets


# ---------------------------------------------------------------------------
# tie analysis
# ---------------------------------------------------------------------------


def _operand_endpoint_values(record, mul_entry, k):
    """The four operand endpoint values (a_lo, a_hi, b_lo, b_hi) at element k."""
    aid, bid = mul_entry[0], mul_entry[1]
    a = record[aid].jets
    b = record[bid].jets
    return (a[0][k], a[3][k], b[0][k], b[3][k])


def _operand_streams(record, mul_entry):
    """Full (a_lo, a_hi, b_lo, b_hi) arrays plus their d1/d2 arrays."""
    aid, bid = mul_entry[0], mul_entry[1]
    a = record[aid].jets
    b = record[bid].jets
    vals = (a[0], a[3], b[0], b[3])
    d1s = (a[1], a[4], b[1], b[4])
    d2s = (a[2], a[5], b[2], b[5])
    return vals, d1s, d2s


def _classify_tie(nid, side, alpha, level_index, cv_k, cd1_k, cd2_k, tied,
                  order, operand_now, operand_base_streams):
    """Classify one tied extreme; returns a BranchEvent or None (harmless)."""
    d1s = cd1_k[tied]
    d2s = cd2_k[tied]
    d1_gap = float(d1s.max() - d1s.min())
    d2_gap = float(d2s.max() - d2s.min())
    tol1 = JET_GAP_TOL * (1.0 + float(np.abs(d1s).max()))
    tol2 = JET_GAP_TOL * (1.0 + float(np.abs(d2s).max()))

    if d1_gap <= tol1 and d2_gap <= tol2:
        return None                      # identical jets: harmless tie

    if d1_gap > tol1:
        gap, gap_order = d1_gap, 1
    elif order < 2:
        # first derivatives agree; only the second derivative kinks here
        return BranchEvent(
            kind="higher_order_tie", node_id=nid, side=side, alpha=alpha,
            value=float(cv_k[tied][0]), gap=d2_gap, gap_order=2,
            level_index=level_index,
            detail="tied candidates share d1 but differ in d2",
        )
    else:
        gap, gap_order = d2_gap, 2

    v = float(cv_k[tied][0])
    prod_scale = 1.0 + float(np.abs(cv_k).max())
    if abs(v) > TIE_TOL * prod_scale:
        return BranchEvent(
            kind="corner", node_id=nid, side=side, alpha=alpha, value=v,
            gap=gap, gap_order=gap_order, level_index=level_index,
            detail="extreme switches between branches at a nonzero value",
        )

    # zero-value tie: a corner only if the vanishing operand endpoint
    # strictly changes sign across the level family; a touch at the
    # family boundary is a one-sided (marginal) kink
    op_scale = 1.0 + max(abs(val) for val in operand_now)
    zero_streams = [
        operand_base_streams[j]
        for j in range(4)
        if abs(operand_now[j]) <= TIE_TOL * op_scale
    ]
    if not zero_streams:
        return BranchEvent(
            kind="corner", node_id=nid, side=side, alpha=alpha, value=v,
            gap=gap, gap_order=gap_order, level_index=level_index,
            detail="near-zero tie with no vanishing operand endpoint",
        )
    straddles = any(
        float(s.min()) < 0.0 < float(s.max()) for s in zero_streams
    )
    if straddles:
        return BranchEvent(
            kind="corner", node_id=nid, side=side, alpha=alpha, value=v,
            gap=gap, gap_order=gap_order, level_index=level_index,
            detail="operand endpoint changes sign inside the level family",
        )
    return BranchEvent(
        kind="boundary_touch", node_id=nid, side=side, alpha=alpha, value=v,
        gap=gap, gap_order=gap_order, level_index=level_index,
        detail="operand endpoint touches zero at the family boundary",
    )


def _tie_events(record, levels_at, stream_record, order,
                grid_indices=True) -> list[BranchEvent]:
    """Grid-level tie analysis over every product node in ``record``.

    ``stream_record`` supplies full-level operand streams for the
    straddle test (the base-grid record; equals ``record`` in the plain
    case, and stays the base-grid record when ``record`` holds a single
    bisected level).
    """
    events: list[BranchEvent] = []
    for nid, rec in record.items():
        if rec.mul is None:
            continue
        _, _, cv, cd1, cd2, mini, maxi = rec.mul
        n = cv.shape[1]
        idx = np.arange(n)
        base_vals, _, _ = _operand_streams(stream_record, stream_record[nid].mul)
        for side, sel in (("lo", mini), ("hi", maxi)):
            ext = cv[sel, idx]
            tied_mask = np.abs(cv - ext[None, :]) <= TIE_TOL * (
                1.0 + np.abs(ext)[None, :]
            )
            counts = tied_mask.sum(axis=0)
            for k in np.nonzero(counts >= 2)[0]:
                operand_now = _operand_endpoint_values(record, rec.mul, k)
                event = _classify_tie(
                    nid, side, float(levels_at[k]),
                    int(k) if grid_indices else None,
                    cv[:, k], cd1[:, k], cd2[:, k], tied_mask[:, k],
                    order, operand_now, base_vals,
                )
                if event is not None:
                    events.append(event)
    return events


def _offgrid_events(e, fam, x, grid: AlphaGrid, record, order) -> list[BranchEvent]:
    """Locate operand-endpoint sign changes between grid levels and
    rerun the tie analysis at the bisected level."""
    levels = grid.levels
    events: list[BranchEvent] = []
    seen: set[tuple[int, int, int]] = set()
    for nid, rec in record.items():
        if rec.mul is None:
            continue
        vals, d1s, d2s = _operand_streams(record, rec.mul)
        for j in range(4):
            s = vals[j]
            if (np.abs(d1s[j]).max() <= 1e-12
                    and np.abs(d2s[j]).max() <= 1e-12):
                continue            # endpoint does not depend on x
            crossing = np.nonzero(s[:-1] * s[1:] < 0.0)[0]
            for k in crossing:
                key = (nid, j, int(k))
                if key in seen:
                    continue
                seen.add(key)
                alpha_hat = _bisect_stream_zero(
                    e, fam, x, nid, j, float(levels[k]), float(levels[k + 1]),
                    float(s[k]),
                )
                single: dict[int, _NodeRec] = {}
                _propagate(e, fam, x, np.asarray([alpha_hat]), record=single)
                events.extend(
                    _tie_events(single, [alpha_hat], record, order,
                                grid_indices=False)
                )
    return events


def _bisect_stream_zero(e, fam, x, nid, j, a_lo, a_hi, f_lo):
    """Bisect the alpha at which operand endpoint j of product nid vanishes."""
    def stream_at(alpha):
        rec: dict[int, _NodeRec] = {}
        _propagate(e, fam, x, np.asarray([alpha]), record=rec)
        vals, _, _ = _operand_streams(rec, rec[nid].mul)
        return float(vals[j][0])

    lo, hi = a_lo, a_hi
    f_low = f_lo
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        f_mid = stream_at(mid)
        if f_mid == 0.0:
            return mid
        if (f_low < 0.0) == (f_mid < 0.0):
            lo, f_low = mid, f_mid
        else:
            hi = mid
        if hi - lo <= _BISECT_XTOL:
            break
    return 0.5 * (lo + hi)


def _status_from_events(events) -> DiffStatus:
    kinds = {ev.kind for ev in events}
    if kinds & {"corner", "fd_mismatch", "nesting"}:
        return DiffStatus.NO
    if kinds & {"boundary_touch", "higher_order_tie"}:
        return DiffStatus.MARGINAL_TIES
    return DiffStatus.YES


# ---------------------------------------------------------------------------
# finite-difference cross-checks
# ---------------------------------------------------------------------------


def _endpoint_values(e, fam, x, grid: AlphaGrid):
    jets, shape = _propagate(e, fam, x, grid.levels)
    return jets[0].reshape(shape), jets[3].reshape(shape)


def _fd_first_order(e, fam, x, grid, ad_lo, ad_hi, v_lo, v_hi,
                    marginal_levels, domain):
    """Cross-check raw endpoint derivatives against finite differences.

    Central differences by default; one-sided near domain boundaries and
    (with a looser tolerance) at levels carrying a boundary-touch tie,
    where only a one-sided derivative exists.
    """
    h = FD_STEP
    dlo = -np.inf if domain is None else float(domain[0])
    dhi = np.inf if domain is None else float(domain[1])
    left_ok = x - h >= dlo
    right_ok = x + h <= dhi
    if not left_ok and not right_ok:
        n = len(grid)
        return FDReport(h, np.zeros((n, 2)), 0.0, "domain narrower than step"), []

    lo_p = hi_p = lo_m = hi_m = None
    if right_ok:
        lo_p, hi_p = _endpoint_values(e, fam, x + h, grid)
    if left_ok:
        lo_m, hi_m = _endpoint_values(e, fam, x - h, grid)

    n = len(grid)
    residuals = np.empty((n, 2))
    events: list[BranchEvent] = []
    for col, (ad, v0, vp, vm) in enumerate(
        ((ad_lo, v_lo, lo_p, lo_m), (ad_hi, v_hi, hi_p, hi_m))
    ):
        denom = 1.0 + np.abs(ad)
        if left_ok and right_ok:
            rel = np.abs(ad - (vp - vm) / (2.0 * h)) / denom
            accepted = rel <= FD_RTOL
            base_tol = FD_RTOL
        else:
            fd = (vp - v0) / h if right_ok else (v0 - vm) / h
            rel = np.abs(ad - fd) / denom
            accepted = rel <= FD_ONESIDED_RTOL
            base_tol = FD_ONESIDED_RTOL
        # at marginal levels only a one-sided derivative exists
        for i in np.nonzero(~accepted)[0]:
            if int(i) in marginal_levels:
                side_rels = []
                if vp is not None:
                    side_rels.append(abs(ad[i] - (vp[i] - v0[i]) / h) / denom[i])
                if vm is not None:
                    side_rels.append(abs(ad[i] - (v0[i] - vm[i]) / h) / denom[i])
                best = min(side_rels)
                if best <= FD_ONESIDED_RTOL:
                    rel[i] = best
                    accepted[i] = True
                    continue
            events.append(BranchEvent(
                kind="fd_mismatch", node_id=0,
                side="lo" if col == 0 else "hi",
                alpha=float(grid.levels[i]), value=float(rel[i]),
                gap=float(rel[i]) * float(denom[i]), gap_order=1,
                level_index=int(i),
                detail=f"|AD-FD| exceeds {base_tol:g} relative tolerance",
            ))
        residuals[:, col] = rel
    note = "central" if (left_ok and right_ok) else "one-sided (domain boundary)"
    return FDReport(h, residuals, float(residuals.max()), note), events


# ---------------------------------------------------------------------------
# public evaluation API
# ---------------------------------------------------------------------------


def eval_levels(e, fam: Family, x: float, alpha: float) -> tuple[float, float]:
    """Endpoint values (lower, upper) of the output cut at one level."""
    a = float(alpha)
    if not 0.0 <= a <= 1.0:
        raise RangeError(f"alpha must lie in [0, 1], got {a}")
    jets, _ = _propagate(e, fam, float(x), np.asarray([a]))
    return float(jets[0][0]), float(jets[3][0])


def eval_fuzzy(e, fam: Family, x: float, grid=None) -> FuzzyNumber:
    """The fuzzy output value at crisp ``x``, validated."""
    g = _as_grid(grid)
    jets, shape = _propagate(e, fam, float(x), g.levels)
    result = FuzzyNumber(g, jets[0].reshape(shape), jets[3].reshape(shape))
    report = validate(result)
    if not report.ok:
        raise EvaluationError(
            "evaluation produced invalid cuts: " + report.summary(),
            span=getattr(e, "span", None),
        )
    return result


def _verdict_and_raw(e, fam, x, g, order, domain):
    """Shared engine for derivative/second_derivative."""
    record: dict[int, _NodeRec] = {}
    jets, _ = _propagate(e, fam, x, g.levels, record=record)

    events = _tie_events(record, g.levels, record, order)
    if not any(ev.kind == "corner" for ev in events):
        events.extend(_offgrid_events(e, fam, x, g, record, order))
    status = _status_from_events(events)

    marginal_levels = {
        ev.level_index for ev in events
        if ev.kind == "boundary_touch" and ev.level_index is not None
    }

    fd_report = None
    if status is not DiffStatus.NO:
        fd_report, fd_events = _fd_first_order(
            e, fam, x, g, jets[1], jets[4], jets[0], jets[3],
            marginal_levels, domain,
        )
        events.extend(fd_events)
        status = _status_from_events(events)

    return record, jets, events, status, marginal_levels, fd_report


def derivative(e, fam: Family, x: float, grid=None, *,
               domain=None) -> DerivativeResult:
    """First derivative of the fuzzy output with respect to crisp ``x``.

    Per level the raw pair holds the chain-rule derivatives of the
    lower and upper endpoint functions; the assembled cut is their
    min/max.  ``domain`` (optional ``(lo, hi)``) restricts the
    finite-difference probes to the stated crisp range.
    """
    g = _as_grid(grid)
    x = float(x)
    record, jets, events, status, _, fd_report = _verdict_and_raw(
        e, fam, x, g, 1, domain,
    )
    f1p, f2p = jets[1], jets[4]
    cuts_raw = np.column_stack((f1p, f2p))

    fuzzy = None
    if status is not DiffStatus.NO:
        assembled = FuzzyNumber(g, np.minimum(f1p, f2p), np.maximum(f1p, f2p))
        report = validate(assembled)
        if report.ok:
            fuzzy = assembled
        else:
            events.append(BranchEvent(
                kind="nesting", node_id=0, side="lo", alpha=float("nan"),
                value=float("nan"), gap=float("nan"), gap_order=1,
                detail="assembled cuts fail validation: " + report.summary(),
            ))
            status = DiffStatus.NO

    return DerivativeResult(
        order=1, x=x, levels=g.levels, cuts_raw=cuts_raw,
        verdict=Verdict(status, tuple(events)), fuzzy=fuzzy, fd=fd_report,
    )


def second_derivative(e, fam: Family, x: float, grid=None, *,
                      domain=None) -> DerivativeResult:
    """Second derivative of the fuzzy output with respect to crisp ``x``.

    Requires a non-negative first-order verdict at ``x`` and at the
    neighbouring probes ``x ± 1e-4`` (clamped into ``domain`` when one
    is given); raises :class:`NotDifferentiableError` otherwise.
    """
    g = _as_grid(grid)
    x = float(x)
    dlo = -np.inf if domain is None else float(domain[0])
    dhi = np.inf if domain is None else float(domain[1])

    probes = [x]
    if x - PROBE_STEP >= dlo:
        probes.append(x - PROBE_STEP)
    if x + PROBE_STEP <= dhi:
        probes.append(x + PROBE_STEP)
    probe_results: dict[float, DerivativeResult] = {}
    for xp in probes:
        r = derivative(e, fam, xp, g, domain=domain)
        probe_results[xp] = r
        if not r.verdict.ok:
            raise NotDifferentiableError(
                f"first derivative fails at x={xp:.10g}: {r.verdict.summary()}",
                result=r,
            )

    record, jets, events, status, marginal_levels, _ = _verdict_and_raw(
        e, fam, x, g, 2, domain,
    )
    f1pp, f2pp = jets[2], jets[5]
    cuts_raw = np.column_stack((f1pp, f2pp))

    # cross-check d2 against the finite difference of the first derivative
    fd_report = None
    if status is not DiffStatus.NO:
        has_left = (x - PROBE_STEP) in probe_results
        has_right = (x + PROBE_STEP) in probe_results
        d1_at = np.column_stack((jets[1], jets[4]))
        residuals = np.empty_like(cuts_raw)
        denom = 1.0 + np.abs(cuts_raw)
        if has_left and has_right:
            d1_p = probe_results[x + PROBE_STEP].cuts_raw
            d1_m = probe_results[x - PROBE_STEP].cuts_raw
            fd2 = (d1_p - d1_m) / (2.0 * PROBE_STEP)
            residuals[:] = np.abs(cuts_raw - fd2) / denom
            accepted = residuals <= FD2_RTOL
            note = "central"
        else:
            other = probe_results[x + PROBE_STEP] if has_right else probe_results[x - PROBE_STEP]
            sign = 1.0 if has_right else -1.0
            fd2 = sign * (other.cuts_raw - d1_at) / PROBE_STEP
            residuals[:] = np.abs(cuts_raw - fd2) / denom
            accepted = residuals <= FD2_ONESIDED_RTOL
            note = "one-sided (domain boundary)"
        for i, col in zip(*np.nonzero(~accepted)):
            if int(i) in marginal_levels:
                side_rels = []
                if has_right:
                    d1_p = probe_results[x + PROBE_STEP].cuts_raw
                    side_rels.append(
                        abs(cuts_raw[i, col]
                            - (d1_p[i, col] - d1_at[i, col]) / PROBE_STEP)
                        / denom[i, col])
                if has_left:
                    d1_m = probe_results[x - PROBE_STEP].cuts_raw
                    side_rels.append(
                        abs(cuts_raw[i, col]
                            - (d1_at[i, col] - d1_m[i, col]) / PROBE_STEP)
                        / denom[i, col])
                best = min(side_rels)
                if best <= FD2_ONESIDED_RTOL:
                    residuals[i, col] = best
                    continue
            events.append(BranchEvent(
                kind="fd_mismatch", node_id=0,
                side="lo" if col == 0 else "hi",
                alpha=float(g.levels[i]), value=float(residuals[i, col]),
                gap=float(residuals[i, col] * denom[i, col]), gap_order=2,
                level_index=int(i),
                detail="second derivative disagrees with FD of first",
            ))
        status = _status_from_events(events)
        fd_report = FDReport(PROBE_STEP, residuals, float(residuals.max()), note)

    fuzzy = None
    if status is not DiffStatus.NO:
        assembled = FuzzyNumber(
            g, np.minimum(f1pp, f2pp), np.maximum(f1pp, f2pp)
        )
        report = validate(assembled)
        if report.ok:
            fuzzy = assembled
        else:
            events.append(BranchEvent(
                kind="nesting", node_id=0, side="lo", alpha=float("nan"),
                value=float("nan"), gap=float("nan"), gap_order=2,
                detail="assembled cuts fail validation: " + report.summary(),
            ))
            status = DiffStatus.NO

    return DerivativeResult(
        order=2, x=x, levels=g.levels, cuts_raw=cuts_raw,
        verdict=Verdict(status, tuple(events)), fuzzy=fuzzy, fd=fd_report,
    )


def differentiability_check(e, fam: Family, x: float, grid=None, *,
                            domain=None) -> Verdict:
    """Verdict only, without assembling the derivative."""
    return derivative(e, fam, x, grid, domain=domain).verdict


# ---------------------------------------------------------------------------
# batched screening (used by the optimizer)
# ---------------------------------------------------------------------------


def _batch_jets(e, fam: Family, xs, grid: AlphaGrid):
    """Jets over an outer (x, level) product; arrays shaped (m, n)."""
    xs = np.asarray(xs, dtype=float)
    record: dict[int, _NodeRec] = {}
    jets, shape = _propagate(
        e, fam, xs[:, None], grid.levels[None, :], record=record,
    )
    return tuple(j.reshape(shape) for j in jets), record, shape


def _elementwise_jets(e, fam: Family, xk, ak):
    """Jets with per-element (x, alpha) pairs of equal shape."""
    xk = np.asarray(xk, dtype=float)
    ak = np.asarray(ak, dtype=float)
    if xk.shape != ak.shape:
        raise InvalidParameterError(
            f"paired evaluation needs equal shapes, got {xk.shape} vs {ak.shape}"
        )
    jets, shape = _propagate(e, fam, xk, ak)
    return tuple(j.reshape(shape) for j in jets)


def _suspect_rows(record, shape) -> np.ndarray:
    """Rows (x indices) of a batched propagation that need scalar verdicts.

    A row is suspect when any product shows a tie with disagreeing jets
    at some level, or when an x-dependent operand endpoint strictly
    changes sign between adjacent levels (a possible off-grid kink).
    """
    m, n = shape
    suspect = np.zeros(m, dtype=bool)
    for rec in record.values():
        if rec.mul is None:
            continue
        _, _, cv, cd1, cd2, mini, maxi = rec.mul
        idx = np.arange(cv.shape[1])
        for sel in (mini, maxi):
            ext = cv[sel, idx]
            tied = np.abs(cv - ext[None, :]) <= TIE_TOL * (1.0 + np.abs(ext))[None, :]
            counts = tied.sum(axis=0)
            d1_hi = np.where(tied, cd1, -np.inf).max(axis=0)
            d1_lo = np.where(tied, cd1, np.inf).min(axis=0)
            d2_hi = np.where(tied, cd2, -np.inf).max(axis=0)
            d2_lo = np.where(tied, cd2, np.inf).min(axis=0)
            scale1 = np.where(tied, np.abs(cd1), 0.0).max(axis=0)
            scale2 = np.where(tied, np.abs(cd2), 0.0).max(axis=0)
            flagged = (counts >= 2) & (
                (d1_hi - d1_lo > JET_GAP_TOL * (1.0 + scale1))
                | (d2_hi - d2_lo > JET_GAP_TOL * (1.0 + scale2))
            )
            if flagged.any():
                suspect[np.unique(np.nonzero(flagged)[0] // n)] = True
        vals, d1s, d2s = _operand_streams(record, rec.mul)
        for j in range(4):
            if (np.abs(d1s[j]).max() <= 1e-12
                    and np.abs(d2s[j]).max() <= 1e-12):
                continue
            s = vals[j].reshape(m, n)
            crossing_rows = np.nonzero((s[:, :-1] * s[:, 1:] < 0.0).any(axis=1))[0]
            suspect[crossing_rows] = True
    return suspect


def screen_verdicts(e, fam: Family, xs, grid=None, order: int = 1, *,
                    domain=None) -> list[Verdict]:
    """Differentiability verdicts for many x, cheaply.

    Clean rows of one batched propagation are Yes by construction; rows
    flagged by the tie/crossing screen get the full scalar treatment.
    """
    g = _as_grid(grid)
    xs = np.asarray(xs, dtype=float)
    _, record, shape = _batch_jets(e, fam, xs, g)
    suspect = _suspect_rows(record, shape)
    verdicts: list[Verdict] = []
    for i, x in enumerate(xs):
        if not suspect[i]:
            verdicts.append(Verdict(DiffStatus.YES))
        elif order >= 2:
            try:
                verdicts.append(
                    second_derivative(e, fam, float(x), g, domain=domain).verdict
                )
            except NotDifferentiableError as exc:
                verdicts.append(exc.result.verdict)
        else:
            verdicts.append(
                derivative(e, fam, float(x), g, domain=domain).verdict
            )
    return verdicts


# ---------------------------------------------------------------------------
# continuity probe
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuityReport:
    """Outcome of the continuity search around ``x0``.

    ``delta_est`` is the largest radius that passed every sampled test —
    an estimate backed by sampling, not a proof.  ``violations`` holds
    (x, distance) pairs from the final verification (empty on success).
    """

    x0: float
    eps: float
    trials: int
    delta_est: float
    violations: tuple[tuple[float, float], ...]
    history: tuple[tuple[float, bool], ...]

    @property
    def ok(self) -> bool:
        return self.delta_est > 0.0 and not self.violations


def continuity_probe(e, fam: Family, x0: float, eps: float,
                     trials: int = 200, *, grid=None,
                     seed=None) -> ContinuityReport:
    """Estimate the largest δ with d_F(f(x), f(x0)) < eps for sampled
    |x − x0| < δ.

    Doubles δ while all samples pass, halves while they fail, then
    bisects to ~0.1% and re-verifies the final radius with fresh
    samples (shrinking slightly on a late violation).
    """
    if not eps > 0.0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    trials = int(trials)
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    g = _as_grid(grid)
    x0 = float(x0)
    rng = np.random.default_rng(seed)
    lo0, hi0 = _endpoint_values(e, fam, x0, g)

    def worst(delta):
        xs = x0 + delta * (2.0 * rng.random(trials) - 1.0)
        jets, shape = _propagate(e, fam, xs[:, None], g.levels[None, :])
        lo = jets[0].reshape(shape)
        hi = jets[3].reshape(shape)
        d = np.maximum(
            np.abs(lo - lo0[None, :]), np.abs(hi - hi0[None, :])
        ).max(axis=1)
        k = int(np.argmax(d))
        return xs, d, float(xs[k]), float(d[k])

    history: list[tuple[float, bool]] = []
    lo_pass = 0.0
    hi_fail = np.inf
    delta = float(eps)
    doublings = 0
    for _ in range(200):
        _, d, _, worst_d = worst(delta)
        ok = bool(worst_d < eps)
        history.append((delta, ok))
        if ok:
            lo_pass = max(lo_pass, delta)
            if not np.isfinite(hi_fail):
                doublings += 1
                if doublings > 40:
                    break
                delta *= 2.0
                continue
        else:
            hi_fail = min(hi_fail, delta)
        if lo_pass == 0.0:
            delta *= 0.5
            if delta < 1e-300:
                break
            continue
        if hi_fail - lo_pass <= 1e-3 * lo_pass:
            break
        delta = 0.5 * (lo_pass + hi_fail)

    delta_est = lo_pass
    violations: tuple[tuple[float, float], ...] = ()
    if delta_est > 0.0:
        for _ in range(60):
            xs, d, worst_x, worst_d = worst(delta_est)
            ok = bool(worst_d < eps)
            history.append((delta_est, ok))
            if ok:
                violations = ()
                break
            violations = tuple(
                (float(xv), float(dv))
                for xv, dv in zip(xs[d >= eps][:5], d[d >= eps][:5])
            )
            delta_est *= 1.0 - 1e-3
    else:
        _, d, worst_x, worst_d = worst(history[-1][0] if history else eps)
        violations = ((worst_x, worst_d),)

    return ContinuityReport(
        x0=x0, eps=eps, trials=trials, delta_est=delta_est,
        violations=violations, history=tuple(history),
    )
