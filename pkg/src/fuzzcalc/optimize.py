"""Minimization of a fuzzy-valued objective over a one-parameter family.

The feasible set is the image of a crisp interval under a fuzzification
family: each crisp x in [lo, hi] names the fuzzy point the family
assigns to it.  Minimization uses the componentwise dominance order on
cut endpoints.

The solver realizes three separable pieces:

* :func:`find_stationary` — scan both endpoint-derivative families over
  the domain at every grid level, bracket sign changes, bisect, then
  cluster the roots.  A cluster is reported only when both endpoint
  families vanish there (at the top level the two endpoint functions
  coincide, so any crisp optimum satisfies this); the weaker
  single-endpoint roots remain inspectable via
  :func:`stationarity_residuals` and ``require_both_endpoints=False``.
* :func:`sufficiency_check` — classify a stationary point by the sign
  of the lower-endpoint second derivative: nonnegative over the whole
  scanned domain and every level makes the point globally
  non-dominated; a strictly positive value at the point's top level
  makes it locally non-dominated; anything else is inconclusive.
* :func:`verify_nondominated` — brute falsifier: look for any scanned
  feasible point whose objective value strictly dominates the
  candidate's.  Grid resolution only; a pass is evidence, not proof.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import calculus
from .calculus import DiffStatus, screen_verdicts, second_derivative
from .core import AlphaGrid, FuzzyNumber, Interval, _aligned, _as_grid, distance
from .errors import InvalidParameterError, NotDifferentiableError
from .family import Family, family_to_dict

__all__ = [
    "Dominance",
    "Sufficiency",
    "SolverConfig",
    "Problem",
    "StationaryWitness",
    "StationaryPoint",
    "SufficiencyResult",
    "BruteCheck",
    "SolveReport",
    "dominates",
    "open_ball_contains",
    "find_stationary",
    "stationarity_residuals",
    "sufficiency_check",
    "verify_nondominated",
    "solve",
]


class Dominance(Enum):
    """Outcome of comparing two fuzzy numbers endpointwise."""

    STRICT = "strict"
    WEAK = "weak"
    NONE = "none"


def dominates(a: FuzzyNumber, b: FuzzyNumber, tol: float = 1e-9) -> Dominance:
    """Componentwise cut ordering of ``a`` against ``b``.

    Weak: every lower and upper endpoint of ``a`` is at most the
    matching endpoint of ``b`` plus ``tol``.  Strict additionally needs
    one endpoint smaller by more than ``tol`` (a round-off band keeps
    numerical noise from counting as strict).
    """
    _, alo, ahi, blo, bhi = _aligned(a, b)
    weak = bool(
        np.all(alo <= blo + tol) and np.all(ahi <= bhi + tol)
    )
    if not weak:
        return Dominance.NONE
    strict = bool(
        np.any(alo < blo - tol) or np.any(ahi < bhi - tol)
    )
    return Dominance.STRICT if strict else Dominance.WEAK


def open_ball_contains(center: FuzzyNumber, radius: float,
                       probe: FuzzyNumber) -> bool:
    """Membership of ``probe`` in the open metric ball around ``center``."""
    r = float(radius)
    if not r > 0.0:
        raise InvalidParameterError(f"radius must be positive, got {radius}")
    return distance(center, probe) < r


# ---------------------------------------------------------------------------
# problem container
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    x_scan_points: int = 100
    root_tol: float = 1e-10
    dominance_tol: float = 1e-9

    def __post_init__(self):
        if int(self.x_scan_points) != self.x_scan_points or self.x_scan_points < 3:
            raise InvalidParameterError(
                f"x_scan_points must be an integer >= 3, got {self.x_scan_points}"
            )
        if not self.root_tol > 0.0:
            raise InvalidParameterError(
                f"root_tol must be positive, got {self.root_tol}"
            )
        if not self.dominance_tol >= 0.0:
            raise InvalidParameterError(
                f"dominance_tol must be non-negative, got {self.dominance_tol}"
            )


@dataclass(frozen=True)
class Problem:
    """A fuzzy objective minimized over the family image of [lo, hi]."""

    objective: object            # expr node
    fam: Family
    domain: Interval
    grid: AlphaGrid = None
    config: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if not isinstance(self.domain, Interval):
            lo, hi = self.domain
            object.__setattr__(self, "domain", Interval(float(lo), float(hi)))
        if not self.domain.lo < self.domain.hi:
            raise InvalidParameterError(
                f"domain must have positive width, got {self.domain}"
            )
        object.__setattr__(self, "grid", _as_grid(self.grid))
        if not isinstance(self.config, SolverConfig):
            raise InvalidParameterError(
                f"config must be a SolverConfig, got {type(self.config).__name__}"
            )

    def scan_xs(self, factor: int = 1) -> np.ndarray:
        return np.linspace(
            self.domain.lo, self.domain.hi,
            int(factor) * self.config.x_scan_points,
        )

    def domain_pair(self) -> tuple[float, float]:
        return (self.domain.lo, self.domain.hi)


# ---------------------------------------------------------------------------
# result types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StationaryWitness:
    endpoint: int          # 1 = lower endpoint derivative, 2 = upper
    alpha: float
    residual: float


@dataclass(frozen=True)
class StationaryPoint:
    x_star: float
    witness: StationaryWitness
    fuzzy_point: FuzzyNumber
    corroborators: tuple[StationaryWitness, ...] = ()


class Sufficiency(str, Enum):
    GLOBAL = "GlobalNonDominated"
    LOCAL = "LocalNonDominated"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class SufficiencyResult:
    verdict: Sufficiency
    min_lower_d2: float | None = None
    min_at_x: float | None = None
    min_at_alpha: float | None = None
    peak_lower_d2: float | None = None
    reason: str = ""


@dataclass(frozen=True)
class BruteCheck:
    passed: bool
    counterexample: float | None = None

    def __iter__(self):
        yield self.passed
        yield self.counterexample


@dataclass(frozen=True)
class SolveReport:
    problem: Problem
    stationary: tuple[StationaryPoint, ...]
    sufficiency: tuple[SufficiencyResult, ...]
    brute_check: tuple[BruteCheck, ...]
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        from . import expr as ex

        p = self.problem
        try:
            fam_desc = family_to_dict(p.fam)
        except Exception:
            fam_desc = {"kind": getattr(p.fam, "kind", "unknown")}
        return {
            "problem": {
                "objective": ex.format(p.objective),
                "family": fam_desc,
                "domain": [p.domain.lo, p.domain.hi],
                "levels": len(p.grid),
                "config": {
                    "x_scan_points": p.config.x_scan_points,
                    "root_tol": p.config.root_tol,
                    "dominance_tol": p.config.dominance_tol,
                },
            },
            "stationary": [
                {
                    "x_star": s.x_star,
                    "witness": {
                        "endpoint": s.witness.endpoint,
                        "alpha": s.witness.alpha,
                        "residual": s.witness.residual,
                    },
                    "corroborators": [
                        {"endpoint": w.endpoint, "alpha": w.alpha,
                         "residual": w.residual}
                        for w in s.corroborators
                    ],
                    "fuzzy_point": s.fuzzy_point.to_dict(),
                }
                for s in self.stationary
            ],
            "sufficiency": [
                {
                    "verdict": r.verdict.value,
                    "min_lower_d2": r.min_lower_d2,
                    "min_at_x": r.min_at_x,
                    "min_at_alpha": r.min_at_alpha,
                    "peak_lower_d2": r.peak_lower_d2,
                    "reason": r.reason,
                }
                for r in self.sufficiency
            ],
            "brute_check": [
                {"passed": c.passed, "counterexample": c.counterexample}
                for c in self.brute_check
            ],
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# stationary-point search
# ---------------------------------------------------------------------------


def stationarity_residuals(p: Problem, x: float) -> np.ndarray:
    """Both endpoint derivatives at every grid level for one x.

    Shape ``(n_levels, 2)``; columns are the lower/upper endpoint
    derivative values.  Lets users inspect whether a stationary point
    satisfies the zero condition at one level or at all of them.
    """
    jets, shape = calculus._propagate(
        p.objective, p.fam, float(x), p.grid.levels,
    )
    return np.column_stack((jets[1], jets[4]))


def _find_stationary_core(p: Problem, require_both_endpoints: bool):
    cfg = p.config
    xs = p.scan_xs()
    warns: list[str] = []

    verdicts = screen_verdicts(
        p.objective, p.fam, xs, p.grid, order=1, domain=p.domain_pair(),
    )
    bad = np.array([v.status is DiffStatus.NO for v in verdicts])
    if bad.any():
        runs = np.flatnonzero(np.diff(np.concatenate(([0], bad.view(np.int8), [0]))))
        for start, stop in zip(runs[::2], runs[1::2]):
            warns.append(
                "excluding non-differentiable region "
                f"x in [{xs[start]:.6g}, {xs[stop - 1]:.6g}] from the scan"
            )

    jets, _, shape = calculus._batch_jets(p.objective, p.fam, xs, p.grid)
    levels = p.grid.levels
    roots: list[tuple[float, int, float, float]] = []   # (x, endpoint, alpha, residual)

    for endpoint, G in ((1, jets[1]), (2, jets[4])):
        ok_rows = ~bad
        exact = np.abs(G) <= cfg.root_tol
        for i, j in zip(*np.nonzero(exact & ok_rows[:, None])):
            roots.append((float(xs[i]), endpoint, float(levels[j]), float(G[i, j])))
        sign_change = (G[:-1, :] * G[1:, :] < 0.0) \
            & ok_rows[:-1, None] & ok_rows[1:, None]
        bi, bj = np.nonzero(sign_change)
        if len(bi):
            roots.extend(
                _bisect_brackets(
                    p, xs[bi], xs[bi + 1], levels[bj], G[bi, bj],
                    np.full(len(bi), endpoint),
                )
            )

    points = _cluster_roots(p, roots, require_both_endpoints)
    return points, warns


def _bisect_brackets(p: Problem, lo, hi, alphas, f_lo, endpoints):
    """Vector bisection of many (x-bracket, level, endpoint) triples."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    f_lo = np.array(f_lo, dtype=float)
    mid = 0.5 * (lo + hi)
    g_mid = np.zeros_like(mid)
    is_lower = endpoints == 1
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        jets = calculus._elementwise_jets(p.objective, p.fam, mid, alphas)
        g_mid = np.where(is_lower, jets[1], jets[4])
        go_left = (f_lo < 0.0) == (g_mid < 0.0)
        lo = np.where(go_left, mid, lo)
        f_lo = np.where(go_left, g_mid, f_lo)
        hi = np.where(go_left, hi, mid)
        if np.max(hi - lo) <= 1e-15 * max(1.0, np.max(np.abs(mid))):
            break
    mid = 0.5 * (lo + hi)
    jets = calculus._elementwise_jets(p.objective, p.fam, mid, alphas)
    g_mid = np.where(is_lower, jets[1], jets[4])
    out = []
    for k in range(len(mid)):
        if abs(g_mid[k]) <= p.config.root_tol:
            out.append((float(mid[k]), int(endpoints[k]),
                        float(alphas[k]), float(g_mid[k])))
    return out


def _cluster_roots(p: Problem, roots, require_both_endpoints):
    if not roots:
        return []
    radius = 10.0 * p.config.root_tol
    roots = sorted(roots)
    clusters: list[list[tuple[float, int, float, float]]] = [[roots[0]]]
    for r in roots[1:]:
        if r[0] - clusters[-1][-1][0] <= radius:
            clusters[-1].append(r)
        else:
            clusters.append([r])

    points = []
    for cluster in clusters:
        endpoints_present = {r[1] for r in cluster}
        if require_both_endpoints and endpoints_present != {1, 2}:
            continue
        best = min(cluster, key=lambda r: abs(r[3]))
        x_star = best[0]
        witness = StationaryWitness(endpoint=best[1], alpha=best[2],
                                    residual=best[3])
        others = tuple(
            StationaryWitness(endpoint=r[1], alpha=r[2], residual=r[3])
            for r in cluster if r is not best
        )
        points.append(StationaryPoint(
            x_star=x_star,
            witness=witness,
            fuzzy_point=p.fam.instantiate(x_star, p.grid),
            corroborators=others,
        ))
    points.sort(key=lambda s: s.x_star)
    return points


def find_stationary(p: Problem, *,
                    require_both_endpoints: bool = True) -> list[StationaryPoint]:
    """Crisp parameters where the endpoint derivatives vanish.

    Scans ``x_scan_points`` uniform points per level and endpoint,
    brackets sign changes, bisects to ``|derivative| <= root_tol`` and
    clusters the roots within ``10 * root_tol``.  With
    ``require_both_endpoints`` (default) a cluster is kept only when
    both the lower- and upper-endpoint derivative families vanish
    there, which pins the answer to the shared top-level condition;
    pass ``False`` for the permissive single-endpoint form.
    """
    points, warns = _find_stationary_core(p, require_both_endpoints)
    for msg in warns:
        warnings.warn(msg, stacklevel=2)
    return points


# ---------------------------------------------------------------------------
# sufficiency and brute-force verification
# ---------------------------------------------------------------------------


def sufficiency_check(p: Problem, s: StationaryPoint) -> SufficiencyResult:
    """Classify a stationary point via the lower-endpoint second derivative."""
    try:
        r2 = second_derivative(
            p.objective, p.fam, s.x_star, p.grid, domain=p.domain_pair(),
        )
    except NotDifferentiableError as exc:
        return SufficiencyResult(
            verdict=Sufficiency.INCONCLUSIVE,
            reason=f"second derivative unavailable at candidate: {exc}",
        )
    if not r2.verdict.ok:
        return SufficiencyResult(
            verdict=Sufficiency.INCONCLUSIVE,
            reason="second derivative not trustworthy at candidate: "
                   + r2.verdict.summary(),
        )

    xs = p.scan_xs()
    verdicts = screen_verdicts(
        p.objective, p.fam, xs, p.grid, order=2, domain=p.domain_pair(),
    )
    for x, v in zip(xs, verdicts):
        if v.status is DiffStatus.NO:
            return SufficiencyResult(
                verdict=Sufficiency.INCONCLUSIVE,
                reason=f"second derivative fails near x={x:.6g}: {v.summary()}",
            )

    jets, _, _ = calculus._batch_jets(p.objective, p.fam, xs, p.grid)
    lower_d2 = jets[2]
    flat = int(np.argmin(lower_d2))
    i, j = np.unravel_index(flat, lower_d2.shape)
    min_d2 = float(lower_d2[i, j])
    peak_d2 = float(r2.cuts_raw[-1, 0])     # candidate's top level

    if min_d2 >= -p.config.root_tol:
        return SufficiencyResult(
            verdict=Sufficiency.GLOBAL,
            min_lower_d2=min_d2,
            min_at_x=float(xs[i]),
            min_at_alpha=float(p.grid.levels[j]),
            peak_lower_d2=peak_d2,
            reason="lower-endpoint second derivative nonnegative on the scan",
        )
    if peak_d2 > p.config.root_tol:
        return SufficiencyResult(
            verdict=Sufficiency.LOCAL,
            min_lower_d2=min_d2,
            min_at_x=float(xs[i]),
            min_at_alpha=float(p.grid.levels[j]),
            peak_lower_d2=peak_d2,
            reason="positive at the candidate's top level but negative "
                   "somewhere on the scan",
        )
    return SufficiencyResult(
        verdict=Sufficiency.INCONCLUSIVE,
        min_lower_d2=min_d2,
        min_at_x=float(xs[i]),
        min_at_alpha=float(p.grid.levels[j]),
        peak_lower_d2=peak_d2,
        reason="second derivative changes sign",
    )


def verify_nondominated(p: Problem, s: StationaryPoint) -> BruteCheck:
    """Brute falsifier: search a dense scan for a strict dominator.

    Scans ``10 * x_scan_points`` uniform feasible points; returns a
    failure with the first strict dominator found, otherwise a pass.
    Resolution-limited: a pass means no counterexample at this grid.
    """
    xs = p.scan_xs(factor=10)
    jets, _, _ = calculus._batch_jets(p.objective, p.fam, xs, p.grid)
    lo, hi = jets[0], jets[3]
    t_lo, t_hi = calculus._endpoint_values(
        p.objective, p.fam, s.x_star, p.grid,
    )
    tol = p.config.dominance_tol
    weak = (np.all(lo <= t_lo[None, :] + tol, axis=1)
            & np.all(hi <= t_hi[None, :] + tol, axis=1))
    strict = weak & (
        np.any(lo < t_lo[None, :] - tol, axis=1)
        | np.any(hi < t_hi[None, :] - tol, axis=1)
    )
    strict &= np.abs(xs - s.x_star) > 10.0 * p.config.root_tol
    hits = np.nonzero(strict)[0]
    if len(hits):
        return BruteCheck(passed=False, counterexample=float(xs[hits[0]]))
    return BruteCheck(passed=True, counterexample=None)


def solve(p: Problem, *,
          require_both_endpoints: bool = True) -> SolveReport:
    """find_stationary + sufficiency_check + verify_nondominated."""
    points, warns = _find_stationary_core(p, require_both_endpoints)
    for msg in warns:
        warnings.warn(msg, stacklevel=2)
    sufficiency = tuple(sufficiency_check(p, s) for s in points)
    brute = tuple(verify_nondominated(p, s) for s in points)
    return SolveReport(
        problem=p,
        stationary=tuple(points),
        sufficiency=sufficiency,
        brute_check=brute,
        warnings=tuple(warns),
    )
