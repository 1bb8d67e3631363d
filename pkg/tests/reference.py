"""Independent reference routes used by the tests.

Everything here deliberately avoids the library's fast paths:

* ``cuts_by_membership_inversion`` recovers cut endpoints by scanning a
  membership function and bisecting its level crossings, instead of the
  constructors' closed-form interpolation.
* ``distance_dense`` evaluates the metric through ``alpha_cut``
  interpolation on a dense level set instead of the stored grid.
* ``fd_eval_levels`` differentiates the evaluation route with central
  finite differences, never touching the jet propagation code.

The sup-min composition oracle lives in ``fuzzcalc.oracle``.
"""

from __future__ import annotations

import numpy as np

from fuzzcalc import alpha_cut
from fuzzcalc.calculus import eval_levels


def _bisect_crossing(mu, lo, hi, alpha, rising, iters=80):
    """Refine a bracket [lo, hi] across the level ``mu == alpha``."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = mu(mid) >= alpha
        if above == rising:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _golden_argmax(mu, lo, hi, iters=100):
    """Maximizer of a unimodal function on [lo, hi] by golden section."""
    inv_phi = 0.5 * (np.sqrt(5.0) - 1.0)
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc_, fd = mu(c), mu(d)
    for _ in range(iters):
        if fc_ >= fd:
            b, d, fd = d, c, fc_
            c = b - inv_phi * (b - a)
            fc_ = mu(c)
        else:
            a, c, fc_ = c, d, fd
            d = a + inv_phi * (b - a)
            fd = mu(d)
    return 0.5 * (a + b)


def cuts_by_membership_inversion(mu, support, levels, samples=20001):
    """Cut endpoints of a membership function by scan + bisection.

    ``mu`` is a scalar membership function, ``support`` a pair bounding
    its support.  Returns an ``(n, 2)`` array of endpoints for the given
    ascending ``levels``; levels above the sampled maximum inherit the
    argmax location (degenerate cut).
    """
    ts = np.linspace(support[0], support[1], samples)
    ms = np.array([mu(t) for t in ts])
    peak = int(np.argmax(ms))
    out = np.empty((len(levels), 2))
    for i, a in enumerate(levels):
        ok = np.flatnonzero(ms >= a)
        if ok.size == 0:
            # the level sits above every sample: a degenerate cut at the
            # true peak, located by unimodal search around the sampled max
            t_star = _golden_argmax(
                mu, ts[max(peak - 1, 0)], ts[min(peak + 1, samples - 1)])
            out[i] = (t_star, t_star)
            continue
        left, right = ok[0], ok[-1]
        x1 = ts[left]
        if left > 0:
            x1 = _bisect_crossing(mu, ts[left - 1], ts[left], a, rising=True)
        x2 = ts[right]
        if right < samples - 1:
            x2 = _bisect_crossing(mu, ts[right + 1], ts[right], a, rising=True)
        out[i] = (x1, x2)
    return out


def distance_dense(a, b, n=2003):
    """Metric via interpolated cuts on a dense level set."""
    worst = 0.0
    for alpha in np.linspace(0.0, 1.0, n):
        ca = alpha_cut(a, float(alpha))
        cb = alpha_cut(b, float(alpha))
        worst = max(worst, abs(ca.lo - cb.lo), abs(ca.hi - cb.hi))
    return worst


def fd_eval_at(e, fam, x, alpha, h=1e-5):
    """Central differences of both endpoint values at one level."""
    lo_p, hi_p = eval_levels(e, fam, x + h, alpha)
    lo_m, hi_m = eval_levels(e, fam, x - h, alpha)
    return (lo_p - lo_m) / (2.0 * h), (hi_p - hi_m) / (2.0 * h)


def fd_eval_grid(e, fam, x, grid, h=1e-5):
    """Central differences of both endpoint families over a grid."""
    from fuzzcalc.calculus import eval_fuzzy

    p = eval_fuzzy(e, fam, x + h, grid)
    m = eval_fuzzy(e, fam, x - h, grid)
    return (p.lo - m.lo) / (2.0 * h), (p.hi - m.hi) / (2.0 * h)


def fd2_eval_grid(e, fam, x, grid, h=1e-4):
    """Second-order central differences of both endpoint families."""
    from fuzzcalc.calculus import eval_fuzzy

    p = eval_fuzzy(e, fam, x + h, grid)
    c = eval_fuzzy(e, fam, x, grid)
    m = eval_fuzzy(e, fam, x - h, grid)
    return (
        (p.lo - 2.0 * c.lo + m.lo) / (h * h),
        (p.hi - 2.0 * c.hi + m.hi) / (h * h),
    )
