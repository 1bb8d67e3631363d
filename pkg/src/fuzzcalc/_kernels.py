"""Hot numerical kernels with numba and pure-numpy implementations.

Two kernels live here because profiling shows they dominate runtime:

* ``supmin_compose`` -- the O(N^2) sup-min composition used by the
  extension-principle reference in :mod:`fuzzcalc.oracle`;
* ``four_product_jets`` -- the per-level four-product selection (with
  first/second derivative payloads) at the heart of interval
  multiplication inside :mod:`fuzzcalc.calculus`.

Both flavours are importable under explicit names (``*_numpy`` /
``*_numba``) so the benchmark and the equivalence tests can compare them
directly; the unsuffixed names are bound according to
:mod:`fuzzcalc._backend`.
"""

from __future__ import annotations

import numpy as np

from ._backend import BACKEND, HAS_NUMBA

OP_ADD = 0
OP_SUB = 1
OP_MUL = 2

# ---------------------------------------------------------------------------
# sup-min composition of two sampled membership functions
# ---------------------------------------------------------------------------


def supmin_compose_numpy(xs, mua, ys, mub, op, zmin, zmax, nbins):
    """Pure-numpy sup-min composition onto a uniform output grid.

    For every sample pair (x_i, y_j) the combined value z = x op y is
    binned onto ``nbins`` uniform bins spanning [zmin, zmax]; each bin
    keeps the largest min(mua_i, mub_j) seen.  Returns the bin membership
    array of length ``nbins``.
    """
    mu = np.zeros(nbins)
    if zmax <= zmin:
        mu[0] = min(float(np.max(mua)), float(np.max(mub)))
        return mu
    if op == OP_ADD:
        z = np.add.outer(xs, ys)
    elif op == OP_SUB:
        z = np.subtract.outer(xs, ys)
    elif op == OP_MUL:
        z = np.multiply.outer(xs, ys)
    else:
        raise ValueError(f"unknown op code {op}")
    m = np.minimum.outer(mua, mub)
    scale = (nbins - 1) / (zmax - zmin)
    idx = ((z.ravel() - zmin) * scale + 0.5).astype(np.int64)
    np.clip(idx, 0, nbins - 1, out=idx)
    np.maximum.at(mu, idx, m.ravel())
    return mu


def _supmin_compose_loops(xs, mua, ys, mub, op, zmin, zmax, nbins):
    # Loop form compiled by numba; mirrors supmin_compose_numpy exactly
    # (same binning arithmetic, same first-wins tie behaviour).
    mu = np.zeros(nbins)
    if zmax <= zmin:
        ma = 0.0
        for i in range(mua.shape[0]):
            if mua[i] > ma:
                ma = mua[i]
        mb = 0.0
        for j in range(mub.shape[0]):
            if mub[j] > mb:
                mb = mub[j]
        mu[0] = ma if ma < mb else mb
        return mu
    scale = (nbins - 1) / (zmax - zmin)
    for i in range(xs.shape[0]):
        xi = xs[i]
        ai = mua[i]
        for j in range(ys.shape[0]):
            if op == 0:
                z = xi + ys[j]
            elif op == 1:
                z = xi - ys[j]
            else:
                z = xi * ys[j]
            m = ai if ai < mub[j] else mub[j]
            k = int((z - zmin) * scale + 0.5)
            if k < 0:
                k = 0
            elif k >= nbins:
                k = nbins - 1
            if m > mu[k]:
                mu[k] = m
    return mu


# ---------------------------------------------------------------------------
# four-product interval multiplication with jet payloads
# ---------------------------------------------------------------------------

# Candidate order is fixed: (lo,lo), (lo,hi), (hi,lo), (hi,hi).  Selection
# keeps the first index on exact value ties, matching np.argmin/np.argmax.


def four_product_jets_numpy(alov, alod1, alod2, ahiv, ahid1, ahid2,
                            blov, blod1, blod2, bhiv, bhid1, bhid2):
    """Candidate product jets and min/max branch choice per level.

    All twelve inputs are flat float arrays of equal length ``n``.
    Returns ``(cv, cd1, cd2, mini, maxi)`` where the candidate arrays have
    shape ``(4, n)`` and ``mini``/``maxi`` hold the selected branch index
    per level.
    """
    av = np.stack((alov, alov, ahiv, ahiv))
    ad1 = np.stack((alod1, alod1, ahid1, ahid1))
    ad2 = np.stack((alod2, alod2, ahid2, ahid2))
    bv = np.stack((blov, bhiv, blov, bhiv))
    bd1 = np.stack((blod1, bhid1, blod1, bhid1))
    bd2 = np.stack((blod2, bhid2, blod2, bhid2))
    cv = av * bv
    cd1 = ad1 * bv + av * bd1
    cd2 = ad2 * bv + 2.0 * ad1 * bd1 + av * bd2
    mini = np.argmin(cv, axis=0)
    maxi = np.argmax(cv, axis=0)
    return cv, cd1, cd2, mini, maxi


def _four_product_jets_loops(alov, alod1, alod2, ahiv, ahid1, ahid2,
                             blov, blod1, blod2, bhiv, bhid1, bhid2):
    n = alov.shape[0]
    cv = np.empty((4, n))
    cd1 = np.empty((4, n))
    cd2 = np.empty((4, n))
    mini = np.empty(n, np.int64)
    maxi = np.empty(n, np.int64)
    for t in range(n):
        for k in range(4):
            if k < 2:
                av = alov[t]
                ad1_ = alod1[t]
                ad2_ = alod2[t]
            else:
                av = ahiv[t]
                ad1_ = ahid1[t]
                ad2_ = ahid2[t]
            if k % 2 == 0:
                bv = blov[t]
                bd1_ = blod1[t]
                bd2_ = blod2[t]
            else:
                bv = bhiv[t]
                bd1_ = bhid1[t]
                bd2_ = bhid2[t]
            cv[k, t] = av * bv
            cd1[k, t] = ad1_ * bv + av * bd1_
            cd2[k, t] = ad2_ * bv + 2.0 * ad1_ * bd1_ + av * bd2_
        best = 0
        worst = 0
        for k in range(1, 4):
            if cv[k, t] < cv[best, t]:
                best = k
            if cv[k, t] > cv[worst, t]:
                worst = k
        mini[t] = best
        maxi[t] = worst
    return cv, cd1, cd2, mini, maxi


# ---------------------------------------------------------------------------
# backend binding
# ---------------------------------------------------------------------------

if HAS_NUMBA:
    from numba import njit

    supmin_compose_numba = njit(cache=True)(_supmin_compose_loops)
    four_product_jets_numba = njit(cache=True)(_four_product_jets_loops)
else:  # pragma: no cover - exercised only when numba is absent
    supmin_compose_numba = None
    four_product_jets_numba = None

if BACKEND == "numba":
    supmin_compose = supmin_compose_numba
    four_product_jets = four_product_jets_numba
else:
    supmin_compose = supmin_compose_numpy
    four_product_jets = four_product_jets_numpy


def warmup() -> None:
    """Force JIT compilation of the bound kernels (no-op on numpy)."""
    xs = np.linspace(0.0, 1.0, 4)
    mu = np.array([0.0, 1.0, 1.0, 0.0])
    supmin_compose(xs, mu, xs, mu, OP_ADD, 0.0, 2.0, 8)
    z = np.zeros(4)
    o = np.ones(4)
    four_product_jets(z, o, z, o, o, z, z, o, z, o, o, z)
