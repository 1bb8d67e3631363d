import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fuzzcalc as fc
from fuzzcalc.core import GAUSS_ALPHA_MIN

from reference import cuts_by_membership_inversion, distance_dense

G = fc.default_grid(101)
G21 = fc.default_grid(21)


# ---------------------------------------------------------------------------
# grids and intervals
# ---------------------------------------------------------------------------


def test_uniform_grid_basics():
    g = fc.default_grid(11)
    assert len(g) == 11
    assert g.levels[0] == 0.0 and g.levels[-1] == 1.0
    np.testing.assert_allclose(np.diff(g.levels), 0.1)
    assert g == fc.AlphaGrid(np.linspace(0, 1, 11))
    assert hash(g) == hash(fc.default_grid(11))


@pytest.mark.parametrize("bad", [
    [0.0],                      # too short
    [0.0, 0.5, 0.5, 1.0],       # not strictly increasing
    [0.1, 0.5, 1.0],            # does not start at 0
    [0.0, 0.5, 0.9],            # does not end at 1
])
def test_bad_grids_rejected(bad):
    with pytest.raises(fc.InvalidParameterError):
        fc.AlphaGrid(bad)


def test_grid_merge_is_union():
    a = fc.default_grid(3)
    b = fc.AlphaGrid([0.0, 0.25, 1.0])
    m = a.merge(b)
    np.testing.assert_array_equal(m.levels, [0.0, 0.25, 0.5, 1.0])
    assert a.merge(a) is a


def test_interval_validation_and_queries():
    iv = fc.Interval(1.0, 3.0)
    assert iv.width == 2.0 and iv.midpoint == 2.0
    assert iv.contains(3.0) and not iv.contains(3.1)
    assert iv.contains(3.1, tol=0.2)
    assert tuple(iv) == (1.0, 3.0)
    with pytest.raises(fc.InvalidParameterError):
        fc.Interval(2.0, 1.0)
    with pytest.raises(fc.InvalidParameterError):
        fc.Interval(0.0, np.inf)


# ---------------------------------------------------------------------------
# constructors against the membership-inversion reference
# ---------------------------------------------------------------------------


def _mu_triangular(l, p, r):
    def mu(t):
        if t < l or t > r:
            return 0.0
        if t <= p:
            return 1.0 if p == l else (t - l) / (p - l)
        return 1.0 if r == p else (r - t) / (r - p)
    return mu


@pytest.mark.parametrize("l,p,r", [
    (1.0, 2.0, 3.0),
    (-2.0, 0.5, 4.0),
    (0.0, 0.0, 2.0),     # degenerate left side
    (-1.0, 3.0, 3.0),    # degenerate right side
])
def test_triangular_matches_inversion_reference(l, p, r):
    got = fc.make_triangular(l, p, r, grid=G21)
    want = cuts_by_membership_inversion(_mu_triangular(l, p, r), (l, r),
                                        G21.levels)
    np.testing.assert_allclose(got.cuts, want, atol=1e-9)


def test_trapezoidal_matches_inversion_reference():
    a, b, c, d = -1.0, 0.5, 2.0, 5.0

    def mu(t):
        if t < a or t > d:
            return 0.0
        if t < b:
            return (t - a) / (b - a)
        if t <= c:
            return 1.0
        return (d - t) / (d - c)

    got = fc.make_trapezoidal(a, b, c, d, grid=G21)
    want = cuts_by_membership_inversion(mu, (a, d), G21.levels)
    np.testing.assert_allclose(got.cuts, want, atol=1e-9)
    assert got.core.as_tuple() == (b, c)


def test_gaussian_matches_inversion_reference():
    mu0, sigma = 1.5, 0.7
    half_width = sigma * np.sqrt(-2.0 * np.log(GAUSS_ALPHA_MIN))

    def mu(t):
        return float(np.exp(-0.5 * ((t - mu0) / sigma) ** 2))

    got = fc.make_gaussian(mu0, sigma, grid=G21)
    # below the clamp level the cut freezes at the compactified support
    want = cuts_by_membership_inversion(
        mu, (mu0 - half_width, mu0 + half_width), G21.levels)
    np.testing.assert_allclose(got.cuts[1:], want[1:], atol=1e-9)
    np.testing.assert_allclose(got.support.as_tuple(),
                               (mu0 - half_width, mu0 + half_width))


def test_lr_with_identity_shapes_is_triangular():
    tri = fc.make_triangular(1.0, 3.0, 4.5, grid=G21)
    lr = fc.make_lr(3.0, 3.0, 2.0, 1.5, fc.ShapeFn.identity(),
                    fc.ShapeFn.identity(), grid=G21)
    np.testing.assert_allclose(lr.cuts, tri.cuts, atol=1e-12)


def test_lr_with_quadratic_flank():
    # membership of the left flank: mu(t) solves t = (p-l) + l*sqrt(mu)
    shape = fc.ShapeFn(lambda t: t * t, inverse=np.sqrt, name="square")
    num = fc.make_lr(2.0, 2.0, 1.0, 1.0, shape, fc.ShapeFn.identity(),
                     grid=G21)
    a = G21.levels
    np.testing.assert_allclose(num.lo, 1.0 + np.sqrt(a), atol=1e-9)
    np.testing.assert_allclose(num.hi, 3.0 - a, atol=1e-12)


@pytest.mark.parametrize("args", [
    (3.0, 2.0, 4.0),   # peak below left
    (1.0, 2.0, 1.5),   # right below peak
])
def test_triangular_rejects_disordered_parameters(args):
    with pytest.raises(fc.InvalidParameterError):
        fc.make_triangular(*args)


def test_gaussian_rejects_bad_parameters():
    with pytest.raises(fc.InvalidParameterError):
        fc.make_gaussian(0.0, 0.0)
    with pytest.raises(fc.InvalidParameterError):
        fc.make_gaussian(0.0, 1.0, alpha_min=0.0)


def test_crisp_embedding():
    c = fc.crisp(4.0, grid=G21)
    assert c.is_crisp()
    np.testing.assert_array_equal(c.lo, 4.0)
    np.testing.assert_array_equal(c.hi, 4.0)


# ---------------------------------------------------------------------------
# shape functions
# ---------------------------------------------------------------------------


def test_shapefn_rejects_bad_boundaries_and_nonmonotone():
    with pytest.raises(fc.ShapeFunctionError):
        fc.ShapeFn(lambda t: 0.5 * t)            # maps 1 to 0.5
    with pytest.raises(fc.ShapeFunctionError):
        fc.ShapeFn(lambda t: t * (1.0 - t) * 4)  # rises then falls
    with pytest.raises(fc.ShapeFunctionError):
        fc.ShapeFn(lambda t: t * t, inverse=lambda a: a)  # wrong inverse


def test_shapefn_bisected_inverse_matches_analytic():
    s = fc.ShapeFn(lambda t: t ** 3, name="cube")  # no inverse supplied
    alphas = np.linspace(0.0, 1.0, 17)
    np.testing.assert_allclose(s.inverse(alphas), alphas ** (1.0 / 3.0),
                               atol=1e-9)
    with pytest.raises(fc.RangeError):
        s.inverse(1.5)


# ---------------------------------------------------------------------------
# cuts, resampling, serialization
# ---------------------------------------------------------------------------


def test_alpha_cut_interpolates_between_levels():
    t = fc.make_triangular(0.0, 1.0, 4.0, grid=G21)
    cut = t.alpha_cut(0.375)  # off-grid level
    assert cut.lo == pytest.approx(0.375, abs=1e-12)
    assert cut.hi == pytest.approx(4.0 - 3 * 0.375, abs=1e-12)
    with pytest.raises(fc.RangeError):
        t.alpha_cut(-0.1)


def test_resample_preserves_interpolated_cuts():
    t = fc.make_triangular(-1.0, 0.5, 2.0, grid=G21)
    fine = t.resample(fc.default_grid(201))
    for alpha in (0.0, 0.15, 0.5, 0.95, 1.0):
        a, b = t.alpha_cut(alpha), fine.alpha_cut(alpha)
        assert a.lo == pytest.approx(b.lo, abs=1e-12)
        assert a.hi == pytest.approx(b.hi, abs=1e-12)
    assert t.resample(t.grid) is t


def test_serialization_round_trip():
    t = fc.make_triangular(1.0, 2.0, 3.0, grid=G21)
    back = fc.FuzzyNumber.from_json(t.to_json())
    assert back == t
    assert json.loads(t.to_json())["tag"]["kind"] == "triangular"


def test_from_dict_rejects_malformed_payloads():
    with pytest.raises(fc.InvalidParameterError):
        fc.FuzzyNumber.from_dict({"cuts": [[0, 1]]})
    with pytest.raises(fc.InvalidParameterError):
        fc.FuzzyNumber.from_dict({"grid": [0.0, 1.0], "cuts": [[0, 1]]})


def test_fuzzy_number_is_immutable():
    t = fc.crisp(1.0, grid=G21)
    with pytest.raises(AttributeError):
        t.lo = np.zeros(21)
    with pytest.raises((ValueError, RuntimeError)):
        t.lo[0] = 5.0


# ---------------------------------------------------------------------------
# arithmetic
# ---------------------------------------------------------------------------


def test_addition_is_endpointwise():
    a = fc.make_triangular(0.0, 1.0, 2.0, grid=G21)
    b = fc.make_triangular(5.0, 6.0, 9.0, grid=G21)
    s = fc.add(a, b)
    np.testing.assert_allclose(s.lo, a.lo + b.lo)
    np.testing.assert_allclose(s.hi, a.hi + b.hi)
    assert fc.distance(s, fc.add(b, a)) == 0.0


def test_subtraction_pairs_opposite_endpoints():
    a = fc.make_triangular(0.0, 1.0, 2.0, grid=G21)
    b = fc.make_triangular(1.0, 2.0, 4.0, grid=G21)
    d = fc.sub(a, b)
    np.testing.assert_allclose(d.lo, a.lo - b.hi)
    np.testing.assert_allclose(d.hi, a.hi - b.lo)
    # self-subtraction widens instead of collapsing to crisp zero
    self_diff = fc.sub(a, a)
    assert not self_diff.is_crisp()
    np.testing.assert_allclose(self_diff.support.as_tuple(), (-2.0, 2.0))


def _mul_reference(a, b, idx, samples=401):
    ts = np.linspace(a.lo[idx], a.hi[idx], samples)
    ss = np.linspace(b.lo[idx], b.hi[idx], samples)
    prods = np.outer(ts, ss)
    return prods.min(), prods.max()


@pytest.mark.parametrize("a_params,b_params", [
    ((1.0, 2.0, 3.0), (4.0, 5.0, 7.0)),      # both positive
    ((-3.0, -2.0, -1.0), (-5.0, -4.0, -2.0)),  # both negative
    ((-2.0, 0.5, 3.0), (1.0, 2.0, 4.0)),     # one straddles zero
    ((-2.0, 0.0, 2.0), (-3.0, 1.0, 3.0)),    # both straddle zero
])
def test_product_matches_dense_sampling(a_params, b_params):
    a = fc.make_triangular(*a_params, grid=G21)
    b = fc.make_triangular(*b_params, grid=G21)
    p = fc.mul(a, b)
    for idx in (0, 10, 20):
        ref_lo, ref_hi = _mul_reference(a, b, idx)
        # dense sampling touches the extreme corners exactly (products of
        # endpoints are attained at sample points)
        assert p.lo[idx] == pytest.approx(ref_lo, abs=1e-9)
        assert p.hi[idx] == pytest.approx(ref_hi, abs=1e-9)
    assert fc.validate(p).ok


def test_scalar_multiplication_swaps_for_negative():
    a = fc.make_triangular(1.0, 2.0, 4.0, grid=G21)
    d = fc.scalar_mul(-2.0, a)
    np.testing.assert_allclose(d.lo, -2.0 * a.hi)
    np.testing.assert_allclose(d.hi, -2.0 * a.lo)
    assert fc.validate(d).ok
    z = fc.scalar_mul(0.0, a)
    assert z.is_crisp()


def test_operator_sugar_matches_functions():
    a = fc.make_triangular(0.0, 1.0, 2.0, grid=G21)
    b = fc.make_triangular(1.0, 2.0, 3.0, grid=G21)
    assert fc.distance(a + b, fc.add(a, b)) == 0.0
    assert fc.distance(a - b, fc.sub(a, b)) == 0.0
    assert fc.distance(a * b, fc.mul(a, b)) == 0.0
    assert fc.distance(2.5 * a, fc.scalar_mul(2.5, a)) == 0.0
    assert fc.distance(-a, fc.scalar_mul(-1.0, a)) == 0.0


def test_mixed_grid_arithmetic_aligns_on_union():
    a = fc.make_triangular(0.0, 1.0, 2.0, grid=fc.default_grid(3))
    b = fc.make_triangular(0.0, 2.0, 4.0, grid=fc.default_grid(5))
    s = fc.add(a, b)
    assert len(s.grid) == 5
    assert s.support.as_tuple() == (0.0, 6.0)
    assert s.core.as_tuple() == (3.0, 3.0)


# ---------------------------------------------------------------------------
# metric
# ---------------------------------------------------------------------------


def test_distance_agrees_with_dense_reference():
    a = fc.make_triangular(0.0, 1.0, 2.0, grid=G)
    b = fc.make_gaussian(1.0, 0.4, grid=G)
    got = fc.distance(a, b)
    assert got == pytest.approx(distance_dense(a, b), abs=1e-9)


def test_distance_of_translates_is_the_shift():
    a = fc.make_triangular(0.0, 1.0, 2.0, grid=G21)
    b = fc.make_triangular(0.7, 1.7, 2.7, grid=G21)
    assert fc.distance(a, b) == pytest.approx(0.7, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.tuples(
    st.floats(-10, 10), st.floats(0.01, 5), st.floats(0.01, 5),
    st.floats(-10, 10), st.floats(0.01, 5), st.floats(0.01, 5),
))
def test_metric_symmetry_and_identity(params):
    pa, la, ra, pb, lb, rb = params
    a = fc.make_triangular(pa - la, pa, pa + ra, grid=G21)
    b = fc.make_triangular(pb - lb, pb, pb + rb, grid=G21)
    assert fc.distance(a, b) >= 0.0
    assert fc.distance(a, b) == fc.distance(b, a)
    assert fc.distance(a, a) == 0.0


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def test_validate_flags_inverted_and_unnested_cuts():
    good = fc.make_triangular(0.0, 1.0, 2.0, grid=G21)
    assert fc.validate(good).ok
    assert "valid" in fc.validate(good).summary()

    lo = good.lo.copy()
    hi = good.hi.copy()
    hi[5] = lo[5] - 1.0  # inverted interval at one level
    bad = fc.FuzzyNumber(G21, lo, hi)
    rep = fc.validate(bad)
    assert not rep.ok and 5 in rep.inverted_levels

    lo2 = good.lo.copy()
    lo2[10] = lo2[12]  # lower endpoints no longer monotone
    rep2 = fc.validate(fc.FuzzyNumber(G21, lo2, good.hi))
    assert not rep2.ok and rep2.worst_nesting is not None

    rep3 = fc.validate(fc.FuzzyNumber(G21, lo2, good.hi), tol=1.0)
    assert rep3.ok  # same data passes under a loose tolerance


def test_validate_flags_nonfinite():
    lo = np.zeros(21)
    hi = np.ones(21)
    hi[0] = np.inf
    rep = fc.validate(fc.FuzzyNumber(G21, lo, hi))
    assert not rep.ok
    assert any("finite" in msg or "support" in msg for msg in rep.issues)


def test_constructed_numbers_validate_on_fine_grids():
    for num in (
        fc.make_triangular(-3.0, 0.0, 1.0, grid=G),
        fc.make_trapezoidal(0.0, 1.0, 2.0, 5.0, grid=G),
        fc.make_gaussian(2.0, 1.3, grid=G),
    ):
        assert fc.validate(num).ok
