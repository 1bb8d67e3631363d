import numpy as np
import pytest

import fuzzcalc as fc
from fuzzcalc.calculus import DiffStatus

from reference import fd2_eval_grid, fd_eval_grid

FAM = fc.TriangularFamily(l=1.0, r=1.0)
G = fc.default_grid(101)
A = G.levels
U = 1.0 - A  # level-dependent half-width of the unit triangular family

QUAD = fc.parse("X*X - 4*X")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def test_eval_quadratic_closed_form():
    # at x = 2 the variable's cut [1+a, 3-a] stays positive, so the
    # product cut is [(1+a)^2, (3-a)^2] and the subtraction pairs
    # opposite endpoints
    v = fc.eval_fuzzy(QUAD, FAM, 2.0)
    lo = (1.0 + A) ** 2 - 4.0 * (3.0 - A)
    hi = (3.0 - A) ** 2 - 4.0 * (1.0 + A)
    np.testing.assert_allclose(v.lo, lo, atol=1e-12)
    np.testing.assert_allclose(v.hi, hi, atol=1e-12)
    assert v.lo[0] == pytest.approx(-11.0) and v.hi[0] == pytest.approx(5.0)


def test_eval_matches_plain_fuzzy_arithmetic():
    for x in (0.0, 1.3, 2.0, 5.0):
        xt = FAM.instantiate(x, grid=G)
        want = fc.sub(fc.mul(xt, xt), fc.scalar_mul(4.0, xt))
        got = fc.eval_fuzzy(QUAD, FAM, x)
        assert fc.distance(got, want) <= 1e-12


def test_eval_levels_single_level():
    lo, hi = fc.eval_levels(QUAD, FAM, 2.0, 0.0)
    assert (lo, hi) == pytest.approx((-11.0, 5.0))
    lo1, hi1 = fc.eval_levels(QUAD, FAM, 2.0, 1.0)
    assert (lo1, hi1) == pytest.approx((-4.0, -4.0))
    with pytest.raises(fc.RangeError):
        fc.eval_levels(QUAD, FAM, 2.0, 1.5)


def test_eval_overflow_raises_evaluation_error():
    with pytest.raises(fc.EvaluationError):
        fc.eval_fuzzy(fc.parse("exp(X)"), FAM, 1000.0)


def test_eval_respects_fuzzy_constants():
    e = fc.parse("tri(1, 2, 4)*X*X + tri(0, 1, 5)")
    x = 3.0
    v = fc.eval_fuzzy(e, FAM, x)
    np.testing.assert_allclose(v.lo, (1 + A) * (x - 1 + A) ** 2 + A,
                               atol=1e-12)
    np.testing.assert_allclose(v.hi, (4 - 2 * A) * (x + 1 - A) ** 2 + (5 - 4 * A),
                               atol=1e-12)


# ---------------------------------------------------------------------------
# first derivative
# ---------------------------------------------------------------------------


def test_derivative_quadratic_raw_and_assembled():
    x = 3.0
    r = fc.derivative(QUAD, FAM, x)
    assert r.verdict.status is DiffStatus.YES
    np.testing.assert_allclose(r.raw_lo, 2.0 * (x - U) - 4.0, atol=1e-12)
    np.testing.assert_allclose(r.raw_hi, 2.0 * (x + U) - 4.0, atol=1e-12)
    assert r.fuzzy is not None and fc.validate(r.fuzzy).ok
    assert r.fd is not None and r.fd.max_rel <= 1e-6


def test_derivative_of_bare_variable_is_crisp_one():
    r = fc.derivative(fc.parse("X"), FAM, 7.0)
    assert r.verdict.status is DiffStatus.YES
    np.testing.assert_allclose(r.cuts_raw, 1.0, atol=1e-12)
    assert r.fuzzy.is_crisp(tol=1e-12)


def test_derivative_matches_independent_finite_differences():
    for src, x in [
        ("X*X - 4*X", 3.0),
        ("X*exp(0.2*X)", 2.5),
        ("tri(1, 2, 4)*X*X + tri(0, 1, 5)", 3.0),
        ("exp(-X)", 0.7),
    ]:
        e = fc.parse(src)
        r = fc.derivative(e, FAM, x)
        assert r.verdict.ok
        fd_lo, fd_hi = fd_eval_grid(e, FAM, x, G)
        scale = 1.0 + np.abs(r.cuts_raw)
        assert np.max(np.abs(r.raw_lo - fd_lo) / scale[:, 0]) <= 1e-6
        assert np.max(np.abs(r.raw_hi - fd_hi) / scale[:, 1]) <= 1e-6


def test_sum_difference_and_scalar_rules_on_fixed_pairs():
    x = 3.0
    e1, e2 = fc.parse("X*X + 2*X"), fc.parse("X*exp(0.2*X)")
    d1 = fc.derivative(e1, FAM, x).fuzzy
    d2 = fc.derivative(e2, FAM, x).fuzzy
    ds = fc.derivative(fc.parse("X*X + 2*X + X*exp(0.2*X)"), FAM, x).fuzzy
    dd = fc.derivative(fc.parse("X*X + 2*X - X*exp(0.2*X)"), FAM, x).fuzzy
    dk = fc.derivative(fc.parse("2.5*(X*X + 2*X)"), FAM, x).fuzzy
    assert fc.distance(ds, fc.add(d1, d2)) <= 1e-8
    assert fc.distance(dd, fc.sub(d1, d2)) <= 1e-8
    assert fc.distance(dk, fc.scalar_mul(2.5, d1)) <= 1e-8
    # zero scaling degenerates to the crisp zero derivative
    d0 = fc.derivative(fc.parse("0*(X*X + 2*X)"), FAM, x).fuzzy
    assert fc.distance(d0, fc.scalar_mul(0.0, d1)) <= 1e-12


def test_degenerate_family_reduces_to_classical_derivative():
    crisp_fam = fc.TriangularFamily(l=0.0, r=0.0)
    for x in (-2.0, 0.0, 3.0):
        r = fc.derivative(QUAD, crisp_fam, x)
        assert r.verdict.status is DiffStatus.YES
        assert r.fuzzy.is_crisp(tol=1e-12)
        np.testing.assert_allclose(r.cuts_raw, 2.0 * x - 4.0, atol=1e-9)


# ---------------------------------------------------------------------------
# non-differentiability detection
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("x", [0.2, 0.5, 0.8])
def test_square_is_not_differentiable_where_the_cut_straddles_zero(x):
    r = fc.derivative(fc.parse("X*X"), FAM, x)
    assert r.verdict.status is DiffStatus.NO
    assert r.fuzzy is None
    corners = r.verdict.corners()
    assert corners
    assert all(0.0 <= ev.alpha < 1.0 for ev in corners)


def test_square_at_zero_is_a_corner():
    r = fc.derivative(fc.parse("X*X"), FAM, 0.0)
    assert r.verdict.status is DiffStatus.NO
    assert r.verdict.corners()


def test_square_at_support_touch_is_marginal():
    # at x = 1 the lower operand endpoint reaches zero exactly at the
    # alpha = 0 edge: a one-sided tie that does not break the derivative
    r = fc.derivative(fc.parse("X*X"), FAM, 1.0)
    assert r.verdict.status is DiffStatus.MARGINAL_TIES
    assert r.verdict.ok
    kinds = {ev.kind for ev in r.verdict.events}
    assert "boundary_touch" in kinds and "corner" not in kinds
    want = fc.scalar_mul(2.0, FAM.instantiate(1.0, grid=G))
    assert fc.distance(r.fuzzy, want) <= 1e-9


@pytest.mark.parametrize("x", [1.0001, 1.5, 2.0, 10.0])
def test_square_is_differentiable_clear_of_the_kink(x):
    r = fc.derivative(fc.parse("X*X"), FAM, x)
    assert r.verdict.status is DiffStatus.YES
    want = fc.scalar_mul(2.0, FAM.instantiate(x, grid=G))
    assert fc.distance(r.fuzzy, want) <= 1e-9


def test_fd_backstop_is_conservative_right_next_to_a_kink():
    # within the finite-difference step of the x = 1 branch switch the
    # cross-check cannot certify the analytic derivative; the verdict
    # falls back to No with an fd_mismatch witness rather than guessing
    r = fc.derivative(fc.parse("X*X"), FAM, 1.0 + 1e-6)
    assert r.verdict.status is DiffStatus.NO
    assert {ev.kind for ev in r.verdict.events} == {"fd_mismatch"}


def test_off_grid_corner_is_found_by_bisection():
    # the operand endpoint crosses zero strictly between grid levels
    x = 0.50543
    r = fc.derivative(fc.parse("X*X"), FAM, x)
    assert r.verdict.status is DiffStatus.NO
    corners = r.verdict.corners()
    assert corners
    off_grid = [ev for ev in corners if ev.level_index is None]
    assert off_grid
    # the bisected level matches the closed-form crossing 1 - x
    assert any(abs(ev.alpha - (1.0 - x)) <= 1e-9 for ev in off_grid)


def test_differentiability_check_matches_derivative_verdict():
    for x in (0.5, 1.0, 3.0):
        v = fc.differentiability_check(fc.parse("X*X"), FAM, x)
        r = fc.derivative(fc.parse("X*X"), FAM, x)
        assert v.status is r.verdict.status


# ---------------------------------------------------------------------------
# second derivative
# ---------------------------------------------------------------------------


def test_second_derivative_of_quadratic_is_crisp_two():
    r = fc.second_derivative(QUAD, FAM, 3.0)
    assert r.verdict.status is DiffStatus.YES
    np.testing.assert_allclose(r.cuts_raw, 2.0, atol=1e-9)
    assert r.fuzzy.is_crisp(tol=1e-9)
    assert r.order == 2


def test_second_derivative_matches_independent_finite_differences():
    e = fc.parse("X*exp(0.2*X)")
    r = fc.second_derivative(e, FAM, 2.5)
    assert r.verdict.ok
    fd_lo, fd_hi = fd2_eval_grid(e, FAM, 2.5, G)
    scale = 1.0 + np.abs(r.cuts_raw)
    assert np.max(np.abs(r.raw_lo - fd_lo) / scale[:, 0]) <= 1e-5
    assert np.max(np.abs(r.raw_hi - fd_hi) / scale[:, 1]) <= 1e-5


def test_second_derivative_requires_first_order_in_a_neighbourhood():
    with pytest.raises(fc.NotDifferentiableError) as ei:
        fc.second_derivative(fc.parse("X*X"), FAM, 0.5)
    inner = ei.value.result
    assert inner is not None
    assert inner.order == 1
    assert inner.verdict.status is DiffStatus.NO


def test_second_derivative_probes_respect_the_domain():
    # x = 1 sits at the domain edge; the left probe would land in the
    # non-differentiable region and must be skipped
    r = fc.second_derivative(QUAD, FAM, 1.0, domain=(1.0, 5.0))
    assert r.verdict.ok
    np.testing.assert_allclose(r.cuts_raw, 2.0, atol=1e-9)
    with pytest.raises(fc.NotDifferentiableError):
        fc.second_derivative(QUAD, FAM, 1.0)  # no domain: left probe fails


# ---------------------------------------------------------------------------
# screening
# ---------------------------------------------------------------------------


def test_screen_verdicts_agree_with_scalar_checks():
    xs = np.array([0.2, 0.5, 1.0, 1.5, 2.0, 3.0])
    screened = fc.screen_verdicts(fc.parse("X*X"), FAM, xs)
    assert len(screened) == len(xs)
    for x, v in zip(xs, screened):
        want = fc.differentiability_check(fc.parse("X*X"), FAM, float(x))
        assert v.status is want.status


def test_screen_verdicts_second_order():
    xs = np.array([1.5, 2.0, 3.0])
    screened = fc.screen_verdicts(QUAD, FAM, xs, order=2,
                                  domain=(1.0, 5.0))
    assert all(v.ok for v in screened)


# ---------------------------------------------------------------------------
# continuity probe
# ---------------------------------------------------------------------------


def test_continuity_probe_tracks_the_local_modulus():
    # for the quadratic at x0 = 2 the worst level gives
    # |f(x0+d) - f(x0)| = d*(2 + d), so eps = 0.1 admits d* ~= 0.0488
    rep = fc.continuity_probe(QUAD, FAM, 2.0, eps=0.1, trials=300, seed=7)
    assert rep.ok
    assert not rep.violations
    assert 0.04 <= rep.delta_est <= 0.055
    assert rep.history  # the search kept a trace
    assert rep.x0 == 2.0 and rep.eps == 0.1


def test_continuity_probe_scales_with_eps():
    small = fc.continuity_probe(QUAD, FAM, 2.0, eps=0.01, trials=100, seed=7)
    large = fc.continuity_probe(QUAD, FAM, 2.0, eps=1.0, trials=100, seed=7)
    assert small.delta_est < large.delta_est


def test_continuity_probe_parameter_validation():
    with pytest.raises(fc.InvalidParameterError):
        fc.continuity_probe(QUAD, FAM, 2.0, eps=0.0)
    with pytest.raises(fc.InvalidParameterError):
        fc.continuity_probe(QUAD, FAM, 2.0, eps=0.1, trials=0)


# ---------------------------------------------------------------------------
# result plumbing
# ---------------------------------------------------------------------------


def test_verdict_summary_mentions_events():
    r = fc.derivative(fc.parse("X*X"), FAM, 0.5)
    s = r.verdict.summary()
    assert "No" in s and "corner" in s
    clean = fc.derivative(QUAD, FAM, 3.0).verdict.summary()
    assert clean == "Yes"


def test_derivative_result_exposes_grid_and_raw_views():
    r = fc.derivative(QUAD, FAM, 3.0, grid=fc.default_grid(11))
    assert r.levels.shape == (11,)
    assert r.cuts_raw.shape == (11, 2)
    np.testing.assert_array_equal(r.raw_lo, r.cuts_raw[:, 0])
    np.testing.assert_array_equal(r.raw_hi, r.cuts_raw[:, 1])
