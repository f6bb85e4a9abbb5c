import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hh3.bounds import (L_SWITCH, BoundReport, DerivEndpoints,
                        _moment_closed, _moment_series, best_bound,
                        default_q_grid, direct_bound, holder_bound,
                        holder_exponents, holder_factor, mu, mu_q,
                        power_mean_bound, ratio_pair)
from hh3.errors import (BadInterval, DomainError,
                        NonPositiveThirdDerivative)
from hh3.quadrature import integrate_adaptive


# --------------------------------------------------------------------------
# mu: frozen values and oracles
# --------------------------------------------------------------------------

def test_mu_at_one_is_exact():
    assert mu(1.0) == 0.25


@pytest.mark.parametrize("k,expected", [
    # closed-form antiderivatives of t^3 k^(t/2), worked by hand
    (math.e ** 2, 6.0 - 2.0 * math.e),
    (math.exp(-1.0), 96.0 - 158.0 * math.exp(-0.5)),
    (math.e, 96.0 - 58.0 * math.exp(0.5)),
])
def test_mu_frozen_values(k, expected):
    assert mu(k) == pytest.approx(expected, rel=1e-13)


def _mu_by_quadrature(k: float) -> float:
    lam = math.log(k)
    return integrate_adaptive(lambda t: t ** 3 * math.exp(0.5 * lam * t),
                              0.0, 1.0, 1e-13)


@pytest.mark.parametrize("k", [
    1e-8, 1e-6, 1e-3, 0.03, 0.4, 0.9, 1.0 - 1e-12, 1.0, 1.0 + 1e-12,
    1.1, 2.0, math.e ** 2, 50.0, 1e3, 1e6, 1e8,
])
def test_mu_spot_check_against_quadrature(k):
    assert mu(k) == pytest.approx(_mu_by_quadrature(k), rel=1e-11)


def test_mu_series_closed_agree_across_seam():
    # both branches must agree throughout [L_SWITCH/2, 2*L_SWITCH] in |ln K|
    for i in range(201):
        lam = 0.5 * L_SWITCH + (2.0 * L_SWITCH - 0.5 * L_SWITCH) * i / 200.0
        for signed in (lam, -lam):
            series = _moment_series(signed)
            closed = _moment_closed(signed)
            # the closed form loses ~5 digits to cancellation at the low end
            # of this window; 1e-9 leaves two orders of margin over that
            assert series == pytest.approx(closed, rel=1e-9)


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=1e-8, max_value=1e8))
def test_mu_positive(k):
    assert mu(k) > 0.0


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1e6),
       st.floats(min_value=1.0, max_value=4.0))
def test_mu_monotone_increasing(k, factor):
    assert mu(k) <= mu(k * factor)
    if factor >= 1.0 + 1e-9:  # strict once the gap is resolvable in floats
        assert mu(k) < mu(k * factor)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_mu_rejects_bad_ratio(bad):
    with pytest.raises(DomainError):
        mu(bad)


# --------------------------------------------------------------------------
# mu_q
# --------------------------------------------------------------------------

def test_mu_q_at_one_is_mu_exactly():
    rng = random.Random(7)
    for _ in range(50):
        k = math.exp(rng.uniform(-18.0, 18.0))
        assert mu_q(k, 1.0) == mu(k)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.5, max_value=2.0),
       st.floats(min_value=1.0, max_value=8.0))
def test_mu_q_matches_powered_ratio(k, q):
    assert mu_q(k, q) == pytest.approx(mu(k ** q), rel=1e-12)


def test_mu_q_overflow_guard():
    k = math.e ** 2  # ln k = 2, so q * ln(k) / 2 == q
    assert mu_q(k, 699.0) > 0.0
    with pytest.raises(OverflowError):
        mu_q(k, 701.0)


def test_mu_q_rejects_small_q():
    with pytest.raises(DomainError):
        mu_q(2.0, 0.5)


# --------------------------------------------------------------------------
# Holder factor and exponents
# --------------------------------------------------------------------------

def test_holder_factor_frozen_values():
    assert holder_factor(math.e ** 2, 1.0) == pytest.approx(math.e - 1.0,
                                                            rel=1e-14)
    assert holder_factor(math.exp(-1.0), 2.0) == pytest.approx(
        1.0 - math.exp(-1.0), rel=1e-14)


def test_holder_factor_at_one():
    assert holder_factor(1.0, 3.0) == 1.0


def _holder_factor_by_quadrature(k: float, q: float) -> float:
    lam = math.log(k)
    # hf(K, q) = 2/(q ln K) (K^(q/2) - 1) = integral of q ln(K)/2 e^(u) ...
    # checked directly against the defining integral of K^(q t / 2):
    return integrate_adaptive(lambda t: math.exp(0.5 * q * lam * t),
                              0.0, 1.0, 1e-13)


@pytest.mark.parametrize("k,q", [(0.2, 1.0), (0.9, 2.0), (1.0, 5.0),
                                 (3.7, 1.5), (40.0, 3.0)])
def test_holder_factor_is_exponential_mean(k, q):
    assert holder_factor(k, q) == pytest.approx(
        _holder_factor_by_quadrature(k, q), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1.0 + 1e-9, max_value=1e6))
def test_holder_exponents_conjugate(q):
    pair = holder_exponents(q)
    assert 1.0 / pair.p + 1.0 / pair.q == pytest.approx(1.0, abs=1e-12)


def test_holder_exponents_reject_q_at_most_one():
    for q in (1.0, 0.3, -2.0, math.nan):
        with pytest.raises(DomainError):
            holder_exponents(q)


# --------------------------------------------------------------------------
# endpoint records
# --------------------------------------------------------------------------

def test_deriv_endpoints_validation():
    with pytest.raises(NonPositiveThirdDerivative):
        DerivEndpoints(0.0, 1.0, 0.0, 1.0)
    with pytest.raises(NonPositiveThirdDerivative):
        DerivEndpoints(1.0, math.nan, 0.0, 1.0)
    with pytest.raises(BadInterval):
        DerivEndpoints(1.0, 1.0, 1.0, 1.0)
    with pytest.raises(BadInterval):
        DerivEndpoints(1.0, 1.0, 2.0, 1.0)


def test_ratio_pair_swap_is_exact():
    e = DerivEndpoints(3.7, 11.1, 0.0, 2.0)
    swapped = DerivEndpoints(11.1, 3.7, 0.0, 2.0)
    r, rs = ratio_pair(e), ratio_pair(swapped)
    assert (r.K, r.M) == (rs.M, rs.K)
    assert r.K * r.M == pytest.approx(1.0, rel=1e-15)


# --------------------------------------------------------------------------
# the three bounds
# --------------------------------------------------------------------------

_EXP_ENDPOINTS = DerivEndpoints(1.0, math.e, 0.0, 1.0)


def test_direct_bound_exp_frozen():
    # (1/96) (e mu(1/e) + mu(e)) simplifies to (e + 1) - (9/4) e^(1/2)
    expected = (math.e + 1.0) - 2.25 * math.sqrt(math.e)
    assert direct_bound(_EXP_ENDPOINTS) == pytest.approx(expected, rel=1e-12)


def test_direct_bound_constant_third_derivative():
    # |f'''| == c makes both ratios 1, so the bound is (b-a)^3 c mu(1) * 2/96
    # = (b-a)^3 c / 192; with c = 6 on [-1, 1] that is 8 * 6 / 192 = 0.25
    e = DerivEndpoints(6.0, 6.0, -1.0, 1.0)
    assert direct_bound(e) == pytest.approx(0.25, rel=1e-15)


def test_direct_bound_reflection_symmetry():
    rng = random.Random(99)
    for _ in range(50):
        f3a = math.exp(rng.uniform(-6, 6))
        f3b = math.exp(rng.uniform(-6, 6))
        a = rng.uniform(-5, 4)
        b = a + rng.uniform(0.1, 3.0)
        e = DerivEndpoints(f3a, f3b, a, b)
        mirrored = DerivEndpoints(f3b, f3a, a, b)
        assert direct_bound(e) == direct_bound(mirrored)
        assert power_mean_bound(e, 3.0) == power_mean_bound(mirrored, 3.0)
        assert holder_bound(e, 2.0) == holder_bound(mirrored, 2.0)


def test_holder_bound_constant_third_derivative_q2():
    # K == 1 kills the ratio weights, leaving (b-a)^3 c / (48 sqrt(7))
    e = DerivEndpoints(6.0, 6.0, 0.0, 2.0)
    assert holder_bound(e, 2.0) == pytest.approx(
        8.0 * 6.0 / (48.0 * math.sqrt(7.0)), rel=1e-14)


def test_holder_bound_needs_q_above_one():
    with pytest.raises(DomainError):
        holder_bound(_EXP_ENDPOINTS, 1.0)


def test_power_mean_bound_at_q1_equals_direct_bitwise():
    rng = random.Random(3)
    for _ in range(100):
        e = DerivEndpoints(math.exp(rng.uniform(-7, 7)),
                           math.exp(rng.uniform(-7, 7)),
                           0.0, rng.uniform(0.25, 4.0))
        assert power_mean_bound(e, 1.0) == direct_bound(e)


def test_power_mean_bound_rejects_q_below_one():
    with pytest.raises(DomainError):
        power_mean_bound(_EXP_ENDPOINTS, 0.99)


def test_bounds_scale_with_width_cubed():
    wide = DerivEndpoints(1.0, math.e, 0.0, 2.0)
    narrow = DerivEndpoints(1.0, math.e, 0.0, 1.0)
    assert direct_bound(wide) == pytest.approx(8.0 * direct_bound(narrow),
                                               rel=1e-14)


# --------------------------------------------------------------------------
# best-of search
# --------------------------------------------------------------------------

def test_default_q_grid_shape():
    grid = default_q_grid()
    assert len(grid) == 64
    assert grid[0] == 1.001
    assert grid[-1] == 64.0
    assert all(lo < hi for lo, hi in zip(grid, grid[1:]))


def test_best_bound_singleton_grid():
    # only q = 1: the Holder route is empty and chi3 collapses onto chi1
    e = DerivEndpoints(1.0, 1.0, 0.0, 2.0)
    report = best_bound(e, q_grid=(1.0,))
    assert report.chi1 == pytest.approx(8.0 / 192.0, rel=1e-15)
    assert report.chi2 == math.inf
    assert report.chi2_q is None
    assert report.chi3 == report.chi1
    assert report.argmin_label == "chi1"  # ties resolve toward chi1
    assert report.min_value == report.chi1


def test_best_bound_dominates_each_method():
    grid = default_q_grid()
    rng = random.Random(11)
    for _ in range(25):
        e = DerivEndpoints(math.exp(rng.uniform(-4, 4)),
                           math.exp(rng.uniform(-4, 4)),
                           0.0, rng.uniform(0.5, 2.0))
        report = best_bound(e, grid)
        assert report.min_value <= direct_bound(e) * (1 + 1e-15)
        for q in grid[::7]:
            assert report.min_value <= holder_bound(e, q) * (1 + 1e-15)
            assert report.min_value <= power_mean_bound(e, q) * (1 + 1e-15)


def test_best_bound_labels_are_consistent():
    report = best_bound(_EXP_ENDPOINTS)
    by_label = {"chi1": report.chi1, "chi2": report.chi2,
                "chi3": report.chi3}
    assert report.min_value == by_label[report.argmin_label]
    assert isinstance(report, BoundReport)


def test_best_bound_refinement_improves_on_coarse_grid():
    # with a very coarse grid the golden polish must do the work
    e = DerivEndpoints(1.0, 1000.0, 0.0, 1.0)
    coarse = best_bound(e, q_grid=(1.0, 2.0, 32.0))
    fine = best_bound(e, q_grid=default_q_grid(1.001, 64.0, 512))
    assert coarse.min_value <= fine.min_value * 1.05


def test_best_bound_rejects_bad_grid():
    with pytest.raises(DomainError):
        best_bound(_EXP_ENDPOINTS, q_grid=())
    with pytest.raises(DomainError):
        best_bound(_EXP_ENDPOINTS, q_grid=(0.5, 2.0))
