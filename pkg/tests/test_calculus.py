import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decaysurge import calculus
from decaysurge.calculus import (
    BracketError,
    CumulativeIntegral,
    EvaluationHorizon,
    QuadratureError,
    RangeError,
    find_root,
    gk_integrate,
    integrate,
    monotone_inverse,
    tail_integral,
)


def test_simple_finite_integral():
    res = integrate(lambda y: 2.0 * y, 0.0, 1.0)
    assert res.value == pytest.approx(1.0, abs=1e-12)
    assert res.error_estimate >= 0.0 and res.evaluations >= 1


def test_improper_tail():
    res = integrate(lambda y: y**-2, 1.0, math.inf)
    assert res.value == pytest.approx(1.0, rel=1e-9)


def test_gaussian_over_whole_line():
    res = integrate(lambda y: math.exp(-y * y), -math.inf, math.inf)
    assert res.value == pytest.approx(math.sqrt(math.pi), rel=1e-9)


def test_divergent_tail_reported_infinite():
    # integrable at 0 but not at infinity
    f = lambda y: y**-2 * math.exp(y / 2.0 - 1.0 / y)
    res = integrate(f, 0.0, math.inf)
    assert res.value == math.inf


def test_divergent_endpoint_reported_infinite():
    assert integrate(lambda y: 1.0 / y, 0.0, 1.0).value == math.inf
    assert integrate(lambda y: y**-1.5, 0.0, 1.0).value == math.inf


def test_integrable_endpoint_singularity():
    res = integrate(lambda y: y**-0.5, 0.0, 1.0)
    assert res.value == pytest.approx(2.0, rel=1e-9)


def test_bad_interval_rejected():
    with pytest.raises(ValueError):
        integrate(lambda y: y, 1.0, 1.0)
    with pytest.raises(ValueError):
        integrate(lambda y: y, 2.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(min_value=-3, max_value=3, allow_nan=False), min_size=4, max_size=4),
    st.floats(min_value=-2, max_value=2, allow_nan=False),
    st.floats(min_value=0.1, max_value=3, allow_nan=False),
)
def test_cubics_are_exact(coeffs, a, width):
    c0, c1, c2, c3 = coeffs
    f = lambda y: c0 + c1 * y + c2 * y * y + c3 * y**3
    F = lambda y: c0 * y + c1 * y * y / 2 + c2 * y**3 / 3 + c3 * y**4 / 4
    b = a + width
    res = integrate(f, a, b)
    assert abs(res.value - (F(b) - F(a))) <= 1e-13 * max(1.0, abs(F(b) - F(a)))


@settings(max_examples=25, deadline=None)
@given(
    st.floats(min_value=0.1, max_value=1.0),
    st.floats(min_value=1.1, max_value=2.0),
    st.floats(min_value=2.1, max_value=4.0),
)
def test_additivity(a, b, c):
    f = lambda y: math.exp(-y) * (1 + y * y)
    whole = integrate(f, a, c).value
    parts = integrate(f, a, b).value + integrate(f, b, c).value
    assert whole == pytest.approx(parts, rel=1e-9, abs=1e-12)


def test_find_root_examples():
    assert find_root(lambda x: x * x - 4.0, 0.0, 10.0) == pytest.approx(2.0, abs=1e-10)
    assert find_root(lambda x: math.log(x), 0.1, 3.0) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(BracketError):
        find_root(lambda x: x - 5.0, 0.0, 1.0)


def test_monotone_inverse_examples():
    inv = monotone_inverse(math.exp, (-10.0, 10.0))
    assert inv(1.0) == pytest.approx(0.0, abs=1e-10)
    from decaysurge import ParamFamily, make_family

    k = make_family(ParamFamily("exponential-survival", {"theta": 2.0}))
    kinv = monotone_inverse(k, (0.0, math.inf), direction="decreasing")
    assert kinv(math.exp(-4.0)) == pytest.approx(2.0, rel=1e-12)  # closed form picked up
    with pytest.raises(RangeError):
        monotone_inverse(lambda x: 1 - math.exp(-x), (0.0, math.inf))(2.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=-3.0, max_value=3.0))
def test_inverse_composition_identity(u):
    f = lambda x: x**3 + x  # strictly increasing, no closed form
    inv = calculus.MonotoneInverse(f, (-5.0, 5.0), direction="increasing")
    target = f(u * 0.5)
    assert f(inv(target)) == pytest.approx(target, rel=1e-9, abs=1e-9)


def test_cumulative_integral_matches_direct():
    cum = CumulativeIntegral(math.exp, anchor=0.0)
    for x in (0.5, 2.0, -1.0, 0.25, 1.99):
        assert cum.value(x) == pytest.approx(math.exp(x) - 1.0, rel=1e-10, abs=1e-12)


def test_cumulative_shared_anchor_differences_are_clean():
    cum = CumulativeIntegral(lambda y: 1.0 / y, anchor=1.0)
    h = 1e-6
    x = 2.0
    deriv = (cum.value(x + h) - cum.value(x - h)) / (2 * h)
    assert deriv == pytest.approx(0.5, rel=1e-8)


def test_gk_integrate_smooth():
    val, err, evals = gk_integrate(math.sin, 0.0, math.pi, 1e-12)
    assert val == pytest.approx(2.0, rel=1e-12)
    assert evals >= 15 and err >= 0.0


def test_tail_integral_complete_case():
    val, extrapolated = tail_integral(lambda y: math.exp(-y), 1.0)
    assert val == pytest.approx(math.exp(-1.0), rel=1e-7)
    assert not extrapolated


def test_tail_integral_extrapolates_power_tail_beyond_horizon():
    def f(y):
        if y > 500.0:
            raise EvaluationHorizon
        return y**-1.5

    val, extrapolated = tail_integral(f, 2.0)
    assert extrapolated
    assert val == pytest.approx(2.0 / math.sqrt(2.0), rel=1e-6)


def test_tail_integral_divergence():
    with pytest.raises(QuadratureError):
        tail_integral(lambda y: y**-0.5, 1.0)
