import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from rbfscreen.analysis import (
    NonMonotone, compute_delta, eoc, expected_rate, extrapolate_energy, fit_energy_limit, fitted_rate,
    h1_seminorm_strip, relative_error, stability_term,
)
from rbfscreen.assembly import RbfSpace
from rbfscreen.geometry import NodeSet, build_extension, uniform_nodes
from rbfscreen.kernels import h1_seminorm_sq_unit, wendland


def test_delta_examples():
    assert compute_delta(0, 1, 0.04, 0.04) == pytest.approx(0.6, rel=1e-14)
    for k in (0.25, 0.01):
        assert compute_delta(0, 1, k, k) == pytest.approx(3 * math.sqrt(k), rel=1e-14)
    with pytest.raises(ValueError):
        compute_delta(0, 1, 0.0, 0.1)


@given(r=st.floats(0.01, 1.0), t=st.floats(0.51, 1.0), eps=st.floats(0.0, 0.4))
def test_delta_increasing_in_k(r, t, eps):
    # every power of k is positive once t - 1/2 - eps >= 0
    assume(eps <= t - 0.5)
    ks = np.geomspace(0.01, 1.0, 12)
    vals = [compute_delta(eps, t, k, r) for k in ks]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_expected_rate_table():
    assert expected_rate(Fraction(3, 2)) == Fraction(1, 6)
    assert expected_rate(Fraction(5, 2)) == Fraction(3, 10)
    assert expected_rate(Fraction(7, 2)) == Fraction(5, 14)
    assert expected_rate(2.5) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        expected_rate(1)


@given(st.floats(1.01, 50.0), st.floats(0.01, 5.0))
def test_expected_rate_monotone_below_half(tau, dt):
    assert expected_rate(tau) < expected_rate(tau + dt) < 0.5


def test_eoc_examples():
    h = [0.4, 0.2, 0.1, 0.05]
    np.testing.assert_allclose(eoc(h, h), 1.0)
    np.testing.assert_allclose(eoc([x ** (1 / 6) for x in h], h), 1 / 6)
    np.testing.assert_allclose(eoc([3.0] * 4, h), 0.0, atol=1e-15)
    with pytest.raises(ValueError):
        eoc([1.0, 0.0], [0.2, 0.1])
    with pytest.raises(ValueError):
        eoc([1.0, 0.5], [0.1, 0.2])
    assert fitted_rate([x**0.3 for x in h], h) == pytest.approx(0.3)


def test_relative_error_examples():
    assert relative_error(1.0, 1.0) == (0.0, False)
    assert relative_error(0.96, 1.0).value == pytest.approx(0.2)
    val, flag = relative_error(1.0 + 1e-8, 1.0)
    assert flag and val == pytest.approx(-1e-4, rel=1e-6)
    with pytest.raises(ValueError):
        relative_error(0.5, 0.0)


@given(st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_relative_error_antitone(e1, e2):
    a, b = relative_error(min(e1, e2), 1.0).value, relative_error(max(e1, e2), 1.0).value
    assert a >= b


def test_fit_exact_model():
    hs = [0.2, 0.1, 0.05]
    fit = fit_energy_limit([1 - h**0.5 for h in hs], hs)
    assert fit.limit == pytest.approx(1.0, abs=1e-8)
    assert fit.beta == pytest.approx(0.5, rel=1e-6)
    assert extrapolate_energy([1 - h**0.5 for h in hs], hs) == pytest.approx(1.0, abs=1e-8)


def test_fit_noisy_cube_root():
    rng = np.random.default_rng(7)
    hs = 0.4 / 2.0 ** np.arange(6)
    for _ in range(20):
        E = 2 - 3 * hs ** (1 / 3) + 1e-6 * rng.standard_normal(hs.size)
        assert fit_energy_limit(E, hs).limit == pytest.approx(2.0, abs=1e-4)


def test_fit_constant_and_nonmonotone():
    fit = fit_energy_limit([0.7, 0.7, 0.7], [0.2, 0.1, 0.05])
    assert fit.limit == 0.7 and not fit.identifiable
    with pytest.raises(NonMonotone):
        fit_energy_limit([1.0, 0.9, 0.8], [0.2, 0.1, 0.05])
    with pytest.raises(ValueError):
        fit_energy_limit([1.0, 2.0], [0.2, 0.1])


@given(E=st.floats(0.1, 10.0), C=st.floats(0.1, 10.0), beta=st.floats(0.2, 3.0))
def test_fit_recovers_model(E, C, beta):
    hs = 0.5 / 2.0 ** np.arange(5)
    fit = fit_energy_limit(E - C * hs**beta, hs)
    assert fit.limit == pytest.approx(E, rel=1e-6, abs=1e-6 * C)


def test_fit_order_independent():
    hs = [0.05, 0.2, 0.1]
    a = fit_energy_limit([1 - h**0.5 for h in hs], hs)
    assert a.limit == pytest.approx(1.0, abs=1e-8)


def test_h1_strip_half_disc():
    k, r = 0.25, 0.1
    mesh = build_extension(k)
    space = RbfSpace(wendland(1), NodeSet(np.array([[0.125, 0.0]])), r)
    val = h1_seminorm_strip(np.array([1.0]), space, mesh)
    ref = math.sqrt(0.5) * r**-2 * math.sqrt(h1_seminorm_sq_unit(wendland(1)))
    assert val == pytest.approx(ref, rel=1e-10)
    assert h1_seminorm_strip(np.zeros(1), space, mesh) == 0.0


def test_h1_strip_pairs_and_self_convergence(rng):
    from rbfscreen.quadrature import QuadConfig

    space = RbfSpace(wendland(1), uniform_nodes(8), 0.1)
    mesh = build_extension(0.25)
    c = rng.standard_normal(space.N)
    a = h1_seminorm_strip(c, space, mesh)
    b = h1_seminorm_strip(c, space, mesh, QuadConfig().scaled(2))
    assert a > 0 and abs(a - b) <= 1e-6 * b


def test_h1_strip_warns_for_c0():
    space = RbfSpace(wendland(0), NodeSet(np.array([[0.125, 0.0]])), 0.1)
    with pytest.warns(RuntimeWarning):
        h1_seminorm_strip(np.ones(1), space, build_extension(0.25))


@given(k=st.floats(0.01, 0.5), h1=st.floats(0.0, 100.0))
def test_stab_term_relation_when_k_equals_r(k, h1):
    assert stability_term(h1, k, k) == pytest.approx(3 * math.sqrt(k) * h1, rel=1e-12, abs=1e-300)
