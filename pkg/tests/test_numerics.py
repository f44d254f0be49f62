import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtime import numerics
from qtime.errors import NumericalGuardError, PreconditionError
from qtime.numerics import Grid1D, Series


def test_grid_invariants():
    g = Grid1D.between(0.0, 1.0, 11)
    assert g.step == pytest.approx(0.1)
    assert g.stop == pytest.approx(1.0)
    np.testing.assert_allclose(g.points, np.linspace(0, 1, 11))
    for bad in [dict(start=0, step=0, count=3), dict(start=0, step=-1, count=3),
                dict(start=0, step=1, count=1), dict(start=np.nan, step=1, count=3)]:
        with pytest.raises(PreconditionError):
            Grid1D(**bad)


def test_grid_refined_keeps_span():
    g = Grid1D.between(-2.0, 3.0, 51).refined(4)
    assert g.count == 201
    assert g.stop == pytest.approx(3.0)


def test_series_length_must_match():
    with pytest.raises(PreconditionError):
        Series(Grid1D.between(0, 1, 5), np.zeros(4))


def test_integrate_constant_exact():
    g = Grid1D.between(0.0, 1.0, 101)
    assert numerics.integrate(Series(g, np.ones(101))) == pytest.approx(1.0, abs=1e-14)


def test_integrate_sine():
    g = Grid1D.between(0.0, np.pi, 201)
    assert abs(numerics.integrate(Series(g, np.sin(g.points))) - 2.0) < 1e-8


def test_integrate_zero():
    g = Grid1D.between(0.0, 1.0, 7)
    assert numerics.integrate(Series(g, np.zeros(7, complex))) == 0


def test_two_point_grid_is_trapezoid():
    g = Grid1D.between(0.0, 2.0, 2)
    assert numerics.integrate(Series(g, np.array([1.0, 3.0]))) == pytest.approx(4.0)


@pytest.mark.parametrize("count", [5, 6, 101, 102])
def test_simpson_exact_for_quadratics(count):
    g = Grid1D.between(-1.0, 2.0, count)
    x = g.points
    got = numerics.integrate(Series(g, 3 * x**2 - x + 2))
    assert got == pytest.approx(13.5, abs=1e-12)


def test_simpson_exact_for_cubics_odd_count():
    g = Grid1D.between(0.0, 1.0, 9)
    assert numerics.integrate(Series(g, g.points**3)) == pytest.approx(0.25, abs=1e-14)


@pytest.mark.parametrize("count", [21, 22])
def test_simpson_order(count):
    def err(n):
        g = Grid1D.between(0.0, 2.0, n)
        return abs(numerics.integrate(Series(g, np.exp(g.points))) - (np.e**2 - 1))

    coarse = err(count)
    fine = err(2 * count - 1 if count % 2 else 2 * count)
    assert coarse / fine >= 8.0


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(3, 60))
def test_integrate_linear(a, b, count):
    g = Grid1D.between(0.0, 1.0, count)
    f, h = np.cos(3 * g.points), g.points**2 + 1j * g.points
    lhs = numerics.integrate(Series(g, a * f + b * h))
    rhs = a * numerics.integrate(Series(g, f)) + b * numerics.integrate(Series(g, h))
    assert abs(lhs - rhs) < 1e-12 * (1 + abs(a) + abs(b))


def test_integrate_array_axis():
    g = Grid1D.between(0.0, 1.0, 11)
    arr = np.vstack([np.ones(11), 2 * np.ones(11)])
    np.testing.assert_allclose(numerics.integrate_array(arr, g), [1.0, 2.0])
    np.testing.assert_allclose(numerics.integrate_array(arr.T, g, axis=0), [1.0, 2.0])


def test_derivative_linear_and_constant():
    g = Grid1D.between(-3.0, 4.0, 8)
    d = numerics.derivative(Series(g, 2.0 * g.points + 1.0))
    np.testing.assert_allclose(d.values, 2.0, atol=1e-10)
    np.testing.assert_allclose(numerics.derivative(Series(g, np.full(8, 5.0))).values, 0.0, atol=1e-12)


def test_derivative_exact_for_quadratic():
    g = Grid1D.between(0.0, 1.0, 6)
    d = numerics.derivative(Series(g, g.points**2))
    np.testing.assert_allclose(d.values, 2 * g.points, atol=1e-12)


def test_derivative_plane_wave():
    g = Grid1D(0.0, 1e-3, 3001)
    x = g.points
    d = numerics.derivative(Series(g, np.exp(2j * x))).values
    exact = 2j * np.exp(2j * x)
    assert np.max(np.abs(d - exact)) / 2.0 < 1e-5


def test_derivative_too_small():
    with pytest.raises(PreconditionError, match="grid too small for derivative"):
        numerics.derivative(Series(Grid1D.between(0, 1, 2), np.zeros(2)))


def test_derivative_of_cumulative_recovers_function():
    g = Grid1D.between(0.0, 2.0, 401)
    x = g.points
    cumulative = np.sin(x)  # antiderivative of cos
    d = numerics.derivative(Series(g, cumulative)).values
    assert np.max(np.abs(d - np.cos(x))) < 1e-4


def test_synthesis_sifting():
    g = Grid1D.between(0.0, 2.0, 21)
    amp = np.zeros(21, complex)
    amp[10] = 1.0 / numerics.simpson_weights(g)[10]
    phase = lambda s, x: np.exp(1j * s * x)  # noqa: E731
    got = numerics.synthesis_sum(Series(g, amp), phase, 3.0)
    assert got == pytest.approx(np.exp(1j * g.points[10] * 3.0))


def test_synthesis_matches_refined_quadrature():
    def run(count):
        g = Grid1D.between(-6.0, 6.0, count)
        s = g.points
        return numerics.synthesize(Series(g, np.exp(-s**2)), lambda s, x: np.exp(1j * s**2 * x / 4),
                                   np.array([0.0, 0.5, 1.0]))

    np.testing.assert_allclose(run(301), run(1201), atol=1e-6)


def test_synthesis_zero():
    g = Grid1D.between(0.0, 1.0, 11)
    assert numerics.synthesis_sum(Series(g, np.zeros(11)), lambda s, x: np.exp(1j * s * x), 1.0) == 0


def test_edge_decay_guard():
    numerics.check_edge_decay(np.exp(-np.linspace(-10, 10, 101) ** 2))
    with pytest.raises(NumericalGuardError):
        numerics.check_edge_decay(np.exp(-np.linspace(-1, 1, 101) ** 2))
    numerics.check_edge_decay(np.zeros(5))
