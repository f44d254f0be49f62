import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtime import hamiltonian as H
from qtime.errors import PreconditionError
from qtime.numerics import Grid1D
from qtime.wavepacket import NATURAL, PhysicalConstants


def gauss(p0=5.0, width=0.5, count=2001):
    return H.gaussian_momentum(p0, width, Grid1D.between(p0 - 8 * width, p0 + 8 * width, count))


def test_grid_must_exclude_origin():
    with pytest.raises(PreconditionError):
        H.MomentumFunction(Grid1D.between(-1.0, 1.0, 10), np.ones(10))
    with pytest.raises(PreconditionError):
        H.MomentumFunction(Grid1D.between(0.0, 1.0, 10), np.ones(10))
    with pytest.raises(PreconditionError):
        H.MomentumFunction(Grid1D.between(1.0, 2.0, 10), np.ones(9))


@pytest.mark.parametrize("k,x", [(2.0, 3.0), (0.7, -4.0), (-1.5, 2.0), (3.0, 0.0)])
def test_planewave_eigenvalue_is_travel_time(k, x):
    act = H.apply_T_coordinate_planewave(k, x)
    assert abs(act.eigenvalue - x / k) < 1e-12
    assert act.eigenvalue == pytest.approx(H.free_travel_time(k, x), abs=1e-12)
    assert act.remainder == pytest.approx(0.5j / k**2, abs=1e-14)


def test_planewave_units():
    c = PhysicalConstants(hbar=2.0, mass=3.0)
    act = H.apply_T_coordinate_planewave(1.5, 4.0, c)
    assert act.eigenvalue == pytest.approx(4.0 / (2.0 * 1.5 / 3.0), abs=1e-12)


def test_zero_velocity():
    with pytest.raises(PreconditionError, match="zero velocity"):
        H.apply_T_coordinate_planewave(0.0, 1.0)
    with pytest.raises(PreconditionError, match="zero velocity"):
        H.free_travel_time(0.0, 1.0)


def test_expectation_real_on_decaying_function():
    psi = gauss()
    psi = psi.with_values(psi.values * np.exp(-3j * psi.points))  # packet centred at x = 3
    val = H.inner(psi, H.apply_T_momentum(psi))
    assert abs(val.imag) <= 1e-6 * abs(val)


@settings(max_examples=20, deadline=None)
@given(st.floats(3.0, 7.0), st.floats(0.3, 0.8), st.floats(-3.0, 3.0), st.floats(-2.0, 2.0))
def test_hermiticity_random_pairs(p0, width, shift, chirp):
    grid = Grid1D.between(0.5, 12.0, 3001)
    p = grid.points
    psi = H.gaussian_momentum(p0, width, grid)
    phi = H.MomentumFunction(grid, np.exp(-((p - 6.0 - shift / 3) ** 2) / 0.8 + 1j * chirp * p))
    assert H.hermiticity_defect(psi, phi) < 1e-6


@pytest.mark.parametrize("p0", [5.0, -5.0])
def test_equivalence_with_energy_derivative(p0):
    psi = gauss(p0, 0.5, 4001)
    a = H.apply_T_momentum(psi).values
    b = H.apply_T_via_energy(psi).values
    assert np.max(np.abs(a - b)[3:-3]) / np.max(np.abs(a)) < 1e-5


def test_commutator_converges():
    r1 = H.commutator_residual(gauss(count=1001))
    r2 = H.commutator_residual(gauss(count=2001))
    assert r2 < 1e-4
    assert r1 / r2 >= 3.0


def test_commutator_units():
    c = PhysicalConstants(hbar=0.5, mass=2.0)
    assert H.commutator_residual(gauss(count=4001), c) < 1e-4


def test_impulse_response():
    grid = Grid1D(1.0, 0.5, 9)
    values = np.zeros(9)
    values[4] = 1.0
    out = H.apply_T_momentum(H.MomentumFunction(grid, values)).values
    p, h = grid.points, grid.step
    expected = np.zeros(9, complex)
    # central differences: psi' = +-1/(2h) at the neighbours; (psi/p)' = +-1/(2h p_4)
    expected[3] = -0.5j * (1 / (2 * h * p[3]) + 1 / (2 * h * p[4]))
    expected[5] = -0.5j * (-1 / (2 * h * p[5]) - 1 / (2 * h * p[4]))
    np.testing.assert_allclose(out, expected, atol=1e-15)


def test_T_of_zero_is_zero():
    grid = Grid1D.between(1.0, 3.0, 21)
    assert not np.any(H.apply_T_momentum(H.MomentumFunction(grid, np.zeros(21))).values)
