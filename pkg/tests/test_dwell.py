import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtime import dwell as D
from qtime.errors import NumericalGuardError, PreconditionError
from qtime.numerics import Grid1D
from qtime.wavepacket import ENERGY, MOMENTUM, NATURAL, gaussian_spectrum


def packet(e0=5.0, width=0.1, count=401):
    return gaussian_spectrum(e0, width, ENERGY, Grid1D.between(e0 - 9 * width, e0 + 9 * width, count))


def rect_transmission(v0, a, e):
    # textbook rectangular-barrier result, hbar = mu = 1
    if e < v0:
        kappa = np.sqrt(2 * (v0 - e))
        return 1 / (1 + v0**2 * np.sinh(kappa * a) ** 2 / (4 * e * (v0 - e)))
    q = np.sqrt(2 * (e - v0))
    return 1 / (1 + v0**2 * np.sin(q * a) ** 2 / (4 * e * (e - v0)))


def test_setup_validation():
    with pytest.raises(PreconditionError):
        D.ScatteringSetup(((0.0, 0.0),))
    with pytest.raises(PreconditionError):
        D.ScatteringSetup(((-np.inf, 1.0),))
    with pytest.raises(PreconditionError):
        D.ScatteringSetup(((-np.inf, 0.0), (1.0, 2.0), (1.0, 0.0)))
    with pytest.raises(PreconditionError):
        D.ScatteringSetup.barrier(1.0, 0.0)
    assert D.ScatteringSetup.free().is_free
    assert list(D.ScatteringSetup.barrier(2.0, 1.0).region_index([-1, 0.5, 3])) == [0, 1, 2]


@pytest.mark.parametrize("v0,a,e", [(10.0, 1.0, 5.0), (2.0, 1.5, 5.0), (3.0, 0.7, 3.5), (1.0, 2.0, 9.0)])
def test_transmission_closed_form(v0, a, e):
    state = D.solve_stationary(D.ScatteringSetup.barrier(v0, a), e)
    assert abs(state.transmission) ** 2 == pytest.approx(rect_transmission(v0, a, e), abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 10.0), st.floats(0.1, 3.0), st.floats(0.05, 20.0))
def test_unitarity(v0, a, e):
    if abs(e - v0) < 1e-3:
        e += 0.01
    state = D.solve_stationary(D.ScatteringSetup.barrier(v0, a), e)
    assert abs(state.transmission) ** 2 + abs(state.reflection) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_stationary_state_continuous_at_interfaces():
    state = D.solve_stationary(D.ScatteringSetup.barrier(10.0, 1.0), 5.0)
    for x in (0.0, 1.0):
        eps = 1e-9
        assert abs(state(np.array([x - eps]))[0] - state(np.array([x + eps]))[0]) < 1e-7
        assert abs(state.derivative(np.array([x - eps]))[0] - state.derivative(np.array([x + eps]))[0]) < 1e-6


def test_stationary_free_dwell_is_length_over_velocity():
    assert D.stationary_dwell_time(D.ScatteringSetup.free(), 5.0, 0.0, 3.0) == pytest.approx(3.0 / np.sqrt(10.0),
                                                                                             rel=1e-12)


def test_free_dwell_estimators_agree_with_travel_time():
    spec, setup = packet(), D.ScatteringSetup.free()
    dens = D.mean_dwell_density(spec, setup, 0.0, 5.0)
    flux = D.mean_dwell_flux(spec, setup, 0.0, 5.0)
    assert abs(dens - flux) / abs(flux) < 1e-3
    assert flux == pytest.approx(5.0 / np.sqrt(10.0), rel=0.01)


@pytest.mark.parametrize("v0", [10.0, 2.0])
def test_barrier_dwell_estimators_agree(v0):
    spec, setup = packet(), D.ScatteringSetup.barrier(v0, 1.0)
    dens = D.mean_dwell_density(spec, setup, 0.0, 1.0)
    flux = D.mean_dwell_flux(spec, setup, 0.0, 1.0)
    assert abs(dens - flux) / abs(flux) < 1e-3


def test_degenerate_interval_zero():
    assert D.mean_dwell_density(packet(), D.ScatteringSetup.free(), 1.0, 1.0) == 0.0
    with pytest.raises(PreconditionError):
        D.mean_dwell_flux(packet(), D.ScatteringSetup.free(), 2.0, 1.0)


def test_short_time_window_guard():
    with pytest.raises(NumericalGuardError):
        D.mean_dwell_density(packet(), D.ScatteringSetup.free(), 0.0, 5.0,
                             time_grid=Grid1D.between(0.0, 1.0, 101))


def test_dwell_probability_bounds_and_total():
    spec, setup = packet(5.0, 0.2), D.ScatteringSetup.barrier(2.0, 1.0)
    window = Grid1D.between(-150.0, 150.0, 6001)
    p_all = D.dwell_probability(spec, setup, -150.0, 150.0, 0.0, window)
    p_part = D.dwell_probability(spec, setup, 0.0, 1.0, 0.0, window)
    assert p_all == pytest.approx(1.0, abs=1e-9)
    assert 0.0 <= p_part <= 1.0
    with pytest.raises(PreconditionError):
        D.dwell_probability(spec, setup, 1.0, 0.0, 0.0, window)
    with pytest.raises(NumericalGuardError, match="normalization window too small"):
        D.dwell_probability(spec, setup, 0.0, 1.0, 0.0, Grid1D.between(-5.0, 5.0, 201))


def test_momentum_packet_needs_incidence_from_left():
    spec = gaussian_spectrum(-3.0, 0.2, MOMENTUM, Grid1D.between(-5.0, -1.0, 201))
    with pytest.raises(PreconditionError):
        D.ScatteringPacket(spec, D.ScatteringSetup.free(), NATURAL)
