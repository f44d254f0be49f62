import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtime import numerics
from qtime.errors import NumericalGuardError, PreconditionError
from qtime.moments import auto_time_grid
from qtime.numerics import Grid1D
from qtime.wavepacket import (ENERGY, MOMENTUM, NATURAL, FieldSlice, PhysicalConstants,
                              SpectralAmplitude, continuity_residual, density_flux,
                              gaussian_spectrum, momentum_to_energy_amplitude,
                              momentum_to_two_component, spectral_norm, synthesize_profile,
                              synthesize_slice)

E_GRID = Grid1D.between(0.01, 15.0, 1500)


def packet(e0=5.0, width=0.5, grid=None):
    return gaussian_spectrum(e0, width, ENERGY, grid or Grid1D.between(e0 - 9 * width, e0 + 9 * width, 801))


def test_constants_validation():
    for bad in [dict(hbar=0), dict(mass=-1), dict(c=np.inf)]:
        with pytest.raises(PreconditionError):
            PhysicalConstants(**bad)
    c = PhysicalConstants(hbar=2.0, mass=3.0)
    assert c.energy(c.wavenumber(7.0)) == pytest.approx(7.0)
    assert c.velocity(6.0) == pytest.approx(2.0)


def test_energy_grid_must_be_positive():
    with pytest.raises(PreconditionError):
        SpectralAmplitude(ENERGY, Grid1D.between(0.0, 1.0, 11), np.ones(11))


def test_momentum_grid_excludes_zero():
    with pytest.raises(PreconditionError):
        SpectralAmplitude(MOMENTUM, Grid1D.between(-1.0, 1.0, 11), np.ones(11))
    SpectralAmplitude(MOMENTUM, Grid1D.between(-1.0, 1.0, 10), np.ones(10))


def test_gaussian_energy_normalisation():
    spec = gaussian_spectrum(5.0, 0.5, ENERGY, E_GRID)
    v = NATURAL.velocity(E_GRID.points)
    assert numerics.integrate_array(v * np.abs(spec.values) ** 2, E_GRID) == pytest.approx(1.0, abs=1e-6)


def test_narrow_gaussian_concentrates():
    grid = Grid1D.between(4.8, 5.2, 2001)
    spec = gaussian_spectrum(5.0, 0.01, ENERGY, grid)
    dens = NATURAL.velocity(grid.points) * np.abs(spec.values) ** 2
    inside = np.abs(grid.points - 5.0) <= 0.05
    frac = numerics.integrate_array(np.where(inside, dens, 0.0), grid)
    assert frac > 0.9999 - 1e-3  # step-function integrand: quadrature error ~ step


def test_wide_gaussian_not_confined():
    with pytest.raises(NumericalGuardError, match="spectrum not confined"):
        gaussian_spectrum(5.0, 2.0, ENERGY, E_GRID)


def test_gaussian_momentum_normalisation():
    grid = Grid1D.between(1.0, 7.0, 601)
    spec = gaussian_spectrum(4.0, 0.3, MOMENTUM, grid)
    assert spectral_norm(spec) == pytest.approx(1.0, abs=1e-12)


def test_monochromatic_slice_constant_modulus():
    grid = Grid1D.between(4.0, 6.0, 21)
    values = np.zeros(21)
    values[10] = 1.0
    spec = SpectralAmplitude(ENERGY, grid, values)
    sl = synthesize_slice(spec, 2.0, Grid1D.between(0, 10, 101), check=False)
    assert np.ptp(np.abs(sl.psi)) < 1e-14
    rho, j = density_flux(sl)
    k = NATURAL.wavenumber(5.0)
    np.testing.assert_allclose(j, k * rho, rtol=1e-12)


def test_zero_spectrum_zero_slice():
    spec = SpectralAmplitude(ENERGY, E_GRID, np.zeros(E_GRID.count))
    sl = synthesize_slice(spec, 0.0, Grid1D.between(0, 1, 11))
    assert not np.any(sl.psi)


def test_field_slice_length_invariant():
    with pytest.raises(PreconditionError):
        FieldSlice(0.0, Grid1D.between(0, 1, 5), np.zeros(5), np.zeros(4))


def test_peak_moves_at_group_velocity():
    spec = packet(5.0, 0.25)
    peaks = []
    for x in (0.0, 10.0):
        tg = auto_time_grid(spec, x, per_sigma=400)
        rho, _ = density_flux(synthesize_slice(spec, x, tg))
        peaks.append(tg.points[np.argmax(rho)])
    assert peaks[1] - peaks[0] == pytest.approx(10.0 / np.sqrt(10.0), rel=0.02)


def test_window_too_small():
    spec = packet()
    with pytest.raises(NumericalGuardError, match="time window too small"):
        synthesize_slice(spec, 10.0, Grid1D.between(2.0, 4.0, 101))


def test_plane_wave_density_flux():
    tg = Grid1D.between(0.0, 1.0, 11)
    k, a = 1.7, 0.8
    psi = a * np.exp(1j * (k * 0.3 - 0.5 * k**2 * tg.points))
    rho, j = density_flux(FieldSlice(0.3, tg, psi, 1j * k * psi))
    np.testing.assert_allclose(rho, a**2)
    np.testing.assert_allclose(j, k * a**2)


def test_real_psi_zero_flux():
    tg = Grid1D.between(0.0, 1.0, 5)
    _, j = density_flux(FieldSlice(0.0, tg, np.ones(5), 2.0 * np.ones(5)))
    assert not np.any(j)


def test_narrow_packet_flux_tracks_density():
    spec = packet(5.0, 0.05)
    tg = auto_time_grid(spec, 10.0)
    rho, j = density_flux(synthesize_slice(spec, 10.0, tg))
    mask = rho > 0.01 * rho.max()
    np.testing.assert_allclose(j[mask], np.sqrt(10.0) * rho[mask], rtol=0.01)


def test_flux_integral_and_positivity():
    spec = packet()
    tg = auto_time_grid(spec, 3.0)
    rho, j = density_flux(synthesize_slice(spec, 3.0, tg))
    assert rho.min() >= 0.0
    assert j.min() >= -1e-10 * j.max()
    # int v|g|^2 dE = 1 gives int j dt = 2 pi hbar
    assert numerics.integrate_array(j, tg) == pytest.approx(2 * np.pi, rel=1e-6)


def test_norm_conserved_in_time():
    grid = Grid1D.between(1.2, 6.8, 561)
    spec = gaussian_spectrum(4.0, 0.3, MOMENTUM, grid)
    xg = Grid1D.between(-150.0, 200.0, 7001)
    norms = [numerics.integrate_array(np.abs(synthesize_profile(spec, xg, t)) ** 2, xg) for t in (0.0, 5.0, 20.0)]
    np.testing.assert_allclose(norms, 1.0, rtol=1e-4)


def test_continuity_residual_converges():
    spec = packet()
    coarse = auto_time_grid(spec, 10.0, per_sigma=100)
    fine = auto_time_grid(spec, 10.0, per_sigma=200)
    r1 = continuity_residual(spec, 10.0, 0.01, coarse)
    r2 = continuity_residual(spec, 10.0, 0.005, fine)
    assert r1 < 1e-4
    assert r1 / r2 >= 3.0


def test_continuity_default_grids():
    assert continuity_residual(packet(), 5.0) < 1e-4


def test_continuity_plane_wave_zero():
    grid = Grid1D.between(4.0, 6.0, 21)
    values = np.zeros(21)
    values[10] = 1.0
    spec = SpectralAmplitude(ENERGY, grid, values)
    r = continuity_residual(spec, 1.0, 0.01, Grid1D.between(0, 5, 201), check=False)
    assert r < 1e-10


def test_two_component_one_directional():
    spec = gaussian_spectrum(4.0, 0.3, MOMENTUM, Grid1D.between(1.3, 6.7, 801))
    two = momentum_to_two_component(spec)
    assert not np.any(two.minus)
    assert numerics.integrate_array(two.norm_density, two.energy_grid) == pytest.approx(1.0, abs=1e-4)


def test_two_component_even_spectrum():
    grid = Grid1D.between(-6.0, 6.0, 1200)
    k = grid.points
    g = np.exp(-((np.abs(k) - 3.0) ** 2) / (4 * 0.3**2))
    spec = SpectralAmplitude(MOMENTUM, grid, g)
    spec = spec.scaled(1 / np.sqrt(spectral_norm(spec)))
    two = momentum_to_two_component(spec)
    np.testing.assert_allclose(two.plus, two.minus, atol=1e-12)
    assert numerics.integrate_array(two.norm_density, two.energy_grid) == pytest.approx(1.0, abs=1e-4)


def test_two_component_support_insufficient():
    spec = gaussian_spectrum(4.0, 0.3, MOMENTUM, Grid1D.between(1.3, 6.7, 801))
    with pytest.raises(PreconditionError, match="momentum support insufficient"):
        momentum_to_two_component(spec, Grid1D.between(0.5, 40.0, 101))


def test_momentum_and_energy_synthesis_agree():
    spec = gaussian_spectrum(4.0, 0.3, MOMENTUM, Grid1D.between(1.3, 6.7, 8001))
    egrid = Grid1D.between(NATURAL.energy(1.3), NATURAL.energy(6.7), 20001)
    espec = momentum_to_energy_amplitude(spec, egrid)
    tg = Grid1D.between(-4.0, 7.0, 441)
    a = synthesize_slice(spec, 5.0, tg).psi
    b = synthesize_slice(espec, 5.0, tg).psi
    assert np.max(np.abs(a - b)) < 1e-6


@settings(max_examples=15, deadline=None)
@given(st.floats(3.0, 8.0), st.floats(0.1, 0.3), st.floats(0.0, 15.0))
def test_density_nonnegative_and_flux_positive(e0, width, x):
    spec = packet(e0, width)
    rho, j = density_flux(synthesize_slice(spec, x, auto_time_grid(spec, x)))
    assert rho.min() >= 0.0
    assert j.min() >= -1e-10 * j.max()
