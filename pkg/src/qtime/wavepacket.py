"""Free 1-D particle wavepackets built from spectral amplitudes.

A packet is a superposition of plane waves, either over energy
``E > 0`` (``psi = int g(E) exp(i k x - i E t / hbar) dE``) or over wave
number ``k != 0`` (``psi = int g(k) exp(i k x - i E t / hbar) dk / sqrt(2 pi)``).
Spatial derivatives are taken spectrally, never by differencing in x.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import NumericalGuardError, PreconditionError
from .numerics import Grid1D

ENERGY = "energy"
MOMENTUM = "momentum"

WINDOW_DECAY = 1e-6
MOMENTUM_EXCLUSION = 1e-9
_CHUNK = 1024


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    mass: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass", "c"):
            value = getattr(self, name)
            if not (value > 0.0 and np.isfinite(value)):
                raise PreconditionError(f"{name} must be strictly positive, got {value}")

    def wavenumber(self, energy):
        return np.sqrt(2.0 * self.mass * np.asarray(energy)) / self.hbar

    def energy(self, k):
        k = np.asarray(k)
        return (self.hbar * k) ** 2 / (2.0 * self.mass)

    def velocity(self, energy):
        return np.sqrt(2.0 * np.asarray(energy) / self.mass)


NATURAL = PhysicalConstants()


@dataclass(frozen=True)
class SpectralAmplitude:
    """Amplitude ``g(E)`` on an energy grid or ``g(k)`` on a wave-number grid.

    Energy grids must lie strictly above ``E = 0``; momentum grids may span
    both signs but no sample may fall within ``exclusion`` of ``k = 0``.
    """

    representation: str
    grid: Grid1D
    values: np.ndarray
    exclusion: float = MOMENTUM_EXCLUSION

    def __post_init__(self):
        if self.representation not in (ENERGY, MOMENTUM):
            raise PreconditionError(f"unknown representation {self.representation!r}")
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.count,):
            raise PreconditionError("amplitude length does not match grid count")
        object.__setattr__(self, "values", values)
        pts = self.grid.points
        if self.representation == ENERGY:
            if self.grid.start <= 0.0:
                raise PreconditionError("energy grid must start above E = 0")
        elif np.min(np.abs(pts)) < self.exclusion:
            raise PreconditionError("momentum grid must exclude a neighbourhood of k = 0")

    @property
    def points(self) -> np.ndarray:
        return self.grid.points

    @property
    def is_confined(self) -> bool:
        mag = np.abs(self.values)
        peak = mag.max()
        return peak == 0.0 or max(mag[0], mag[-1]) < numerics.EDGE_DECAY * peak

    def require_confined(self) -> None:
        if not self.is_confined:
            raise NumericalGuardError("spectrum not confined")

    def scaled(self, factor) -> "SpectralAmplitude":
        """Pointwise product with ``factor`` (scalar or array over the grid)."""
        return SpectralAmplitude(self.representation, self.grid, self.values * factor, self.exclusion)

    def modes(self, constants: PhysicalConstants = NATURAL):
        """Energies, wave numbers and quadrature-weighted coefficients of the plane waves."""
        pts = self.grid.points
        w = numerics.simpson_weights(self.grid)
        if self.representation == ENERGY:
            return pts, constants.wavenumber(pts), w * self.values
        return constants.energy(pts), pts, w * self.values / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class FieldSlice:
    """``psi(x, t)`` and ``d psi / dx`` on a time grid at a fixed position."""

    position: float
    time_grid: Grid1D
    psi: np.ndarray
    dpsi_dx: np.ndarray

    def __post_init__(self):
        n = self.time_grid.count
        if np.shape(self.psi) != (n,) or np.shape(self.dpsi_dx) != (n,):
            raise PreconditionError("psi and dpsi_dx must match the time grid length")


@dataclass(frozen=True)
class TwoComponentWeight:
    energy_grid: Grid1D
    plus: np.ndarray
    minus: np.ndarray

    @property
    def norm_density(self) -> np.ndarray:
        return np.abs(self.plus) ** 2 + np.abs(self.minus) ** 2


def gaussian_spectrum(center: float, width: float, representation: str, grid: Grid1D,
                      constants: PhysicalConstants = NATURAL) -> SpectralAmplitude:
    """Gaussian amplitude ``exp(-(s - center)**2 / (4 width**2))``.

    Normalised so that ``int v |g|^2 dE = 1`` (energy) or ``int |g|^2 dk = 1``
    (momentum); ``width`` is therefore the standard deviation of ``|g|^2``.
    """
    if width <= 0.0:
        raise PreconditionError("width must be positive")
    s = grid.points
    values = np.exp(-((s - center) ** 2) / (4.0 * width**2))
    spec = SpectralAmplitude(representation, grid, values)
    spec.require_confined()
    if representation == ENERGY and center - 6.0 * width <= grid.start:
        raise PreconditionError("spectrum support reaches E <= grid start")
    return spec.scaled(1.0 / np.sqrt(spectral_norm(spec, constants)))


def spectral_norm(spectrum: SpectralAmplitude, constants: PhysicalConstants = NATURAL) -> float:
    """``int v |g|^2 dE`` for energy amplitudes, ``int |g|^2 dk`` for momentum ones."""
    density = np.abs(spectrum.values) ** 2
    if spectrum.representation == ENERGY:
        density = density * constants.velocity(spectrum.points)
    return float(numerics.integrate_array(density, spectrum.grid))


def _mode_matrix_product(rows, exponent_axis, targets, sign):
    """``rows @ exp(sign * 1j * exponent_axis[:, None] * targets[None, :])`` in chunks."""
    targets = np.asarray(targets, dtype=float)
    out = np.empty((rows.shape[0], targets.size), dtype=complex)
    for lo in range(0, targets.size, _CHUNK):
        hi = min(lo + _CHUNK, targets.size)
        kernel = np.exp(sign * 1j * np.outer(exponent_axis, targets[lo:hi]))
        out[:, lo:hi] = rows @ kernel
    return out


def check_window(psi, what: str = "time window too small") -> None:
    mag = np.abs(psi)
    peak = mag.max() if mag.size else 0.0
    if peak > 0.0 and max(mag[0], mag[-1]) > WINDOW_DECAY * peak:
        raise NumericalGuardError(what)


def synthesize_slice(spectrum: SpectralAmplitude, x: float, time_grid: Grid1D,
                     constants: PhysicalConstants = NATURAL, check: bool = True) -> FieldSlice:
    """``psi(x, t)`` and its x-derivative over ``time_grid``."""
    energy, k, coeff = spectrum.modes(constants)
    cx = coeff * np.exp(1j * k * x)
    rows = np.vstack([cx, 1j * k * cx])
    psi, dpsi = _mode_matrix_product(rows, energy / constants.hbar, time_grid.points, -1.0)
    if check:
        check_window(psi)
    return FieldSlice(float(x), time_grid, psi, dpsi)


def synthesize_profile(spectrum: SpectralAmplitude, x_grid: Grid1D, t: float,
                       constants: PhysicalConstants = NATURAL) -> np.ndarray:
    """``psi(x, t)`` over ``x_grid`` at a fixed instant."""
    energy, k, coeff = spectrum.modes(constants)
    ct = coeff * np.exp(-1j * energy * t / constants.hbar)
    return _mode_matrix_product(ct[None, :], k, x_grid.points, 1.0)[0]


def density_flux(field: FieldSlice, constants: PhysicalConstants = NATURAL):
    """Probability density ``|psi|^2`` and current ``(hbar/mu) Im(psi* dpsi/dx)``."""
    rho = np.abs(field.psi) ** 2
    j = (constants.hbar / constants.mass) * np.imag(np.conj(field.psi) * field.dpsi_dx)
    return rho, j


CONTINUITY_PER_SIGMA = 100.0


def continuity_residual(spectrum: SpectralAmplitude, x: float, dx: float | None = None,
                        time_grid: Grid1D | None = None, constants: PhysicalConstants = NATURAL,
                        check: bool = True) -> float:
    """Max over t of ``|d rho/dt + d j/dx|`` relative to the peak ``|d rho/dt|``.

    Time derivative by finite differences on ``time_grid``; divergence by a
    central difference of width ``2 dx``. Returns the absolute residual when
    the density is stationary. By default the time window comes from the
    energy representation at ``CONTINUITY_PER_SIGMA`` samples per standard
    deviation and ``dx`` is the distance the peak energy travels in one step.
    """
    if time_grid is None:
        from .moments import auto_time_grid

        time_grid = auto_time_grid(spectrum, x, constants, per_sigma=CONTINUITY_PER_SIGMA)
    if dx is None:
        energy, _, coeff = spectrum.modes(constants)
        dx = time_grid.step * float(constants.velocity(energy[np.argmax(np.abs(coeff))]))
    if dx <= 0.0:
        raise PreconditionError("dx must be positive")
    rho, _ = density_flux(synthesize_slice(spectrum, x, time_grid, constants, check), constants)
    _, j_left = density_flux(synthesize_slice(spectrum, x - dx, time_grid, constants, check), constants)
    _, j_right = density_flux(synthesize_slice(spectrum, x + dx, time_grid, constants, check), constants)
    drho_dt = numerics.derivative_array(rho, time_grid.step)
    div_j = (j_right - j_left) / (2.0 * dx)
    residual = np.max(np.abs(drho_dt + div_j))
    scale = np.max(np.abs(drho_dt))
    # stationary density: both terms vanish analytically
    if scale <= 1e-12 * max(np.max(rho), 1e-300):
        return float(residual)
    return float(residual / scale)


def _interp_complex(x_new, x, values):
    return np.interp(x_new, x, values.real) + 1j * np.interp(x_new, x, values.imag)


def _side_values(spectrum: SpectralAmplitude, k_targets: np.ndarray, sign: int) -> np.ndarray:
    k = spectrum.points
    mask = (k > 0) if sign > 0 else (k < 0)
    if not mask.any():
        return np.zeros(k_targets.size, dtype=complex)
    ks, gs = k[mask], spectrum.values[mask]
    order = np.argsort(ks)
    ks, gs = ks[order], gs[order]
    if k_targets.max() > ks.max() + 1e-12 * abs(ks.max()) or k_targets.min() < ks.min() - 1e-12 * abs(ks.min()):
        raise PreconditionError("momentum support insufficient")
    return _interp_complex(k_targets, ks, gs)


def _default_energy_grid(spectrum: SpectralAmplitude, constants: PhysicalConstants,
                         count: int = 4001) -> Grid1D:
    k = spectrum.points
    kmax = np.min([k.max() if k.max() > 0 else np.inf, -k.min() if k.min() < 0 else np.inf])
    emax = constants.energy(kmax)
    e0 = constants.energy(max(np.min(np.abs(k)), 1e-3))
    return Grid1D.between(max(e0, 1e-6), emax, count)


def momentum_to_two_component(spectrum: SpectralAmplitude, energy_grid: Grid1D | None = None,
                              constants: PhysicalConstants = NATURAL) -> TwoComponentWeight:
    """Map a full-axis ``g(k)`` to the two-component energy weight.

    ``plus(E) = (mu / (2 E hbar^2))**(1/4) * g(+sqrt(2 mu E)/hbar)`` and
    likewise ``minus`` at negative ``k``; values are linearly resampled. A
    side of the k axis with no samples is taken as identically zero.
    """
    if spectrum.representation != MOMENTUM:
        raise PreconditionError("two-component weight needs a momentum-representation spectrum")
    if energy_grid is None:
        energy_grid = _default_energy_grid(spectrum, constants)
    energy = energy_grid.points
    kk = constants.wavenumber(energy)
    jac = (constants.mass / (2.0 * energy * constants.hbar**2)) ** 0.25
    plus = jac * _side_values(spectrum, kk, +1)
    minus = jac * _side_values(spectrum, -kk, -1)
    return TwoComponentWeight(energy_grid, plus, minus)


def momentum_to_energy_amplitude(spectrum: SpectralAmplitude, energy_grid: Grid1D,
                                 constants: PhysicalConstants = NATURAL) -> SpectralAmplitude:
    """Energy amplitude producing the same packet as the ``k > 0`` part of ``g(k)``.

    ``g_E(E) = g(k(E)) / (sqrt(2 pi) hbar v)``, i.e. the change of variables
    ``dk = dE / (hbar v)`` together with the ``1/sqrt(2 pi)`` plane-wave factor.
    """
    if spectrum.representation != MOMENTUM:
        raise PreconditionError("expected a momentum-representation spectrum")
    energy = energy_grid.points
    g = _side_values(spectrum, constants.wavenumber(energy), +1)
    values = g / (np.sqrt(2.0 * np.pi) * constants.hbar * constants.velocity(energy))
    return SpectralAmplitude(ENERGY, energy_grid, values)
