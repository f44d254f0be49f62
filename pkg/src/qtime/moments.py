"""Flux-weighted time measures and temporal moments of a packet at a fixed
position, computed two ways: by averaging over ``t`` with the current
``j(x, t)`` as weight, and in the energy representation where time acts as
``-i hbar d/dE``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import numerics
from .errors import HermiticityError, NumericalGuardError, PreconditionError, ZeroFluxError
from .numerics import Grid1D
from .wavepacket import (ENERGY, NATURAL, PhysicalConstants, SpectralAmplitude, density_flux,
                         synthesize_slice)

FLUX = "flux"
FLUX_PLUS = "fluxPlus"
FLUX_MINUS = "fluxMinus"
DENSITY = "density"

HERMITICITY_TOL = 1e-6
UNCERTAINTY_SLACK = 1e-9


@dataclass(frozen=True)
class TimeMeasure:
    time_grid: Grid1D
    weight: np.ndarray
    kind: str

    @property
    def is_signed(self) -> bool:
        return self.kind == FLUX


@dataclass(frozen=True)
class TemporalStats:
    mean: float
    variance: float
    higher: dict = field(default_factory=dict)
    flagged: bool = False

    @property
    def std(self) -> float:
        if self.variance < 0.0:
            raise PreconditionError("indefinite measure: use W+- split")
        return float(np.sqrt(self.variance))


def flux_measure(j, time_grid: Grid1D, sign: str = "both") -> TimeMeasure:
    """Normalised flux weight over ``time_grid``.

    ``sign`` selects the full current (``"both"``) or only its positive or
    negative part; samples where ``j == 0`` belong to neither part.
    """
    j = np.asarray(j, dtype=float)
    if sign == "both":
        selected, kind = j, FLUX
    elif sign == "plus":
        selected, kind = np.where(j > 0.0, j, 0.0), FLUX_PLUS
    elif sign == "minus":
        selected, kind = np.where(j < 0.0, j, 0.0), FLUX_MINUS
    else:
        raise PreconditionError(f"unknown flux sign selection {sign!r}")
    total = numerics.integrate_array(selected, time_grid)
    scale = numerics.integrate_array(np.abs(selected), time_grid)
    if scale == 0.0 or abs(total) <= 1e-14 * scale:
        raise ZeroFluxError("zero flux: time measure undefined")
    return TimeMeasure(time_grid, selected / total, kind)


def density_measure(rho, time_grid: Grid1D) -> TimeMeasure:
    rho = np.asarray(rho, dtype=float)
    total = numerics.integrate_array(rho, time_grid)
    if total <= 0.0:
        raise PreconditionError("density vanishes on the time grid")
    return TimeMeasure(time_grid, rho / total, DENSITY)


def moment_time_rep(measure: TimeMeasure, f: Callable | int) -> float:
    """``int w(t) f(t) dt``; an integer ``f`` means the monomial ``t**f``."""
    t = measure.time_grid.points
    values = t**f if isinstance(f, (int, np.integer)) else f(t)
    return float(numerics.integrate_array(measure.weight * values, measure.time_grid))


def temporal_stats(measure: TimeMeasure, max_order: int = 4) -> TemporalStats:
    mean = moment_time_rep(measure, 1)
    second = moment_time_rep(measure, 2)
    variance = second - mean**2
    higher = {n: moment_time_rep(measure, n) for n in range(3, max_order + 1)}
    flagged = variance < 0.0
    if flagged and not measure.is_signed:
        raise NumericalGuardError("negative variance for a nonnegative measure")
    return TemporalStats(mean, variance, higher, flagged)


def apply_time_operator(envelope, grid: Grid1D, travel_time, hbar: float, power: int = 1):
    """Apply ``-i hbar d/dE`` ``power`` times to ``envelope(E) * exp(i phase(E))``.

    The packet factor ``exp(i k(E) x)`` is handled analytically: its
    derivative contributes ``travel_time = x / v(E)``, so only the smooth
    envelope is differenced numerically. Returns the new envelope.
    """
    h = np.asarray(envelope, dtype=complex)
    for _ in range(power):
        h = travel_time * h - 1j * hbar * numerics.derivative_array(h, grid.step)
    return h


def strip_linear_phase(envelope, grid: Grid1D, hbar: float):
    """Split ``envelope = h * exp(i tau E / hbar)`` with ``tau`` the mean phase slope.

    ``-i hbar d/dE`` acting on the linear phase is exactly ``tau``, so only
    the slowly varying ``h`` needs to be differenced. Returns ``(h, tau)``.
    """
    g = np.asarray(envelope, dtype=complex)
    weight = np.abs(g) ** 2
    total = numerics.integrate_array(weight, grid)
    if total == 0.0:
        return g, 0.0
    slope = numerics.integrate_array(np.imag(np.conj(g) * numerics.derivative_array(g, grid.step)), grid)
    tau = float(hbar * slope / total)
    return g * np.exp(-1j * tau * grid.points / hbar), tau


def energy_rep_numerator(spectrum: SpectralAmplitude, x: float, order: int,
                         constants: PhysicalConstants = NATURAL, form: str = "one-sided"):
    """Unnormalised energy-representation average of ``t**order`` at ``x``.

    Returns ``(value, scale)``: the complex integral and the integral of its
    integrand's modulus, the natural yardstick for its imaginary part.

    ``form="one-sided"`` uses ``-i hbar d/dE`` in
    ``1/2 int [G* t^n (v G) + v G* t^n G] dE``; ``form="bilinear"`` (order 1
    only) uses the two-sided pairing whose surface term cancels at the grid
    ends, so the result is real by construction.
    """
    if spectrum.representation != ENERGY:
        raise PreconditionError("energy representation required")
    if order < 1:
        raise PreconditionError("order must be >= 1")
    grid = spectrum.grid
    energy = grid.points
    v = constants.velocity(energy)
    hbar = constants.hbar
    # the packet's own mean delay is handled analytically, like exp(ikx)
    g, tau = strip_linear_phase(spectrum.values, grid, hbar)
    travel = x / v + tau
    if form == "one-sided":
        integrand = 0.5 * (np.conj(g) * apply_time_operator(v * g, grid, travel, hbar, order)
                           + v * np.conj(g) * apply_time_operator(g, grid, travel, hbar, order))
    elif form == "bilinear":
        if order != 1:
            raise PreconditionError("bilinear form is defined for the first moment only")
        # covariant derivative of the envelope, exp(ikx) handled analytically
        def cov(h):
            return numerics.derivative_array(h, grid.step) + 1j * travel / hbar * h

        vg = v * g
        pair_a = np.conj(g) * cov(vg) - np.conj(cov(g)) * vg
        pair_b = np.conj(vg) * cov(g) - np.conj(cov(vg)) * g
        integrand = 0.5 * (-0.5j * hbar) * (pair_a + pair_b)
    else:
        raise PreconditionError(f"unknown operator form {form!r}")
    return complex(numerics.integrate_array(integrand, grid)), float(
        numerics.integrate_array(np.abs(integrand), grid))


def _flux_norm(spectrum: SpectralAmplitude, constants: PhysicalConstants) -> float:
    v = constants.velocity(spectrum.points)
    return float(numerics.integrate_array(v * np.abs(spectrum.values) ** 2, spectrum.grid))


def moment_energy_rep(spectrum: SpectralAmplitude, x: float, order: int,
                      constants: PhysicalConstants = NATURAL) -> float:
    """``<t^order>`` at ``x`` from the energy representation.

    Requires the amplitude to decay at both grid ends; raises
    ``HermiticityError`` when the imaginary part is not negligible.
    """
    spectrum.require_confined()
    norm = _flux_norm(spectrum, constants)
    if norm == 0.0:
        raise PreconditionError("empty packet")
    value, scale = energy_rep_numerator(spectrum, x, order, constants)
    if abs(value.imag) > HERMITICITY_TOL * max(abs(value.real), scale):
        raise HermiticityError("hermiticity violation: check grids")
    return value.real / norm


def bilinear_mean_time(spectrum: SpectralAmplitude, x: float,
                       constants: PhysicalConstants = NATURAL) -> float:
    """Mean passage time at ``x`` with the two-sided (bilinear) time operator.

    No decay is required at the lower end of the energy grid.
    """
    norm = _flux_norm(spectrum, constants)
    if norm == 0.0:
        raise PreconditionError("empty packet")
    value, _ = energy_rep_numerator(spectrum, x, 1, constants, form="bilinear")
    return value.real / norm


def surface_term(spectrum: SpectralAmplitude, constants: PhysicalConstants = NATURAL) -> complex:
    """``(i hbar / 2) [v |g|^2]`` between the grid ends, divided by the flux norm.

    The one-sided first moment equals the bilinear one minus this term.
    """
    v = constants.velocity(spectrum.points)
    dens = v * np.abs(spectrum.values) ** 2
    return 0.5j * constants.hbar * (dens[-1] - dens[0]) / _flux_norm(spectrum, constants)


def energy_stats(spectrum: SpectralAmplitude, constants: PhysicalConstants = NATURAL,
                 weight: str = "norm"):
    """Mean energy and its standard deviation.

    ``weight="norm"`` averages with ``|g|^2 dE`` (the plain energy-space
    norm); ``weight="flux"`` uses ``v |g|^2 dE``, the denominator of the
    flux-weighted time average. With the flux weight the product with the
    flux-measure time spread can dip below ``hbar/2`` by a relative amount of
    order ``(dE/E)^2`` for packets observed near their focus.
    """
    if spectrum.representation != ENERGY:
        raise PreconditionError("energy representation required")
    energy = spectrum.points
    w = np.abs(spectrum.values) ** 2
    if weight == "flux":
        w = w * constants.velocity(energy)
    elif weight != "norm":
        raise PreconditionError(f"unknown energy weight {weight!r}")
    norm = numerics.integrate_array(w, spectrum.grid)
    if norm == 0.0:
        raise PreconditionError("empty packet")
    mean = numerics.integrate_array(w * energy, spectrum.grid) / norm
    var = numerics.integrate_array(w * (energy - mean) ** 2, spectrum.grid) / norm
    return float(mean), float(np.sqrt(max(var, 0.0)))


def auto_time_grid(spectrum: SpectralAmplitude, x: float, constants: PhysicalConstants = NATURAL,
                   halfwidth: float = 14.0, per_sigma: float = 40.0) -> Grid1D:
    """Time window centred on the mean passage time, ``halfwidth`` deviations wide.

    Mean and spread come from the energy representation, so no time
    sampling is needed to place the window.
    """
    mean = moment_energy_rep(spectrum, x, 1, constants)
    var = moment_energy_rep(spectrum, x, 2, constants) - mean**2
    if var <= 0.0:
        raise PreconditionError("indefinite measure: use W+- split")
    sigma = np.sqrt(var)
    alias = 2.0 * np.pi * constants.hbar / spectrum.grid.step
    if 2.0 * halfwidth * sigma > 0.5 * alias:
        raise NumericalGuardError("time window exceeds the spectral grid's alias period")
    count = int(np.ceil(2.0 * halfwidth * per_sigma)) | 1
    return Grid1D.between(mean - halfwidth * sigma, mean + halfwidth * sigma, count)


def flux_stats(spectrum: SpectralAmplitude, x: float, time_grid: Grid1D | None = None,
               constants: PhysicalConstants = NATURAL, sign: str = "both") -> TemporalStats:
    """Time-representation moments of the flux measure at ``x``."""
    if time_grid is None:
        time_grid = auto_time_grid(spectrum, x, constants)
    _, j = density_flux(synthesize_slice(spectrum, x, time_grid, constants), constants)
    return temporal_stats(flux_measure(j, time_grid, sign))


def density_stats(spectrum: SpectralAmplitude, x: float, time_grid: Grid1D | None = None,
                  constants: PhysicalConstants = NATURAL) -> TemporalStats:
    """Moments of the density-weighted time measure at ``x``."""
    if time_grid is None:
        time_grid = auto_time_grid(spectrum, x, constants)
    rho, _ = density_flux(synthesize_slice(spectrum, x, time_grid, constants), constants)
    return temporal_stats(density_measure(rho, time_grid))


@dataclass(frozen=True)
class UncertaintyResult:
    delta_e: float
    delta_t: float
    product: float
    satisfied: bool


def uncertainty_product(spectrum: SpectralAmplitude, x: float, constants: PhysicalConstants = NATURAL,
                        time_grid: Grid1D | None = None, energy_weight: str = "norm") -> UncertaintyResult:
    """Energy spread times the flux-measure time spread at ``x``."""
    _, delta_e = energy_stats(spectrum, constants, energy_weight)
    stats = flux_stats(spectrum, x, time_grid, constants)
    if stats.variance < 0.0:
        raise PreconditionError("indefinite measure: use W+- split")
    delta_t = stats.std
    product = delta_e * delta_t
    return UncertaintyResult(delta_e, delta_t, product,
                             product >= 0.5 * constants.hbar - UNCERTAINTY_SLACK)
