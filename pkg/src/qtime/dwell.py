"""Scattering off piecewise-constant potentials and mean dwell times.

Stationary states come from 2x2 transfer matrices matched at each interface,
with unit-amplitude incidence from the left. Packets are superpositions of
those states; the mean dwell time inside ``[xi, xf]`` is available from the
time-integrated probability inside the interval and from the difference of
time-weighted fluxes at its ends.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import NumericalGuardError, PreconditionError, ZeroFluxError
from .moments import moment_energy_rep
from .numerics import Grid1D
from .wavepacket import (ENERGY, NATURAL, PhysicalConstants, SpectralAmplitude, check_window,
                         density_flux, synthesize_slice)

UNITARITY_TOL = 1e-10
_DEGENERACY = 1e-12


@dataclass(frozen=True)
class ScatteringSetup:
    """Ordered ``(left_edge, height)`` regions.

    The first region starts at ``-inf`` and the last extends to ``+inf``;
    both outer regions carry zero potential.
    """

    regions: tuple

    def __post_init__(self):
        regions = tuple((float(a), float(v)) for a, v in self.regions)
        object.__setattr__(self, "regions", regions)
        if len(regions) < 1:
            raise PreconditionError("at least one region required")
        if regions[0][0] != -np.inf:
            raise PreconditionError("first region must start at -inf")
        if regions[0][1] != 0.0 or regions[-1][1] != 0.0:
            raise PreconditionError("outer regions must have zero potential")
        edges = [a for a, _ in regions]
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise PreconditionError("region edges must be strictly increasing")

    @classmethod
    def free(cls) -> "ScatteringSetup":
        return cls(((-np.inf, 0.0),))

    @classmethod
    def barrier(cls, height: float, width: float, left: float = 0.0) -> "ScatteringSetup":
        if width <= 0.0:
            raise PreconditionError("barrier width must be positive")
        return cls(((-np.inf, 0.0), (left, height), (left + width, 0.0)))

    @property
    def interfaces(self) -> np.ndarray:
        return np.array([a for a, _ in self.regions[1:]])

    @property
    def heights(self) -> np.ndarray:
        return np.array([v for _, v in self.regions])

    @property
    def is_free(self) -> bool:
        return len(self.regions) == 1 or not np.any(self.heights)

    def origins(self) -> np.ndarray:
        """Reference point of each region's local plane waves (0 for the outer ones)."""
        o = np.array([a for a, _ in self.regions])
        o[0] = 0.0
        o[-1] = 0.0
        return o

    def region_index(self, x) -> np.ndarray:
        return np.searchsorted(self.interfaces, np.asarray(x, dtype=float), side="right")


@dataclass(frozen=True)
class StationaryState:
    """Scattering state at one energy.

    In region ``j`` the wave is ``A exp(i q (x - o)) + B exp(-i q (x - o))``
    with complex ``q`` (imaginary under a barrier) and ``o`` the region's
    origin; ``coefficients[j] = (A, B)``.
    """

    energy: float
    setup: ScatteringSetup
    wavenumbers: np.ndarray
    coefficients: np.ndarray
    transmission: complex
    reflection: complex

    def __call__(self, x):
        return scattering_waves(self.setup, self.wavenumbers[None, :], self.coefficients[None], x)[0]

    def derivative(self, x):
        return scattering_waves(self.setup, self.wavenumbers[None, :], self.coefficients[None], x,
                                derivative=True)[0]


def _local_wavenumbers(setup: ScatteringSetup, energies, constants: PhysicalConstants):
    energies = np.asarray(energies, dtype=float)
    diff = energies[:, None] - setup.heights[None, :]
    scale = np.maximum(1.0, np.abs(setup.heights))[None, :]
    if np.any(np.abs(diff) <= _DEGENERACY * scale):
        raise PreconditionError("degenerate linear solution at band edge")
    return np.sqrt(2.0 * constants.mass * diff.astype(complex)) / constants.hbar


def _match(q, xloc):
    e_plus = np.exp(1j * q * xloc)
    e_minus = np.exp(-1j * q * xloc)
    m = np.empty(q.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = e_plus
    m[..., 0, 1] = e_minus
    m[..., 1, 0] = 1j * q * e_plus
    m[..., 1, 1] = -1j * q * e_minus
    return m


def solve_many(setup: ScatteringSetup, energies, constants: PhysicalConstants = NATURAL):
    """Wave numbers ``(N, R)`` and coefficients ``(N, R, 2)`` for ``N`` energies."""
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    if np.any(energies <= 0.0):
        raise PreconditionError("scattering energy must be positive")
    q = _local_wavenumbers(setup, energies, constants)
    nreg = len(setup.regions)
    origins = setup.origins()
    coeff = np.zeros((energies.size, nreg, 2), dtype=complex)
    coeff[:, -1, 0] = 1.0
    for j in range(nreg - 2, -1, -1):
        edge = setup.regions[j + 1][0]
        left = _match(q[:, j], edge - origins[j])
        right = _match(q[:, j + 1], edge - origins[j + 1])
        coeff[:, j] = np.linalg.solve(left, (right @ coeff[:, j + 1, :, None]))[..., 0]
    incident = coeff[:, 0, 0].copy()
    coeff /= incident[:, None, None]
    return q, coeff


def solve_stationary(setup: ScatteringSetup, energy: float,
                     constants: PhysicalConstants = NATURAL) -> StationaryState:
    """Stationary state for unit incidence from the left at ``energy``."""
    q, coeff = solve_many(setup, [energy], constants)
    t = coeff[0, -1, 0]
    r = coeff[0, 0, 1]
    if abs(abs(t) ** 2 + abs(r) ** 2 - 1.0) > 1e3 * UNITARITY_TOL:
        raise NumericalGuardError("transfer-matrix solution lost unitarity")
    return StationaryState(float(energy), setup, q[0], coeff[0], complex(t), complex(r))


def scattering_waves(setup: ScatteringSetup, q, coeff, x, derivative: bool = False) -> np.ndarray:
    """``phi(x, E)`` (or ``d phi/dx``) as an ``(N_energy, N_x)`` array."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    idx = setup.region_index(x)
    origins = setup.origins()
    qx = q[:, idx]
    xloc = (x - origins[idx])[None, :]
    a = coeff[:, idx, 0]
    b = coeff[:, idx, 1]
    e_plus = np.exp(1j * qx * xloc)
    e_minus = np.exp(-1j * qx * xloc)
    if derivative:
        return 1j * qx * (a * e_plus - b * e_minus)
    return a * e_plus + b * e_minus


class ScatteringPacket:
    """``Psi(x, t) = int g(E) phi(x, E) exp(-i E t / hbar) dE`` over scattering states.

    Momentum amplitudes are accepted when supported on ``k > 0`` only
    (incidence from the left); they carry the ``1/sqrt(2 pi)`` plane-wave factor.
    """

    def __init__(self, spectrum: SpectralAmplitude, setup: ScatteringSetup,
                 constants: PhysicalConstants = NATURAL):
        energy, k, coeff = spectrum.modes(constants)
        if spectrum.representation != ENERGY and np.any(k < 0.0):
            raise PreconditionError("scattering packets need incidence from the left (k > 0)")
        self.spectrum = spectrum
        self.setup = setup
        self.constants = constants
        self.energy = energy
        self.k = k
        self.coeff = coeff
        self.q, self.amplitudes = solve_many(setup, energy, constants)

    def _phases(self, times):
        return np.exp(-1j * np.outer(self.energy, np.asarray(times, dtype=float)) / self.constants.hbar)

    def psi(self, x, times, derivative: bool = False) -> np.ndarray:
        """``(N_x, N_t)`` array of ``Psi`` (or ``dPsi/dx``)."""
        waves = scattering_waves(self.setup, self.q, self.amplitudes, x, derivative)
        return waves.T @ (self.coeff[:, None] * self._phases(times))

    def incident(self, x, times, derivative: bool = False) -> np.ndarray:
        """Contribution of the unit-amplitude incoming plane waves alone."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        waves = np.exp(1j * np.outer(self.k, x))
        if derivative:
            waves = 1j * self.k[:, None] * waves
        return waves.T @ (self.coeff[:, None] * self._phases(times))

    def flux(self, x: float, times, incident: bool = False) -> np.ndarray:
        f = self.incident if incident else self.psi
        psi = f([x], times)[0]
        dpsi = f([x], times, derivative=True)[0]
        return (self.constants.hbar / self.constants.mass) * np.imag(np.conj(psi) * dpsi)


def _x_grid(a: float, b: float, step: float) -> Grid1D:
    count = max(3, int(np.ceil((b - a) / step)) + 1)
    count |= 1
    return Grid1D.between(a, b, count)


def dwell_probability(spectrum: SpectralAmplitude, setup: ScatteringSetup, x1: float, x2: float,
                      t: float, window: Grid1D, constants: PhysicalConstants = NATURAL) -> float:
    """Probability of finding the particle inside ``(x1, x2)`` at time ``t``.

    The normalisation integral runs over ``window``, whose edges must see a
    packet magnitude below 1e-6 of its peak.
    """
    if not x1 < x2:
        raise PreconditionError("need x1 < x2")
    if x1 < window.start or x2 > window.stop:
        raise PreconditionError("interval must lie inside the normalisation window")
    packet = ScatteringPacket(spectrum, setup, constants)
    psi_window = packet.psi(window.points, [t])[:, 0]
    check_window(psi_window, "normalization window too small")
    total = numerics.integrate_array(np.abs(psi_window) ** 2, window)
    if total <= 0.0:
        raise PreconditionError("empty packet")
    inner = _x_grid(x1, x2, window.step)
    part = numerics.integrate_array(np.abs(packet.psi(inner.points, [t])[:, 0]) ** 2, inner)
    return float(np.clip(part / total, 0.0, 1.0))


def dwell_time_grid(spectrum: SpectralAmplitude, xi: float, xf: float,
                    constants: PhysicalConstants = NATURAL, halfwidth: float = 14.0,
                    per_sigma: float = 40.0, delay: float = 0.0) -> Grid1D:
    """Time window covering the free passage of the packet past ``xi`` and ``xf``.

    ``delay`` extends the late edge for setups that hold the packet back.
    """
    if spectrum.representation != ENERGY:
        raise PreconditionError("energy representation required for the automatic window")
    stats = []
    for x in (xi, xf):
        m1 = moment_energy_rep(spectrum, x, 1, constants)
        m2 = moment_energy_rep(spectrum, x, 2, constants)
        stats.append((m1, np.sqrt(max(m2 - m1**2, 0.0))))
    sigma = max(s for _, s in stats)
    lo = min(m for m, _ in stats) - halfwidth * sigma
    hi = max(m for m, _ in stats) + halfwidth * sigma + delay
    count = int(np.ceil((hi - lo) / sigma * per_sigma)) | 1
    return Grid1D.between(lo, hi, count)


def _default_x_step(packet: ScatteringPacket) -> float:
    kmax = np.max(np.abs(packet.q[np.abs(packet.coeff) > 0.0])) if np.any(packet.coeff) else 1.0
    return np.pi / max(kmax, 1e-12) / 40.0


def _incident_flux_integral(packet: ScatteringPacket, xi: float, time_grid: Grid1D) -> float:
    j_in = packet.flux(xi, time_grid.points, incident=True)
    total = numerics.integrate_array(j_in, time_grid)
    if total <= 0.0:
        raise ZeroFluxError("zero incident flux")
    return float(total)


def _check_passage(packet: ScatteringPacket, xs, time_grid: Grid1D) -> None:
    for x in xs:
        check_window(packet.psi([x], time_grid.points)[0])


def mean_dwell_density(spectrum: SpectralAmplitude, setup: ScatteringSetup, xi: float, xf: float,
                       constants: PhysicalConstants = NATURAL, time_grid: Grid1D | None = None,
                       x_step: float | None = None) -> float:
    """Mean dwell time from the time-integrated probability inside ``[xi, xf]``."""
    if xf < xi:
        raise PreconditionError("need xi <= xf")
    if xf == xi:
        return 0.0
    packet = ScatteringPacket(spectrum, setup, constants)
    if time_grid is None:
        time_grid = dwell_time_grid(spectrum, xi, xf, constants)
    _check_passage(packet, (xi, xf), time_grid)
    xg = _x_grid(xi, xf, x_step or _default_x_step(packet))
    psi = packet.psi(xg.points, time_grid.points)
    occupancy = numerics.integrate_array(np.abs(psi) ** 2, xg, axis=0)
    numerator = numerics.integrate_array(occupancy, time_grid)
    return float(numerator / _incident_flux_integral(packet, xi, time_grid))


def mean_dwell_flux(spectrum: SpectralAmplitude, setup: ScatteringSetup, xi: float, xf: float,
                    constants: PhysicalConstants = NATURAL, time_grid: Grid1D | None = None) -> float:
    """Mean dwell time from ``int t j(xf, t) dt - int t j(xi, t) dt`` over the incident flux."""
    if xf < xi:
        raise PreconditionError("need xi <= xf")
    if xf == xi:
        return 0.0
    packet = ScatteringPacket(spectrum, setup, constants)
    if time_grid is None:
        time_grid = dwell_time_grid(spectrum, xi, xf, constants)
    _check_passage(packet, (xi, xf), time_grid)
    t = time_grid.points
    out_moment = numerics.integrate_array(t * packet.flux(xf, t), time_grid)
    in_moment = numerics.integrate_array(t * packet.flux(xi, t), time_grid)
    return float((out_moment - in_moment) / _incident_flux_integral(packet, xi, time_grid))


def stationary_dwell_time(setup: ScatteringSetup, energy: float, xi: float, xf: float,
                          constants: PhysicalConstants = NATURAL, count: int = 4001) -> float:
    """``int |phi|^2 dx / (hbar k / mu)`` for a single stationary state."""
    state = solve_stationary(setup, energy, constants)
    xg = Grid1D.between(xi, xf, count | 1)
    prob = numerics.integrate_array(np.abs(state(xg.points)) ** 2, xg)
    return float(prob / (constants.hbar * constants.wavenumber(energy) / constants.mass))
