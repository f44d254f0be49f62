"""Bound-state superpositions with commensurate spectra: Poincare period,
saw-tooth time, time moments at a fixed position, the finite-difference
energy-representation time operator, and a generalized time-energy
uncertainty check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import numerics
from .errors import PreconditionError
from .numerics import Grid1D
from .wavepacket import NATURAL, PhysicalConstants

OSCILLATOR = "harmonicOscillator"
BOX = "rigidBox"

NORM_TOL = 1e-12
COMMENSURATE_TOL = 1e-9
ORTHONORMAL_TOL = 1e-8
REAL_TOL = 1e-9
BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class BoundSystem:
    """Levels ``E_n`` (ascending), eigenfunctions, normalised coefficients ``g_n``.

    ``multiples`` holds the integers ``N_n = (E_n - E_0) / D``; evolution uses
    them directly so that the superposition is exactly ``T``-periodic.
    """

    levels: np.ndarray
    coefficients: np.ndarray
    divisor: float
    multiples: np.ndarray
    eigenfunctions: Callable
    x_grid: Grid1D
    hbar: float = 1.0
    name: str = "custom"

    @property
    def period(self) -> float:
        return 2.0 * np.pi * self.hbar / self.divisor

    @property
    def n_levels(self) -> int:
        return int(self.levels.size)

    def amplitudes(self, x: float) -> np.ndarray:
        """``A_n = g_n phi_n(x)``."""
        return self.coefficients * np.asarray(self.eigenfunctions(np.asarray([float(x)])))[:, 0]

    def sampled_eigenfunctions(self) -> np.ndarray:
        return np.asarray(self.eigenfunctions(self.x_grid.points))

    def orthonormality_defect(self) -> float:
        phi = self.sampled_eigenfunctions()
        gram = numerics.integrate_array(np.conj(phi)[:, None, :] * phi[None, :, :], self.x_grid)
        return float(np.max(np.abs(gram - np.eye(self.n_levels))))


def commensurate_divisor(levels, rel_tol: float = COMMENSURATE_TOL, max_denominator: int = 1000):
    """Largest ``D`` with every ``E_n - E_0`` an integer multiple of ``D``.

    Spacings are expressed as rationals relative to the smallest one and the
    rational gcd is taken; returns ``(D, N_n)``.
    """
    levels = np.asarray(levels, dtype=float)
    if levels.size < 2:
        raise PreconditionError("no evolution with one bound state")
    if np.any(np.diff(levels) <= 0.0):
        raise PreconditionError("levels must be strictly ascending")
    gaps = levels[1:] - levels[0]
    unit = gaps[0]
    ratios = [Fraction(float(r)).limit_denominator(max_denominator) for r in gaps / unit]
    for r, exact in zip(ratios, gaps / unit):
        if abs(float(r) - exact) > rel_tol * max(1.0, exact):
            raise PreconditionError("incommensurate spectrum: no common divisor")
    num = 0
    den = 1
    for r in ratios:
        den = den * r.denominator // math.gcd(den, r.denominator)
    for r in ratios:
        num = math.gcd(num, r.numerator * (den // r.denominator))
    divisor = unit * num / den
    multiples = np.concatenate([[0], np.rint(gaps / divisor).astype(np.int64)])
    if np.any(np.abs(multiples[1:] * divisor - gaps) > rel_tol * np.abs(gaps)):
        raise PreconditionError("incommensurate spectrum: no common divisor")
    return float(divisor), multiples


def _normalise(coefficients, n_levels: int) -> np.ndarray:
    g = np.asarray(coefficients, dtype=complex)
    if g.shape != (n_levels,):
        raise PreconditionError(f"expected {n_levels} coefficients, got {g.size}")
    total = np.sum(np.abs(g) ** 2)
    if total == 0.0:
        raise PreconditionError("all coefficients vanish")
    return g / np.sqrt(total)


def oscillator_eigenfunctions(n_levels: int, omega: float, constants: PhysicalConstants):
    scale = np.sqrt(constants.mass * omega / constants.hbar)

    def phi(x):
        xi = scale * np.asarray(x, dtype=float)
        out = np.empty((n_levels, xi.size))
        out[0] = (scale**2 / np.pi) ** 0.25 * np.exp(-0.5 * xi**2)
        if n_levels > 1:
            out[1] = np.sqrt(2.0) * xi * out[0]
        for n in range(1, n_levels - 1):
            out[n + 1] = np.sqrt(2.0 / (n + 1)) * xi * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
        return out

    return phi


def box_eigenfunctions(n_levels: int, width: float):
    def phi(x):
        x = np.asarray(x, dtype=float)
        n = np.arange(1, n_levels + 1)[:, None]
        inside = (x >= 0.0) & (x <= width)
        return np.where(inside, np.sqrt(2.0 / width) * np.sin(n * np.pi * x / width), 0.0)

    return phi


def build_catalog_system(kind: str, n_levels: int, coefficients=None,
                         constants: PhysicalConstants = NATURAL, omega: float = 1.0,
                         width: float = np.pi, grid_count: int = 4001) -> BoundSystem:
    """Oscillator (``E_n = hbar omega (n + 1/2)``) or rigid box of ``width``
    (``E_n = n^2 pi^2 hbar^2 / (2 mu L^2)``, ``n >= 1``), lowest ``n_levels`` levels.

    ``coefficients`` default to equal weights and are normalised.
    """
    if int(n_levels) != n_levels or n_levels < 2:
        raise PreconditionError("no evolution with one bound state")
    n_levels = int(n_levels)
    hbar, mu = constants.hbar, constants.mass
    if coefficients is None:
        coefficients = np.ones(n_levels)
    g = _normalise(coefficients, n_levels)
    if kind == OSCILLATOR:
        if omega <= 0.0:
            raise PreconditionError("omega must be positive")
        levels = hbar * omega * (np.arange(n_levels) + 0.5)
        phi = oscillator_eigenfunctions(n_levels, omega, constants)
        length = np.sqrt(hbar / (mu * omega))
        reach = np.sqrt(2.0 * n_levels + 1.0) * length + 10.0 * length
        grid = Grid1D.between(-reach, reach, grid_count)
        divisor = hbar * omega
        multiples = np.arange(n_levels)
    elif kind == BOX:
        if width <= 0.0:
            raise PreconditionError("box width must be positive")
        n = np.arange(1, n_levels + 1)
        levels = n**2 * np.pi**2 * hbar**2 / (2.0 * mu * width**2)
        phi = box_eigenfunctions(n_levels, width)
        grid = Grid1D.between(0.0, width, grid_count)
        divisor, multiples = commensurate_divisor(levels)
    else:
        raise PreconditionError(f"unknown catalog system {kind!r}")
    return BoundSystem(levels, g, divisor, np.asarray(multiples), phi, grid, hbar, kind)


def system_from_levels(levels, coefficients, eigenfunctions: Callable, x_grid: Grid1D,
                       constants: PhysicalConstants = NATURAL) -> BoundSystem:
    levels = np.asarray(levels, dtype=float)
    divisor, multiples = commensurate_divisor(levels)
    g = _normalise(coefficients, levels.size)
    return BoundSystem(levels, g, divisor, multiples, eigenfunctions, x_grid, constants.hbar)


def default_probe(system: BoundSystem, constants: PhysicalConstants = NATURAL, omega: float = 1.0) -> float:
    """Off-centre probe: half the ground-state classical amplitude, or a third of the box."""
    if system.name == OSCILLATOR:
        return 0.5 * np.sqrt(constants.hbar / (constants.mass * omega))
    if system.name == BOX:
        return system.x_grid.stop / 3.0
    raise PreconditionError("no default probe for a custom system")


def _cycle_phase(system: BoundSystem, t) -> np.ndarray:
    # D t / hbar reduced modulo 2 pi through the cycle fraction, so that
    # t and t + T give identical phases
    frac = np.mod(np.asarray(t, dtype=float) / system.period, 1.0)
    return 2.0 * np.pi * frac


def evolve(system: BoundSystem, x: float, t) -> np.ndarray:
    """``sum g_n phi_n(x) exp(-i (E_n - E_0) t / hbar)``."""
    a = system.amplitudes(x)
    theta = _cycle_phase(system, t)
    return np.exp(-1j * np.multiply.outer(theta, system.multiples)) @ a


def sawtooth(t, period: float):
    """``t`` reduced into ``(-T/2, T/2]`` by whole periods."""
    if period <= 0.0:
        raise PreconditionError("period must be positive")
    t = np.asarray(t, dtype=float)
    return t - period * np.ceil((t - 0.5 * period) / period)


def shifted_sawtooth(t, period: float, gamma: float = 0.0):
    """Saw-tooth on the cycle ``(gamma - T/2, gamma + T/2]``."""
    return gamma + sawtooth(np.asarray(t, dtype=float) - gamma, period)


def cycle_grid(system: BoundSystem, gamma: float = 0.0, per_oscillation: int = 64,
               min_count: int = 2049) -> Grid1D:
    """Closed grid over one Poincare cycle centred on ``gamma``."""
    top = int(np.max(system.multiples))
    count = max(min_count, 2 * top * per_oscillation + 1) | 1
    half = 0.5 * system.period
    return Grid1D.between(gamma - half, gamma + half, count)


def _density_on_cycle(system: BoundSystem, x: float, grid: Grid1D) -> np.ndarray:
    t = grid.points
    # phases directly from t (not reduced) so the closed cycle stays continuous
    theta = system.divisor * t / system.hbar
    psi = np.exp(-1j * np.multiply.outer(theta, system.multiples)) @ system.amplitudes(x)
    return np.abs(psi) ** 2


def mean_time_discrete(system: BoundSystem, x: float, order: int = 1, gamma: float = 0.0,
                       grid: Grid1D | None = None) -> float:
    """``int st(t)^n |psi(x,t)|^2 dt / int |psi|^2 dt`` over one cycle, by quadrature."""
    if grid is None:
        grid = cycle_grid(system, gamma)
    rho = _density_on_cycle(system, x, grid)
    total = numerics.integrate_array(rho, grid)
    if total <= 1e-300 or np.sum(np.abs(system.amplitudes(x)) ** 2) <= 1e-300:
        raise PreconditionError("node point")
    t = grid.points
    return float(numerics.integrate_array(rho * t**order, grid) / total)


def energy_rep_mean_time(amplitudes, levels, multiples, hbar: float = 1.0) -> float:
    """Mean saw-tooth time from the level amplitudes ``A_n`` alone.

    ``<t> = (1/S) sum_{n > n'} (-1)^(N_n - N_n' + 1) 2 hbar Im(A_n'* A_n) / (E_n - E_n')``
    with ``S = sum |A_n|^2``: each pair of levels contributes a finite
    difference of its amplitudes divided by its energy spacing.
    """
    a = np.asarray(amplitudes, dtype=complex)
    e = np.asarray(levels, dtype=float)
    m = np.asarray(multiples, dtype=np.int64)
    s = float(np.sum(np.abs(a) ** 2))
    if s <= 1e-300:
        raise PreconditionError("node point")
    total = 0.0
    for n in range(1, a.size):
        for k in range(n):
            sign = -1.0 if (m[n] - m[k]) % 2 == 0 else 1.0
            total += sign * 2.0 * hbar * np.imag(np.conj(a[k]) * a[n]) / (e[n] - e[k])
    return float(total / s)


def difference_form_two_level(a0: complex, a1: complex, spacing: float, hbar: float = 1.0) -> complex:
    """Two-level finite-difference operator ``(-i hbar) A* <->Delta A / Delta E / S``.

    ``A* <->Delta A = A_1* (A_1 - A_0) - A_1 (A_1 - A_0)*``; the result is
    purely real for any amplitudes. The prefactor ``-i hbar`` (rather than
    ``-i hbar / 2``) counts the pair once for each member, which is what
    makes it agree with direct time averaging.
    """
    bilinear = np.conj(a1) * (a1 - a0) - a1 * np.conj(a1 - a0)
    s = abs(a0) ** 2 + abs(a1) ** 2
    if s <= 1e-300:
        raise PreconditionError("node point")
    return -1j * hbar * bilinear / (spacing * s)


def differential_form(envelope: Callable, energy: float, step: float, hbar: float = 1.0) -> float:
    """Continuum limit ``hbar Im(a* a') / |a|^2`` at ``energy`` (central difference)."""
    a = complex(envelope(energy))
    da = (complex(envelope(energy + step)) - complex(envelope(energy - step))) / (2.0 * step)
    if abs(a) == 0.0:
        raise PreconditionError("node point")
    return float(hbar * np.imag(np.conj(a) * da) / abs(a) ** 2)


def time_operator_energy_rep(system: BoundSystem, x: float) -> float:
    """Mean time at ``x`` from the energy representation, in ``(-T/2, T/2]``."""
    if system.n_levels < 2:
        raise PreconditionError("no evolution with one bound state")
    a = system.amplitudes(x)
    if system.n_levels == 2:
        spacing = system.levels[1] - system.levels[0]
        value = difference_form_two_level(a[0], a[1], spacing, system.hbar)
        if system.multiples[1] % 2 == 0:
            value = -value
        if abs(value.imag) > REAL_TOL * max(1.0, abs(value.real)):
            raise PreconditionError("bilinear form not real")
        value = value.real
    else:
        value = energy_rep_mean_time(a, system.levels, system.multiples, system.hbar)
    return float(sawtooth(value, system.period))


@dataclass(frozen=True)
class UncertaintyCheck:
    var_e: float
    var_t: float
    rhs_bound: float
    satisfied: bool
    var_e_probe: float
    commutator_factor: float
    robertson_bound: float
    robertson_satisfied: bool


def generalized_uncertainty(system: BoundSystem, gamma: float = 0.0, x: float | None = None,
                            grid: Grid1D | None = None,
                            constants: PhysicalConstants = NATURAL) -> UncertaintyCheck:
    """Both sides of the generalized relation on the cycle ``(gamma - T/2, gamma + T/2]``.

    ``rhs_bound = hbar^2 [1 - T rho(gamma + T/2) / int rho dt]`` with ``rho``
    the density at the probe ``x``; ``var_e`` uses ``|g_n|^2``. Also returned:
    the same commutator factor in the Robertson form
    ``var_e_probe var_t >= (hbar^2 / 4) factor^2``, where ``var_e_probe``
    weights the levels with ``|g_n phi_n(x)|^2``.
    """
    if x is None:
        x = default_probe(system, constants)
    hbar = system.hbar
    w = np.abs(system.coefficients) ** 2
    mean_e = np.sum(w * system.levels)
    var_e = float(np.sum(w * (system.levels - mean_e) ** 2))
    a2 = np.abs(system.amplitudes(x)) ** 2
    if np.sum(a2) <= 1e-300:
        raise PreconditionError("node point")
    wp = a2 / np.sum(a2)
    mean_p = np.sum(wp * system.levels)
    var_e_probe = float(np.sum(wp * (system.levels - mean_p) ** 2))

    if grid is None:
        grid = cycle_grid(system, gamma)
    rho = _density_on_cycle(system, x, grid)
    total = numerics.integrate_array(rho, grid)
    t = grid.points
    mean_t = numerics.integrate_array(rho * t, grid) / total
    var_t = float(numerics.integrate_array(rho * (t - mean_t) ** 2, grid) / total)
    edge = float(np.abs(evolve(system, x, gamma + 0.5 * system.period)) ** 2)
    # over a full cycle the cross terms integrate to zero: int rho dt = T sum |A_n|^2
    factor = float(1.0 - edge / np.sum(a2))
    rhs = hbar**2 * factor
    robertson = 0.25 * hbar**2 * factor**2
    return UncertaintyCheck(var_e, var_t, float(rhs), bool(var_e * var_t >= rhs - BOUND_SLACK),
                            var_e_probe, factor, float(robertson),
                            bool(var_e_probe * var_t >= robertson - BOUND_SLACK))
