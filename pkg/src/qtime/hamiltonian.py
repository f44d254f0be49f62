"""The free-particle time operator built from the Hamiltonian,
``T = -(mu/2) [p^-1 x + x p^-1]`` with ``x = i hbar d/dp``, in the momentum
representation; plus its action on coordinate plane waves and the canonical
commutator ``[H, T] = i hbar``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import PreconditionError
from .numerics import Grid1D
from .wavepacket import MOMENTUM_EXCLUSION, NATURAL, PhysicalConstants


@dataclass(frozen=True)
class MomentumFunction:
    """``psi(p)`` on a momentum grid that keeps clear of ``p = 0``."""

    p_grid: Grid1D
    values: np.ndarray
    exclusion: float = MOMENTUM_EXCLUSION

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.p_grid.count,):
            raise PreconditionError("values length does not match grid count")
        p = self.p_grid.points
        if np.min(np.abs(p)) < self.exclusion or (p[0] < 0.0 < p[-1]):
            raise PreconditionError("momentum grid must exclude a neighbourhood of p = 0")
        object.__setattr__(self, "values", values)

    @property
    def points(self) -> np.ndarray:
        return self.p_grid.points

    def with_values(self, values) -> "MomentumFunction":
        return MomentumFunction(self.p_grid, values, self.exclusion)


def gaussian_momentum(p0: float, width: float, p_grid: Grid1D) -> MomentumFunction:
    p = p_grid.points
    return MomentumFunction(p_grid, np.exp(-((p - p0) ** 2) / (4.0 * width**2)))


def apply_T_momentum(psi: MomentumFunction, constants: PhysicalConstants = NATURAL) -> MomentumFunction:
    """``-(mu/2) [p^-1 (i hbar psi') + i hbar (psi / p)']`` by finite differences."""
    p = psi.points
    step = psi.p_grid.step
    ih = 1j * constants.hbar
    first = numerics.derivative_array(psi.values, step) / p
    second = numerics.derivative_array(psi.values / p, step)
    return psi.with_values(-0.5 * constants.mass * ih * (first + second))


def apply_T_via_energy(psi: MomentumFunction, constants: PhysicalConstants = NATURAL) -> MomentumFunction:
    """``-i hbar d/dE`` carried through the unitary map ``f(E) = psi(p) sqrt(mu / |p|)``.

    ``E = p^2 / 2 mu`` is non-uniform in the sampled ``p``; the derivative
    uses second-order differences on the non-uniform energy points (which
    decrease along the grid when ``p < 0``).
    """
    p = psi.points
    mu = constants.mass
    energy = p**2 / (2.0 * mu)
    jac = np.sqrt(mu / np.abs(p))
    f = psi.values * jac
    df = np.gradient(f, energy, edge_order=2)
    return psi.with_values(-1j * constants.hbar * df / jac)


def apply_H_momentum(psi: MomentumFunction, constants: PhysicalConstants = NATURAL) -> MomentumFunction:
    p = psi.points
    return psi.with_values(p**2 / (2.0 * constants.mass) * psi.values)


def inner(psi: MomentumFunction, phi: MomentumFunction) -> complex:
    """``int psi* phi dp`` by Simpson quadrature."""
    return complex(numerics.integrate_array(np.conj(psi.values) * phi.values, psi.p_grid))


def norm(psi: MomentumFunction) -> float:
    return float(np.sqrt(inner(psi, psi).real))


def hermiticity_defect(psi: MomentumFunction, phi: MomentumFunction,
                       constants: PhysicalConstants = NATURAL) -> float:
    """``|<psi, T phi> - <T psi, phi>| / (|psi| |phi|)``."""
    left = inner(psi, apply_T_momentum(phi, constants))
    right = inner(apply_T_momentum(psi, constants), phi)
    return abs(left - right) / (norm(psi) * norm(phi))


def commutator_residual(psi: MomentumFunction, constants: PhysicalConstants = NATURAL,
                        trim: int = 2) -> float:
    """``|(HT - TH) psi - i hbar psi| / |psi|`` over the interior grid.

    ``trim`` samples are dropped at each end, where the one-sided stencils
    lose accuracy. Norms are discrete l2 sums (the step cancels in the ratio).
    """
    if psi.p_grid.count <= 2 * trim + 2:
        raise PreconditionError("grid too small for derivative")
    ht = apply_H_momentum(apply_T_momentum(psi, constants), constants).values
    th = apply_T_momentum(apply_H_momentum(psi, constants), constants).values
    defect = (ht - th - 1j * constants.hbar * psi.values)[trim:-trim]
    scale = np.linalg.norm(psi.values[trim:-trim])
    if scale == 0.0:
        raise PreconditionError("zero function")
    return float(np.linalg.norm(defect) / scale)


@dataclass(frozen=True)
class PlaneWaveAction:
    """``T exp(ikx) = ratio * exp(ikx)``, split into the travel time ``x/v`` and the rest.

    ``eigenvalue`` is the real part ``x / v``; ``remainder`` is the
    x-independent imaginary term ``i mu / (2 hbar k^2)`` that the symbolic
    antiderivative of ``x exp(ikx)`` leaves behind.
    """

    ratio: complex
    eigenvalue: float
    remainder: complex


def apply_T_coordinate_planewave(k: float, x: float, constants: PhysicalConstants = NATURAL) -> PlaneWaveAction:
    """Act with ``(mu/2) [p^-1 x + x p^-1]``, ``p^-1 = (i/hbar) int dx``, on ``exp(ikx)``.

    The antiderivatives are taken mode by mode with zero integration
    constant: ``int e^{ikx} = e^{ikx}/(ik)`` and
    ``int x e^{ikx} = x e^{ikx}/(ik) + e^{ikx}/k^2``.
    """
    if k == 0.0:
        raise PreconditionError("zero velocity")
    hbar, mu = constants.hbar, constants.mass
    pinv_exp = (1j / hbar) / (1j * k)                      # p^-1 e^{ikx}, per e^{ikx}
    x_pinv = x * pinv_exp                                  # x p^-1 e^{ikx}
    pinv_x = (1j / hbar) * (x / (1j * k) + 1.0 / k**2)      # p^-1 (x e^{ikx})
    ratio = 0.5 * mu * (pinv_x + x_pinv)
    eigenvalue = ratio.real
    return PlaneWaveAction(complex(ratio), float(eigenvalue), complex(ratio - eigenvalue))


def free_travel_time(k: float, x: float, constants: PhysicalConstants = NATURAL) -> float:
    if k == 0.0:
        raise PreconditionError("zero velocity")
    return x * constants.mass / (constants.hbar * k)
