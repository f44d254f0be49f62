"""Uniform grids, composite Simpson quadrature, finite differences and
direct Fourier-type synthesis sums.

Everything here works on plain numpy arrays underneath; ``Grid1D`` and
``Series`` only carry the axis bookkeeping.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import NumericalGuardError, PreconditionError

EDGE_DECAY = 1e-8


@dataclass(frozen=True)
class Grid1D:
    """Uniform axis ``start + i*step`` for ``i in range(count)``."""

    start: float
    step: float
    count: int

    def __post_init__(self):
        if not (self.step > 0.0) or not np.isfinite(self.step):
            raise PreconditionError(f"grid step must be > 0, got {self.step}")
        if int(self.count) != self.count or self.count < 2:
            raise PreconditionError(f"grid count must be an integer >= 2, got {self.count}")
        if not np.isfinite(self.start):
            raise PreconditionError("grid start must be finite")

    @classmethod
    def between(cls, start: float, stop: float, count: int) -> "Grid1D":
        if count < 2:
            raise PreconditionError(f"grid count must be >= 2, got {count}")
        return cls(float(start), (float(stop) - float(start)) / (count - 1), int(count))

    @property
    def stop(self) -> float:
        return self.start + (self.count - 1) * self.step

    @property
    def points(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)

    def refined(self, factor: int = 2) -> "Grid1D":
        """Same span, step divided by ``factor``."""
        return Grid1D(self.start, self.step / factor, (self.count - 1) * factor + 1)


@dataclass(frozen=True)
class Series:
    """Complex (or real) samples on a ``Grid1D``."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != (self.grid.count,):
            raise PreconditionError(
                f"series length {values.shape} does not match grid count {self.grid.count}"
            )
        object.__setattr__(self, "values", values)


@lru_cache(maxsize=64)
def _unit_simpson_weights(count: int) -> np.ndarray:
    if count == 2:
        w = np.array([0.5, 0.5])
    elif count % 2 == 1:
        w = np.ones(count)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w /= 3.0
    else:
        # odd number of intervals: Simpson on the first count-1 points, the
        # last interval from the parabola through the final three samples
        w = np.zeros(count)
        w[:-1] = _unit_simpson_weights(count - 1)
        w[-3] += -1.0 / 12.0
        w[-2] += 8.0 / 12.0
        w[-1] += 5.0 / 12.0
    w.setflags(write=False)
    return w


def simpson_weights(grid: Grid1D) -> np.ndarray:
    """Quadrature weights such that ``weights @ f`` integrates ``f`` over the grid."""
    return grid.step * _unit_simpson_weights(grid.count)


def integrate(series: Series) -> complex:
    """Composite Simpson integral of ``series`` over its grid span."""
    return simpson_weights(series.grid) @ series.values


def integrate_array(values, grid: Grid1D, axis: int = -1):
    """Simpson integral of an array along ``axis`` sampled on ``grid``."""
    values = np.asarray(values)
    return np.tensordot(values, simpson_weights(grid), axes=([axis], [0]))


def derivative(series: Series) -> Series:
    """Second-order central differences, one-sided second order at the ends."""
    if series.grid.count < 3:
        raise PreconditionError("grid too small for derivative")
    return Series(series.grid, derivative_array(series.values, series.grid.step))


def derivative_array(values, step: float, axis: int = -1) -> np.ndarray:
    values = np.asarray(values)
    if values.shape[axis] < 3:
        raise PreconditionError("grid too small for derivative")
    return np.gradient(values, step, axis=axis, edge_order=2)


def synthesis_sum(amplitudes: Series, phase: Callable, target) -> complex:
    """Quadrature of ``amplitude(s) * phase(s, target)`` over the spectral grid."""
    s = amplitudes.grid.points
    return simpson_weights(amplitudes.grid) @ (amplitudes.values * phase(s, target))


def synthesize(amplitudes: Series, phase: Callable, targets) -> np.ndarray:
    """Vectorised ``synthesis_sum`` over many target points.

    ``phase(s[:, None], targets[None, :])`` must broadcast to a
    (spectral, target) matrix.
    """
    s = amplitudes.grid.points
    targets = np.asarray(targets, dtype=float)
    kernel = phase(s[:, None], targets[None, :])
    coeff = simpson_weights(amplitudes.grid) * amplitudes.values
    return coeff @ kernel


def check_edge_decay(values, rel: float = EDGE_DECAY, what: str = "integrand") -> None:
    """Raise ``NumericalGuardError`` unless both ends are below ``rel`` times the peak."""
    mag = np.abs(np.asarray(values))
    peak = mag.max() if mag.size else 0.0
    if peak == 0.0:
        return
    edge = max(mag[0], mag[-1])
    if edge >= rel * peak:
        raise NumericalGuardError(
            f"{what}: edge magnitude {edge:.3e} exceeds {rel:g} x peak {peak:.3e}"
        )
