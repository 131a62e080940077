"""Radial, non-negative, compactly supported interaction potentials."""
import logging
import math
import os
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import integrate

from src.errors import InvalidArgumentError, NumericError

logger = logging.getLogger(__name__)


class Potential(ABC):
    """Common interface of every potential kind."""

    kind = 'abstract'

    @property
    @abstractmethod
    def support_radius(self) -> float:
        """Radius R beyond which V vanishes."""

    @abstractmethod
    def values(self, r: np.ndarray) -> np.ndarray:
        """V(r) on an array of radii."""

    @abstractmethod
    def fourier(self, p_abs: float) -> float:
        """Radial Fourier transform V̂(|p|)."""

    @abstractmethod
    def describe(self) -> Dict:
        """Plain-data description for reports."""

    def value_at(self, r: float) -> float:
        return float(self.values(np.asarray([r], dtype=float))[0])

    def breakpoints(self) -> Tuple[float, ...]:
        """Radii in (0, R] where V may fail to be smooth."""
        return (self.support_radius,)

    def max_value(self) -> float:
        grid = np.linspace(0.0, self.support_radius, 257)
        return float(np.max(self.values(grid)))

    def exact_scattering_length(self) -> Optional[float]:
        """Closed-form scattering length when one exists."""
        return None

    def continuum_second_born(self) -> Optional[float]:
        """Closed-form infinite-volume second Born term when one exists."""
        return None


@dataclass(frozen=True)
class SquareWell(Potential):
    """V(r) = depth for r ≤ radius, 0 beyond."""

    depth: float
    radius: float

    kind = 'square_well'

    def __post_init__(self):
        if not math.isfinite(self.depth) or self.depth < 0:
            raise InvalidArgumentError(f"square well depth must be finite and >= 0, got {self.depth}")
        if not math.isfinite(self.radius) or self.radius <= 0:
            raise InvalidArgumentError(f"square well radius must be > 0, got {self.radius}")

    @property
    def support_radius(self) -> float:
        return self.radius

    def values(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.radius, self.depth, 0.0)

    def fourier(self, p_abs: float) -> float:
        x = p_abs * self.radius
        if x < 1e-3:
            # series of sin x − x cos x, divided by x³
            return 4.0 * math.pi * self.depth * self.radius ** 3 * (1.0 / 3.0 - x * x / 30.0 + x ** 4 / 840.0)
        return 4.0 * math.pi * self.depth * (math.sin(x) - x * math.cos(x)) / p_abs ** 3

    def exact_scattering_length(self) -> float:
        if self.depth == 0:
            return 0.0
        kappa = math.sqrt(self.depth / 2.0)
        return self.radius - math.tanh(kappa * self.radius) / kappa

    def continuum_second_born(self) -> float:
        return -self.depth ** 2 * self.radius ** 5 / 30.0

    def describe(self) -> Dict:
        return {'kind': self.kind, 'depth': self.depth, 'radius': self.radius}


@dataclass(frozen=True)
class ScaledPotential(Potential):
    """λ·V for an inner potential V."""

    scale: float
    inner: Potential

    kind = 'scaled'

    def __post_init__(self):
        if not math.isfinite(self.scale) or self.scale < 0:
            raise InvalidArgumentError(f"potential scale must be finite and >= 0, got {self.scale}")

    @property
    def support_radius(self) -> float:
        return self.inner.support_radius

    def values(self, r: np.ndarray) -> np.ndarray:
        return self.scale * self.inner.values(r)

    def fourier(self, p_abs: float) -> float:
        return self.scale * self.inner.fourier(p_abs)

    def breakpoints(self) -> Tuple[float, ...]:
        return self.inner.breakpoints()

    def exact_scattering_length(self) -> Optional[float]:
        if isinstance(self.inner, SquareWell):
            return SquareWell(self.scale * self.inner.depth, self.inner.radius).exact_scattering_length()
        return None

    def continuum_second_born(self) -> Optional[float]:
        inner = self.inner.continuum_second_born()
        return None if inner is None else self.scale ** 2 * inner

    def describe(self) -> Dict:
        return {'kind': self.kind, 'scale': self.scale, 'inner': self.inner.describe()}


@dataclass(frozen=True)
class TabulatedPotential(Potential):
    """Linear interpolation of V on a radial grid starting at r = 0; zero beyond the support radius."""

    radii: Tuple[float, ...]
    potential_values: Tuple[float, ...]
    support: float = 0.0

    kind = 'tabulated'

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        values = np.asarray(self.potential_values, dtype=float)
        if radii.ndim != 1 or len(radii) < 2 or len(radii) != len(values):
            raise InvalidArgumentError("tabulated potential needs two equally long columns with >= 2 rows")
        if radii[0] != 0.0 or np.any(np.diff(radii) <= 0):
            raise InvalidArgumentError("tabulated radii must start at 0 and increase strictly")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise InvalidArgumentError("tabulated potential values must be finite and >= 0")
        support = self.support if self.support > 0 else float(radii[-1])
        if np.any(values[radii > support] != 0):
            raise InvalidArgumentError(f"tabulated potential is nonzero beyond support radius {support}")
        object.__setattr__(self, 'radii', tuple(float(x) for x in radii))
        object.__setattr__(self, 'potential_values', tuple(float(x) for x in values))
        object.__setattr__(self, 'support', support)

    @property
    def support_radius(self) -> float:
        return self.support

    def values(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        v = np.interp(r, self.radii, self.potential_values, right=0.0)
        return np.where(r <= self.support, v, 0.0)

    def breakpoints(self) -> Tuple[float, ...]:
        inside = [x for x in self.radii[1:] if x < self.support]
        return tuple(inside) + (self.support,)

    def max_value(self) -> float:
        return max(self.potential_values)

    def _r_squared_moment(self) -> float:
        # Simpson's rule is exact for r²·V with V linear on each cell
        r = np.asarray(self.radii)
        v = np.asarray(self.potential_values)
        mid_r = 0.5 * (r[1:] + r[:-1])
        mid_v = 0.5 * (v[1:] + v[:-1])
        h = np.diff(r)
        cells = h / 6.0 * (r[:-1] ** 2 * v[:-1] + 4.0 * mid_r ** 2 * mid_v + r[1:] ** 2 * v[1:])
        return float(np.sum(cells[r[1:] <= self.support]))

    def fourier(self, p_abs: float) -> float:
        if p_abs == 0:
            return 4.0 * math.pi * self._r_squared_moment()
        integral, abserr = integrate.quad(lambda r: r * self.value_at(r), 0.0, self.support,
                                          weight='sin', wvar=p_abs, limit=400)
        if not math.isfinite(integral):
            raise NumericError(f"quadrature of tabulated V̂({p_abs}) failed", residual=abserr)
        return 4.0 * math.pi * integral / p_abs

    def describe(self) -> Dict:
        return {'kind': self.kind, 'grid_points': len(self.radii), 'support_radius': self.support}


def load_grid_file(path: str, support_radius: float = 0.0) -> TabulatedPotential:
    """
    Load a two-column text file (r, V) into a tabulated potential.

    Args:
        path: Whitespace separated columns, '#' starts a comment
        support_radius: Optional support radius; defaults to the last grid point

    Returns:
        TabulatedPotential
    """
    if not os.path.exists(path):
        raise InvalidArgumentError(f"potential grid file does not exist: {path}")
    try:
        data = np.loadtxt(path, comments='#', ndmin=2)
    except ValueError as e:
        raise InvalidArgumentError(f"potential grid file {path} is not two-column numeric text: {e}") from e
    if data.shape[1] != 2:
        raise InvalidArgumentError(f"potential grid file {path} has {data.shape[1]} columns, expected 2")
    logger.info(f"Loaded {data.shape[0]} grid points from {path}")
    return TabulatedPotential(tuple(data[:, 0]), tuple(data[:, 1]), support_radius)
