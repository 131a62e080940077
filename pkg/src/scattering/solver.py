"""Zero-energy radial scattering equation and the scattering length.

With u(r) = r·f(r) the equation −Δf + ½Vf = 0 becomes u'' = ½V(r)u. The
solver integrates (u, u', I) from u(0) = 0, u'(0) = 1 across [0, R], where
I' = r·V·u. Outside the support u is linear, so after normalizing u'(R) = 1:

    a_integral   = ½·I(R)          (no cancellation)
    a_asymptotic = R − u(R)        (from f(r) = 1 − a/r for r ≥ R)

Strong potentials make u grow like exp(√(V/2)·r), so the interval is split
into chunks and the state is rescaled after each one.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from src.errors import InvalidArgumentError, NumericError
from src.scattering.potentials import Potential

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
DEFAULT_GRID_POINTS = 401
_MIN_CHUNKS = 8
_GROWTH_PER_CHUNK = 4.0


@dataclass(frozen=True)
class _Segment:
    start: float
    end: float
    dense: Callable
    log_scale: float


class RadialProfile:
    """Normalized u(r) = r·f(r), u'(R) = 1, evaluated from the stored dense output."""

    def __init__(self, segments: List[_Segment], support_radius: float, u_at_support: float,
                 log_normalization: float, slope: float):
        self._segments = segments
        self._edges = np.array([s.start for s in segments] + [segments[-1].end])
        self._support_radius = support_radius
        self._u_at_support = u_at_support
        self._log_normalization = log_normalization
        self._slope = slope

    def __call__(self, r):
        scalar = np.ndim(r) == 0
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        outside = r >= self._support_radius
        out[outside] = self._u_at_support + (r[outside] - self._support_radius)
        inside = np.flatnonzero(~outside)
        if inside.size:
            which = np.clip(np.searchsorted(self._edges, r[inside], side='right') - 1,
                            0, len(self._segments) - 1)
            for k in np.unique(which):
                segment = self._segments[k]
                picked = inside[which == k]
                factor = math.exp(segment.log_scale - self._log_normalization) / self._slope
                out[picked] = segment.dense(r[picked])[0] * factor
        return float(out[0]) if scalar else out


@dataclass(frozen=True, eq=False)
class ScatteringSolution:
    potential: Potential
    grid: np.ndarray
    u: np.ndarray
    f: np.ndarray
    a_integral: float
    a_asymptotic: float
    residual: float
    tolerance: float
    profile: RadialProfile = field(repr=False)

    @property
    def scattering_length(self) -> float:
        return self.a_integral

    def to_rows(self) -> List[Tuple[float, float, float]]:
        return [(float(r), float(u), float(f)) for r, u, f in zip(self.grid, self.u, self.f)]


def _chunk_edges(potential: Potential) -> np.ndarray:
    R = potential.support_radius
    kappa = math.sqrt(max(potential.max_value(), 0.0) / 2.0)
    n_chunks = max(_MIN_CHUNKS, math.ceil(kappa * R / _GROWTH_PER_CHUNK))
    edges = np.union1d(np.linspace(0.0, R, n_chunks + 1), [b for b in potential.breakpoints() if 0 < b <= R])
    return edges[edges <= R]


def _integrate(potential: Potential, edges: np.ndarray, rtol: float):
    def rhs(r, y):
        v = potential.value_at(r)
        return [y[1], 0.5 * v * y[0], r * v * y[0]]

    y = np.array([0.0, 1.0, 0.0])
    log_scale = 0.0
    segments: List[_Segment] = []
    for start, end in zip(edges[:-1], edges[1:]):
        sol = solve_ivp(rhs, (start, end), y, method='DOP853', rtol=rtol, atol=rtol * 1e-2,
                        dense_output=True)
        if not sol.success:
            raise NumericError(f"radial integration failed on [{start}, {end}]: {sol.message}")
        segments.append(_Segment(float(start), float(end), sol.sol, log_scale))
        y = sol.y[:, -1]
        if not np.all(np.isfinite(y)):
            raise NumericError(f"radial integration produced non-finite state at r={end}")
        if end < edges[-1]:
            scale = max(abs(y[0]), abs(y[1]))
            y = y / scale
            log_scale += math.log(scale)
    return segments, y, log_scale


def _build_solution(potential, segments, y_end, log_scale, grid, tolerance, residual):
    R = potential.support_radius
    slope = y_end[1]
    u_support = y_end[0] / slope
    a_integral = 0.5 * y_end[2] / slope
    profile = RadialProfile(segments, R, u_support, log_scale, slope)
    u = profile(grid)
    with np.errstate(divide='ignore', invalid='ignore'):
        f = np.where(grid > 0, u / grid, math.exp(-log_scale) / slope)
    outer = grid[grid > R]
    if outer.size:
        inv = 1.0 / outer
        a_asymptotic = float(np.sum((1.0 - u[grid > R] * inv) * inv) / np.sum(inv * inv))
    else:
        a_asymptotic = R - u_support
    return ScatteringSolution(potential=potential, grid=grid, u=u, f=f, a_integral=float(a_integral),
                              a_asymptotic=a_asymptotic, residual=residual, tolerance=tolerance,
                              profile=profile)


def solve_zero_energy(potential: Potential, r_max: float, tolerance: float = DEFAULT_TOLERANCE,
                      grid_points: int = DEFAULT_GRID_POINTS) -> ScatteringSolution:
    """
    Solve the zero-energy scattering equation on [0, r_max].

    Args:
        potential: Non-negative compactly supported potential
        r_max: Outer radius, must exceed the support radius
        tolerance: Required bound on the estimated error of u
        grid_points: Number of uniform grid points on [0, r_max]

    Returns:
        ScatteringSolution with the profile, both scattering-length estimates and the residual
    """
    R = potential.support_radius
    if not math.isfinite(r_max) or r_max <= R:
        raise InvalidArgumentError(f"r_max must exceed the support radius {R}, got {r_max}")
    if not tolerance > 0:
        raise InvalidArgumentError(f"tolerance must be > 0, got {tolerance}")
    if grid_points < 2:
        raise InvalidArgumentError(f"grid_points must be >= 2, got {grid_points}")

    edges = _chunk_edges(potential)
    grid = np.union1d(np.linspace(0.0, r_max, grid_points), [R])
    rtol = max(tolerance * 1e-3, 1e-13)
    fine_rtol = max(rtol / 10.0, 3e-14)

    coarse = _build_solution(potential, *_integrate(potential, edges, rtol), grid, tolerance, 0.0)
    segments, y_end, log_scale = _integrate(potential, edges, fine_rtol)
    fine = _build_solution(potential, segments, y_end, log_scale, grid, tolerance, 0.0)
    residual = float(max(np.max(np.abs(coarse.u - fine.u)), abs(coarse.a_integral - fine.a_integral)))
    if not residual <= tolerance:
        raise NumericError(f"scattering solver residual {residual:.3e} exceeds tolerance {tolerance:.3e}",
                           residual=residual)

    solution = _build_solution(potential, segments, y_end, log_scale, grid, tolerance, residual)
    logger.info(f"Scattering length a={solution.a_integral:.12g} "
                f"(asymptotic {solution.a_asymptotic:.12g}, residual {residual:.2e})")
    return solution
